"""Monte-Carlo BLER / ANMU experiments under an equal maximal-complexity budget."""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelSpec, generate_allzero_llrs
from .construction import CodeSpec, sample_realization
from .kernel import DEFAULT_QUANT
from .windowed import (
    BudgetSpec,
    EtSet,
    Strategy,
    configure,
    decode_windowed,
    i1_per_iteration,
    nmsg_middle,
)

CSV_COLUMNS = ("decoder", "strategy", "window", "et_set", "snr_db", "trials", "block_errors",
               "bler", "bler_lo", "bler_hi", "anmu", "rel_anmu", "imax", "nmu_max", "seed")
DEFAULT_SNR_GRID = tuple(6.0 + 0.5 * i for i in range(21))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderRow:
    label: str
    strategy: Strategy
    window: int | None = None
    et_set: EtSet = EtSet.TARGET

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "et_set", EtSet(self.et_set))
        if self.strategy is not Strategy.FULL_BLOCK and self.window is None:
            raise ConfigError(f"decoder {self.label!r} needs a window size")

    @classmethod
    def parse(cls, label: str, text: str) -> DecoderRow:
        """``FULL_BLOCK [ET]`` or ``VN_CENTERED|CN_CENTERED <W> [ET]``."""
        parts = text.split()
        if not parts:
            raise ConfigError(f"empty decoder definition for {label!r}")
        try:
            strategy = Strategy(parts[0].upper())
            if strategy is Strategy.FULL_BLOCK:
                if len(parts) > 2:
                    raise ConfigError(f"too many fields for {label!r}: {text!r}")
                et = EtSet(parts[1].upper()) if len(parts) > 1 else EtSet.ALL
                return cls(label, strategy, None, et)
            if len(parts) not in (2, 3):
                raise ConfigError(f"expected '<strategy> <window> [et_set]' for {label!r}")
            et = EtSet(parts[2].upper()) if len(parts) == 3 else EtSet.TARGET
            return cls(label, strategy, int(parts[1]), et)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad decoder definition {label!r}: {text!r} ({exc})") from None

    def window_config(self, spec: CodeSpec, budget: BudgetSpec):
        return configure(budget, spec, self.strategy, self.window, self.et_set)


@dataclass(frozen=True)
class RunConfig:
    code: CodeSpec = CodeSpec()
    snr_db: tuple[float, ...] = DEFAULT_SNR_GRID
    fading: bool = True
    branches: int = 4
    imax_fbd: int = 200
    decoders: tuple[DecoderRow, ...] = ()
    trials: int = 1000
    seed: int = 0
    workers: int = 1
    out: str | None = None
    freeze_code: bool = False
    max_tries: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "decoders", tuple(self.decoders))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.snr_db:
            raise ConfigError("SNR list is empty")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        labels = [d.label for d in self.decoders]
        if len(set(labels)) != len(labels):
            raise ConfigError("decoder labels must be unique")

    @property
    def budget(self) -> BudgetSpec:
        return BudgetSpec.for_code(self.code, self.imax_fbd)


@dataclass
class ResultRow:
    decoder: str
    strategy: str
    window: int
    et_set: str
    snr_db: float
    trials: int
    block_errors: int
    bler: float
    bler_lo: float
    bler_hi: float
    anmu: float
    rel_anmu: float
    imax: int
    nmu_max: int
    seed: int
    nmu_total: int = field(default=0, repr=False, compare=False)


# -- configuration -------------------------------------------------------------

_SECTION_KEYS = {
    "code": {"b", "c", "memory", "period", "lifting", "coupling_len", "term_instants",
             "max_tries", "freeze"},
    "channel": {"snr_db", "fading", "branches"},
    "budget": {"imax_fbd"},
    "run": {"trials", "seed", "workers", "out"},
}


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for section in cp.sections():
        if section == "decoders":
            continue
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(cp[section]) - _SECTION_KEYS[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")

    def get(section, key, conv, default):
        if cp.has_option(section, key):
            try:
                return conv(cp.get(section, key))
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
        return default

    def boolean(s):
        try:
            return configparser.ConfigParser.BOOLEAN_STATES[s.strip().lower()]
        except KeyError:
            raise ValueError(f"not a boolean: {s!r}") from None

    code_kw = {k: get("code", k, int, None) for k in
               ("b", "c", "memory", "period", "lifting", "coupling_len", "term_instants")}
    code = CodeSpec(**{k: v for k, v in code_kw.items() if v is not None})
    snr = get("channel", "snr_db", lambda s: tuple(float(v) for v in s.replace(",", " ").split()),
              DEFAULT_SNR_GRID)
    if not cp.has_section("decoders") or not cp["decoders"]:
        raise ConfigError("no decoder rows configured")
    decoders = tuple(DecoderRow.parse(k, v) for k, v in cp["decoders"].items())
    return RunConfig(
        code=code,
        snr_db=snr,
        fading=get("channel", "fading", boolean, True),
        branches=get("channel", "branches", int, 4),
        imax_fbd=get("budget", "imax_fbd", int, 200),
        decoders=decoders,
        trials=get("run", "trials", int, 1000),
        seed=get("run", "seed", int, 0),
        workers=get("run", "workers", int, 1),
        out=get("run", "out", str, None),
        freeze_code=get("code", "freeze", boolean, False),
        max_tries=get("code", "max_tries", int, 1000),
    )


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# -- trials ----------------------------------------------------------------------

def _snr_key(snr_db: float) -> int:
    return int(round(snr_db * 1000)) % 2 ** 32


def trial_rngs(seed: int, snr_db: float, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (code, channel) streams for one trial.

    Streams depend only on the master seed, the SNR point and the trial index,
    so every decoder row at a given point sees the same code and channel draw.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(_snr_key(snr_db), trial))
    code_ss, chan_ss = ss.spawn(2)
    return np.random.Generator(np.random.Philox(code_ss)), np.random.Generator(np.random.Philox(chan_ss))


def frozen_realization(cfg: RunConfig):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(2 ** 32,))))
    return sample_realization(cfg.code, rng, cfg.max_tries)


def _run_trials(cfg: RunConfig, rows, snr_db: float, trials) -> np.ndarray:
    """Per-trial ``(failed, nmu)`` for every row, shape ``(len(trials), len(rows), 2)``."""
    budget = cfg.budget
    wcfgs = [r.window_config(cfg.code, budget) for r in rows]
    chan = ChannelSpec(snr_db, cfg.branches, cfg.fading)
    fixed = frozen_realization(cfg) if cfg.freeze_code else None
    out = np.zeros((len(trials), len(rows), 2), dtype=np.int64)
    for i, trial in enumerate(trials):
        code_rng, chan_rng = trial_rngs(cfg.seed, snr_db, trial)
        real = fixed if fixed is not None else sample_realization(cfg.code, code_rng, cfg.max_tries)
        llrs = generate_allzero_llrs(real.n, chan, chan_rng)
        for j, wcfg in enumerate(wcfgs):
            res = decode_windowed(llrs, real, wcfg, DEFAULT_QUANT)
            out[i, j] = (not res.success, res.nmu)
    return out


def _chunks(n: int, parts: int):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def simulate_point(cfg: RunConfig, rows, snr_db: float) -> np.ndarray:
    """All trials at one SNR point, optionally spread over worker processes."""
    if cfg.workers == 1:
        return _run_trials(cfg, rows, snr_db, range(cfg.trials))
    chunks = _chunks(cfg.trials, cfg.workers * 4)
    with ProcessPoolExecutor(cfg.workers) as pool:
        parts = list(pool.map(_run_trials, *zip(*[(cfg, rows, snr_db, c) for c in chunks])))
    return np.concatenate(parts, axis=0)


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint

    lo, hi = proportion_confint(errors, trials, alpha=0.05, method="wilson")
    return float(lo), float(hi)


def _aggregate(cfg: RunConfig, row: DecoderRow, snr_db: float, outcomes: np.ndarray) -> ResultRow:
    wcfg = row.window_config(cfg.code, cfg.budget)
    window = cfg.code.n_layers if row.strategy is Strategy.FULL_BLOCK else row.window
    nmu_max = wcfg.imax * i1_per_iteration(cfg.code, row.strategy, window)
    errors = int(outcomes[:, 0].sum())
    total = int(outcomes[:, 1].sum())
    n = len(outcomes)
    lo, hi = wilson_interval(errors, n)
    return ResultRow(
        decoder=row.label, strategy=row.strategy.value, window=window, et_set=row.et_set.value,
        snr_db=float(snr_db), trials=n, block_errors=errors, bler=errors / n,
        bler_lo=lo, bler_hi=hi, anmu=total / n, rel_anmu=total / n / nmu_max,
        imax=wcfg.imax, nmu_max=nmu_max, seed=cfg.seed, nmu_total=total)


def run_point(cfg: RunConfig, row: DecoderRow, snr_db: float) -> ResultRow:
    outcomes = simulate_point(cfg, [row], snr_db)
    return _aggregate(cfg, row, snr_db, outcomes[:, 0])


def run_sweep(cfg: RunConfig, progress=None) -> list[ResultRow]:
    """Every decoder row at every SNR point; rows ordered decoder-major.

    All decoder rows at one SNR point are evaluated on the same trials.  When
    ``cfg.out`` is set the CSV (and a ``.jsonl`` mirror) are written atomically.
    """
    if not cfg.decoders:
        raise ConfigError("no decoder rows configured")
    if cfg.out is not None:
        parent = Path(cfg.out).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise OSError(f"output directory {parent} is not writable")
    per_snr = {}
    for snr in cfg.snr_db:
        per_snr[snr] = simulate_point(cfg, cfg.decoders, snr)
        if progress is not None:
            progress(snr)
    results = [_aggregate(cfg, row, snr, per_snr[snr][:, j])
               for j, row in enumerate(cfg.decoders) for snr in cfg.snr_db]
    if cfg.out is not None:
        write_results(results, cfg.out)
    return results


# -- persistence -----------------------------------------------------------------

def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def results_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_results(rows, path) -> None:
    path = Path(path)
    _atomic_write(path, results_to_csv(rows))
    lines = [json.dumps({c: getattr(r, c) for c in CSV_COLUMNS}) for r in rows]
    _atomic_write(path.with_suffix(".jsonl"), "\n".join(lines) + "\n")


def read_results(path) -> list[ResultRow]:
    types = {f.name: f.type for f in dataclasses.fields(ResultRow)}
    conv = {"int": int, "float": float, "str": str}
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            kw = {k: conv[types[k]](v) for k, v in rec.items()}
            kw["nmu_total"] = round(kw["anmu"] * kw["trials"])
            rows.append(ResultRow(**kw))
    return rows


# -- equal-complexity table --------------------------------------------------------

@dataclass(frozen=True)
class BudgetRow:
    decoder: str
    strategy: Strategy
    window: int | None
    nmsg: int | None
    imax: int
    nmu_max: int


BUDGET_ROWS = (
    (Strategy.FULL_BLOCK, None),
    (Strategy.VN_CENTERED, 12), (Strategy.VN_CENTERED, 14),
    (Strategy.VN_CENTERED, 16), (Strategy.VN_CENTERED, 20),
    (Strategy.CN_CENTERED, 10), (Strategy.CN_CENTERED, 12), (Strategy.CN_CENTERED, 14),
)

# (N_msg, I_max, N_max) for the (5,10) ensemble with J = 100, imax_fbd = 200
REFERENCE_TABLE = {
    (Strategy.FULL_BLOCK, None): (None, 200, 200000),
    (Strategy.VN_CENTERED, 12): (100, 21, 194460),
    (Strategy.VN_CENTERED, 14): (120, 18, 195840),
    (Strategy.VN_CENTERED, 16): (140, 16, 198720),
    (Strategy.VN_CENTERED, 20): (180, 13, 198380),
    (Strategy.CN_CENTERED, 10): (100, 21, 197820),
    (Strategy.CN_CENTERED, 12): (120, 18, 199440),
    (Strategy.CN_CENTERED, 14): (140, 15, 189900),
}


def reproduce_table1(spec: CodeSpec | None = None, imax_fbd: int = 200, rows=BUDGET_ROWS) -> list[BudgetRow]:
    spec = spec or CodeSpec(b=2, c=1, memory=4, period=3, lifting=256, coupling_len=100)
    budget = BudgetSpec.for_code(spec, imax_fbd)
    table = []
    for strategy, W in rows:
        if strategy is Strategy.FULL_BLOCK:
            table.append(BudgetRow("FBD", strategy, None, None, imax_fbd, budget.nmu_max))
            continue
        wcfg = configure(budget, spec, strategy, W, EtSet.NONE)
        i1 = i1_per_iteration(spec, strategy, W)
        label = f"WD-{'VN' if strategy is Strategy.VN_CENTERED else 'CN'}"
        table.append(BudgetRow(label, strategy, W, nmsg_middle(spec, strategy, W), wcfg.imax, wcfg.imax * i1))
    return table


def budget_deviation(table, target: int | None = None) -> float:
    """Largest relative gap between a windowed row's N_max and the FBD budget."""
    if target is None:
        target = next(r.nmu_max for r in table if r.strategy is Strategy.FULL_BLOCK)
    devs = [abs(r.nmu_max - target) / target for r in table if r.strategy is not Strategy.FULL_BLOCK]
    return max(devs, default=0.0)


def table_matches_reference(table) -> bool:
    return all(REFERENCE_TABLE.get((r.strategy, r.window)) == (r.nmsg, r.imax, r.nmu_max) for r in table)


def format_table(table) -> str:
    lines = [f"{'decoder':<8}{'W':>5}{'N_msg':>8}{'I_max':>8}{'N_max':>10}"]
    for r in table:
        w = "-" if r.window is None else r.window
        nmsg = "-" if r.nmsg is None else r.nmsg
        lines.append(f"{r.decoder:<8}{w:>5}{nmsg:>8}{r.imax:>8}{r.nmu_max:>10}")
    return "\n".join(lines)
