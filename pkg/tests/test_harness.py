import dataclasses
import math
import subprocess
import sys

import numpy as np
import pytest

from scldpc import cli
from scldpc.construction import CodeSpec, read_realization
from scldpc.harness import (
    CSV_COLUMNS,
    BudgetRow,
    ConfigError,
    DecoderRow,
    RunConfig,
    parse_config,
    read_results,
    reproduce_table1,
    budget_deviation,
    results_to_csv,
    run_point,
    run_sweep,
    table_matches_reference,
    trial_rngs,
    wilson_interval,
)
from scldpc.windowed import EtSet, Strategy, i1_per_iteration

SMALL = CodeSpec(lifting=32, coupling_len=12)
ROWS = (DecoderRow("fbd", Strategy.FULL_BLOCK, None, EtSet.ALL),
        DecoderRow("vn10", Strategy.VN_CENTERED, 10, EtSet.TARGET))

CONFIG = """
[code]
lifting = 32
coupling_len = 12

[channel]
snr_db = 6.0, 7.0
branches = 4

[budget]
imax_fbd = 50

[decoders]
fbd = FULL_BLOCK
vn10 = VN_CENTERED 10 TARGET
cn10 = CN_CENTERED 10 COMPLETE

[run]
trials = 5
seed = 3
"""


def cfg(**kw):
    base = dict(code=SMALL, snr_db=(6.5,), decoders=ROWS, trials=6, seed=1, imax_fbd=50)
    base.update(kw)
    return RunConfig(**base)


def test_parse_config():
    c = parse_config(CONFIG)
    assert c.code == CodeSpec(lifting=32, coupling_len=12)
    assert c.snr_db == (6.0, 7.0)
    assert c.imax_fbd == 50
    assert [d.label for d in c.decoders] == ["fbd", "vn10", "cn10"]
    assert c.decoders[0] == DecoderRow("fbd", Strategy.FULL_BLOCK, None, EtSet.ALL)
    assert c.decoders[2] == DecoderRow("cn10", Strategy.CN_CENTERED, 10, EtSet.COMPLETE)
    assert (c.trials, c.seed, c.workers, c.out) == (5, 3, 1, None)


@pytest.mark.parametrize("text", [
    CONFIG + "\n[extra]\nx = 1\n",
    CONFIG.replace("branches = 4", "branches = 4\ncolour = red"),
    CONFIG.replace("vn10 = VN_CENTERED 10 TARGET", "vn10 = VN_CENTERED TARGET"),
    CONFIG.replace("vn10 = VN_CENTERED 10 TARGET", "vn10 = DIAGONAL 10"),
    CONFIG.replace("trials = 5", "trials = 0"),
    CONFIG.replace("snr_db = 6.0, 7.0", "snr_db = "),
    CONFIG.split("[decoders]")[0],
    CONFIG.replace("branches = 4", "branches = 4\nfading = maybe"),
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_default_snr_grid():
    c = parse_config(CONFIG.replace("snr_db = 6.0, 7.0\n", ""))
    assert c.snr_db[0] == 6.0 and c.snr_db[-1] == 16.0 and len(c.snr_db) == 21


def test_trial_streams_are_keyed():
    a = trial_rngs(1, 6.5, 3)[1].standard_normal(4)
    b = trial_rngs(1, 6.5, 3)[1].standard_normal(4)
    np.testing.assert_array_equal(a, b)
    for other in (trial_rngs(2, 6.5, 3), trial_rngs(1, 7.0, 3), trial_rngs(1, 6.5, 4)):
        assert not np.array_equal(a, other[1].standard_normal(4))


@pytest.mark.parametrize("k, n", [(0, 10), (3, 10), (10, 10), (17, 2000)])
def test_wilson_interval(k, n):
    z = 1.959963984540054
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo, hi = wilson_interval(k, n)
    assert lo == pytest.approx(max(0.0, centre - half), abs=1e-12)
    assert hi == pytest.approx(min(1.0, centre + half), abs=1e-12)


def test_run_point_noiseless():
    c = cfg(trials=1)
    r = run_point(c, ROWS[1], 200.0)
    assert r.bler == 0.0
    assert r.rel_anmu == i1_per_iteration(SMALL, Strategy.VN_CENTERED, 10) / r.nmu_max


def test_run_point_far_below_threshold():
    r = run_point(cfg(trials=100), ROWS[0], -10.0)
    assert r.bler == 1.0 and r.block_errors == 100
    assert r.rel_anmu == 1.0


def test_run_point_invariants():
    a = run_point(cfg(), ROWS[1], 6.0)
    b = run_point(cfg(), ROWS[1], 6.0)
    assert a == b
    assert a.bler == a.block_errors / a.trials
    assert 0 < a.rel_anmu <= 1
    assert a.anmu * a.trials == a.nmu_total
    assert a.bler_lo <= a.bler <= a.bler_hi


def test_sweep_rows_match_points_and_workers():
    c = cfg(snr_db=(6.0, 6.5, 7.0))
    rows = run_sweep(c)
    assert len(rows) == 6
    assert [(r.decoder, r.snr_db) for r in rows] == [(d.label, s) for d in ROWS for s in c.snr_db]
    assert rows[4] == run_point(c, ROWS[1], 6.5)
    assert results_to_csv(run_sweep(dataclasses.replace(c, workers=2))) == results_to_csv(rows)


def test_sweep_persistence(tmp_path):
    out = tmp_path / "res.csv"
    c = cfg(snr_db=(6.0, 7.0), out=str(out))
    rows = run_sweep(c)
    text = out.read_bytes()
    assert text.decode().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert read_results(out) == rows
    assert out.with_suffix(".jsonl").read_text().count("\n") == len(rows)
    run_sweep(c)
    assert out.read_bytes() == text


def test_sweep_errors(tmp_path):
    with pytest.raises(ConfigError):
        run_sweep(cfg(decoders=()))
    with pytest.raises(OSError):
        run_sweep(cfg(out=str(tmp_path / "missing" / "res.csv")))
    with pytest.raises(ConfigError):
        cfg(trials=0)


def test_frozen_code_flag():
    c = cfg(freeze_code=True, trials=4)
    assert run_point(c, ROWS[0], 6.5) == run_point(c, ROWS[0], 6.5)


def test_reproduce_table1():
    table = reproduce_table1()
    assert len(table) == 8
    got = {(r.strategy, r.window): (r.nmsg, r.imax, r.nmu_max) for r in table}
    assert got[(Strategy.VN_CENTERED, 12)] == (100, 21, 194460)
    assert got[(Strategy.CN_CENTERED, 12)] == (120, 18, 199440)
    assert got[(Strategy.FULL_BLOCK, None)] == (None, 200, 200000)
    assert table_matches_reference(table)


def test_budget_deviation():
    table = reproduce_table1()
    assert budget_deviation(table) == pytest.approx((200000 - 189900) / 200000)
    vn16 = [r for r in table if r.window == 16 or r.strategy is Strategy.FULL_BLOCK]
    assert budget_deviation(vn16) == pytest.approx(0.0064)
    exact = [table[0], BudgetRow("WD-VN", Strategy.VN_CENTERED, 99, 1, 1, 200000)]
    assert budget_deviation(exact) == 0.0


def test_cli_table(capsys):
    assert cli.main(["table"]) == 0
    out = capsys.readouterr().out
    assert "194460" in out and "189900" in out and "match" in out
    assert cli.main(["table", "--imax-fbd", "100"]) == 1


def test_cli_codegen(tmp_path):
    path = tmp_path / "code.txt"
    assert cli.main(["codegen", "--seed", "4", "--out", str(path), "--lifting", "32", "--coupling-len", "10"]) == 0
    real = read_realization(path)
    assert real.spec == CodeSpec(lifting=32, coupling_len=10)


def test_cli_simulate(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(CONFIG)
    out = tmp_path / "res.csv"
    assert cli.main(["simulate", "--config", str(ini), "--snr", "6.5", "--trials", "3", "--out", str(out)]) == 0
    rows = read_results(out)
    assert [r.decoder for r in rows] == ["fbd", "vn10", "cn10"]
    assert all(r.trials == 3 and r.snr_db == 6.5 and r.seed == 3 for r in rows)
    bad = tmp_path / "bad.ini"
    bad.write_text(CONFIG + "\n[run2]\n")
    assert cli.main(["simulate", "--config", str(bad)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "scldpc", "table"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "200000" in res.stdout
