"""Command line entry point: ``simulate``, ``table`` and ``codegen``."""

from __future__ import annotations

import argparse
import dataclasses
import sys


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _simulate(args) -> int:
    from .harness import ConfigError, load_config, results_to_csv, run_sweep

    try:
        cfg = load_config(args.config)
        overrides = {k: v for k, v in (("snr_db", args.snr), ("trials", args.trials), ("seed", args.seed),
                                       ("workers", args.workers), ("out", args.out)) if v is not None}
        cfg = dataclasses.replace(cfg, **overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = lambda snr: print(f"snr {snr:g} dB done", file=sys.stderr)  # noqa: E731
    rows = run_sweep(cfg, progress=report)
    if cfg.out is None:
        sys.stdout.write(results_to_csv(rows))
    else:
        print(f"wrote {len(rows)} rows to {cfg.out}", file=sys.stderr)
    return 0


def _table(args) -> int:
    from .harness import budget_deviation, format_table, reproduce_table1, table_matches_reference

    table = reproduce_table1(imax_fbd=args.imax_fbd)
    print(format_table(table))
    print(f"max N_max deviation: {100 * budget_deviation(table):.2f}%")
    ok = table_matches_reference(table)
    print("match" if ok else "MISMATCH")
    return 0 if ok else 1


def _codegen(args) -> int:
    import numpy as np

    from .construction import CodeSpec, sample_realization, write_realization

    spec = CodeSpec(b=args.b, c=args.c, memory=args.memory, period=args.period,
                    lifting=args.lifting, coupling_len=args.coupling_len)
    real = sample_realization(spec, np.random.default_rng(args.seed), args.max_tries)
    write_realization(real, args.out)
    print(f"wrote {spec} to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scldpc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte-Carlo BLER/ANMU sweep from an INI config")
    s.add_argument("--config", required=True)
    s.add_argument("--snr", type=_floats, help="comma separated SNR points in dB")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--out")
    s.set_defaults(func=_simulate)

    t = sub.add_parser("table", help="equal-complexity budget table for the J=100 reference code")
    t.add_argument("--imax-fbd", type=int, default=200)
    t.set_defaults(func=_table)

    g = sub.add_parser("codegen", help="sample one 4-cycle-free realization and dump its shifts")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--b", type=int, default=2)
    g.add_argument("--c", type=int, default=1)
    g.add_argument("--memory", type=int, default=4)
    g.add_argument("--period", type=int, default=3)
    g.add_argument("--lifting", type=int, default=256)
    g.add_argument("--coupling-len", type=int, default=100)
    g.add_argument("--max-tries", type=int, default=1000)
    g.set_defaults(func=_codegen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
