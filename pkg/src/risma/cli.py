"""Command line front end: run sweeps, aggregate results, dump traces."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .channel import Scenario
from .harness import (ExperimentConfig, read_rows, run, summarize, trace_run,
                      write_aggregates, write_gains, write_rows, write_trace)


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    sc_data = data.pop("scenario", {})
    for key in ("bs_position", "ris_position", "user_circle_center"):
        if key in sc_data:
            sc_data[key] = tuple(sc_data[key])
    scenario = Scenario(**sc_data)
    for key in ("schemes", "snr_db", "n_elements"):
        if key in data:
            data[key] = tuple(data[key])
    return ExperimentConfig(scenario=scenario, **data)


def _csv_list(text: str, cast):
    return tuple(cast(tok) for tok in text.split(",") if tok.strip())


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out"] = args.out
    if args.schemes is not None:
        updates["schemes"] = _csv_list(args.schemes, str)
    if args.snr is not None:
        updates["snr_db"] = _csv_list(args.snr, float)
    if args.elements is not None:
        updates["n_elements"] = _csv_list(args.elements, int)
    if args.realizations is not None:
        updates["realizations"] = args.realizations
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if args.tol is not None:
        updates["tol"] = args.tol
    if args.restarts is not None:
        updates["restarts"] = args.restarts
    if getattr(args, "max_outer", None) is not None:
        updates["max_outer"] = args.max_outer
    return replace(config, **updates) if updates else config


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML experiment config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--schemes", help="comma-separated scheme names")
    p.add_argument("--snr", help="comma-separated transmit SNR grid in dB")
    p.add_argument("--elements", help="comma-separated surface element counts")
    p.add_argument("--realizations", type=int, help="Monte Carlo draws per cell")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.add_argument("--tol", type=float, help="outer convergence tolerance")
    p.add_argument("--restarts", type=int, help="beamformer restarts on the first stage")
    p.add_argument("--max-outer", dest="max_outer", type=int, help="outer iteration cap")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="risma",
                                     description="surface-aided rate-splitting sum-rate experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a Monte Carlo sweep and write the results CSV")
    _add_run_flags(p_run)

    p_sum = sub.add_parser("summarize", help="aggregate a results CSV")
    p_sum.add_argument("--in", dest="inputs", required=True, nargs="+", help="results CSV file(s)")
    p_sum.add_argument("--out", required=True, help="aggregate CSV path")
    p_sum.add_argument("--pairs", help="scheme gain pairs a:b, comma-separated")
    p_sum.add_argument("--gains-out", dest="gains_out", help="pairwise gain CSV path")
    p_sum.add_argument("--boot", type=int, default=1000, help="bootstrap resamples")
    p_sum.add_argument("--seed", type=int, default=0, help="bootstrap seed")

    p_tr = sub.add_parser("trace", help="per-iteration sum-rate trace of one realization")
    _add_run_flags(p_tr)
    p_tr.add_argument("--realization", type=int, default=0, help="realization index")

    args = parser.parse_args(argv)

    if args.command == "run":
        config = _apply_overrides(load_config(args.config), args)
        rows = run(config)
        write_rows(rows, config.out)
        n_fail = sum(1 for r in rows if not r.converged)
        print(f"wrote {len(rows)} rows to {config.out} ({n_fail} not converged)")
        return 0

    if args.command == "summarize":
        rows = []
        for path in args.inputs:
            rows.extend(read_rows(path))
        pairs = None
        if args.pairs:
            pairs = [tuple(tok.split(":")) for tok in args.pairs.split(",") if tok.strip()]
            for p in pairs:
                if len(p) != 2:
                    raise SystemExit(f"bad pair spec {p!r}, want a:b")
        aggregates, gains = summarize(rows, pairs, n_boot=args.boot, seed=args.seed)
        write_aggregates(aggregates, args.out)
        print(f"wrote {len(aggregates)} aggregate rows to {args.out}")
        if pairs:
            out = args.gains_out or (args.out.rsplit(".", 1)[0] + "_gains.csv")
            write_gains(gains, out)
            print(f"wrote {len(gains)} gain rows to {out}")
        return 0

    if args.command == "trace":
        config = _apply_overrides(load_config(args.config), args)
        if len(config.snr_db) != 1 or len(config.n_elements) != 1:
            raise SystemExit("trace wants exactly one --snr value and one --elements value")
        trace = trace_run(config, config.snr_db[0], config.n_elements[0], args.realization)
        write_trace(trace, config.out)
        print(f"wrote {len(trace)} trace rows to {config.out}")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
