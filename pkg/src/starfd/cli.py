"""Command line entry point: run an experiment sweep, write one CSV.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime
trouble: a cell raised, or a solver stopped at its iteration cap
without meeting the tolerance.  Partial results are still written.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, SystemConfig, load_config, validate_config
from .experiments import (run_convergence, sweep_elements, sweep_location,
                          sweep_power, write_csv)
from .protocols import get_scheme, scheme_names

__all__ = ["build_parser", "main", "entry"]

_EXPERIMENTS = ("convergence", "elements", "location", "power_bs", "power_ul")
_BS_DBM_DEFAULT = (25.0, 30.0, 35.0, 40.0)
_UL_DBM_DEFAULT = (1.0, 6.0, 11.0, 16.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starfd",
        description="Weighted sum-rate optimization for a surface-assisted "
                    "full-duplex system.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write a CSV file")
    run.add_argument("experiment", choices=_EXPERIMENTS)
    run.add_argument("--config", metavar="FILE",
                     help="key = value overrides for the default setup")
    run.add_argument("--out", required=True, metavar="CSV",
                     help="output path")
    run.add_argument("--seeds", type=int, default=5, metavar="N",
                     help="number of seeds, consecutive from the first "
                          "(default 5)")
    run.add_argument("--seed", type=int, default=None,
                     help="first seed (default: the config seed)")
    run.add_argument("--schemes", metavar="LIST",
                     help="comma-separated subset of: " + ", ".join(scheme_names()))
    run.add_argument("--m-list", metavar="LIST",
                     help="element counts for the elements sweep")
    run.add_argument("--x-list", metavar="LIST",
                     help="surface x positions for the location sweep")
    run.add_argument("--dbm-list", metavar="LIST",
                     help="power budgets in dBm for the power sweeps")
    run.add_argument("--grid-step", type=float, default=0.05,
                     help="time-fraction grid step for TS (default 0.05)")
    return parser


def _parse_list(text: str, convert, option: str):
    try:
        values = tuple(convert(tok.strip()) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"{option}: could not parse {text!r}") from None
    if not values:
        raise ConfigError(f"{option}: empty list")
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else validate_config(SystemConfig())
        if args.seeds < 1:
            raise ConfigError(f"--seeds: must be >= 1, got {args.seeds}")
        first = cfg.seed if args.seed is None else args.seed
        if first < 0:
            raise ConfigError(f"--seed: must be nonnegative, got {first}")
        seeds = tuple(first + i for i in range(args.seeds))
        schemes = None
        if args.schemes:
            schemes = _parse_list(args.schemes, str, "--schemes")
            for name in schemes:
                get_scheme(name)
        m_list = _parse_list(args.m_list, int, "--m-list") if args.m_list else None
        x_list = _parse_list(args.x_list, float, "--x-list") if args.x_list else None
        dbm_list = _parse_list(args.dbm_list, float, "--dbm-list") if args.dbm_list else None
        if not (0.0 < args.grid_step <= 1.0):
            raise ConfigError(f"--grid-step: must lie in (0, 1], got {args.grid_step}")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    kwargs = {"grid_step": args.grid_step}
    if schemes:
        kwargs["schemes"] = schemes
    try:
        if args.experiment == "convergence":
            columns, rows = run_convergence(cfg, seeds, **kwargs)
        elif args.experiment == "elements":
            if m_list:
                kwargs["m_list"] = m_list
            columns, rows = sweep_elements(cfg, seeds, **kwargs)
        elif args.experiment == "location":
            if x_list:
                kwargs["x_list"] = x_list
            columns, rows = sweep_location(cfg, seeds, **kwargs)
        else:
            axis = "bs" if args.experiment == "power_bs" else "ul"
            default = _BS_DBM_DEFAULT if axis == "bs" else _UL_DBM_DEFAULT
            columns, rows = sweep_power(cfg, seeds, dbm_list or default,
                                        axis=axis, **kwargs)
        write_csv(args.out, columns, rows)
    except Exception as exc:  # a whole-experiment failure, not a cell error
        print(f"error: {exc}", file=sys.stderr)
        return 3

    flagged = sum(1 for row in rows if row[-1] != "ok")
    if flagged:
        print(f"{flagged} of {len(rows)} rows are not ok; see the status "
              f"column in {args.out}", file=sys.stderr)
        return 3
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def entry() -> None:
    raise SystemExit(main())
