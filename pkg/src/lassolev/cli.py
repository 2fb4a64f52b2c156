"""Command line entry point: ``lassolev {simulate,sweep,realdata,fit}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .experiments import (
    RunConfig,
    load_config,
    write_fit,
    write_realdata,
    write_simulation,
    write_sweep,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lassolev",
        description="Random-LASSO variable selection with leverage-score subdata regression.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, help_text in (
        ("simulate", "simulation study over replicated synthetic datasets"),
        ("sweep", "simulation over a grid of n1, n2 and p_s"),
        ("realdata", "bootstrap test MSPE on a train/test CSV pair"),
        ("fit", "fit the pipeline on one CSV and write model.json"),
    ):
        p = sub.add_parser(mode, help=help_text)
        p.add_argument("--config", help="YAML/JSON config file or a previous manifest.json")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int)
        p.add_argument("--k", help="subdata size: a count or a fraction such as 0.1n")
        p.add_argument("--methods", help="comma-separated subset of algorithm1,onephase_baseline,fulldata_lasso")
        p.add_argument("--no-timings", action="store_true", help="blank wall-clock fields for byte-stable output")
        if mode in ("simulate", "sweep"):
            p.add_argument("--replications", type=int)
        if mode == "realdata":
            p.add_argument("--train")
            p.add_argument("--test")
            p.add_argument("--B", type=int, dest="B")
        if mode == "fit":
            p.add_argument("--data")
            p.add_argument("--selector", choices=["LEVSS", "IBOSS", "levss", "iboss"])
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    rc = load_config(args.config) if args.config else RunConfig(mode=args.mode)
    rc = replace(rc, mode=args.mode)
    if args.seed is not None:
        rc.seed = args.seed
    if args.out is not None:
        rc.out = args.out
    if args.workers is not None:
        rc.workers = args.workers
    if args.k is not None:
        k = args.k.strip()
        rc.subdata = {**rc.subdata, "k": int(k) if k.isdigit() else k}
    if args.methods is not None:
        rc = replace(rc, methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()))
    if args.no_timings:
        rc.timings = False
    if getattr(args, "replications", None) is not None:
        rc.replications = args.replications
    if args.mode == "realdata":
        for name in ("train", "test", "B"):
            if getattr(args, name) is not None:
                rc.realdata = {**rc.realdata, name: getattr(args, name)}
    if args.mode == "fit":
        if args.data is not None:
            rc.fit = {**rc.fit, "data": args.data}
        if args.selector is not None:
            rc.subdata = {**rc.subdata, "selector": args.selector.upper()}
    return rc


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    rc = build_config(args)
    if rc.mode == "simulate":
        out = write_simulation(rc)
        print(json.dumps(out.summary, indent=2, sort_keys=True))
    elif rc.mode == "sweep":
        _, summary = write_sweep(rc)
        print(json.dumps(summary, indent=2, sort_keys=True))
    elif rc.mode == "realdata":
        _, summary = write_realdata(rc)
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        model = write_fit(rc)
        sys.stdout.write(model.to_json())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
