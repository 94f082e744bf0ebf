"""Command-line entry point.

    bosonic-bounds verify --config run.json
    bosonic-bounds solve  --config run.json --format json --out results/
    bosonic-bounds sweep  --config run.json --seed 7
    bosonic-bounds limits

The exit status is 0 exactly when every assertion in the report passes.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import RunConfig, emit, limits_report, run

COMMANDS = {
    "verify": ("identities",),
    "solve": ("exact", "two_body", "hartree"),
    "sweep": ("identities", "exact", "two_body", "hartree", "bounds"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonic-bounds",
        description="Energy bounds for bosonic atoms and stars.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "identity suite only (pair decomposition, graph identity, scaling)",
        "solve": "exact values, two-body Hylleraas solve and Hartree sweep",
        "sweep": "full report: solves, chain bounds and ordering checks",
        "limits": "minima of the large-N limiting Hartree functionals",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", metavar="DIR", help="output directory (default: config out_dir)")
        p.add_argument("--seed", type=int, metavar="U64", help="override the RNG seed")
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "limits":
        report = limits_report(cfg)
    else:
        report = run(cfg, COMMANDS[args.command])

    path = emit(report, args.format, args.out or cfg.out_dir, stem=args.command)
    failed = [a for a in report.assertions if a.status != "pass"]
    print(f"{len(report.rows)} rows, {len(report.assertions)} assertions, {len(failed)} failed -> {path}")
    for a in failed:
        print(f"  {a.status.upper()}: {a.name} residual={a.residual} {a.detail}")
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
