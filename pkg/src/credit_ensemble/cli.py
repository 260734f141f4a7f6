"""Command line entry point: ``credit-ensemble`` or ``python -m credit_ensemble``.

Subcommands::

    validate-data PATH --variant {german,german-numeric,australian}
    run --config FILE [--seed N] [--workers N] [--out DIR]
    report --in REPORT.json [--in ...] --format {csv,json} [--out DIR]

Failures exit with status 1 and print one JSON object
``{"error": <type>, "message": <text>}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .dataset import DECLARED, VARIANTS, load_dataset
from .errors import CreditEnsembleError
from .evaluation import cross_validate, emit_report, load_report, load_run_config, summary_rows


def _validate(args) -> int:
    d = load_dataset(args.path, args.variant)
    pos, neg = d.class_counts()
    info = {
        "variant": d.name,
        "records": len(d),
        "numeric": len(d.schema.numeric_indices),
        "categorical": len(d.schema.categorical_indices),
        "class1": pos,
        "class2": neg,
        "declared": vars(DECLARED[d.name]),
    }
    print(json.dumps(info))
    return 0


def _run(args) -> int:
    cfg = load_run_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["output_dir"] = args.out
    if overrides:
        cfg = replace(cfg, **overrides)
    report = cross_validate(cfg)
    written = emit_report(report, cfg.output_dir)
    for row in summary_rows([report]):
        print(",".join(row))
    for p in written:
        print(f"wrote {p}", file=sys.stderr)
    return 0


def _report(args) -> int:
    reports = [load_report(p) for p in args.inputs]
    written = emit_report(reports, args.out, formats=(args.format,))
    for p in written:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="credit-ensemble", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-data", help="parse a credit file and check its declared totals")
    p.add_argument("path")
    p.add_argument("--variant", required=True, choices=VARIANTS)
    p.set_defaults(func=_validate)

    p = sub.add_parser("run", help="run the cross-validation experiment of a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.set_defaults(func=_run)

    p = sub.add_parser("report", help="re-emit saved report.json files")
    p.add_argument("--in", dest="inputs", action="append", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=".")
    p.set_defaults(func=_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CreditEnsembleError, OSError, ValueError, KeyError, TypeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
