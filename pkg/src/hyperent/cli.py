"""Command-line entry point.

``hyperent run CONFIG``
    Execute one experiment and write its artifacts.
``hyperent plotdata CSV... [--cross-section ROW]``
    Print whitespace tables for plotting, or a row cross-section.
``hyperent selftest [--only N ...]``
    Run the acceptance checks.

Exit codes: 0 when everything passed, 1 on a computation error or failed
check, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .errors import ConfigError, HyperentError

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_CONFIG = 2


def _cmd_run(args: argparse.Namespace) -> int:
    from .config import load_config
    from .pipeline import execute

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    outcome, out_dir = execute(cfg)
    if outcome.error is not None:
        print(f"error: {outcome.error['type']}: {outcome.error['message']}", file=sys.stderr)
        return EXIT_COMPUTE
    failed = sorted(name for name, ok in outcome.checks.items() if not ok)
    if failed:
        print(f"checks failed: {', '.join(failed)} (see {out_dir / 'summary.json'})", file=sys.stderr)
        return EXIT_COMPUTE
    print(f"wrote {out_dir}")
    return EXIT_OK


def _cmd_plotdata(args: argparse.Namespace) -> int:
    from .io import cross_section_csv, plot_table, read_field_csv

    for path in args.csv:
        try:
            table = read_field_csv(Path(path))
            if args.cross_section is not None:
                text = cross_section_csv(table.row(args.cross_section))
            else:
                text = plot_table(table)
        except (OSError, ValueError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
        if len(args.csv) > 1:
            sys.stdout.write(f"# {path}\n")
        sys.stdout.write(text)
        if len(args.csv) > 1:
            sys.stdout.write("\n\n")
    return EXIT_OK


def _cmd_selftest(args: argparse.Namespace) -> int:
    from .acceptance import run_all

    results = run_all(args.only, echo=lambda line: print(line, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_COMPUTE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperent", description="Hyperfine structure of entanglement toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment config")
    p.add_argument("config", help="YAML run configuration")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("plotdata", help="plot-ready tables from field CSVs")
    p.add_argument("csv", nargs="*", help="field CSV files")
    p.add_argument("--cross-section", type=int, metavar="ROW", help="extract row y=ROW")
    p.set_defaults(func=_cmd_plotdata)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--only", type=int, nargs="+", metavar="N", help="criterion numbers")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HyperentError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
