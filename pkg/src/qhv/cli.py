"""Command-line interface: ``qhv run``, ``qhv validate`` and ``qhv demo``.

Exit codes: 0 when every query passes, 1 when a check fails or a query
errors, 2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import QHVError
from .scenario import DEMOS, ScenarioError, emit, load_demo, parse_scenario, run


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
    p.add_argument("--format", choices=("human", "csv"), default="human")
    p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhv", description="Quasi hidden variable measures and checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("file", type=Path)
    _add_run_options(p_run)
    p_val = sub.add_parser("validate", help="parse and validate a scenario file")
    p_val.add_argument("file", type=Path)
    p_demo = sub.add_parser("demo", help="run a bundled scenario")
    p_demo.add_argument("name", choices=DEMOS)
    _add_run_options(p_demo)
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc


def _execute(doc, args) -> int:
    report = run(doc, args.seed)
    text = emit(report, args.format)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return report.exit_code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            doc = parse_scenario(_read(args.file))
            print(f"{args.file}: ok ({len(doc.queries)} queries)")
            return 0
        if args.command == "run":
            doc = parse_scenario(_read(args.file))
        else:
            doc = load_demo(args.name)
    except QHVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return _execute(doc, args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
