import argparse
import logging
import sys
from typing import List, Optional

from src.config import load_config
from src.errors import DomainError, ToolkitError
from src.render import render
from src.routes import audit, complexity, export, info, width
from src.routes import enumerate as enumeration
from src.schemas.reports import Report

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

ROUTERS = [info.router, width.router, complexity.router, enumeration.router, audit.router, export.router]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsk", description="Transfer systems on subgroup lattices of finite groups."
    )
    parser.add_argument("--max-order", type=int, help="largest group order to build")
    parser.add_argument("--max-subgroups", type=int, help="largest subgroup lattice to enumerate")
    parser.add_argument("--budget", type=int, help="largest number of transfer systems to visit")
    parser.add_argument("--workers", type=int, help="processes used to certify transfer systems")
    parser.add_argument("--cache", dest="cache_dir", help="directory of the JSONL transfer-system cache")
    parser.add_argument("--format", dest="output_format", choices=["text", "json", "csv", "dot"])
    parser.add_argument("--json", action="store_true", help="shorthand for --format json")
    parser.add_argument("--exhaustive-limit", type=int, help="optional classes accepted by exhaustive search")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("-v", "--verbose", action="count", default=0)

    subparsers = parser.add_subparsers(dest="command_name", required=True)
    for router in ROUTERS:
        router.mount(subparsers)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    log_level = args.log_level
    if log_level is None and args.verbose:
        log_level = "DEBUG" if args.verbose > 1 else "INFO"
    return {
        "max_order": args.max_order,
        "max_subgroups": args.max_subgroups,
        "budget": args.budget,
        "workers": args.workers,
        "cache_dir": args.cache_dir,
        "output_format": "json" if args.json else args.output_format,
        "exhaustive_limit": args.exhaustive_limit,
        "log_level": log_level,
    }


def configure_logging(level: str) -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "tsk", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.tsk = True
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)


def exit_code(report: Report) -> int:
    if report.budget_exhausted:
        return 3
    if report.result.kind == "audit" and not all(c.passed for c in report.result.checks):
        return 1
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(_overrides(args))
        configure_logging(config.log_level)
        outcome = args.command(args, config)
        if isinstance(outcome, str):
            sys.stdout.write(outcome)
            return 0
        if config.output_format == "dot":
            raise DomainError(f"--format dot applies to export-dot only, not {outcome.command}")
        sys.stdout.write(render(outcome, config.output_format))
        return exit_code(outcome)
    except ToolkitError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
