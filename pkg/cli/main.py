"""
ptyx - Main Entry Point
Command line for orders, dilators, stage-n proof search and theory stream probes
"""

import argparse
import logging
import sys
from typing import List, Optional

import structlog

from config import LOG_FORMAT, LOG_JSON, LOG_LEVEL
from cli.handlers import (
    EXIT_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    FORMATS,
    RunConfig,
    setup_handlers,
)
from cli.render import schema_json, schema_names, to_json, to_text
from core.errors import PtyxError

logger = logging.getLogger(__name__)

_configured = False


def setup_logging() -> None:
    """Send logs to stderr; stdout carries reports only"""
    global _configured
    if _configured:
        return

    if LOG_JSON:
        formatter = structlog.stdlib.ProcessorFormatter(
            processors=[
                structlog.stdlib.ProcessorFormatter.remove_processors_meta,
                structlog.processors.JSONRenderer(sort_keys=True),
            ],
            foreign_pre_chain=[
                structlog.stdlib.add_log_level,
                structlog.stdlib.add_logger_name,
                structlog.processors.TimeStamper(fmt="iso"),
            ],
        )
    else:
        formatter = logging.Formatter(LOG_FORMAT)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, LOG_LEVEL.upper(), logging.WARNING))
    root_logger.addHandler(handler)
    _configured = True


def common_options() -> argparse.ArgumentParser:
    """Global flags, accepted before or after the subcommand"""
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--budget-nodes", type=int)
    common.add_argument("--budget-depth", type=int)
    common.add_argument("--budget-seconds", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--grid", help="ascending CNF points, e.g. cnf:w,cnf:w^2,cnf:w^w")
    common.add_argument("--workers", type=int)
    common.add_argument("--sample", type=int)
    return common


def build_parser():
    common = common_options()
    parser = argparse.ArgumentParser(
        prog="ptyx",
        description="Linear orders, dilators, stage-n proof search and soundness probes",
        parents=[common],
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    table = setup_handlers(subparsers, common)
    schema = subparsers.add_parser("schema", help="print the JSON schema of a report")
    schema.add_argument("name", choices=schema_names())
    return parser, table


def make_config(args: argparse.Namespace) -> RunConfig:
    values = {
        key: getattr(args, key)
        for key in (
            "format",
            "budget_nodes",
            "budget_depth",
            "budget_seconds",
            "seed",
            "grid",
            "workers",
            "sample",
        )
        if hasattr(args, key)
    }
    return RunConfig(command=args.command, action=getattr(args, "action", ""), **values)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, execute and emit; returns the exit status"""
    parser, table = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.command == "schema":
        print(schema_json(args.name))
        return EXIT_OK

    try:
        config = make_config(args)
    except ValueError as e:
        print(f"ptyx: {e}", file=sys.stderr)
        return EXIT_USAGE

    handler = table[(config.command, config.action)]
    logger.info(f"Running {config.command} {config.action}")
    try:
        outcome = handler(args, config)
    except PtyxError as e:
        logger.error(f"{config.command} {config.action} failed: {e}")
        print(f"ptyx: {e}", file=sys.stderr)
        return getattr(e, "exit_code", EXIT_FAILED)
    except ValueError as e:
        print(f"ptyx: {e}", file=sys.stderr)
        return EXIT_USAGE

    if config.format == "dot":
        if outcome.dot is None:
            print(f"ptyx: {config.command} {config.action} has no dot output", file=sys.stderr)
            return EXIT_USAGE
        print(outcome.dot)
    elif config.format == "json":
        print(to_json(outcome.report))
    else:
        print(to_text(outcome.report))
    return outcome.status


def main() -> None:
    setup_logging()
    sys.exit(run())


if __name__ == "__main__":
    main()
