import argparse
import logging
import sys
from typing import Optional, Sequence

from app.commands import COMMANDS
from app.errors import EstimationError
from app.logging_conf import configure_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walkscope",
        description="Random-walk estimation of large graph properties, with a benchmark harness.",
    )
    parser.add_argument("--log-level", help="overrides LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    logger.info("Command starting", extra={"command": args.command})
    try:
        return args.func(args)
    except EstimationError as exc:
        logger.error("Command failed", extra={"command": args.command, "error": str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        logger.error("Command crashed", exc_info=True, extra={"command": args.command})
        return 3


if __name__ == "__main__":
    sys.exit(main())
