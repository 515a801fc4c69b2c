# ionspin/main.py
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from ionspin.routers import couplings, periodic, reproduce, schedule
from ionspin.utils.config import settings
from ionspin.utils.errors import IonSpinError, describe_validation_error

logger = logging.getLogger("ionspin")

ROUTERS = (couplings, schedule, periodic, reproduce)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionspin",
        description="Gradient-induced spin-spin couplings and 2D cluster-state schedules for trapped ions",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=settings.default_config, help="JSON configuration file")
    common.add_argument("--seed", type=int, default=0, help="seed of every random stream (unsigned 64-bit)")
    common.add_argument("--out", default=settings.out_dir, help="output directory (default from IONSPIN_OUT_DIR)")
    common.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for router in ROUTERS:
        router.register(subparsers, common)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns 0 on success, 1 on numeric or acceptance failure, 2 on bad input."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if not 0 <= args.seed < 2 ** 64:
        logger.error("--seed must be an unsigned 64-bit integer")
        return 2
    args.argv = ["ionspin"] + argv

    try:
        return args.handler(args)
    except IonSpinError as exc:
        logger.error("%s%s", exc, f" ({exc.detail})" if exc.detail else "")
        return exc.exit_code
    except ValidationError as exc:
        logger.error("invalid input: %s", describe_validation_error(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
