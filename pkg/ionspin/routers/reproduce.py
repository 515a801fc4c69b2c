# ionspin/routers/reproduce.py
import argparse
import logging
import time

import pandas as pd

from ionspin.services import reproduce
from ionspin.utils.output import OutputWriter, write_run_report

logger = logging.getLogger(__name__)


def register(subparsers, common) -> None:
    parser = subparsers.add_parser("reproduce", parents=[common], help="regenerate benchmark datasets and check them")
    parser.add_argument("target", choices=sorted(reproduce.TARGETS) + sorted(reproduce.ALIASES) + ["all"])
    parser.set_defaults(handler=run_reproduce)


def run_reproduce(args: argparse.Namespace) -> int:
    """Exit 0 when every check passes, 1 otherwise."""
    started = time.perf_counter()
    targets = sorted(reproduce.TARGETS) if args.target == "all" else [args.target]
    results = [reproduce.reproduce(target) for target in targets]

    writer = OutputWriter(args.out)
    for result in results:
        for name, frame in sorted(result.datasets.items()):
            writer.csv(f"{name}.csv", frame, index=not isinstance(frame.index, pd.RangeIndex))
    summary = reproduce.summary_frame(results)
    writer.csv("summary.csv", summary)

    failed = [f"{row.target}: {row.name}" for row in summary.itertuples() if not row.passed]
    metrics = {"checks": len(summary), "failed": failed}
    write_run_report(writer, args.argv, {}, metrics, started)
    for line in failed:
        logger.error("check failed: %s", line)
    return 0 if not failed else 1
