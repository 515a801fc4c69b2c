# ionspin/routers/periodic.py
import argparse
import logging
import time

from ionspin.services import optimizer
from ionspin.utils.errors import ConfigError
from ionspin.utils.output import OutputWriter, read_json, write_run_report

logger = logging.getLogger(__name__)


def register(subparsers, common) -> None:
    periodic = subparsers.add_parser("periodic", help="one-shot periodicity engineering")
    actions = periodic.add_subparsers(dest="action", required=True)
    search = actions.add_parser("search", parents=[common], help="search trap parameters for a target graph")
    search.add_argument("--preset", choices=sorted(optimizer.PRESETS), help="built-in problem instead of --config")
    search.add_argument("--budget", type=int, default=2000, help="number of candidate evaluations")
    search.set_defaults(handler=run_search)


def run_search(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    hashes = {}
    if args.config:
        data, digest = read_json(args.config)
        hashes[args.config] = digest
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: search problem must be a JSON object")
        problem = optimizer.problem_from_dict(data)
    elif args.preset:
        problem = optimizer.PRESETS[args.preset]()
    else:
        raise ConfigError("'periodic search' needs --config or --preset")

    incumbent = None
    if problem.incumbent is not None:
        incumbent = optimizer.evaluate_candidate(problem, problem.incumbent).residual
    result = optimizer.search(problem, seed=args.seed, budget=args.budget)

    writer = OutputWriter(args.out)
    writer.json("search_result.json", optimizer.result_to_dict(result))
    metrics = {"residual_rad2": result.residual, "duration_s": result.duration, "evaluations": result.evaluations}
    if incumbent is not None:
        metrics["incumbent_residual_rad2"] = incumbent
    write_run_report(writer, args.argv, hashes, metrics, started)
    logger.info("%s: best residual %.4g after %d evaluations", problem.name, result.residual, result.evaluations)
    return 0
