# ionspin/routers/schedule.py
import argparse
import logging
import time

from ionspin.models.trap import YB171, QubitSpec
from ionspin.services import sequences, spins
from ionspin.utils.errors import ConfigError
from ionspin.utils.output import OutputWriter, read_json, write_run_report

logger = logging.getLogger(__name__)


def register(subparsers, common) -> None:
    schedule = subparsers.add_parser("schedule", help="compile or execute 2D cluster-state schedules")
    actions = schedule.add_subparsers(dest="action", required=True)

    build = actions.add_parser("build", parents=[common], help="compile the transport schedule for an n x 2 cluster")
    build.add_argument("--rows", type=int, default=4, help="rows n of the cluster, a multiple of 4")
    build.add_argument("--b", type=float, default=100.0, help="field gradient during windows (T/m)")
    build.set_defaults(handler=run_build)

    run = actions.add_parser("run", parents=[common], help="execute a schedule file")
    run.add_argument("schedule", help="schedule JSON written by 'schedule build'")
    run.add_argument("--mode", choices=("ideal", "residual"), default="ideal")
    run.set_defaults(handler=run_execute)


def _library(args: argparse.Namespace, hashes: dict, n_wells: int = 8):
    """Trap library from --config, or the default uniform catalogs."""
    if not args.config:
        return sequences.default_trap_library(n_wells)
    data, digest = read_json(args.config)
    hashes[args.config] = digest
    if not isinstance(data, dict):
        raise ConfigError(f"{args.config}: trap library must be a JSON object")
    return sequences.library_from_dict(data)


def run_build(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    hashes: dict = {}
    library = _library(args, hashes, max(8, sequences.wells_required(args.rows)) if args.rows >= 4 else 8)
    schedule = sequences.build_2d_schedule(args.rows, library, b=args.b)
    durations = sequences.stage_durations(schedule)

    writer = OutputWriter(args.out)
    writer.json("schedule.json", sequences.schedule_to_dict(schedule))
    writer.json("library.json", sequences.library_to_dict(library))
    metrics = {
        "stages": len(durations),
        "steps": len(schedule.steps),
        "stage_gradient_time_s": {str(stage): t for stage, t in durations.items()},
        "lint": sequences.lint_schedule(schedule, library),
    }
    write_run_report(writer, args.argv, hashes, metrics, started)
    logger.info("schedule with %d stages written to %s", len(durations), args.out)
    return 0


def run_execute(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    data, digest = read_json(args.schedule)
    if not isinstance(data, dict):
        raise ConfigError(f"{args.schedule}: schedule must be a JSON object")
    hashes = {args.schedule: digest}
    schedule = sequences.schedule_from_dict(data)
    library = _library(args, hashes, max(8, schedule.n_qubits - 2))

    state, report = sequences.execute_schedule(
        schedule, library, YB171, QubitSpec(species=YB171), mode=args.mode, rng_seed=args.seed
    )
    writer = OutputWriter(args.out)
    writer.json("execution.json", report.model_dump())
    writer.csv("stage_phases.csv", sequences.stage_phase_table(report))
    if state is not None:
        writer.json("state.json", spins.state_to_dict(state))
    metrics = {
        "mode": report.mode,
        "fidelity": report.fidelity,
        "min_stabilizer": min(report.stabilizers),
        "wall_clock_estimate_s": report.wall_clock_estimate,
    }
    write_run_report(writer, args.argv, hashes, metrics, started)
    logger.info("%s execution: fidelity %.12f", report.mode, report.fidelity)
    return 0
