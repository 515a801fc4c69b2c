# ionspin/routers/couplings.py
import argparse
import logging
import math
import time
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ionspin.models.config import CouplingConfig, WellsConfig
from ionspin.models.trap import SPECIES_BY_NAME, MagneticField, QubitSpec
from ionspin.services import coupling, potentials, statics
from ionspin.utils.errors import ConfigError, describe_validation_error
from ionspin.utils.output import OutputWriter, read_json, write_run_report

logger = logging.getLogger(__name__)


def register(subparsers, common) -> None:
    couplings = subparsers.add_parser("couplings", parents=[common], help="coupling matrix J for ions in a configured potential")
    couplings.set_defaults(handler=run_couplings)
    modes = subparsers.add_parser("modes", parents=[common], help="equilibrium positions and axial normal modes")
    modes.set_defaults(handler=run_modes)
    wells = subparsers.add_parser("wells", parents=[common], help="local minima and harmonic fits of a potential")
    wells.set_defaults(handler=run_wells)


def _load(args: argparse.Namespace, model):
    if not args.config:
        raise ConfigError(f"'{args.command}' needs --config")
    data, digest = read_json(args.config)
    try:
        config = model.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{args.config}: invalid configuration", detail=describe_validation_error(exc))
    return config, {args.config: digest}


def _potential(config, config_path: str):
    definition = config.potential
    if "preset" in definition:
        return potentials.voltage_preset(definition["preset"])
    return potentials.potential_from_dict(definition, base_dir=Path(config_path).parent)


def _species(name: str):
    if name not in SPECIES_BY_NAME:
        raise ConfigError(f"unknown species '{name}'", detail=", ".join(sorted(SPECIES_BY_NAME)))
    return SPECIES_BY_NAME[name]


def _solve(args: argparse.Namespace):
    config, hashes = _load(args, CouplingConfig)
    species = _species(config.species)
    field = MagneticField(offset=config.offset_t, gradient=config.gradient_t_per_m)
    qubit = QubitSpec(species=species, gradient_factor=config.gradient_factor)
    crystal, modes, J = coupling.trap_couplings(
        _potential(config, args.config), species, config.ions, qubit, field, config.initial_guess_m
    )
    return crystal, modes, J, hashes


def run_couplings(args: argparse.Namespace) -> int:
    """Write couplings.csv, couplings.json and modes.json."""
    started = time.perf_counter()
    crystal, modes, J, hashes = _solve(args)
    writer = OutputWriter(args.out)
    writer.csv("couplings.csv", coupling.coupling_table(J))
    writer.json("couplings.json", coupling.coupling_report(J))
    writer.json("modes.json", statics.modes_report(crystal, modes))

    upper = np.abs(J.J[np.triu_indices(J.size, k=1)]) if J.size > 1 else np.zeros(1)
    metrics = {
        "ions": crystal.count,
        "max_abs_J_rad_per_s": float(upper.max()),
        "force_residual_n": crystal.force_residual,
    }
    write_run_report(writer, args.argv, hashes, metrics, started)
    logger.info("couplings for %d ions written to %s", crystal.count, args.out)
    return 0


def run_modes(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config, hashes = _load(args, CouplingConfig)
    species = _species(config.species)
    crystal = statics.solve_equilibrium(_potential(config, args.config), species, config.ions, config.initial_guess_m)
    modes = statics.crystal_modes(crystal)
    writer = OutputWriter(args.out)
    writer.json("modes.json", statics.modes_report(crystal, modes))
    metrics = {"lowest_mode_hz": float(modes.frequencies[0] / (2 * math.pi)), "iterations": crystal.iterations}
    write_run_report(writer, args.argv, hashes, metrics, started)
    return 0


def run_wells(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config, hashes = _load(args, WellsConfig)
    species = _species(config.species)
    fits = potentials.find_wells(
        _potential(config, args.config), species, config.z_range_m, config.grid_step_m, config.fit_window_m
    )
    frame = pd.DataFrame({
        "center_m": [f.center for f in fits],
        "frequency_hz": [f.frequency_hz for f in fits],
        "fit_window_m": [f.fit_window for f in fits],
        "fit_residual": [f.fit_residual for f in fits],
    })
    writer = OutputWriter(args.out)
    writer.csv("wells.csv", frame)
    writer.json("wells.json", {"wells": frame.to_dict(orient="records")})
    write_run_report(writer, args.argv, hashes, {"wells": len(fits)}, started)
    return 0
