"""Equilibrium positions, Hessian and normal modes of a linear ion crystal."""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import constants
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh

from ionspin.models.crystal import IonCrystal, NormalModes
from ionspin.models.trap import IonSpecies, SegmentedVoltages, TabulatedBasis
from ionspin.services import potentials
from ionspin.utils.config import settings
from ionspin.utils.errors import (
    ConfinementError,
    ConvergenceError,
    RangeError,
    SingularityError,
    UnstableCrystalError,
)

logger = logging.getLogger(__name__)

MIN_SEPARATION = 1e-9  # m
_LINE_SEARCH_HALVINGS = 60
RESOLUTION_SLACK = 1e3  # accepted force residual over tolerance when steps hit float resolution


def coulomb_constant(species: IonSpecies) -> float:
    """q^2 / (4 pi eps0) in J m."""
    return species.charge ** 2 / (4 * math.pi * constants.epsilon_0)


def length_scale(species: IonSpecies, curvature: float) -> float:
    """l with l^3 = q^2 / (4 pi eps0 U'')."""
    return (coulomb_constant(species) / curvature) ** (1.0 / 3.0)


def total_energy(z: np.ndarray, potential, species: IonSpecies) -> float:
    kappa = coulomb_constant(species)
    trap = float(np.sum(potentials.evaluate(potential, species, z)))
    gaps = np.abs(z[None, :] - z[:, None])[np.triu_indices(len(z), k=1)]
    return trap + float(np.sum(kappa / gaps))


def energy_gradient(z: np.ndarray, potential, species: IonSpecies) -> np.ndarray:
    kappa = coulomb_constant(species)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, np.inf)
    coulomb = -kappa * np.sum(np.sign(diff) / diff ** 2, axis=1)
    return potentials.evaluate(potential, species, z, order=1) + coulomb


def hessian_at(z: np.ndarray, potential, species: IonSpecies) -> np.ndarray:
    kappa = coulomb_constant(species)
    diff = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(diff, np.inf)
    if np.min(diff) < MIN_SEPARATION:
        raise SingularityError(f"ions closer than {MIN_SEPARATION:g} m")
    A = -2.0 * kappa / diff ** 3
    np.fill_diagonal(A, 0.0)
    A[np.diag_indices_from(A)] = potentials.evaluate(potential, species, z, order=2) - A.sum(axis=1)
    return A


def initial_positions(potential, species: IonSpecies, n: int) -> np.ndarray:
    """Well centres when there is one well per ion, else an even spread of 2 l n^0.56."""
    centers = potentials.well_centers(potential)
    if len(centers) == n:
        return np.asarray(centers, dtype=float)

    if isinstance(potential, SegmentedVoltages):
        low, high = _segmented_extent(potential)
        wells = potentials.find_wells(potential, species, (low, high), grid_step=1e-6)
        if len(wells) == n:
            return np.array([w.center for w in wells])

    center = potentials.trap_center(potential)
    curvature = potentials.evaluate(potential, species, center, order=2)
    if curvature <= 0:
        raise ConfinementError(f"potential is not confining at z = {center:.6g} m; supply an initial guess")
    if n == 1:
        return np.array([center])
    half_span = length_scale(species, curvature) * n ** 0.56
    return center + np.linspace(-half_span, half_span, n)


def _segmented_extent(potential: SegmentedVoltages):
    if isinstance(potential.basis, TabulatedBasis):
        return potential.basis.z_range
    half = potential.geometry.segment_count * potential.geometry.pitch / 2
    return -half, half


def solve_equilibrium(
    potential,
    species: IonSpecies,
    n: int,
    initial_guess: Optional[Sequence[float]] = None,
) -> IonCrystal:
    """Damped Newton minimisation of trap plus Coulomb energy, preserving ion order."""
    if n < 1:
        raise ValueError("at least one ion is required")
    if initial_guess is not None:
        z = np.sort(np.asarray(initial_guess, dtype=float))
        if z.shape != (n,):
            raise ValueError(f"initial guess has {len(z)} positions for {n} ions")
    else:
        z = initial_positions(potential, species, n)

    kappa = coulomb_constant(species)
    center = float(np.mean(z))
    reach = max(10.0 * (z[-1] - z[0]), 1e-3)

    try:
        return _newton(potential, species, z, kappa, center, reach)
    except RangeError as exc:
        raise ConfinementError("ions left the range covered by the potential", detail=str(exc))


def _characteristic_force(potential, species, z, kappa) -> float:
    if len(z) > 1:
        d = (z[-1] - z[0]) / (len(z) - 1)
    else:
        curvature = potentials.evaluate(potential, species, float(z[0]), order=2)
        d = length_scale(species, curvature) if curvature > 0 else 1e-5
    return kappa / d ** 2


def _newton(potential, species, z, kappa, center, reach) -> IonCrystal:
    energy = total_energy(z, potential, species)
    start_energy = energy
    grad = energy_gradient(z, potential, species)
    resolution = 64 * np.finfo(float).eps

    for iteration in range(settings.solver_max_iterations):
        tolerance = settings.solver_tolerance * _characteristic_force(potential, species, z, kappa)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < tolerance:
            break

        H = hessian_at(z, potential, species)
        try:
            step = -cho_solve(cho_factor(H), grad)
        except LinAlgError:
            logger.warning("Hessian not positive definite at iteration %d; using a gradient step", iteration)
            step = -grad / np.max(np.abs(np.diag(H)))

        alpha = 1.0
        for _ in range(_LINE_SEARCH_HALVINGS):
            trial = z + alpha * step
            if np.all(np.diff(trial) > 0):
                trial_energy = total_energy(trial, potential, species)
                trial_grad = energy_gradient(trial, potential, species)
                if trial_energy <= energy or np.linalg.norm(trial_grad) < grad_norm:
                    break
            alpha *= 0.5
        else:
            trial = None

        scale = max(float(np.max(np.abs(z))), float(z[-1] - z[0]), 1e-9)
        if trial is None or np.max(np.abs(alpha * step)) <= resolution * scale:
            if np.max(np.abs(step)) <= 1e3 * resolution * scale:
                if grad_norm > RESOLUTION_SLACK * tolerance:
                    raise ConvergenceError(
                        "step fell to floating-point resolution far above the force tolerance",
                        last_residual=grad_norm,
                    )
                logger.warning(
                    "stopping at floating-point resolution with |g| = %.3e N above the tolerance %.3e N",
                    grad_norm,
                    tolerance,
                )
                break
            raise ConvergenceError("line search failed to reduce energy or force", last_residual=grad_norm)

        z, energy, grad = trial, trial_energy, trial_grad
        if np.any(np.abs(z - center) > reach):
            raise ConfinementError("ions escaped the confinement region", detail=f"positions {z.tolist()}")
    else:
        raise ConvergenceError(
            f"no convergence after {settings.solver_max_iterations} iterations",
            last_residual=float(np.linalg.norm(grad)),
        )

    if energy > start_energy:
        logger.warning("final energy %.6e J exceeds the starting energy %.6e J", energy, start_energy)
    logger.debug("equilibrium of %d ions after %d iterations", len(z), iteration)
    return IonCrystal(
        species=species,
        positions=tuple(float(v) for v in z),
        potential=potential,
        force_residual=float(np.linalg.norm(grad)),
        iterations=iteration,
        converged=bool(np.linalg.norm(grad) < tolerance),
    )


def hessian(crystal: IonCrystal) -> np.ndarray:
    """Axial Hessian A (J/m^2) of trap plus Coulomb energy at the crystal positions."""
    return hessian_at(crystal.z, crystal.potential, crystal.species)


def normal_modes(A: np.ndarray, mass: float) -> NormalModes:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("Hessian must be a square matrix")
    symmetric = 0.5 * (A + A.T)
    eigenvalues, vectors = eigh(symmetric)
    if np.any(eigenvalues <= 0):
        raise UnstableCrystalError(
            "Hessian has non-positive eigenvalues", detail=f"smallest {float(eigenvalues[0]):.3e} J/m^2"
        )

    D = vectors.T.copy()
    for row in D:
        magnitude = np.abs(row)
        lead = int(np.argmax(magnitude >= magnitude.max() - 1e-12))
        if row[lead] < 0:
            row *= -1.0
    return NormalModes(frequencies=np.sqrt(eigenvalues / mass), mode_matrix=D, hessian=symmetric, mass=mass)


def crystal_modes(crystal: IonCrystal) -> NormalModes:
    return normal_modes(hessian(crystal), crystal.species.mass)


def modes_report(crystal: IonCrystal, modes: NormalModes) -> dict:
    """JSON form: positions in m, frequencies in Hz, D row-major."""
    return {
        "species": crystal.species.name,
        "mass_kg": crystal.species.mass,
        "positions_m": list(crystal.positions),
        "force_residual_n": crystal.force_residual,
        "frequencies_hz": (modes.frequencies / (2 * math.pi)).tolist(),
        "mode_matrix": modes.mode_matrix.tolist(),
    }
