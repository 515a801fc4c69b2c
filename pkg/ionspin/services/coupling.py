"""Gradient-induced spin-spin couplings, interaction phases and periodicity scores."""

import functools
import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import constants

from ionspin.models.crystal import CouplingMatrix, IonCrystal, NormalModes, PhaseMatrix
from ionspin.models.state import GraphSpec
from ionspin.models.trap import GlobalHarmonic, IonSpecies, MagneticField, QubitSpec, YB171
from ionspin.services import potentials, statics
from ionspin.utils.errors import DimensionMismatchError, UnstableCrystalError

logger = logging.getLogger(__name__)

BOHR_MAGNETON = constants.physical_constants["Bohr magneton"][0]  # J/T

# Two 171Yb+ ions in one 2 pi x 200 kHz well at 100 T/m couple with "about 3 kHz".
BENCHMARK_COUPLING = 3.0e3
_CANDIDATE_SCALES = (1.0, 1.0 / (2 * math.pi))


def frequency_gradient(qubit: QubitSpec, field: MagneticField) -> float:
    """d(omega)/dz of the qubit transition in rad s^-1 m^-1."""
    return qubit.gradient_factor * BOHR_MAGNETON * field.gradient / constants.hbar


def _per_ion(epsilon: Union[float, Sequence[float]], n: int) -> np.ndarray:
    if np.ndim(epsilon) == 0:
        return np.full(n, float(epsilon))
    eps = np.asarray(epsilon, dtype=float)
    if eps.shape != (n,):
        raise DimensionMismatchError(f"{eps.shape[0]} gradients given for {n} ions")
    return eps


def coupling_matrix(
    modes: NormalModes,
    epsilon: Union[float, Sequence[float]],
    provenance: Optional[dict] = None,
) -> CouplingMatrix:
    """J_nm = (hbar / 2m) eps_n eps_m sum_j D_jn D_jm / nu_j^2, zero diagonal."""
    if np.any(modes.frequencies <= 0):
        raise UnstableCrystalError("normal-mode frequencies must be positive")
    eps = _per_ion(epsilon, modes.count)
    D = modes.mode_matrix
    inverse = (D.T * (1.0 / modes.frequencies ** 2)) @ D / modes.mass
    return _finish(0.5 * constants.hbar * np.outer(eps, eps) * inverse, provenance)


def coupling_matrix_from_hessian(
    A: np.ndarray,
    epsilon: Union[float, Sequence[float]],
    provenance: Optional[dict] = None,
) -> CouplingMatrix:
    """Same couplings through a direct inverse of A."""
    A = np.asarray(A, dtype=float)
    eps = _per_ion(epsilon, A.shape[0])
    try:
        inverse = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        raise UnstableCrystalError("Hessian is singular")
    return _finish(0.5 * constants.hbar * np.outer(eps, eps) * inverse, provenance)


def _finish(J: np.ndarray, provenance: Optional[dict]) -> CouplingMatrix:
    J = 0.5 * (J + J.T)
    np.fill_diagonal(J, 0.0)
    return CouplingMatrix(J=J, provenance=provenance or {})


def trap_couplings(
    potential,
    species: IonSpecies,
    n: int,
    qubit: QubitSpec,
    field: MagneticField,
    initial_guess: Optional[Sequence[float]] = None,
) -> Tuple[IonCrystal, NormalModes, CouplingMatrix]:
    """Equilibrium, modes and couplings for ``n`` ions in ``potential``."""
    crystal = statics.solve_equilibrium(potential, species, n, initial_guess)
    modes = statics.crystal_modes(crystal)
    provenance = {
        "potential": potentials.potential_to_dict(potential),
        "species": species.name,
        "ions": n,
        "gradient_t_per_m": field.gradient,
        "offset_t": field.offset,
        "gradient_factor": qubit.gradient_factor,
    }
    J = coupling_matrix(modes, frequency_gradient(qubit, field), provenance)
    logger.debug("coupling matrix for %d ions, max |J| = %.6g rad/s", n, float(np.max(np.abs(J.J))))
    return crystal, modes, J


def phase_matrix(J: CouplingMatrix, duration: float) -> PhaseMatrix:
    """Theta = J t / 2."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    return PhaseMatrix(theta=J.J * duration / 2.0)


def _target_matrix(adjacency: Union[GraphSpec, np.ndarray]) -> np.ndarray:
    if isinstance(adjacency, GraphSpec):
        adjacency = adjacency.adjacency()
    return np.where(np.asarray(adjacency, dtype=bool), math.pi / 4, 0.0)


def circular_distance(angle: np.ndarray) -> np.ndarray:
    return np.abs(np.mod(angle + math.pi, 2 * math.pi) - math.pi)


def periodicity_residual(theta: PhaseMatrix, adjacency: Union[GraphSpec, np.ndarray]) -> float:
    """Sum over pairs of squared circular distance to pi/4 (edges) or 0 (non-edges)."""
    target = _target_matrix(adjacency)
    if target.shape != theta.theta.shape:
        raise DimensionMismatchError(f"phase matrix {theta.theta.shape} vs graph {target.shape}")
    upper = np.triu_indices(target.shape[0], k=1)
    return float(np.sum(circular_distance(theta.theta[upper] - target[upper]) ** 2))


def periodicity_residuals(J: np.ndarray, durations: np.ndarray, adjacency) -> np.ndarray:
    """Residual at each duration of a scan, evaluated in one pass."""
    target = _target_matrix(adjacency)
    upper = np.triu_indices(target.shape[0], k=1)
    phases = np.outer(np.asarray(durations, dtype=float), J[upper]) / 2.0
    return np.sum(circular_distance(phases - target[upper]) ** 2, axis=1)


def suppression_ratio(J: CouplingMatrix, wells: Sequence[int]) -> float:
    """Largest coupling between ions in different wells over the smallest within a well."""
    wells = np.asarray(wells)
    if wells.shape != (J.size,):
        raise DimensionMismatchError("one well index per ion is required")
    same = wells[:, None] == wells[None, :]
    off = ~np.eye(J.size, dtype=bool)
    inside = np.abs(J.J[same & off])
    outside = np.abs(J.J[~same])
    if inside.size == 0 or outside.size == 0:
        return 0.0
    return float(outside.max() / inside.min())


@functools.lru_cache(maxsize=1)
def reference_unit_scale() -> float:
    """Factor mapping J in rad/s to the unit of the benchmark "Hz" values.

    Chosen once from {1, 1/2pi} by the two-ion 200 kHz / 100 T/m benchmark.
    """
    potential = GlobalHarmonic(nu1=2 * math.pi * 200e3)
    _, _, J = trap_couplings(potential, YB171, 2, QubitSpec(), MagneticField(gradient=100.0))
    j12 = abs(J.J[0, 1])
    scale = min(_CANDIDATE_SCALES, key=lambda s: abs(math.log(j12 * s / BENCHMARK_COUPLING)))
    logger.info("unit calibration: J12 = %.4g rad/s, reference-unit scale %.6g", j12, scale)
    return scale


def coupling_table(J: CouplingMatrix) -> pd.DataFrame:
    """Row-major long table with columns n, m, J_rad_per_s."""
    size = J.size
    n, m = np.divmod(np.arange(size * size), size)
    return pd.DataFrame({"n": n, "m": m, "J_rad_per_s": J.J.ravel()})


def coupling_report(J: CouplingMatrix) -> dict:
    return {
        "J_rad_per_s": J.J.tolist(),
        "J_over_2pi_hz": (J.J / (2 * math.pi)).tolist(),
        "provenance": J.provenance,
    }
