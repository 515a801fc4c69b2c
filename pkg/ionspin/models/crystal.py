from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import Any, Dict, Tuple

import numpy as np

from ionspin.models.trap import AxialPotential, IonSpecies


class IonCrystal(BaseModel):
    model_config = ConfigDict(frozen=True)

    species: IonSpecies
    positions: Tuple[float, ...] = Field(min_length=1)  # m, strictly increasing
    potential: AxialPotential
    force_residual: float = 0.0  # N, gradient norm at the returned positions
    iterations: int = 0
    converged: bool = True  # force residual below the solver tolerance

    @field_validator("positions")
    @classmethod
    def ordered(cls, positions):
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("ion positions must be strictly increasing")
        return positions

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.positions)


class NormalModes(BaseModel):
    """Rows of ``mode_matrix`` are the unit mode vectors, ascending in frequency."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequencies: np.ndarray  # rad/s
    mode_matrix: np.ndarray  # D, N x N
    hessian: np.ndarray  # A, J/m^2
    mass: float  # kg

    @property
    def count(self) -> int:
        return len(self.frequencies)


class CouplingMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    J: np.ndarray  # rad/s, symmetric, zero diagonal
    provenance: Dict[str, Any] = Field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.J.shape[0]


class PhaseMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta: np.ndarray  # rad, symmetric, zero diagonal

    @property
    def size(self) -> int:
        return self.theta.shape[0]
