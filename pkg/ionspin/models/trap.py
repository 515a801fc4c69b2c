from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PrivateAttr, field_validator, model_validator
from typing import Annotated, Literal, Optional, Tuple, Union
import math

import numpy as np
from scipy import constants
from scipy.interpolate import CubicSpline


class IonSpecies(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    mass: PositiveFloat  # kg
    charge: PositiveFloat = constants.e  # C


YB171 = IonSpecies(name="171Yb+", mass=170.936323 * constants.atomic_mass)

SPECIES_BY_NAME = {YB171.name: YB171, "Yb171": YB171}


class TrapGeometry(BaseModel):
    """Three-layer segmented trap; all lengths in metres."""
    model_config = ConfigDict(frozen=True)

    layer_separation: PositiveFloat  # s
    radial_gap: PositiveFloat  # g
    electrode_thickness: PositiveFloat  # t
    segment_length: PositiveFloat  # k
    isolation_gap: PositiveFloat  # h
    segment_count: int = Field(ge=1)

    @property
    def pitch(self) -> float:
        return self.segment_length + self.isolation_gap

    def segment_centers(self) -> np.ndarray:
        index = np.arange(self.segment_count) - (self.segment_count - 1) / 2
        return index * self.pitch


MICROTRAP_GEOMETRY = TrapGeometry(
    layer_separation=350e-6,
    radial_gap=250e-6,
    electrode_thickness=125e-6,
    segment_length=100e-6,
    isolation_gap=30e-6,
    segment_count=17,
)


class GlobalHarmonic(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant: Literal["global_harmonic"] = "global_harmonic"
    nu1: PositiveFloat  # rad/s
    center: float = 0.0  # m


class Well(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: float  # m
    omega: PositiveFloat  # rad/s


class IndividualWells(BaseModel):
    """Lower envelope of one parabola per well."""
    model_config = ConfigDict(frozen=True)

    variant: Literal["individual_wells"] = "individual_wells"
    wells: Tuple[Well, ...] = Field(min_length=1)

    @field_validator("wells")
    @classmethod
    def centers_increasing(cls, wells):
        centers = [w.center for w in wells]
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValueError("well centers must be strictly increasing")
        return wells

    @property
    def centers(self) -> np.ndarray:
        return np.array([w.center for w in self.wells])

    @property
    def omegas(self) -> np.ndarray:
        return np.array([w.omega for w in self.wells])


class AnalyticBasis(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["analytic"] = "analytic"
    width: Optional[PositiveFloat] = None  # m; defaults to (s + g) / 4


class TabulatedBasis(BaseModel):
    """Unit-voltage potentials per segment sampled on a common z-grid."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["tabulated"] = "tabulated"
    z: Tuple[float, ...]
    values: Tuple[Tuple[float, ...], ...]  # one column per segment
    source: Optional[str] = None

    _spline: CubicSpline = PrivateAttr()

    @model_validator(mode="after")
    def check_table(self):
        if len(self.z) < 4:
            raise ValueError("tabulated basis needs at least 4 grid points")
        if any(b <= a for a, b in zip(self.z, self.z[1:])):
            raise ValueError("z-grid must be strictly increasing")
        if not self.values or any(len(col) != len(self.z) for col in self.values):
            raise ValueError("every segment column must match the z-grid length")
        return self

    def model_post_init(self, __context) -> None:
        table = np.asarray(self.values, dtype=float).T
        self._spline = CubicSpline(np.asarray(self.z), table, axis=0)

    @property
    def segment_count(self) -> int:
        return len(self.values)

    @property
    def z_range(self) -> Tuple[float, float]:
        return self.z[0], self.z[-1]

    @property
    def spline(self) -> CubicSpline:
        return self._spline


SegmentBasis = Annotated[Union[AnalyticBasis, TabulatedBasis], Field(discriminator="kind")]


class SegmentedVoltages(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant: Literal["segmented"] = "segmented"
    geometry: TrapGeometry
    voltages: Tuple[float, ...]
    basis: SegmentBasis = Field(default_factory=AnalyticBasis)

    @model_validator(mode="after")
    def check_segments(self):
        if len(self.voltages) != self.geometry.segment_count:
            raise ValueError(
                f"{len(self.voltages)} voltages given for {self.geometry.segment_count} segments"
            )
        if isinstance(self.basis, TabulatedBasis) and self.basis.segment_count != self.geometry.segment_count:
            raise ValueError("tabulated basis column count does not match the segment count")
        return self


class Superposed(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant: Literal["superposed"] = "superposed"
    parts: Tuple["AxialPotential", ...] = Field(min_length=1)


AxialPotential = Annotated[
    Union[GlobalHarmonic, IndividualWells, Superposed, SegmentedVoltages],
    Field(discriminator="variant"),
]

Superposed.model_rebuild()


class WellFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: float  # m
    omega: PositiveFloat  # rad/s
    fit_window: PositiveFloat  # m
    fit_residual: float = Field(ge=0)

    @property
    def frequency_hz(self) -> float:
        return self.omega / (2 * math.pi)


class MagneticField(BaseModel):
    model_config = ConfigDict(frozen=True)

    offset: float = Field(default=0.0, ge=0)  # T
    gradient: float  # T/m

    @field_validator("gradient")
    @classmethod
    def finite_gradient(cls, value):
        if not math.isfinite(value):
            raise ValueError("gradient must be finite")
        return value


class QubitSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    species: IonSpecies = YB171
    gradient_factor: float = 1.0  # g_F * m_F of the |1> state

    @field_validator("gradient_factor")
    @classmethod
    def finite_factor(cls, value):
        if not math.isfinite(value):
            raise ValueError("gradient_factor must be finite")
        return value
