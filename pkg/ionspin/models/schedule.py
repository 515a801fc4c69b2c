from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union
import math


class _Step(BaseModel):
    model_config = ConfigDict(frozen=True)

    stage: int = Field(default=0, ge=0)  # top-level step of the transport scheme
    label: str = ""


class AssignWells(_Step):
    kind: Literal["assign_wells"] = "assign_wells"
    catalog: str
    wells: Tuple[int, ...]  # well index per ion


class GradientWindow(_Step):
    kind: Literal["gradient_window"] = "gradient_window"
    b: float  # T/m
    duration: NonNegativeFloat  # s


class LocalPulse(_Step):
    kind: Literal["local_pulse"] = "local_pulse"
    qubit: int = Field(ge=0)
    axis: Literal["X"] = "X"


class Transport(_Step):
    kind: Literal["transport"] = "transport"
    duration: NonNegativeFloat  # t_T, metadata only


class RampMetadata(_Step):
    kind: Literal["ramp"] = "ramp"
    duration: NonNegativeFloat  # t_B, metadata only
    direction: Literal["up", "down"]


class Measure(_Step):
    kind: Literal["measure"] = "measure"
    qubit: int = Field(ge=0)
    basis: Union[Literal["X", "Y", "Z"], float] = "Z"


ScheduleStep = Annotated[
    Union[AssignWells, GradientWindow, LocalPulse, Transport, RampMetadata, Measure],
    Field(discriminator="kind"),
]


class PulseSchedule(BaseModel):
    """Qubit/ion indices are 0-based: qubit 0 is ion 1."""
    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(ge=1)
    steps: Tuple[ScheduleStep, ...] = ()
    target_edges: Tuple[Tuple[int, int], ...] = ()

    @property
    def stages(self) -> List[int]:
        return sorted({step.stage for step in self.steps})


class WellCatalog(BaseModel):
    """Named set of wells; centres in m, frequencies in rad/s."""
    model_config = ConfigDict(frozen=True)

    name: str
    centers: Tuple[float, ...] = Field(min_length=1)
    omegas: Tuple[PositiveFloat, ...] = Field(min_length=1)
    description: str = ""

    @model_validator(mode="after")
    def check_wells(self):
        if len(self.centers) != len(self.omegas):
            raise ValueError("centers and omegas must have equal length")
        if any(b <= a for a, b in zip(self.centers, self.centers[1:])):
            raise ValueError("well centers must be strictly increasing")
        return self

    @property
    def size(self) -> int:
        return len(self.centers)

    def to_file_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "centers_m": list(self.centers),
            "frequencies_hz": [w / (2 * math.pi) for w in self.omegas],
        }

    @classmethod
    def from_file_dict(cls, data: dict) -> "WellCatalog":
        return cls(
            name=data["name"],
            description=data.get("description", ""),
            centers=data["centers_m"],
            omegas=[2 * math.pi * f for f in data["frequencies_hz"]],
        )


class TrapLibrary(BaseModel):
    model_config = ConfigDict(frozen=True)

    catalogs: Dict[str, WellCatalog]
    pair_catalog: str = "pairs_200k"
    block_catalog: str = "block4_200k"

    def get(self, name: str) -> Optional[WellCatalog]:
        return self.catalogs.get(name)
