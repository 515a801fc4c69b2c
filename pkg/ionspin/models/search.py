from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator
from typing import List, Optional, Tuple

from ionspin.models.trap import IonSpecies, YB171


class Bounds(BaseModel):
    model_config = ConfigDict(frozen=True)

    low: float
    high: float

    @model_validator(mode="after")
    def ordered(self):
        if self.high < self.low:
            raise ValueError(f"bounds not ordered: {self.low} > {self.high}")
        return self

    def contains(self, value: float, slack: float = 1e-12) -> bool:
        scale = max(abs(self.low), abs(self.high), 1.0)
        return self.low - slack * scale <= value <= self.high + slack * scale


class CandidateParameters(BaseModel):
    """Individual well frequencies and global frequency in rad/s, gaps in m.

    ``outer_spacing`` is the gap between each end well and its neighbour; the
    chain is equidistant when it is unset.
    """
    model_config = ConfigDict(frozen=True)

    well_omegas: Tuple[PositiveFloat, ...]
    global_omega: PositiveFloat
    spacing: PositiveFloat
    outer_spacing: Optional[PositiveFloat] = None


class PeriodicSearchProblem(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "periodic"
    n_ions: int = Field(ge=2)
    edges: Tuple[Tuple[int, int], ...]
    well_bounds: Tuple[Bounds, ...]  # rad/s
    global_bounds: Bounds  # rad/s
    spacing_bounds: Bounds  # m
    outer_spacing_bounds: Optional[Bounds] = None  # m
    b: float = 100.0  # T/m
    species: IonSpecies = YB171
    symmetry_groups: Tuple[Tuple[int, ...], ...] = ()
    incumbent: Optional[CandidateParameters] = None

    @model_validator(mode="after")
    def check_sizes(self):
        if len(self.well_bounds) != self.n_ions:
            raise ValueError("one well-frequency bound per ion is required")
        for a, b in self.edges:
            if not (0 <= a < self.n_ions and 0 <= b < self.n_ions) or a == b:
                raise ValueError(f"edge ({a}, {b}) invalid for {self.n_ions} ions")
        seen = set()
        for group in self.symmetry_groups:
            for index in group:
                if index in seen or not 0 <= index < self.n_ions:
                    raise ValueError(f"symmetry group index {index} repeated or out of range")
                seen.add(index)
        if self.incumbent is not None and len(self.incumbent.well_omegas) != self.n_ions:
            raise ValueError("incumbent must give one well frequency per ion")
        if self.outer_spacing_bounds is not None and self.n_ions < 3:
            raise ValueError("an outer gap needs at least three ions")
        return self


class CandidateEvaluation(BaseModel):
    model_config = ConfigDict(frozen=True)

    residual: float = Field(ge=0)  # rad^2
    duration: float = Field(ge=0)  # s
    J: List[List[float]] = Field(default_factory=list)  # rad/s
    feasible: bool = True
    message: str = ""


class SearchResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    problem: str
    parameters: CandidateParameters
    duration: float  # s
    residual: float = Field(ge=0)  # rad^2
    J: List[List[float]]  # rad/s
    evaluations: int
    seed: int
    best_history: List[float] = Field(default_factory=list)
