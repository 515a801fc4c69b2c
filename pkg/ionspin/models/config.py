from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator
from typing import Any, Dict, List, Optional, Tuple


class CouplingConfig(BaseModel):
    """Input of the couplings and modes commands (lengths in m, frequencies in Hz)."""
    model_config = ConfigDict(extra="forbid")

    potential: Dict[str, Any]  # potential file form, or {"preset": name}
    ions: int = Field(ge=1)
    species: str = "171Yb+"
    gradient_t_per_m: float = 100.0
    offset_t: float = Field(default=0.0, ge=0)
    gradient_factor: float = 1.0
    initial_guess_m: Optional[List[float]] = None

    @model_validator(mode="after")
    def guess_matches(self):
        if self.initial_guess_m is not None and len(self.initial_guess_m) != self.ions:
            raise ValueError("initial_guess_m needs one position per ion")
        return self


class WellsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    potential: Dict[str, Any]
    species: str = "171Yb+"
    z_range_m: Tuple[float, float]
    grid_step_m: PositiveFloat = 1e-6
    fit_window_m: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def range_ordered(self):
        if not self.z_range_m[1] > self.z_range_m[0]:
            raise ValueError("z_range_m must be increasing")
        return self
