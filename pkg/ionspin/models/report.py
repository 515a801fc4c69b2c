from pydantic import BaseModel, ConfigDict, Field
from typing import Any, Dict, List, Optional


class RunReport(BaseModel):
    command: List[str]
    input_hashes: Dict[str, str] = Field(default_factory=dict)  # path -> sha256
    outputs: List[str] = Field(default_factory=list)
    metrics: Dict[str, Any] = Field(default_factory=dict)
    wall_clock: Optional[float] = None  # s
    units: str = "frequencies in Hz, angles in rad, other quantities SI"


class StepPhases(BaseModel):
    stage: int
    label: str
    duration: float  # s
    theta: List[List[float]]  # rad, register order


class RegisterResult(BaseModel):
    qubits: List[int]
    stabilizers: List[float]
    fidelity: float


class ExecutionReport(BaseModel):
    mode: str
    n_qubits: int
    target_edges: List[List[int]]
    step_phases: List[StepPhases] = Field(default_factory=list)
    registers: List[RegisterResult] = Field(default_factory=list)
    stabilizers: List[float] = Field(default_factory=list)
    fidelity: float = 0.0
    measurements: List[Dict[str, Any]] = Field(default_factory=list)
    gradient_time: float = 0.0  # s
    transport_time: float = 0.0  # s
    ramp_time: float = 0.0  # s
    wall_clock_estimate: float = 0.0  # s
    assumptions: List[str] = Field(default_factory=list)
    bit_convention: str = "qubit0_lsb"


class ColumnRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    angles: List[float]  # rad, measurement basis (|0> +- e^{i a}|1>)/sqrt(2)
    outcomes: List[int]  # +1 / -1
    byproducts: List[str]  # "X" or "I" per row, acting before the vertical CZs


class ColumnReuseTranscript(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_rows: int
    seed: int
    columns: List[ColumnRecord]
    final_state: Any  # QuantumState of the surviving column


class Check(BaseModel):
    name: str
    value: float
    expected: Optional[float] = None
    tolerance: Optional[float] = None
    passed: bool


class ReproductionResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    target: str
    checks: List[Check]
    datasets: Dict[str, Any] = Field(default_factory=dict)  # name -> pandas.DataFrame

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
