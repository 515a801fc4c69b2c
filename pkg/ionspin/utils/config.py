from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional
import os
from dotenv import load_dotenv

load_dotenv()

class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="IONSPIN_", env_file=".env", extra="ignore")

    # Output
    out_dir: str = os.getenv("IONSPIN_OUT_DIR", "./out")
    log_level: str = "WARNING"

    # Equilibrium solver
    solver_tolerance: float = 1e-9
    solver_max_iterations: int = 500

    # Well search
    well_refine_tolerance: float = 1e-12  # m
    default_fit_window: float = 40e-6  # m
    plateau_tolerance: float = 1e-6

    # State-vector simulator
    max_qubits: int = 14

    # Periodic search
    winding_cap: int = 4
    infeasible_penalty: float = 1e3  # rad^2
    population_size: int = 24

    # Schedule metadata (seconds)
    transport_time: float = 50e-6
    ramp_time: float = 1e-6

    # Measured run time in run_report.json; false keeps the report byte-identical across reruns
    record_wall_clock: bool = True

    # Optional default config path for the CLI
    default_config: Optional[str] = None

settings = Settings()
