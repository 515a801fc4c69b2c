"""Axial potential models: evaluation, well search, harmonic fits, basis ingestion."""

import json
import logging
import math
import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import TypeAdapter, ValidationError
from scipy.optimize import brentq, minimize_scalar

from ionspin.models.trap import (
    AnalyticBasis,
    AxialPotential,
    GlobalHarmonic,
    IndividualWells,
    IonSpecies,
    MICROTRAP_GEOMETRY,
    SegmentedVoltages,
    Superposed,
    TabulatedBasis,
    TrapGeometry,
    WellFit,
)
from ionspin.utils.config import settings
from ionspin.utils.errors import ConfigError, FormatError, NotAWellError, NumericError, RangeError

logger = logging.getLogger(__name__)

_potential_adapter = TypeAdapter(AxialPotential)

# Segment voltage tables of the 17-segment microtrap (V).
VOLTAGE_PRESETS = {
    "coupling_23": (48, -8, 48, 0, 37.1, 18.3, 27.4, 18.3, 36.8, 0, 48, 0, 48, 0, 48, -8, 48),
    "uniform_200k": (1.6,) + (0, 2) * 7 + (0, 1.6),
}


def voltage_preset(name: str, geometry: TrapGeometry = MICROTRAP_GEOMETRY, basis=None) -> SegmentedVoltages:
    if name not in VOLTAGE_PRESETS:
        raise ConfigError(f"unknown voltage preset '{name}'", detail=", ".join(sorted(VOLTAGE_PRESETS)))
    return SegmentedVoltages(
        geometry=geometry,
        voltages=VOLTAGE_PRESETS[name],
        basis=basis if basis is not None else AnalyticBasis(),
    )


def evaluate(potential: AxialPotential, species: IonSpecies, z, order: int = 0):
    """Potential energy (J) or its first/second axial derivative at ``z`` (scalar or array)."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    z_arr = np.asarray(z, dtype=float)
    values = _evaluate(potential, species, z_arr, order)
    if np.ndim(z) == 0:
        return float(values)
    return values


def _evaluate(potential, species: IonSpecies, z: np.ndarray, order: int) -> np.ndarray:
    if isinstance(potential, GlobalHarmonic):
        stiffness = species.mass * potential.nu1 ** 2
        offset = z - potential.center
        if order == 0:
            return 0.5 * stiffness * offset ** 2
        if order == 1:
            return stiffness * offset
        return np.full_like(z, stiffness)

    if isinstance(potential, IndividualWells):
        centers = potential.centers
        stiffness = species.mass * potential.omegas ** 2
        offsets = z[..., None] - centers
        energies = 0.5 * stiffness * offsets ** 2
        nearest = np.argmin(energies, axis=-1)
        k = stiffness[nearest]
        d = np.take_along_axis(offsets, nearest[..., None], axis=-1)[..., 0]
        if order == 0:
            return 0.5 * k * d ** 2
        if order == 1:
            return k * d
        return k.astype(float)

    if isinstance(potential, Superposed):
        total = np.zeros_like(z)
        for part in potential.parts:
            total = total + _evaluate(part, species, z, order)
        return total

    if isinstance(potential, SegmentedVoltages):
        basis_values = segment_basis(potential, z, order)
        return species.charge * (basis_values @ np.asarray(potential.voltages, dtype=float))

    raise TypeError(f"unsupported potential {type(potential).__name__}")


def segment_basis(potential: SegmentedVoltages, z: np.ndarray, order: int = 0) -> np.ndarray:
    """Unit-voltage potentials phi_i(z) (V/V) or derivatives; shape z.shape + (segments,)."""
    basis = potential.basis
    if isinstance(basis, TabulatedBasis):
        low, high = basis.z_range
        if np.any(z < low) or np.any(z > high):
            raise RangeError(f"z outside tabulated basis range [{low:.6g}, {high:.6g}] m")
        return basis.spline(z, nu=order)

    geometry = potential.geometry
    width = basis.width or (geometry.layer_separation + geometry.radial_gap) / 4
    half = geometry.segment_length / 2
    rel = z[..., None] - geometry.segment_centers()
    left = np.tanh((rel + half) / width)
    right = np.tanh((rel - half) / width)
    if order == 0:
        return 0.5 * (left - right)
    sech2_left = 1.0 - left ** 2
    sech2_right = 1.0 - right ** 2
    if order == 1:
        return 0.5 * (sech2_left - sech2_right) / width
    return (-left * sech2_left + right * sech2_right) / width ** 2


def well_centers(potential) -> List[float]:
    """Centres of explicit individual wells contained in ``potential``."""
    if isinstance(potential, IndividualWells):
        return [w.center for w in potential.wells]
    if isinstance(potential, Superposed):
        centers: List[float] = []
        for part in potential.parts:
            centers.extend(well_centers(part))
        return sorted(centers)
    return []


def trap_center(potential) -> float:
    if isinstance(potential, GlobalHarmonic):
        return potential.center
    if isinstance(potential, IndividualWells):
        return float(np.mean(potential.centers))
    if isinstance(potential, Superposed):
        for part in potential.parts:
            if isinstance(part, GlobalHarmonic):
                return part.center
        return float(np.mean([trap_center(part) for part in potential.parts]))
    if isinstance(potential, SegmentedVoltages) and isinstance(potential.basis, TabulatedBasis):
        low, high = potential.basis.z_range
        return 0.5 * (low + high)
    return 0.0


def fit_harmonic(
    potential: AxialPotential,
    species: IonSpecies,
    center: float,
    window: Optional[float] = None,
    samples: int = 41,
) -> WellFit:
    """Least-squares quadratic over [center - window, center + window]."""
    window = settings.default_fit_window if window is None else window
    if window <= 0:
        raise ValueError("fit window must be positive")

    x = np.linspace(-1.0, 1.0, samples)
    energy = evaluate(potential, species, center + window * x)
    if not np.all(np.isfinite(energy)):
        raise NumericError(f"non-finite potential values near z = {center:.6g} m")

    a0, a1, a2 = np.polynomial.polynomial.polyfit(x, energy, 2)
    scale = max(abs(a0), abs(a1), abs(a2))
    if a2 <= 0:
        raise NotAWellError(f"non-positive curvature at z = {center:.6g} m")
    if scale > 0 and a2 <= settings.plateau_tolerance * scale:
        raise NotAWellError(f"degenerate plateau at z = {center:.6g} m")

    curvature = 2.0 * a2 / window ** 2
    misfit = energy - (a0 + a1 * x + a2 * x ** 2)
    residual = float(np.sqrt(np.mean(misfit ** 2)) / a2)
    return WellFit(
        center=center - window * a1 / (2.0 * a2),
        omega=math.sqrt(curvature / species.mass),
        fit_window=window,
        fit_residual=residual,
    )


def find_wells(
    potential: AxialPotential,
    species: IonSpecies,
    z_range: Tuple[float, float],
    grid_step: float,
    window: Optional[float] = None,
) -> List[WellFit]:
    """All interior local minima in ``z_range``, refined and fitted, sorted by centre."""
    low, high = z_range
    if not high > low:
        raise ValueError("z_range must be non-empty")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")

    grid = np.linspace(low, high, int(math.ceil((high - low) / grid_step)) + 1)
    energy = evaluate(potential, species, grid)
    if not np.all(np.isfinite(energy)):
        raise NumericError("non-finite potential values on the search grid")

    interior = np.arange(1, len(grid) - 1)
    is_min = (energy[interior] < energy[interior - 1]) & (energy[interior] <= energy[interior + 1])
    brackets = interior[is_min]
    logger.debug("grid scan over %d points found %d candidate minima", len(grid), len(brackets))

    centers = [_refine_minimum(potential, species, grid[i - 1], grid[i], grid[i + 1]) for i in brackets]

    fits: List[WellFit] = []
    for i, c in enumerate(centers):
        fit_window = window if window is not None else settings.default_fit_window
        gaps = [abs(c - other) for j, other in enumerate(centers) if j != i]
        if gaps:
            fit_window = min(fit_window, 0.25 * min(gaps))
        try:
            fit = fit_harmonic(potential, species, c, fit_window)
        except NotAWellError as exc:
            logger.warning("skipping minimum at %.6g m: %s", c, exc)
            continue
        fits.append(fit.model_copy(update={"center": c}))
    return sorted(fits, key=lambda f: f.center)


def _refine_minimum(potential, species, a: float, b: float, c: float) -> float:
    def energy(z):
        return evaluate(potential, species, z)

    result = minimize_scalar(
        energy,
        bracket=(a, b, c),
        method="golden",
        options={"xtol": settings.well_refine_tolerance / max(abs(b), 1e-6)},
    )
    z = float(np.clip(result.x, a, c))

    # energy differences saturate near the bottom; polish on the gradient
    def gradient(x):
        return evaluate(potential, species, x, order=1)

    ga, gc = gradient(a), gradient(c)
    if ga < 0 < gc:
        z = brentq(gradient, a, c, xtol=settings.well_refine_tolerance)
    return z


def load_basis_functions(table: Union[str, Path, pd.DataFrame]) -> TabulatedBasis:
    """Read a basis table: column ``z_m`` then ``seg_<i>_V`` per segment."""
    source = None
    if not isinstance(table, pd.DataFrame):
        source = str(table)
        try:
            table = pd.read_csv(table)
        except OSError as exc:
            raise FormatError(f"cannot read basis table {source}", detail=str(exc))
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
            raise FormatError(f"cannot parse basis table {source}", detail=str(exc))

    columns = list(table.columns)
    if not columns or columns[0] != "z_m":
        raise FormatError("basis table must start with a 'z_m' column")

    segments = []
    for name in columns[1:]:
        match = re.fullmatch(r"seg_(\d+)_V", str(name))
        if match is None:
            raise FormatError(f"unexpected basis column '{name}'")
        segments.append((int(match.group(1)), name))
    if not segments:
        raise FormatError("basis table has no segment columns")
    segments.sort()

    try:
        numeric = table[columns].apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as exc:
        raise FormatError("basis table contains non-numeric entries", detail=str(exc))
    if numeric.isna().any().any():
        raise FormatError("basis table has ragged or missing entries")

    z = numeric["z_m"].to_numpy()
    if np.any(np.diff(z) <= 0):
        raise FormatError("basis z-grid must be strictly increasing")

    try:
        return TabulatedBasis(
            z=tuple(z.tolist()),
            values=tuple(tuple(numeric[name].tolist()) for _, name in segments),
            source=source,
        )
    except ValidationError as exc:
        raise FormatError("invalid basis table", detail=str(exc))


def potential_from_dict(data: dict, base_dir: Optional[Path] = None):
    """Build a potential from its file form (frequencies in Hz, lengths in m)."""
    try:
        return _potential_adapter.validate_python(_convert_file_fields(data, base_dir))
    except ValidationError as exc:
        raise ConfigError("invalid potential definition", detail=str(exc))
    except KeyError as exc:
        raise ConfigError(f"potential definition is missing field {exc}")
    except (TypeError, ValueError) as exc:
        raise ConfigError("malformed potential definition", detail=str(exc))


def _convert_file_fields(data: dict, base_dir: Optional[Path]) -> dict:
    if not isinstance(data, dict) or "variant" not in data:
        raise ConfigError("potential definition needs a 'variant' tag")
    variant = data["variant"]
    converted = {k: v for k, v in data.items() if k not in ("nu1_hz", "wells", "parts", "basis")}
    if variant == "global_harmonic":
        converted["nu1"] = 2 * math.pi * float(data["nu1_hz"])
    elif variant == "individual_wells":
        converted["wells"] = [
            {"center": well["center"], "omega": 2 * math.pi * float(well["omega_hz"])} for well in data["wells"]
        ]
    elif variant == "superposed":
        converted["parts"] = [_convert_file_fields(part, base_dir) for part in data["parts"]]
    elif variant == "segmented":
        basis = data.get("basis", {"kind": "analytic"})
        if not isinstance(basis, dict):
            raise ConfigError("segmented potential 'basis' must be an object")
        if basis.get("kind") == "tabulated":
            path = Path(basis["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            converted["basis"] = load_basis_functions(path)
        else:
            converted["basis"] = basis
    return converted


def load_potential(path: Union[str, Path]):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read potential file {path}", detail=str(exc))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON at line {exc.lineno}", detail=exc.msg)
    return potential_from_dict(data, base_dir=path.parent)


def potential_to_dict(potential) -> dict:
    """File form of a potential; tabulated bases are referenced by their source path."""
    if isinstance(potential, GlobalHarmonic):
        return {"variant": potential.variant, "nu1_hz": potential.nu1 / (2 * math.pi), "center": potential.center}
    if isinstance(potential, IndividualWells):
        return {
            "variant": potential.variant,
            "wells": [{"center": w.center, "omega_hz": w.omega / (2 * math.pi)} for w in potential.wells],
        }
    if isinstance(potential, Superposed):
        return {"variant": potential.variant, "parts": [potential_to_dict(p) for p in potential.parts]}
    basis = potential.basis
    basis_dict = (
        {"kind": "tabulated", "path": basis.source}
        if isinstance(basis, TabulatedBasis)
        else basis.model_dump()
    )
    return {
        "variant": potential.variant,
        "geometry": potential.geometry.model_dump(),
        "voltages": list(potential.voltages),
        "basis": basis_dict,
    }
