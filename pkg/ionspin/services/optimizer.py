"""Search for trap parameters whose couplings meet periodicity conditions in one shot."""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.optimize import differential_evolution, minimize_scalar
from scipy.stats import qmc

from ionspin.models.search import (
    Bounds,
    CandidateEvaluation,
    CandidateParameters,
    PeriodicSearchProblem,
    SearchResult,
)
from ionspin.models.state import GraphSpec, path_graph, square_graph, triangle_graph
from ionspin.models.trap import GlobalHarmonic, IndividualWells, MagneticField, QubitSpec, SPECIES_BY_NAME, Superposed, Well
from ionspin.services import coupling
from ionspin.utils.config import settings
from ionspin.utils.errors import (
    ConfigError,
    ConfinementError,
    ConvergenceError,
    SingularityError,
    UnstableCrystalError,
)

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
MUTATION = 0.7
CROSSOVER = 0.9
MIN_POPULATION = 5
MAX_SCAN_POINTS = 200_000
REFINED_MINIMA = 5


def well_centers(n_ions: int, spacing: float, outer_spacing: Optional[float] = None) -> np.ndarray:
    """Well positions symmetric about 0; the two end gaps may differ from the inner ones."""
    gaps = np.full(n_ions - 1, spacing, dtype=float)
    if outer_spacing is not None and n_ions >= 3:
        gaps[0] = gaps[-1] = outer_spacing
    positions = np.concatenate([[0.0], np.cumsum(gaps)])
    return positions - (positions[0] + positions[-1]) / 2


def candidate_potential(problem: PeriodicSearchProblem, parameters: CandidateParameters) -> Superposed:
    """Individual wells around 0 on top of the global harmonic well."""
    centers = well_centers(problem.n_ions, parameters.spacing, parameters.outer_spacing)
    wells = tuple(Well(center=float(c), omega=w) for c, w in zip(centers, parameters.well_omegas))
    return Superposed(parts=(IndividualWells(wells=wells), GlobalHarmonic(nu1=parameters.global_omega)))


def _check_bounds(problem: PeriodicSearchProblem, parameters: CandidateParameters) -> None:
    if len(parameters.well_omegas) != problem.n_ions:
        raise ConfigError(f"{len(parameters.well_omegas)} well frequencies for {problem.n_ions} ions")
    for index, (omega, bounds) in enumerate(zip(parameters.well_omegas, problem.well_bounds)):
        if not bounds.contains(omega):
            raise ConfigError(f"well frequency {index} = {omega:.6g} rad/s outside its bounds")
    if not problem.global_bounds.contains(parameters.global_omega):
        raise ConfigError("global frequency outside its bounds")
    if not problem.spacing_bounds.contains(parameters.spacing):
        raise ConfigError("spacing outside its bounds")
    if problem.outer_spacing_bounds is None:
        if parameters.outer_spacing is not None:
            raise ConfigError("outer gap given but the problem has no outer gap bounds")
    elif not problem.outer_spacing_bounds.contains(parameters.outer_spacing or parameters.spacing):
        raise ConfigError("outer gap outside its bounds")


def _penalty(message: str) -> CandidateEvaluation:
    logger.warning("penalising candidate: %s", message)
    return CandidateEvaluation(residual=settings.infeasible_penalty, duration=0.0, feasible=False, message=message)


def best_duration(
    J: np.ndarray,
    graph: GraphSpec,
    winding_cap: Optional[int] = None,
    points_per_period: int = 64,
) -> Tuple[float, float]:
    """Minimum periodicity residual over [0, 4 pi (k + 1) / min edge J] and its duration."""
    winding_cap = settings.winding_cap if winding_cap is None else winding_cap
    edge_couplings = np.array([abs(J[a, b]) for a, b in graph.sorted_edges()])
    if edge_couplings.size == 0 or np.min(edge_couplings) == 0:
        raise UnstableCrystalError("an edge of the target graph has zero coupling")

    t_max = 2 * TWO_PI * (winding_cap + 1) / np.min(edge_couplings)
    period = 2 * TWO_PI / np.max(np.abs(J))
    count = int(min(MAX_SCAN_POINTS, math.ceil(points_per_period * t_max / period) + 1))
    grid = np.linspace(0.0, t_max, count)
    residuals = coupling.periodicity_residuals(J, grid, graph)

    def residual(t):
        return float(coupling.periodicity_residuals(J, np.array([t]), graph)[0])

    best_t, best_r = float(grid[np.argmin(residuals)]), float(np.min(residuals))
    for index in np.argsort(residuals)[:REFINED_MINIMA]:
        low, high = grid[max(index - 1, 0)], grid[min(index + 1, count - 1)]
        result = minimize_scalar(residual, bounds=(low, high), method="bounded", options={"xatol": 1e-12 * t_max})
        if result.fun < best_r:
            best_t, best_r = float(result.x), float(result.fun)
    return best_r, best_t


def evaluate_candidate(
    problem: PeriodicSearchProblem,
    parameters: CandidateParameters,
    points_per_period: int = 64,
) -> CandidateEvaluation:
    _check_bounds(problem, parameters)
    graph = GraphSpec.from_edges(problem.n_ions, problem.edges)
    try:
        _, _, J = coupling.trap_couplings(
            candidate_potential(problem, parameters),
            problem.species,
            problem.n_ions,
            QubitSpec(species=problem.species),
            MagneticField(gradient=problem.b),
        )
        residual, duration = best_duration(J.J, graph, points_per_period=points_per_period)
    except (UnstableCrystalError, ConvergenceError, ConfinementError, SingularityError) as exc:
        return _penalty(str(exc))
    if not math.isfinite(residual):
        return _penalty("non-finite periodicity residual")
    return CandidateEvaluation(residual=residual, duration=duration, J=J.J.tolist())


class _Encoding:
    """Maps the unit box onto parameters; symmetry groups share one coordinate."""

    def __init__(self, problem: PeriodicSearchProblem):
        grouped = {index for group in problem.symmetry_groups for index in group}
        self.groups: List[Tuple[int, ...]] = [tuple(g) for g in problem.symmetry_groups]
        self.groups += [(index,) for index in range(problem.n_ions) if index not in grouped]
        self.groups.sort()

        lows, highs = [], []
        for group in self.groups:
            low = max(problem.well_bounds[i].low for i in group)
            high = min(problem.well_bounds[i].high for i in group)
            if high < low:
                raise ConfigError(f"symmetry group {group} has disjoint frequency bounds")
            lows.append(low)
            highs.append(high)
        self.has_outer = problem.outer_spacing_bounds is not None
        extra = [problem.global_bounds, problem.spacing_bounds]
        if self.has_outer:
            extra.append(problem.outer_spacing_bounds)
        for bounds in extra:
            lows.append(bounds.low)
            highs.append(bounds.high)
        self.low = np.array(lows)
        self.span = np.array(highs) - self.low
        self.n_ions = problem.n_ions
        self.n_groups = len(self.groups)

    @property
    def dimension(self) -> int:
        return len(self.low)

    def decode(self, unit: np.ndarray) -> CandidateParameters:
        values = self.low + self.span * np.clip(unit, 0.0, 1.0)
        omegas = [0.0] * self.n_ions
        for group, value in zip(self.groups, values):
            for index in group:
                omegas[index] = float(value)
        g = self.n_groups
        return CandidateParameters(
            well_omegas=tuple(omegas),
            global_omega=float(values[g]),
            spacing=float(values[g + 1]),
            outer_spacing=float(values[g + 2]) if self.has_outer else None,
        )

    def encode(self, parameters: CandidateParameters) -> np.ndarray:
        values = [parameters.well_omegas[group[0]] for group in self.groups]
        values += [parameters.global_omega, parameters.spacing]
        if self.has_outer:
            values.append(parameters.outer_spacing or parameters.spacing)
        span = np.where(self.span > 0, self.span, 1.0)
        return np.clip((np.array(values) - self.low) / span, 0.0, 1.0)


class _BudgetedObjective:
    """Residual of a unit-box point; stops evaluating once the budget is spent."""

    def __init__(self, problem: PeriodicSearchProblem, encoding: _Encoding, budget: int):
        self.problem = problem
        self.encoding = encoding
        self.budget = budget
        self.anchor = None if problem.incumbent is None else encoding.encode(problem.incumbent)
        self.history: List[float] = []
        self.best: Optional[Tuple[CandidateParameters, CandidateEvaluation]] = None

    @property
    def exhausted(self) -> bool:
        return len(self.history) >= self.budget

    def __call__(self, unit: np.ndarray) -> float:
        if self.exhausted:
            return math.inf
        if self.anchor is not None and np.allclose(unit, self.anchor, rtol=0.0, atol=1e-12):
            parameters = self.problem.incumbent
        else:
            parameters = self.encoding.decode(unit)
        evaluation = evaluate_candidate(self.problem, parameters)

        previous = self.history[-1] if self.history else math.inf
        self.history.append(min(previous, evaluation.residual))
        if self.best is None or evaluation.residual < self.best[1].residual:
            self.best = (parameters, evaluation)
            logger.info("%s: residual %.4g after %d evaluations", self.problem.name, evaluation.residual, len(self.history))
        return evaluation.residual


def search(problem: PeriodicSearchProblem, seed: int, budget: int) -> SearchResult:
    """Seeded differential evolution (rand/1/bin) over the bounded box.

    The initial population is a Latin hypercube sample with the incumbent, when
    the problem has one, as its first member.
    """
    if budget < 1:
        raise ConfigError("search budget must be at least one evaluation")
    if settings.population_size < MIN_POPULATION:
        raise ConfigError(f"population size must be at least {MIN_POPULATION}")

    encoding = _Encoding(problem)
    objective = _BudgetedObjective(problem, encoding, budget)
    rng = np.random.default_rng(seed)
    size = max(MIN_POPULATION, min(settings.population_size, budget))
    population = qmc.LatinHypercube(d=encoding.dimension, rng=rng).random(size)
    if objective.anchor is not None:
        population[0] = objective.anchor
    generations = max(0, math.ceil((budget - size) / size))

    def stop_when_spent(xk, convergence=None):
        return objective.exhausted

    differential_evolution(
        objective,
        bounds=[(0.0, 1.0)] * encoding.dimension,
        strategy="rand1bin",
        maxiter=generations,
        mutation=MUTATION,
        recombination=CROSSOVER,
        tol=0.0,
        init=population,
        polish=False,
        updating="immediate",
        callback=stop_when_spent,
        rng=rng,
    )

    parameters, evaluation = objective.best
    return SearchResult(
        problem=problem.name,
        parameters=parameters,
        duration=evaluation.duration,
        residual=evaluation.residual,
        J=evaluation.J,
        evaluations=len(objective.history),
        seed=seed,
        best_history=objective.history,
    )


def _around(value: float, fraction: float = 0.2) -> Bounds:
    return Bounds(low=value * (1 - fraction), high=value * (1 + fraction))


def _parameters(wells_hz, global_hz, spacing, outer_spacing=None) -> CandidateParameters:
    return CandidateParameters(
        well_omegas=tuple(TWO_PI * f for f in wells_hz),
        global_omega=TWO_PI * global_hz,
        spacing=spacing,
        outer_spacing=outer_spacing,
    )


def _preset(name, graph, incumbent: CandidateParameters, groups) -> PeriodicSearchProblem:
    outer = None if incumbent.outer_spacing is None else _around(incumbent.outer_spacing)
    return PeriodicSearchProblem(
        name=name,
        n_ions=graph.n,
        edges=tuple(graph.sorted_edges()),
        well_bounds=tuple(_around(w) for w in incumbent.well_omegas),
        global_bounds=_around(incumbent.global_omega),
        spacing_bounds=_around(incumbent.spacing),
        outer_spacing_bounds=outer,
        symmetry_groups=groups,
        incumbent=incumbent,
    )


# Equidistant 5 um chain; under the Hessian model its ratios are 3.25 / 2.97 / 1.76,
# short of the 4 x 2pi + pi/4 nearest-neighbour winding.
EQUIDISTANT_PATH4 = _parameters((415e3, 280e3, 280e3, 415e3), 239e3, 5e-6)

# Wider inner gap and tighter end wells: J32, J21, J31 over J41 = 4.15, 4.12, 1.98.
PATH4 = _parameters((465e3, 339e3, 339e3, 465e3), 161e3, 7e-6, outer_spacing=4.75e-6)


def triangle_problem() -> PeriodicSearchProblem:
    """Three ions, all pairs entangled; outer wells share one frequency."""
    return _preset("triangle", triangle_graph(), _parameters((277e3, 100e3, 277e3), 100e3, 20e-6), ((0, 2),))


def path4_problem() -> PeriodicSearchProblem:
    return _preset("path4", path_graph(4), PATH4, ((0, 3), (1, 2)))


def square_problem() -> PeriodicSearchProblem:
    """Four-cycle target: the path plus pi/4 on the outer pair."""
    return _preset("square", square_graph(), PATH4, ((0, 3), (1, 2)))


PRESETS = {"triangle": triangle_problem, "path4": path4_problem, "square": square_problem}


def problem_from_dict(data: dict) -> PeriodicSearchProblem:
    """Problem file form: frequencies in Hz, gaps in m."""
    if "preset" in data:
        if data["preset"] not in PRESETS:
            raise ConfigError(f"unknown search preset '{data['preset']}'")
        return PRESETS[data["preset"]]()
    try:
        edges = [tuple(e) for e in data["edges"]]
        n_ions = int(data.get("n_ions", len(data["well_bounds_hz"])))
        species = SPECIES_BY_NAME.get(data.get("species", "171Yb+"))
        if species is None:
            raise ConfigError(f"unknown species '{data['species']}'")
        incumbent = None
        if "incumbent" in data:
            raw = data["incumbent"]
            incumbent = _parameters(raw["well_hz"], raw["global_hz"], raw["spacing_m"], raw.get("outer_spacing_m"))
        outer = data.get("outer_spacing_bounds_m")
        return PeriodicSearchProblem(
            name=data.get("name", "periodic"),
            n_ions=n_ions,
            edges=edges,
            well_bounds=[Bounds(low=TWO_PI * lo, high=TWO_PI * hi) for lo, hi in data["well_bounds_hz"]],
            global_bounds=Bounds(low=TWO_PI * data["global_bounds_hz"][0], high=TWO_PI * data["global_bounds_hz"][1]),
            spacing_bounds=Bounds(low=data["spacing_bounds_m"][0], high=data["spacing_bounds_m"][1]),
            outer_spacing_bounds=None if outer is None else Bounds(low=outer[0], high=outer[1]),
            b=data.get("b", 100.0),
            species=species,
            symmetry_groups=[tuple(g) for g in data.get("symmetry_groups", [])],
            incumbent=incumbent,
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise ConfigError(f"search problem is missing or malformed field {exc}")
    except ValidationError as exc:
        raise ConfigError("invalid search problem", detail=str(exc))


def result_to_dict(result: SearchResult) -> dict:
    parameters = result.parameters
    return {
        "problem": result.problem,
        "seed": result.seed,
        "evaluations": result.evaluations,
        "residual_rad2": result.residual,
        "duration_s": result.duration,
        "well_hz": [w / TWO_PI for w in parameters.well_omegas],
        "global_hz": parameters.global_omega / TWO_PI,
        "spacing_m": parameters.spacing,
        "outer_spacing_m": parameters.outer_spacing,
        "J_rad_per_s": result.J,
        "best_history": result.best_history,
    }
