"""Compilation and execution of transport schedules that build 2D cluster states.

Ions and qubits are indexed from 0; ion k carries qubit k. Rows of an n x 2
cluster are numbered in ion order, so the target graph is the chain plus the
third-neighbour links (i, i + 3) for even i.
"""

import functools
import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ionspin.models.crystal import CouplingMatrix
from ionspin.models.report import ColumnRecord, ColumnReuseTranscript, ExecutionReport, RegisterResult, StepPhases
from ionspin.models.schedule import (
    AssignWells,
    GradientWindow,
    LocalPulse,
    Measure,
    PulseSchedule,
    RampMetadata,
    ScheduleStep,
    TrapLibrary,
    Transport,
    WellCatalog,
)
from ionspin.models.state import BIT_CONVENTION, GraphSpec, QuantumState, ladder_graph, path_graph
from ionspin.models.trap import GlobalHarmonic, IndividualWells, IonSpecies, MagneticField, QubitSpec, Well, YB171
from ionspin.services import coupling, spins, statics
from ionspin.utils.config import settings
from ionspin.utils.errors import (
    CapacityError,
    ConfigError,
    DimensionMismatchError,
    LayoutError,
    NumericError,
    ScheduleError,
    describe_validation_error,
)

logger = logging.getLogger(__name__)

# Inter-well distances (m) of the eight-well uniform configuration.
UNIFORM_SPACINGS = (230e-6, 260e-6, 260e-6, 260e-6, 260e-6, 259e-6, 231e-6)
UNIFORM_FREQUENCY_HZ = 200e3
BLOCK_SIZE = 4
IONS_PER_BLOCK = 8  # one 4 x 2 cluster

ASSUMPTIONS = (
    "transport and gradient ramps are instantaneous; their durations enter only the wall-clock estimate",
    "Zeeman phases accumulated during gradient windows are removed by the decoupling pulses",
    "local pulses are ideal zero-duration X gates",
)


def default_trap_library(n_wells: int = 8, frequency_hz: float = UNIFORM_FREQUENCY_HZ) -> TrapLibrary:
    """Uniform wells 260 um apart (230/259/231 um at the ends), for pairs and four-ion blocks."""
    if n_wells < 2:
        raise LayoutError("a trap library needs at least two wells")
    if n_wells <= len(UNIFORM_SPACINGS) + 1:
        spacings = UNIFORM_SPACINGS[: n_wells - 1]
    else:
        spacings = (UNIFORM_SPACINGS[0],) + (260e-6,) * (n_wells - 4) + UNIFORM_SPACINGS[-2:]
    positions = np.concatenate([[0.0], np.cumsum(spacings)])
    centers = tuple(float(c) for c in positions - positions.mean())
    omegas = (2 * math.pi * frequency_hz,) * n_wells
    pairs = WellCatalog(name="pairs_200k", centers=centers, omegas=omegas, description="pairs of ions per well")
    blocks = WellCatalog(name="block4_200k", centers=centers, omegas=omegas, description="four-ion block wells")
    return TrapLibrary(catalogs={pairs.name: pairs, blocks.name: blocks})


@functools.lru_cache(maxsize=64)
def _isolated_couplings(count: int, omega: float, b: float, species: IonSpecies, qubit: QubitSpec) -> np.ndarray:
    _, _, J = coupling.trap_couplings(
        GlobalHarmonic(nu1=omega), species, count, qubit, MagneticField(gradient=b)
    )
    return J.J


def isolated_couplings(
    count: int, omega: float, b: float, species: IonSpecies = YB171, qubit: Optional[QubitSpec] = None
) -> np.ndarray:
    """Couplings of ``count`` ions alone in one harmonic well."""
    return _isolated_couplings(count, omega, b, species, qubit or QubitSpec(species=species)).copy()


def recoupling_fragment(
    block: Sequence[int],
    target_pair: Tuple[int, int],
    J: Union[CouplingMatrix, np.ndarray],
    total_phase: float = math.pi / 4,
    b: float = 100.0,
    stage: int = 0,
) -> List[ScheduleStep]:
    """Four equal gradient windows interleaved with X pulses on the two spectators.

    Only the target pair keeps a net coupling; its phase reaches ``total_phase``.
    ``J`` is indexed either by position within the block (4 x 4) or by qubit.
    """
    block = tuple(int(q) for q in block)
    if len(block) != BLOCK_SIZE or any(b2 - b1 != 1 for b1, b2 in zip(block, block[1:])):
        raise LayoutError(f"block {block} is not four contiguous qubits")
    first, second = sorted(target_pair)
    if first not in block or second not in block or first == second:
        raise LayoutError(f"target pair {target_pair} is not a pair inside block {block}")

    matrix = J.J if isinstance(J, CouplingMatrix) else np.asarray(J, dtype=float)
    if matrix.shape == (BLOCK_SIZE, BLOCK_SIZE):
        j_target = matrix[first - block[0], second - block[0]]
    else:
        j_target = matrix[first, second]
    if j_target == 0:
        raise NumericError(f"coupling of pair ({first}, {second}) is zero")

    duration = 2.0 * total_phase / j_target
    if duration < 0:
        raise NumericError(f"coupling of pair ({first}, {second}) has the wrong sign for phase {total_phase}")
    p, q = [k for k in block if k not in (first, second)]
    label = f"keep ({first},{second})"

    def window():
        return GradientWindow(stage=stage, label=label, b=b, duration=duration / 4)

    def pulse(k):
        return LocalPulse(stage=stage, label=label, qubit=k)

    return [
        window(), pulse(p),
        window(), pulse(p), pulse(q),
        window(), pulse(p),
        window(), pulse(p), pulse(q),
    ]


def signed_time_matrix(steps: Sequence[ScheduleStep], n: int) -> np.ndarray:
    """Net time each pair coupling accumulates, with X pulses flipping its sign."""
    signs = np.ones(n)
    total = np.zeros((n, n))
    for step in steps:
        if isinstance(step, GradientWindow):
            total += step.duration * np.outer(signs, signs)
        elif isinstance(step, LocalPulse):
            if not 0 <= step.qubit < n:
                raise ScheduleError(f"pulse on qubit {step.qubit} outside {n} qubits")
            signs[step.qubit] *= -1
    np.fill_diagonal(total, 0.0)
    return total


def steps_operator(steps: Sequence[ScheduleStep], J: np.ndarray, n: int) -> np.ndarray:
    """Dense unitary of windows and pulses acting on ``n`` qubits with coupling matrix J."""
    J = np.asarray(J, dtype=float)
    columns = []
    for index in range(2 ** n):
        state = spins.basis_state(n, index)
        for step in steps:
            if isinstance(step, GradientWindow):
                state = spins.apply_phase_evolution(state, J * step.duration / 2.0)
            elif isinstance(step, LocalPulse):
                state = spins.apply_pauli_x(state, step.qubit)
        columns.append(state.amplitudes)
    return np.column_stack(columns)


def _parallel(fragments: List[List[ScheduleStep]]) -> List[ScheduleStep]:
    """Merge equally timed fragments acting on disjoint blocks into one step list."""
    merged: List[ScheduleStep] = []
    for position in zip(*fragments):
        head = position[0]
        if isinstance(head, GradientWindow):
            if any(abs(step.duration - head.duration) > 1e-12 * head.duration for step in position):
                raise LayoutError("parallel fragments need equal window durations")
            merged.append(head.model_copy(update={"label": "; ".join(s.label for s in position)}))
        else:
            merged.extend(position)
    return merged


def assign_groups(groups: Sequence[Sequence[int]], first_well: int = 1) -> Tuple[int, ...]:
    """Consecutive wells for consecutive groups of ions, starting at ``first_well``."""
    wells = []
    for offset, group in enumerate(groups):
        wells.extend([first_well + offset] * len(group))
    return tuple(wells)


def _chain_groups(n: int, blocks: Sequence[int]) -> List[List[int]]:
    """Four-ion groups starting at ``blocks``, all other ions alone."""
    starts = set(blocks)
    groups, ion = [], 0
    while ion < n:
        if ion in starts:
            groups.append(list(range(ion, ion + BLOCK_SIZE)))
            ion += BLOCK_SIZE
        else:
            groups.append([ion])
            ion += 1
    return groups


def _stage_plan(rows: int) -> List[dict]:
    n = 2 * rows
    n_blocks = rows // 4
    plan = [
        {
            "label": "entangle nearest-neighbour pairs (2k, 2k+1)",
            "catalog": "pair",
            "groups": [[2 * p, 2 * p + 1] for p in range(n // 2)],
        },
        {
            "label": "entangle nearest-neighbour pairs (2k+1, 2k+2)",
            "catalog": "pair",
            "groups": [
                group
                for b in range(n_blocks)
                for group in (
                    [[8 * b]]
                    + [[8 * b + k, 8 * b + k + 1] for k in (1, 3, 5)]
                    + [[8 * b + 7]]
                )
            ],
        },
    ]
    for offset in (0, 2, 4):
        starts = [IONS_PER_BLOCK * b + offset for b in range(n_blocks)]
        plan.append({
            "label": "entangle third neighbours " + ", ".join(f"({s},{s + 3})" for s in starts),
            "catalog": "block",
            "groups": _chain_groups(n, starts),
            "fragments": [[(tuple(range(s, s + 4)), (s, s + 3))] for s in starts],
        })
    if n_blocks > 1:
        starts = [IONS_PER_BLOCK * b - 2 for b in range(1, n_blocks)]
        plan.append({
            "label": "merge blocks at " + ", ".join(f"({s + 1},{s + 2})" for s in starts),
            "catalog": "block",
            "groups": _chain_groups(n, starts),
            "fragments": [
                [(tuple(range(s, s + 4)), (s + 1, s + 2)), (tuple(range(s, s + 4)), (s, s + 3))] for s in starts
            ],
        })
    return plan


def wells_required(rows: int) -> int:
    """Catalog size for ``rows``: well 0 and one well past the last group stay free."""
    return max(len(stage["groups"]) for stage in _stage_plan(rows)) + 2


def _uniform_omega(catalog: WellCatalog, wells: Sequence[int], groups) -> float:
    used = sorted({wells[group[0]] for group in groups if len(group) > 1})
    omegas = np.array([catalog.omegas[w] for w in used])
    if np.any(np.abs(omegas - omegas[0]) > 1e-9 * omegas[0]):
        raise LayoutError(f"catalog '{catalog.name}' wells used together have different frequencies")
    return float(omegas[0])


def build_2d_schedule(
    rows: int,
    library: Optional[TrapLibrary] = None,
    b: float = 100.0,
    species: IonSpecies = YB171,
    qubit: Optional[QubitSpec] = None,
) -> PulseSchedule:
    """Transport schedule for an n x 2 cluster on 2n ions (n a multiple of 4)."""
    if rows < 4 or rows % 4:
        raise LayoutError(f"row count must be a positive multiple of 4, got {rows}")
    qubit = qubit or QubitSpec(species=species)
    library = library or default_trap_library(max(8, wells_required(rows)))
    n = 2 * rows

    catalogs = {"pair": library.get(library.pair_catalog), "block": library.get(library.block_catalog)}
    for role, catalog in catalogs.items():
        if catalog is None:
            raise LayoutError(f"trap library has no {role} catalog")

    steps: List[ScheduleStep] = []
    for index, stage in enumerate(_stage_plan(rows), start=1):
        catalog = catalogs[stage["catalog"]]
        wells = assign_groups(stage["groups"])
        if max(wells) >= catalog.size:
            raise LayoutError(f"stage {index} needs {max(wells) + 1} wells, catalog '{catalog.name}' has {catalog.size}")
        omega = _uniform_omega(catalog, wells, stage["groups"])

        if index > 1:
            steps.append(Transport(stage=index, label="separate and transport", duration=settings.transport_time))
        steps.append(AssignWells(stage=index, label=stage["label"], catalog=catalog.name, wells=wells))
        steps.append(RampMetadata(stage=index, duration=settings.ramp_time, direction="up"))

        if "fragments" not in stage:
            j_pair = isolated_couplings(2, omega, b, species, qubit)[0, 1]
            steps.append(GradientWindow(stage=index, label=stage["label"], b=b, duration=math.pi / (2 * j_pair)))
        else:
            J_block = isolated_couplings(BLOCK_SIZE, omega, b, species, qubit)
            for round_ in zip(*stage["fragments"]):
                steps.extend(_parallel([
                    recoupling_fragment(block, pair, J_block, b=b, stage=index) for block, pair in round_
                ]))
        steps.append(RampMetadata(stage=index, duration=settings.ramp_time, direction="down"))

    target = ladder_graph(rows)
    logger.info("compiled %d-row schedule: %d stages, %d steps", rows, steps[-1].stage, len(steps))
    return PulseSchedule(n_qubits=n, steps=tuple(steps), target_edges=tuple(target.sorted_edges()))


def stage_durations(schedule: PulseSchedule) -> Dict[int, float]:
    """Total gradient-window time per stage."""
    totals: Dict[int, float] = defaultdict(float)
    for step in schedule.steps:
        if isinstance(step, GradientWindow):
            totals[step.stage] += step.duration
    return dict(totals)


def lint_schedule(schedule: PulseSchedule, library: Optional[TrapLibrary] = None) -> List[str]:
    """Every violated schedule invariant, as readable messages."""
    problems: List[str] = []
    n = schedule.n_qubits
    steps = schedule.steps
    if not steps or not isinstance(steps[0], AssignWells):
        problems.append("first step must assign wells")
    explicit_ramps = any(isinstance(step, RampMetadata) for step in steps)
    assigned = False
    gradient_on = False

    for index, step in enumerate(steps):
        where = f"step {index} ({step.kind})"
        if isinstance(step, AssignWells):
            assigned = True
            if gradient_on:
                problems.append(f"{where}: wells reassigned while the gradient is on")
            if len(step.wells) != n:
                problems.append(f"{where}: {len(step.wells)} well indices for {n} ions")
            if any(b < a for a, b in zip(step.wells, step.wells[1:])):
                problems.append(f"{where}: well indices must not decrease along the chain")
            if library is not None:
                catalog = library.get(step.catalog)
                if catalog is None:
                    problems.append(f"{where}: unknown well catalog '{step.catalog}'")
                elif step.wells and (min(step.wells) < 0 or max(step.wells) >= catalog.size):
                    problems.append(f"{where}: well index outside catalog '{step.catalog}'")
        elif isinstance(step, GradientWindow):
            if not assigned:
                problems.append(f"{where}: gradient window before any well assignment")
            if explicit_ramps and not gradient_on:
                problems.append(f"{where}: gradient window while the gradient is ramped down")
        elif isinstance(step, Transport):
            if gradient_on:
                problems.append(f"{where}: transport while the gradient is on")
        elif isinstance(step, RampMetadata):
            gradient_on = step.direction == "up"
        elif isinstance(step, (LocalPulse, Measure)):
            if step.qubit >= n:
                problems.append(f"{where}: qubit {step.qubit} outside 0..{n - 1}")

    for a, b in schedule.target_edges:
        if a == b or not (0 <= a < n and 0 <= b < n):
            problems.append(f"target edge ({a}, {b}) invalid for {n} qubits")
    return problems


def subregisters(n: int) -> List[List[int]]:
    """Registers for wide schedules: each 4 x 2 block and ten qubits around each block boundary."""
    if n % IONS_PER_BLOCK:
        raise CapacityError(f"{n} qubits exceed the simulator capacity and do not split into 4 x 2 blocks")
    registers = [list(range(start, start + IONS_PER_BLOCK)) for start in range(0, n, IONS_PER_BLOCK)]
    registers += [list(range(edge - 5, edge + 5)) for edge in range(IONS_PER_BLOCK, n, IONS_PER_BLOCK)]
    return registers


class ScheduleExecutor:
    """Runs schedules against trap-derived couplings; ``ideal`` keeps only ions sharing a well."""

    def __init__(
        self,
        library: TrapLibrary,
        species: IonSpecies = YB171,
        qubit: Optional[QubitSpec] = None,
        mode: str = "ideal",
    ):
        if mode not in ("ideal", "residual"):
            raise ValueError(f"unknown execution mode '{mode}'")
        self.library = library
        self.species = species
        self.qubit = qubit or QubitSpec(species=species)
        self.mode = mode
        self._cache: Dict[tuple, np.ndarray] = {}

    def couplings(self, assignment: AssignWells, b: float) -> np.ndarray:
        key = (assignment.catalog, assignment.wells, b)
        if key not in self._cache:
            catalog = self.library.get(assignment.catalog)
            if catalog is None:
                raise ScheduleError(f"unknown well catalog '{assignment.catalog}'")
            if self.mode == "ideal":
                self._cache[key] = self._ideal(catalog, assignment.wells, b)
            else:
                self._cache[key] = self._residual(catalog, assignment.wells, b)
        return self._cache[key]

    def _groups(self, wells: Sequence[int]) -> Dict[int, List[int]]:
        groups: Dict[int, List[int]] = defaultdict(list)
        for ion, well in enumerate(wells):
            groups[well].append(ion)
        return groups

    def _ideal(self, catalog: WellCatalog, wells, b: float) -> np.ndarray:
        J = np.zeros((len(wells), len(wells)))
        for well, ions in self._groups(wells).items():
            if len(ions) > 1:
                J[np.ix_(ions, ions)] = isolated_couplings(len(ions), catalog.omegas[well], b, self.species, self.qubit)
        return J

    def _residual(self, catalog: WellCatalog, wells, b: float) -> np.ndarray:
        potential = IndividualWells(
            wells=tuple(Well(center=c, omega=w) for c, w in zip(catalog.centers, catalog.omegas))
        )
        guess = []
        for well, ions in sorted(self._groups(wells).items()):
            curvature = self.species.mass * catalog.omegas[well] ** 2
            half = 0.5 * statics.length_scale(self.species, curvature) * len(ions) ** 0.56
            guess.extend(catalog.centers[well] + np.linspace(-half, half, len(ions)))
        _, _, J = coupling.trap_couplings(
            potential, self.species, len(wells), self.qubit, MagneticField(gradient=b), guess
        )
        logger.debug("residual couplings for %s: suppression %.3g", wells, coupling.suppression_ratio(J, wells))
        return J.J

    def run(self, schedule: PulseSchedule, rng_seed: int = 0) -> Tuple[Optional[QuantumState], ExecutionReport]:
        problems = lint_schedule(schedule, self.library)
        if problems:
            raise ScheduleError("schedule violates its invariants", detail="; ".join(problems))

        n = schedule.n_qubits
        target = GraphSpec.from_edges(n, schedule.target_edges)
        report = ExecutionReport(
            mode=self.mode,
            n_qubits=n,
            target_edges=[list(e) for e in target.sorted_edges()],
            assumptions=list(ASSUMPTIONS),
            bit_convention=BIT_CONVENTION,
        )
        for step in schedule.steps:
            if isinstance(step, GradientWindow):
                report.gradient_time += step.duration
            elif isinstance(step, Transport):
                report.transport_time += step.duration
            elif isinstance(step, RampMetadata):
                report.ramp_time += step.duration
        report.wall_clock_estimate = report.gradient_time + report.transport_time + report.ramp_time

        rng = np.random.default_rng(rng_seed)
        if n <= settings.max_qubits:
            state = self._run_register(schedule, list(range(n)), target, report, rng, record=True)
            report.stabilizers = report.registers[0].stabilizers
            report.fidelity = report.registers[0].fidelity
            return state, report

        if any(isinstance(step, Measure) for step in schedule.steps):
            raise ScheduleError(f"measurements on {n} qubits need a single register")
        report.assumptions.append(
            "wide schedule simulated on sub-registers; couplings to qubits outside a register are dropped"
        )
        for qubits in subregisters(n):
            self._run_register(schedule, qubits, target, report, rng, record=False)
        report.stabilizers = _merge_stabilizers(target, report.registers)
        report.fidelity = min(r.fidelity for r in report.registers)
        return None, report

    def _run_register(self, schedule, qubits, target, report, rng, record) -> QuantumState:
        local = {q: i for i, q in enumerate(qubits)}
        state = spins.plus_state(len(qubits))
        assignment = None
        for step in schedule.steps:
            if isinstance(step, AssignWells):
                assignment = step
            elif isinstance(step, GradientWindow):
                J = self.couplings(assignment, step.b)[np.ix_(qubits, qubits)]
                theta = J * step.duration / 2.0
                state = spins.apply_phase_evolution(state, theta)
                if record:
                    report.step_phases.append(
                        StepPhases(stage=step.stage, label=step.label, duration=step.duration, theta=theta.tolist())
                    )
            elif isinstance(step, LocalPulse) and step.qubit in local:
                state = spins.apply_pauli_x(state, local[step.qubit])
            elif isinstance(step, Measure):
                outcome, state = spins.measure_qubit(state, local[step.qubit], step.basis, rng)
                report.measurements.append({"qubit": step.qubit, "basis": step.basis, "outcome": outcome})

        graph = target.induced(qubits)
        state = spins.apply_degree_corrections(state, graph)
        report.registers.append(
            RegisterResult(
                qubits=list(qubits),
                stabilizers=spins.stabilizer_expectations(state, graph).tolist(),
                fidelity=spins.fidelity(state, spins.graph_state(graph)),
            )
        )
        return state


def _merge_stabilizers(target: GraphSpec, registers: List[RegisterResult]) -> List[float]:
    """Take each stabilizer from a register holding the vertex and all its neighbours."""
    values = []
    for vertex in range(target.n):
        closed = {vertex, *target.neighbors(vertex)}
        for register in registers:
            if closed <= set(register.qubits):
                values.append(register.stabilizers[register.qubits.index(vertex)])
                break
        else:
            raise CapacityError(f"no register contains the neighbourhood of qubit {vertex}")
    return values


def execute_schedule(
    schedule: PulseSchedule,
    library: TrapLibrary,
    species: IonSpecies = YB171,
    qubit: Optional[QubitSpec] = None,
    mode: str = "ideal",
    rng_seed: int = 0,
) -> Tuple[Optional[QuantumState], ExecutionReport]:
    return ScheduleExecutor(library, species, qubit, mode).run(schedule, rng_seed)


def stage_phase_table(report: ExecutionReport) -> pd.DataFrame:
    """One row per gradient window and coupled pair, with the accumulated Theta in rad."""
    rows = []
    for window, phases in enumerate(report.step_phases):
        theta = np.asarray(phases.theta)
        for n, m in zip(*np.triu_indices(theta.shape[0], k=1)):
            rows.append({
                "window": window,
                "stage": phases.stage,
                "label": phases.label,
                "duration_s": phases.duration,
                "n": int(n),
                "m": int(m),
                "theta_rad": float(theta[n, m]),
            })
    return pd.DataFrame(rows, columns=["window", "stage", "label", "duration_s", "n", "m", "theta_rad"])


def _column_graph(n_rows: int) -> GraphSpec:
    """Old column on qubits 0..n-1, fresh column on n..2n-1: rungs plus the fresh column's chain."""
    edges = [(r, n_rows + r) for r in range(n_rows)]
    edges += [(n_rows + r, n_rows + r + 1) for r in range(n_rows - 1)]
    return GraphSpec.from_edges(2 * n_rows, edges)


def simulate_column_reuse(
    gate_bases: Sequence[Sequence[Union[str, float]]],
    n_rows: int,
    rng_seed: int,
    input_state: Optional[QuantumState] = None,
) -> ColumnReuseTranscript:
    """Simulate an n x m cluster on n x 2 qubits by measuring and re-preparing one column."""
    if 2 * n_rows > settings.max_qubits:
        raise CapacityError(f"{n_rows} rows need {2 * n_rows} qubits, capacity is {settings.max_qubits}")
    state = input_state if input_state is not None else spins.graph_state(path_graph(n_rows))
    if state.n != n_rows:
        raise DimensionMismatchError(f"input state has {state.n} qubits for {n_rows} rows")

    rng = np.random.default_rng(rng_seed)
    graph = _column_graph(n_rows)
    theta = graph.adjacency() * (math.pi / 4)
    columns = []
    for angles in gate_bases:
        if len(angles) != n_rows:
            raise DimensionMismatchError(f"{len(angles)} measurement bases for {n_rows} rows")
        register = spins.tensor(spins.plus_state(n_rows), state)
        register = spins.apply_phase_evolution(register, theta)
        register = spins.apply_degree_corrections(register, graph)
        outcomes = []
        for basis in angles:
            outcome, register = spins.measure_and_discard(register, 0, basis, rng)
            outcomes.append(outcome)
        state = register
        columns.append(
            ColumnRecord(
                angles=[_angle(basis) for basis in angles],
                outcomes=outcomes,
                byproducts=["X" if o < 0 else "I" for o in outcomes],
            )
        )
    logger.debug("column reuse over %d columns of %d rows", len(columns), n_rows)
    return ColumnReuseTranscript(n_rows=n_rows, seed=rng_seed, columns=columns, final_state=state)


def _angle(basis: Union[str, float]) -> float:
    if basis == "X":
        return 0.0
    if basis == "Y":
        return math.pi / 2
    if isinstance(basis, str):
        raise ValueError(f"basis '{basis}' removes the qubit from the cluster; use X, Y or an angle")
    return float(basis)


def predict_column_state(input_state: QuantumState, columns: Sequence[ColumnRecord]) -> QuantumState:
    """Expected surviving column: per row P(-a), H, then X^s, followed by the vertical CZs."""
    state = input_state
    for record in columns:
        for row, (angle, byproduct) in enumerate(zip(record.angles, record.byproducts)):
            state = spins.apply_local_z_rotation(state, row, angle / 2)
            state = spins.apply_hadamard(state, row)
            if byproduct == "X":
                state = spins.apply_pauli_x(state, row)
        for row in range(state.n - 1):
            state = spins.apply_cz(state, row, row + 1)
    return state


def schedule_to_dict(schedule: PulseSchedule) -> dict:
    return {
        "n_qubits": schedule.n_qubits,
        "target_edges": [list(edge) for edge in schedule.target_edges],
        "steps": [step.model_dump(mode="json") for step in schedule.steps],
        "bit_convention": BIT_CONVENTION,
    }


def schedule_from_dict(data: dict) -> PulseSchedule:
    try:
        return PulseSchedule.model_validate({k: v for k, v in data.items() if k not in ("bit_convention", "units")})
    except ValidationError as exc:
        raise ScheduleError("invalid schedule file", detail=describe_validation_error(exc))


def library_to_dict(library: TrapLibrary) -> dict:
    return {
        "catalogs": [catalog.to_file_dict() for _, catalog in sorted(library.catalogs.items())],
        "pair_catalog": library.pair_catalog,
        "block_catalog": library.block_catalog,
    }


def library_from_dict(data: dict) -> TrapLibrary:
    try:
        catalogs = [WellCatalog.from_file_dict(entry) for entry in data["catalogs"]]
        return TrapLibrary(
            catalogs={catalog.name: catalog for catalog in catalogs},
            pair_catalog=data.get("pair_catalog", "pairs_200k"),
            block_catalog=data.get("block_catalog", "block4_200k"),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"trap library is missing field {exc}")
    except ValidationError as exc:
        raise ConfigError("invalid trap library", detail=describe_validation_error(exc))
