#!/usr/bin/env python3
"""
Tests for recoupling fragments, transport schedules and their execution
"""

import math
from collections import Counter

import numpy as np
import pytest

from ionspin.models.schedule import AssignWells, GradientWindow, PulseSchedule, TrapLibrary, WellCatalog
from ionspin.models.report import ColumnRecord
from ionspin.models.state import grid_graph, ladder_graph, path_graph
from ionspin.services import sequences, spins
from ionspin.utils.errors import CapacityError, ConfigError, LayoutError, ScheduleError

OMEGA = 2 * math.pi * 200e3


@pytest.fixture(scope="module")
def block_couplings():
    return sequences.isolated_couplings(4, OMEGA, 100.0)


@pytest.fixture(scope="module")
def schedule_4x2():
    return sequences.build_2d_schedule(4)


def test_default_library_spacing(library):
    catalog = library.get(library.pair_catalog)
    assert catalog.size == 8
    gaps = np.diff(catalog.centers)
    np.testing.assert_allclose(gaps, [230e-6, 260e-6, 260e-6, 260e-6, 260e-6, 259e-6, 231e-6])
    assert sum(catalog.centers) == pytest.approx(0.0, abs=1e-15)
    assert library.get(library.block_catalog).centers == catalog.centers


def test_default_library_grows_with_the_middle_spacing():
    catalog = sequences.default_trap_library(12).get("pairs_200k")
    gaps = np.diff(catalog.centers)
    assert gaps[0] == pytest.approx(230e-6)
    assert gaps[-1] == pytest.approx(231e-6)
    assert catalog.size == 12


def test_fragment_keeps_only_the_target_pair(block_couplings):
    steps = sequences.recoupling_fragment(range(4), (0, 3), block_couplings)
    times = sequences.signed_time_matrix(steps, 4)
    expected_t = 2 * (math.pi / 4) / block_couplings[0, 3]
    assert times[0, 3] == pytest.approx(expected_t)
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 3] = mask[3, 0] = False
    assert np.all(np.abs(times[mask]) <= 1e-15)


def test_fragment_unitary_is_a_single_zz_phase(block_couplings):
    steps = sequences.recoupling_fragment(range(4), (1, 2), block_couplings)
    U = sequences.steps_operator(steps, block_couplings, 4)
    s = spins.z_signs(4)
    expected = np.diag(np.exp(1j * (math.pi / 4) * s[:, 1] * s[:, 2]))
    np.testing.assert_allclose(U, expected, atol=1e-12)


def test_fragment_layout_errors(block_couplings):
    with pytest.raises(LayoutError):
        sequences.recoupling_fragment((0, 1, 3, 4), (0, 3), block_couplings)
    with pytest.raises(LayoutError):
        sequences.recoupling_fragment(range(4), (0, 5), block_couplings)


def test_fragment_accepts_qubit_indexed_couplings():
    J = np.zeros((8, 8))
    J[4:, 4:] = sequences.isolated_couplings(4, OMEGA, 100.0)
    steps = sequences.recoupling_fragment(range(4, 8), (4, 7), J)
    assert sum(step.duration for step in steps if isinstance(step, GradientWindow)) == pytest.approx(
        math.pi / (2 * J[4, 7])
    )


def test_schedule_has_five_stages_and_the_ladder_target(schedule_4x2, library):
    assert schedule_4x2.n_qubits == 8
    assert schedule_4x2.stages == [1, 2, 3, 4, 5]
    assert list(schedule_4x2.target_edges) == ladder_graph(4).sorted_edges()
    assert sequences.lint_schedule(schedule_4x2, library) == []


def test_stage_gate_times(schedule_4x2):
    durations = sequences.stage_durations(schedule_4x2)
    j_pair = sequences.isolated_couplings(2, OMEGA, 100.0)[0, 1]
    j_outer = sequences.isolated_couplings(4, OMEGA, 100.0)[0, 3]
    for stage in (1, 2):
        assert durations[stage] == pytest.approx(math.pi / (2 * j_pair))
        assert durations[stage] == pytest.approx(0.52e-3, rel=0.05)
    for stage in (3, 4, 5):
        assert durations[stage] == pytest.approx(math.pi / (2 * j_outer))
        assert durations[stage] == pytest.approx(1.3e-3, rel=0.05)


def test_first_stage_pairs_share_wells(schedule_4x2):
    assignment = next(step for step in schedule_4x2.steps if isinstance(step, AssignWells))
    assert assignment.wells == (1, 1, 2, 2, 3, 3, 4, 4)


def test_row_count_must_be_a_multiple_of_four():
    with pytest.raises(LayoutError):
        sequences.build_2d_schedule(6)


def test_library_without_block_catalog_is_rejected(library):
    pairs = library.get(library.pair_catalog)
    with pytest.raises(LayoutError):
        sequences.build_2d_schedule(4, TrapLibrary(catalogs={pairs.name: pairs}))


def test_mixed_well_frequencies_are_rejected(library):
    pairs = library.get(library.pair_catalog)
    omegas = list(pairs.omegas)
    omegas[2] *= 1.1
    uneven = pairs.model_copy(update={"omegas": tuple(omegas)})
    with pytest.raises(LayoutError):
        sequences.build_2d_schedule(4, TrapLibrary(catalogs={uneven.name: uneven, "block4_200k": library.get("block4_200k")}))


def test_ideal_execution_prepares_the_cluster(schedule_4x2, library):
    state, report = sequences.execute_schedule(schedule_4x2, library, mode="ideal")
    assert min(report.stabilizers) >= 1 - 1e-9
    assert report.fidelity == pytest.approx(1.0, abs=1e-9)
    assert spins.fidelity(state, spins.graph_state(ladder_graph(4))) == pytest.approx(1.0, abs=1e-9)
    assert report.wall_clock_estimate > report.gradient_time > 0
    assert report.assumptions


def test_stage_phase_table_lists_every_window(schedule_4x2, library):
    _, report = sequences.execute_schedule(schedule_4x2, library, mode="ideal")
    table = sequences.stage_phase_table(report)
    windows = table.drop_duplicates("window")
    assert len(windows) == len(report.step_phases)
    assert len(table) == len(windows) * 8 * 7 // 2
    assert (table["n"] < table["m"]).all()
    per_stage = windows.groupby("stage")["duration_s"].sum().to_dict()
    assert per_stage == pytest.approx(sequences.stage_durations(schedule_4x2))


def test_over_rotated_first_stage_lowers_fidelity_predictably(schedule_4x2, library):
    """Four disjoint edges each over-rotated by delta give fidelity cos(delta)^8"""
    steps = [
        step.model_copy(update={"duration": step.duration * 1.01})
        if isinstance(step, GradientWindow) and step.stage == 1
        else step
        for step in schedule_4x2.steps
    ]
    perturbed = PulseSchedule(n_qubits=8, steps=tuple(steps), target_edges=schedule_4x2.target_edges)
    _, report = sequences.execute_schedule(perturbed, library, mode="ideal")
    delta = 0.01 * math.pi / 4
    assert report.fidelity == pytest.approx(math.cos(delta) ** 8, rel=1e-9)


def test_residual_execution_stays_close(schedule_4x2, library):
    _, report = sequences.execute_schedule(schedule_4x2, library, mode="residual")
    assert report.fidelity >= 0.99
    assert len(report.step_phases) == sum(isinstance(s, GradientWindow) for s in schedule_4x2.steps)


def test_wide_schedule_runs_on_subregisters():
    schedule = sequences.build_2d_schedule(8)
    library = sequences.default_trap_library(sequences.wells_required(8))
    state, report = sequences.execute_schedule(schedule, library, mode="ideal")
    assert state is None
    assert len(report.stabilizers) == 16
    assert min(report.stabilizers) >= 1 - 1e-9
    assert report.fidelity == pytest.approx(1.0, abs=1e-9)


def test_subregisters():
    assert sequences.subregisters(16) == [list(range(8)), list(range(8, 16)), list(range(3, 13))]
    with pytest.raises(CapacityError):
        sequences.subregisters(20)


def test_lint_reports_window_before_assignment(library):
    schedule = PulseSchedule(n_qubits=2, steps=(GradientWindow(b=100.0, duration=1e-3),))
    assert sequences.lint_schedule(schedule, library)
    with pytest.raises(ScheduleError):
        sequences.execute_schedule(schedule, library)


def test_unknown_execution_mode(library):
    with pytest.raises(ValueError):
        sequences.ScheduleExecutor(library, mode="noisy")


def test_schedule_file_errors():
    with pytest.raises(ScheduleError):
        sequences.schedule_from_dict({"n_qubits": 2, "steps": [{"kind": "teleport"}]})
    with pytest.raises(ConfigError):
        sequences.library_from_dict({"pair_catalog": "pairs_200k"})


def test_schedule_and_library_files_restore(schedule_4x2, library):
    restored = sequences.schedule_from_dict(sequences.schedule_to_dict(schedule_4x2))
    assert restored == schedule_4x2
    catalogs = sequences.library_from_dict(sequences.library_to_dict(library)).catalogs
    np.testing.assert_allclose(catalogs["pairs_200k"].omegas, library.catalogs["pairs_200k"].omegas)


def test_column_reuse_matches_the_teleportation_prediction():
    bases = [["X", "X", "X"], [0.3, "Y", 1.1], [-0.7, 2.0, "X"]]
    transcript = sequences.simulate_column_reuse(bases, 3, rng_seed=5)
    predicted = sequences.predict_column_state(spins.graph_state(path_graph(3)), transcript.columns)
    assert transcript.final_state.n == 3
    assert len(transcript.columns) == 3
    assert spins.fidelity(transcript.final_state, predicted) == pytest.approx(1.0, abs=1e-10)


def test_column_reuse_is_seeded():
    bases = [[0.4, 0.4]] * 3
    first = sequences.simulate_column_reuse(bases, 2, rng_seed=9)
    again = sequences.simulate_column_reuse(bases, 2, rng_seed=9)
    assert [c.outcomes for c in first.columns] == [c.outcomes for c in again.columns]
    for column in first.columns:
        assert column.byproducts == ["X" if o < 0 else "I" for o in column.outcomes]


def test_column_reuse_checks_its_inputs():
    with pytest.raises(ValueError):
        sequences.simulate_column_reuse([["Z", "X"]], 2, rng_seed=0)
    with pytest.raises(CapacityError):
        sequences.simulate_column_reuse([["X"] * 8], 8, rng_seed=0)


def _direct_cluster_run(bases, seed):
    """Measure the first columns of a full 2 x 3 cluster in place"""
    state = spins.graph_state(grid_graph(2, 3))
    rng = np.random.default_rng(seed)
    outcomes = []
    for basis in (b for column in bases for b in column):
        outcome, state = spins.measure_and_discard(state, 0, basis, rng)
        outcomes.append(outcome)
    return outcomes, state


def test_column_reuse_agrees_with_the_full_cluster():
    """Three columns on two rows: reuse and the full 2 x 3 cluster give the same outcome statistics"""
    bases = [[0.3, "Y"], ["X", 1.1]]
    reuse, direct = Counter(), Counter()
    for seed in range(2000):
        transcript = sequences.simulate_column_reuse(bases, 2, rng_seed=seed)
        reuse[tuple(o for column in transcript.columns for o in column.outcomes)] += 1
        outcomes, final = _direct_cluster_run(bases, seed)
        direct[tuple(outcomes)] += 1
        if seed < 50:
            records = [
                ColumnRecord(
                    angles=column.angles,
                    outcomes=outcomes[2 * k:2 * k + 2],
                    byproducts=["X" if o < 0 else "I" for o in outcomes[2 * k:2 * k + 2]],
                )
                for k, column in enumerate(transcript.columns)
            ]
            predicted = sequences.predict_column_state(spins.graph_state(path_graph(2)), records)
            assert spins.fidelity(final, predicted) == pytest.approx(1.0, abs=1e-10)
    for pattern in set(reuse) | set(direct):
        assert reuse[pattern] / 2000 == pytest.approx(direct[pattern] / 2000, abs=0.04)
