#!/usr/bin/env python3
"""
Tests for crystal equilibria, Hessians and normal modes
"""

import math

import numpy as np
import pytest
from scipy.optimize import minimize

from ionspin.models.trap import GlobalHarmonic, IndividualWells, Well
from ionspin.services import potentials, statics
from ionspin.utils.config import settings
from ionspin.utils.errors import ConfinementError, ConvergenceError, SingularityError, UnstableCrystalError

TWO_PI = 2 * math.pi
OMEGA = TWO_PI * 200e3


def test_single_ion_sits_at_the_trap_center(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA, center=5e-6), yb, 1)
    assert crystal.positions[0] == pytest.approx(5e-6, abs=1e-12)


def test_two_ion_separation_matches_closed_form(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 2)
    kappa = statics.coulomb_constant(yb)
    expected = (2 * kappa / (yb.mass * OMEGA ** 2)) ** (1 / 3)
    assert crystal.z[1] - crystal.z[0] == pytest.approx(expected, rel=1e-8)
    assert crystal.z.mean() == pytest.approx(0.0, abs=1e-12)


def test_equilibrium_matches_brute_force_minimisation(yb):
    """Dimensionless energy sum u^2/2 + sum 1/|u_i - u_j| minimised independently"""
    n = 5
    scale = statics.length_scale(yb, yb.mass * OMEGA ** 2)

    def energy(u):
        gaps = np.abs(u[:, None] - u[None, :])[np.triu_indices(n, k=1)]
        return 0.5 * np.sum(u ** 2) + np.sum(1.0 / gaps)

    oracle = minimize(energy, np.linspace(-2.0, 2.0, n), method="BFGS", options={"gtol": 1e-12})
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, n)

    np.testing.assert_allclose(crystal.z / scale, np.sort(oracle.x), rtol=1e-7, atol=1e-7)


def test_ions_keep_their_order(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 8, initial_guess=np.linspace(-3e-5, 3e-5, 8))
    assert np.all(np.diff(crystal.z) > 0)
    assert crystal.count == 8


def test_ions_settle_in_distant_wells(yb):
    wells = IndividualWells(wells=(Well(center=-300e-6, omega=TWO_PI * 1e6), Well(center=300e-6, omega=TWO_PI * 1e6)))
    crystal = statics.solve_equilibrium(wells, yb, 2)
    np.testing.assert_allclose(crystal.z, [-300e-6, 300e-6], atol=1e-6)


def test_initial_guess_length_is_checked(yb):
    with pytest.raises(ValueError):
        statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 3, initial_guess=[0.0, 1e-5])


def test_non_confining_potential_is_reported(yb):
    """Equal positive voltages on every segment put a maximum at the trap centre"""
    repelling = potentials.voltage_preset("uniform_200k").model_copy(update={"voltages": (1.0,) * 17})
    with pytest.raises(ConfinementError):
        statics.solve_equilibrium(repelling, yb, 3)


def test_two_ion_modes_are_com_and_stretch(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 2)
    modes = statics.crystal_modes(crystal)
    np.testing.assert_allclose(modes.frequencies, [OMEGA, math.sqrt(3) * OMEGA], rtol=1e-8)
    np.testing.assert_allclose(np.abs(modes.mode_matrix), np.full((2, 2), 1 / math.sqrt(2)), rtol=1e-8)


def test_lowest_modes_of_a_long_chain(yb):
    """Centre-of-mass and breathing frequencies do not depend on the ion number"""
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 8)
    modes = statics.crystal_modes(crystal)
    assert modes.frequencies[0] == pytest.approx(OMEGA, rel=1e-7)
    assert modes.frequencies[1] == pytest.approx(math.sqrt(3) * OMEGA, rel=1e-7)
    assert np.all(np.diff(modes.frequencies) > 0)


def test_mode_matrix_is_orthonormal_with_fixed_signs(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 6)
    D = statics.crystal_modes(crystal).mode_matrix
    np.testing.assert_allclose(D @ D.T, np.eye(6), atol=1e-10)
    for row in D:
        lead = np.argmax(np.abs(row) >= np.abs(row).max() - 1e-12)
        assert row[lead] > 0


def test_hessian_rows_sum_to_trap_curvature(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 4)
    A = statics.hessian(crystal)
    np.testing.assert_allclose(A, A.T)
    np.testing.assert_allclose(A.sum(axis=1), yb.mass * OMEGA ** 2, rtol=1e-9)


def test_coincident_ions_are_singular(yb):
    with pytest.raises(SingularityError):
        statics.hessian_at(np.array([0.0, 1e-10]), GlobalHarmonic(nu1=OMEGA), yb)


def test_unstable_hessian_is_rejected():
    with pytest.raises(UnstableCrystalError):
        statics.normal_modes(np.array([[1.0, 0.0], [0.0, -1.0]]), mass=1.0)


def test_modes_report_uses_hertz(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 2)
    report = statics.modes_report(crystal, statics.crystal_modes(crystal))
    assert report["frequencies_hz"][0] == pytest.approx(200e3, rel=1e-8)
    assert len(report["positions_m"]) == 2


def test_three_ion_positions_match_closed_form(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 3)
    scale = statics.length_scale(yb, yb.mass * OMEGA ** 2)
    edge = (5 / 4) ** (1 / 3)
    np.testing.assert_allclose(crystal.z / scale, [-edge, 0.0, edge], rtol=1e-9, atol=1e-9)
    assert crystal.converged


def test_three_ion_breathing_modes(yb):
    crystal = statics.solve_equilibrium(GlobalHarmonic(nu1=OMEGA), yb, 3)
    modes = statics.crystal_modes(crystal)
    expected = [OMEGA, math.sqrt(3) * OMEGA, math.sqrt(29 / 5) * OMEGA]
    np.testing.assert_allclose(modes.frequencies, expected, rtol=1e-8)


def test_solver_refuses_a_stop_above_the_force_tolerance(yb, monkeypatch):
    wells = IndividualWells(
        wells=(
            Well(center=-20e-6, omega=TWO_PI * 1.1e6),
            Well(center=0.0, omega=TWO_PI * 0.9e6),
            Well(center=25e-6, omega=TWO_PI * 1.3e6),
        )
    )
    assert statics.solve_equilibrium(wells, yb, 3).converged
    monkeypatch.setattr(settings, "solver_tolerance", 0.0)
    with pytest.raises(ConvergenceError):
        statics.solve_equilibrium(wells, yb, 3)
