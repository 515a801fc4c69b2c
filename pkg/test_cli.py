#!/usr/bin/env python3
"""
Tests for the ionspin command line: outputs, exit codes and determinism
"""

import json
import math

import pandas as pd
import pytest
from scipy import constants

from ionspin.main import main
from ionspin.services import coupling
from ionspin.models.trap import MICROTRAP_GEOMETRY, YB171, MagneticField, QubitSpec
from ionspin.utils.config import settings
from ionspin.utils.errors import NumericError
from ionspin.utils.output import OutputWriter, write_run_report


def _write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def two_ion_config(tmp_path):
    return _write(tmp_path / "couplings.json", {
        "potential": {"variant": "global_harmonic", "nu1_hz": 200e3},
        "ions": 2,
        "gradient_t_per_m": 100.0,
    })


def test_couplings_command_writes_its_files(two_ion_config, out_dir):
    assert main(["couplings", "--config", two_ion_config, "--out", str(out_dir)]) == 0

    for name in ("couplings.csv", "couplings.json", "modes.json", "run_report.json"):
        assert (out_dir / name).exists()

    report = json.loads((out_dir / "couplings.json").read_text())
    eps = coupling.frequency_gradient(QubitSpec(), MagneticField(gradient=100.0))
    expected = constants.hbar * eps ** 2 / (6 * YB171.mass * (2 * math.pi * 200e3) ** 2)
    assert report["J_rad_per_s"][0][1] == pytest.approx(expected, rel=1e-8)
    assert report["units"]

    table = pd.read_csv(out_dir / "couplings.csv")
    assert list(table.columns) == ["n", "m", "J_rad_per_s"]
    assert len(table) == 4

    run = json.loads((out_dir / "run_report.json").read_text())
    assert two_ion_config in run["input_hashes"]
    assert str(out_dir / "couplings.json") in run["outputs"]


def test_outputs_are_byte_identical_across_runs(two_ion_config, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["couplings", "--config", two_ion_config, "--out", str(first)]) == 0
    assert main(["couplings", "--config", two_ion_config, "--out", str(second)]) == 0
    for name in ("couplings.csv", "couplings.json", "modes.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_rerun_reproduces_every_file_byte_for_byte(two_ion_config, out_dir, monkeypatch):
    monkeypatch.setattr(settings, "record_wall_clock", False)
    names = ("couplings.csv", "couplings.json", "modes.json", "run_report.json")
    assert main(["couplings", "--config", two_ion_config, "--out", str(out_dir)]) == 0
    first = {name: (out_dir / name).read_bytes() for name in names}
    assert main(["couplings", "--config", two_ion_config, "--out", str(out_dir)]) == 0
    assert {name: (out_dir / name).read_bytes() for name in names} == first
    assert json.loads(first["run_report.json"])["wall_clock"] is None


def test_zero_gradient_gives_a_zero_matrix(tmp_path, out_dir):
    config = _write(tmp_path / "flat.json", {
        "potential": {"variant": "global_harmonic", "nu1_hz": 200e3},
        "ions": 3,
        "gradient_t_per_m": 0.0,
    })
    assert main(["couplings", "--config", config, "--out", str(out_dir)]) == 0
    report = json.loads((out_dir / "couplings.json").read_text())
    assert all(value == 0 for row in report["J_rad_per_s"] for value in row)


def test_malformed_json_exits_2_without_outputs(tmp_path, out_dir):
    path = tmp_path / "broken.json"
    path.write_text('{"potential": {"variant": ')
    assert main(["couplings", "--config", str(path), "--out", str(out_dir)]) == 2
    assert not out_dir.exists()


def test_invalid_config_exits_2(tmp_path, out_dir):
    config = _write(tmp_path / "extra.json", {
        "potential": {"variant": "global_harmonic", "nu1_hz": 200e3},
        "ions": 2,
        "colour": "blue",
    })
    assert main(["couplings", "--config", config, "--out", str(out_dir)]) == 2
    assert main(["modes", "--out", str(out_dir)]) == 2
    assert not out_dir.exists()


def test_unreadable_files_exit_2(tmp_path, out_dir):
    assert main(["couplings", "--config", str(tmp_path / "absent.json"), "--out", str(out_dir)]) == 2
    config = _write(tmp_path / "segmented.json", {
        "potential": {
            "variant": "segmented",
            "geometry": MICROTRAP_GEOMETRY.model_dump(),
            "voltages": [0.0] * MICROTRAP_GEOMETRY.segment_count,
            "basis": {"kind": "tabulated", "path": "no_such_basis.csv"},
        },
        "ions": 2,
    })
    assert main(["couplings", "--config", config, "--out", str(out_dir)]) == 2
    assert not out_dir.exists()


def test_non_finite_output_is_refused_before_writing(out_dir):
    writer = OutputWriter(str(out_dir))
    with pytest.raises(NumericError):
        writer.json("bad.json", {"J_rad_per_s": [[0.0, math.nan], [math.nan, 0.0]]})
    assert not out_dir.exists()
    assert writer.written == []


def test_run_report_records_non_finite_metrics_as_null(out_dir):
    writer = OutputWriter(str(out_dir))
    write_run_report(writer, ["periodic", "search"], {}, {"residual": math.inf, "best": [1.0, math.nan]}, 0.0)
    report = json.loads((out_dir / "run_report.json").read_text())
    assert report["metrics"] == {"residual": None, "best": [1.0, None]}


def test_usage_errors_exit_2(out_dir):
    assert main(["teleport"]) == 2
    assert main(["reproduce", "nonsense", "--out", str(out_dir)]) == 2
    assert main(["periodic", "search", "--preset", "triangle", "--seed", "-1", "--out", str(out_dir)]) == 2


def test_modes_and_wells_commands(tmp_path, out_dir):
    modes = _write(tmp_path / "modes.json", {
        "potential": {"variant": "global_harmonic", "nu1_hz": 200e3},
        "ions": 3,
    })
    assert main(["modes", "--config", modes, "--out", str(out_dir)]) == 0
    report = json.loads((out_dir / "modes.json").read_text())
    assert report["frequencies_hz"][0] == pytest.approx(200e3, rel=1e-7)

    wells = _write(tmp_path / "wells.json", {
        "potential": {
            "variant": "individual_wells",
            "wells": [{"center": -1e-4, "omega_hz": 300e3}, {"center": 1e-4, "omega_hz": 500e3}],
        },
        "z_range_m": [-2e-4, 2e-4],
    })
    assert main(["wells", "--config", wells, "--out", str(out_dir)]) == 0
    table = pd.read_csv(out_dir / "wells.csv")
    assert table["frequency_hz"].tolist() == pytest.approx([300e3, 500e3], rel=1e-6)


def test_schedule_build_and_run(out_dir):
    assert main(["schedule", "build", "--rows", "4", "--out", str(out_dir)]) == 0
    schedule = json.loads((out_dir / "schedule.json").read_text())
    assert schedule["n_qubits"] == 8

    run_dir = out_dir / "run"
    assert main(["schedule", "run", str(out_dir / "schedule.json"), "--mode", "ideal", "--out", str(run_dir)]) == 0
    execution = json.loads((run_dir / "execution.json").read_text())
    assert execution["fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert (run_dir / "state.json").exists()
    phases = pd.read_csv(run_dir / "stage_phases.csv")
    assert list(phases.columns) == ["window", "stage", "label", "duration_s", "n", "m", "theta_rad"]
    assert set(phases["stage"]) == {1, 2, 3, 4, 5}


def test_schedule_build_rejects_bad_rows(out_dir):
    assert main(["schedule", "build", "--rows", "5", "--out", str(out_dir)]) == 2


def test_periodic_search_preset(out_dir):
    assert main(["periodic", "search", "--preset", "triangle", "--budget", "4", "--seed", "7", "--out", str(out_dir)]) == 0
    result = json.loads((out_dir / "search_result.json").read_text())
    assert result["seed"] == 7
    assert result["evaluations"] == 4


def test_periodic_search_needs_a_problem(out_dir):
    assert main(["periodic", "search", "--out", str(out_dir)]) == 2


def test_reproduce_single_well(out_dir):
    assert main(["reproduce", "single_well", "--out", str(out_dir)]) == 0
    summary = pd.read_csv(out_dir / "summary.csv")
    assert summary["passed"].all()
    assert (out_dir / "single_well_couplings.csv").exists()


@pytest.mark.parametrize("target", ["soft_pair", "triangle", "path4", "transport", "wells"])
def test_reproduce_targets_pass(target, out_dir):
    assert main(["reproduce", target, "--out", str(out_dir)]) == 0
    summary = pd.read_csv(out_dir / "summary.csv")
    assert set(summary["target"]) == {target}
    assert summary["passed"].all()


@pytest.mark.parametrize("alias, target", [
    ("fig3", "single_well"), ("table2", "soft_pair"), ("eq10", "triangle"), ("eq13", "path4"),
])
def test_reproduce_accepts_target_aliases(alias, target, out_dir):
    assert main(["reproduce", alias, "--out", str(out_dir)]) == 0
    summary = pd.read_csv(out_dir / "summary.csv")
    assert set(summary["target"]) == {target}
