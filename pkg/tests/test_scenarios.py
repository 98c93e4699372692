import math

import numpy as np
import pytest

from src.core.config import RunConfig, TimingConfig
from src.core.exceptions import ConfigError
from src.core.factories import ScenarioFactory
from src.app.scenarios import central_square_half_width, pulse_oriented_axis
from src.physics.cycle import CycleParams
from src.theory.segmentation import segment_regions


def _run(name, timing=None, **params):
    config = RunConfig(timing=timing or TimingConfig(), scenario_params=params)
    return ScenarioFactory.create_scenario(name, config).run()


def _table(result, name):
    return next(table for table in result.tables if table.name == name)


def test_all_scenarios_registered():
    assert set(ScenarioFactory.get_registered_scenarios()) >= {
        "cycle-properties", "linear-ramp", "ramp-rate-map", "harmonic",
        "return-to-origin", "continuous-compare", "singular-points",
    }


def test_unknown_scenario_parameter():
    config = RunConfig(scenario_params={"ratez": [1e-3]})
    with pytest.raises(ConfigError) as info:
        ScenarioFactory.create_scenario("linear-ramp", config)
    assert info.value.messages[0].startswith("scenario_params.ratez")


def test_cycle_properties():
    result = _run("cycle-properties", te_ratios=[8.1], points=41)
    table = _table(result, "cycle_properties_te8.1")
    assert len(table) == 41
    assert table.columns[0] == "omega0_norm"
    minima = result.summary["critical_rate_minima"]["8.1"]
    for expected in (-3.9, -1.7, 1.7, 3.9):
        assert min(abs(m - expected) for m in minima) < 0.05


def test_linear_ramp_azimuthal_shift():
    result = _run("linear-ramp", rates=[1e-2], omega0_stop=0.4)
    assert [t.name for t in result.tables] == [
        "linear_ramp_0.01_echo_train", "linear_ramp_0.01_mode_trace", "linear_ramp_0.01_first_order",
    ]
    assert result.output_names[-1] == "linear_ramp_0.01_segmentation.json"
    assert result.is_valid
    ramp = result.summary["ramps"][0]
    assert ramp["delta_epsilon_predicted_deg"] == pytest.approx(3.375, abs=0.01)
    assert abs(ramp["delta_epsilon_measured_deg"]) == pytest.approx(3.4, abs=0.3)


def test_ramp_rate_map():
    result = _run("ramp-rate-map", rates=[1e-2, 3e-2], omega0_stop=1.0, omega0_points=11)
    table = _table(result, "ramp_rate_map")
    assert len(table) == 22
    assert table.columns == ("ramp0", "omega0_norm", "a0", "adiabaticity")
    assert result.documents[0].name == "ramp_rate_contour"


def test_ramp_rate_map_rejects_non_positive_rate():
    config = RunConfig(scenario_params={"rates": [1e-3, 0.0], "omega0_points": 3})
    with pytest.raises(ConfigError) as info:
        ScenarioFactory.create_scenario("ramp-rate-map", config)
    assert info.value.messages[0].startswith("scenario_params.rates.1")


def test_fast_harmonic_path():
    result = _run("harmonic", periods=[300.2], periods_shown=1.0, map_omega0_points=5, map_ramp_points=5)
    path = result.summary["paths"][0]
    assert path["echo_count"] == 300
    assert path["min_adiabaticity"] == pytest.approx(0.93, rel=0.1)
    assert path["max_cp_magnitude"] > 0.2
    assert len(_table(result, "harmonic_phase_diagram")) == 25


def test_medium_harmonic_path_minimum_adiabaticity():
    result = _run("harmonic", periods=[3002.0], periods_shown=1.0, map_omega0_points=3, map_ramp_points=3)
    assert result.summary["paths"][0]["min_adiabaticity"] == pytest.approx(9.1, rel=0.1)


@pytest.mark.slow
def test_slow_harmonic_path_returns_to_start():
    result = _run("harmonic", periods=[3e4], periods_shown=1.0, map_omega0_points=3, map_ramp_points=3)
    path = result.summary["paths"][0]
    assert path["min_adiabaticity"] == pytest.approx(91.0, rel=0.1)
    assert path["return_drift"] < 0.01


def test_return_to_origin():
    result = _run("return-to-origin", rate=0.05, span=1.0, grid=5)
    table = _table(result, "return_to_origin_map")
    assert len(table) == 25
    assert table.columns[-2:] == ("reversible", "adiabatic_path")
    for row in table.rows:
        if row[0] == row[1]:
            assert row[2] == 0.0
            assert row[5] == 0.0
            assert row[-2] == 1
    assert result.summary["cells"] == 25
    assert len(_table(result, "return_to_origin_profile")) == 5
    assert result.documents[0].name == "return_to_origin_regions"


def test_central_square_half_width():
    axis = np.array([-1.0, 0.0, 1.0])
    peaks, starts = np.meshgrid(axis, axis)
    accepted = np.ones(9, dtype=bool)
    assert central_square_half_width(starts.ravel(), peaks.ravel(), accepted) == 1.0
    accepted[0] = False
    assert central_square_half_width(starts.ravel(), peaks.ravel(), accepted) == 0.0


def test_adiabatic_square_at_slow_ramp():
    axis = np.linspace(-4.0, 4.0, 60)
    peaks, starts = np.meshgrid(axis, axis)
    starts, peaks = starts.ravel(), peaks.ravel()
    regions = segment_regions(omega0_range=(-4.0, 4.0), ramp=1e-3, te_ratio=15.0, points=16001)
    half_width = central_square_half_width(starts, peaks, regions.covers(starts, peaks))
    assert half_width == pytest.approx(1.58, abs=axis[1] - axis[0])


@pytest.mark.slow
def test_return_to_origin_central_square():
    summary = _run("return-to-origin").summary
    assert summary["cells"] == 3600
    assert summary["central_square_half_width"] == pytest.approx(1.58, abs=summary["grid_step"])
    assert summary["mean_change_inside_square"] < summary["mean_change_non_adiabatic_paths"]


def test_pulse_oriented_axis_points_along_pulse():
    axes = pulse_oriented_axis(CycleParams(np.array([-0.5, 0.0, 0.5]), 1.0, 15.0))
    assert np.all(axes[:, 0] >= 0.0)
    np.testing.assert_allclose(np.linalg.norm(axes, axis=1), 1.0)


def test_dynamic_axis_tilts_with_ramp_sign():
    up = pulse_oriented_axis(CycleParams(0.0, 1.0, 15.0, ramp0=1e-3), dynamic=True)
    down = pulse_oriented_axis(CycleParams(0.0, 1.0, 15.0, ramp0=-1e-3), dynamic=True)
    assert up[1] == pytest.approx(-down[1])
    assert up[1] == pytest.approx(np.sin(np.pi / 8.0 * 15.0 * 1e-3), rel=1e-6)


def test_continuous_compare():
    result = _run("continuous-compare", rates=[1e-3], omega0_stop=0.2)
    table = _table(result, "continuous_compare_0.001")
    assert len(table) in (201, 202)
    assert table.columns[2:4] == ("a0_direct", "a0_continuous")
    ramp = result.summary["ramps"][0]
    assert math.isfinite(ramp["a0_rms"])
    assert ramp["a0_rms"] < 0.1


def test_singular_points():
    result = _run("singular-points")
    assert result.summary["max_identity_residual"] < 1e-9
    np.testing.assert_allclose(
        result.documents[0].content["omega0"], [-5.92, -3.87, -1.73, 1.73, 3.87, 5.92], atol=0.01
    )
    assert {row[0] for row in _table(result, "singular_points").rows} == {8.0, 15.0}
