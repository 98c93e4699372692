import numpy as np
import pytest

from src.app.sweeps import evaluate_cells, resolve_workers, run_tasks, sweep_map
from src.core.config import SweepConfig, TimingConfig
from src.physics.adiabaticity import ADIABATICITY_CAP
from src.physics.cycle import CycleParams, effective_rotation


def test_resolve_workers():
    assert resolve_workers(3) == 3
    assert resolve_workers(0) == 1
    assert resolve_workers() >= 1


def test_run_tasks_keeps_task_order():
    tasks = [-5, 3, -1, 8, -2]
    assert run_tasks(abs, tasks, workers=1) == [5, 3, 1, 8, 2]
    assert run_tasks(abs, tasks, workers=3) == [5, 3, 1, 8, 2]


def test_run_tasks_pool_matches_serial():
    tasks = [
        {"quantity": "alpha", "fixed": {"omega1": 1.0, "ramp0": 0.0, "te_ratio": 15.0},
         "columns": {"omega0": np.linspace(k, k + 1.0, 7)}}
        for k in range(4)
    ]
    serial = run_tasks(evaluate_cells, tasks, workers=1)
    pooled = run_tasks(evaluate_cells, tasks, workers=2)
    for a, b in zip(serial, pooled):
        np.testing.assert_array_equal(a, b)


def test_evaluate_cells_signed_transverse():
    omega0 = np.array([-0.5, 0.5])
    values = evaluate_cells({
        "quantity": "n_perp",
        "fixed": {"omega1": 1.0, "ramp0": 0.0, "te_ratio": 15.0},
        "columns": {"omega0": omega0},
    })
    expected = effective_rotation(CycleParams(omega0, 1.0, 15.0)).signed_transverse
    np.testing.assert_allclose(values, expected)


def test_single_cell_sweep():
    sweep = SweepConfig(quantity="alpha", axes=[{"name": "omega0", "values": [0.0]}])
    result = sweep_map(sweep)
    table = result.tables[0]
    assert table.columns == ("omega0", "alpha")
    assert table.rows[0][1] == pytest.approx(np.pi)
    assert result.summary["cells"] == 1


def test_adiabaticity_is_capped():
    sweep = SweepConfig(axes=[{"name": "omega0", "start": -1.0, "stop": 1.0, "num": 5}])
    result = sweep_map(sweep)
    assert all(row[1] == ADIABATICITY_CAP for row in result.tables[0].rows)
    assert "adiabaticity capped at 1e+09" in result.tables[0].header_lines


def test_two_axis_grid_is_outer_major():
    sweep = SweepConfig(
        quantity="n_z",
        axes=[{"name": "omega0", "values": [-1.0, 0.0, 1.0]}, {"name": "te_ratio", "values": [8.0, 15.0]}],
    )
    result = sweep_map(sweep, workers=2)
    rows = result.tables[0].rows
    assert result.tables[0].columns == ("te_ratio", "omega0", "n_z")
    assert [(row[0], row[1]) for row in rows] == [
        (8.0, -1.0), (8.0, 0.0), (8.0, 1.0), (15.0, -1.0), (15.0, 0.0), (15.0, 1.0),
    ]
    assert rows[1][2] == pytest.approx(0.0, abs=1e-12)


def test_singular_point_overlay():
    sweep = SweepConfig(
        quantity="alpha",
        te_ratio=8.0,
        singular_l_max=1,
        axes=[{"name": "omega0", "start": -2.0, "stop": 2.0, "num": 5},
              {"name": "omega1", "start": 0.5, "stop": 2.5, "num": 3}],
    )
    result = sweep_map(sweep)
    overlay = result.documents[0]
    assert overlay.name == "sweep_singular_points"
    assert {"omega0": 0.0, "omega1": 2.0} in [
        {"omega0": p["omega0"], "omega1": p["omega1"]} for p in overlay.content["points"]
    ]


def test_simulated_quantity():
    sweep = SweepConfig(quantity="final_a0", axes=[{"name": "omega0", "values": [0.0]}])
    result = sweep_map(sweep, TimingConfig(echo_count=20))
    assert result.tables[0].rows[0][1] == pytest.approx(1.0, abs=1e-9)
