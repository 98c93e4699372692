"""
Sweeps
Worker pool for independent grid cells and scenario legs, and the generic
one- or two-axis parameter sweep.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.core.results import ScenarioResult
from src.physics.adiabaticity import (
    ADIABATICITY_CAP,
    adiabaticity,
    critical_rates,
    singular_points,
)
from src.physics.cycle import CycleParams, effective_rotation

logger = logging.getLogger(__name__)

CHUNK_CELLS = 256
FORMULA_QUANTITIES = ("adiabaticity", "nu0_crit", "nu1_crit", "alpha", "n_perp", "n_z")


def resolve_workers(threads: Optional[int] = None) -> int:
    """Pool size: the configured thread count, else the available CPUs."""
    if threads is not None:
        return max(1, int(threads))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def run_tasks(
    func: Callable[[Any], Any],
    tasks: Sequence[Any],
    workers: int = 1,
    desc: str = "cells",
    show_progress: bool = False,
) -> List[Any]:
    """
    Evaluate ``func`` over ``tasks`` and return results in task order.

    ``func`` must be a module-level function when ``workers > 1``.
    Completion order never leaks into the result.
    """
    tasks = list(tasks)
    results: List[Any] = [None] * len(tasks)
    progress = tqdm(total=len(tasks), desc=desc, disable=not show_progress, leave=False)

    if workers <= 1 or len(tasks) <= 1:
        for index, task in enumerate(tasks):
            results[index] = func(task)
            progress.update(1)
        progress.close()
        return results

    pool_size = min(workers, len(tasks))
    logger.debug("Starting pool of %d workers for %d %s", pool_size, len(tasks), desc)
    with ProcessPoolExecutor(max_workers=pool_size) as executor:
        futures = {executor.submit(func, task): index for index, task in enumerate(tasks)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
            progress.update(1)
    progress.close()
    return results


# ---------- Cell evaluation ----------

def _final_a0(omega0: float, omega1: float, ramp0: float, te_ratio: float, timing: Dict[str, Any],
              substeps: int, correction: bool) -> float:
    from src.physics.bloch import BlochSimulator, SequenceTiming
    from src.physics.profiles import Constant, FieldProfile, Linear
    from src.theory.mode_trace import mode_trace_from_echoes

    sequence = SequenceTiming(**{**timing, "te_ratio": te_ratio})
    profile = FieldProfile(Linear(ramp0, omega0), Constant(omega1))
    train = BlochSimulator(profile, sequence, substeps, correction).solve()
    trace = mode_trace_from_echoes(train, profile, sequence)
    return float(trace.a0[-1])


def evaluate_cells(task: Dict[str, Any]) -> np.ndarray:
    """
    Evaluate one chunk of sweep cells.

    Args:
        task: ``quantity``, ``fixed`` parameter values, ``columns`` (axis
            name -> array of cell values) and, for simulated quantities,
            ``timing``, ``substeps`` and ``correction``.

    Returns:
        One value per cell.
    """
    quantity = task["quantity"]
    values = {**task["fixed"], **task["columns"]}
    size = len(next(iter(task["columns"].values())))
    arrays = {key: np.broadcast_to(np.asarray(val, dtype=float), (size,)) for key, val in values.items()}

    if quantity == "final_a0":
        return np.array([
            _final_a0(arrays["omega0"][k], arrays["omega1"][k], arrays["ramp0"][k],
                      arrays["te_ratio"][k], task["timing"], task["substeps"], task["correction"])
            for k in range(size)
        ])

    params = CycleParams(arrays["omega0"], arrays["omega1"], arrays["te_ratio"], ramp0=arrays["ramp0"])
    if quantity == "adiabaticity":
        result = adiabaticity(params)
    elif quantity in ("nu0_crit", "nu1_crit"):
        result = getattr(critical_rates(params), quantity)
    else:
        er = effective_rotation(params)
        result = er.signed_transverse if quantity == "n_perp" else getattr(er, quantity)
    return np.broadcast_to(np.asarray(result, dtype=float), (size,)).copy()


# ---------- Generic sweep ----------

def sweep_map(
    sweep,
    timing_config=None,
    workers: int = 1,
    substeps: int = 4,
    correction: bool = True,
    show_progress: bool = False,
) -> ScenarioResult:
    """
    Evaluate a 1-D or 2-D grid cell by cell.

    The first axis varies fastest; rows are written outer-axis major.

    Args:
        sweep: SweepConfig.
        timing_config: TimingConfig used by simulated quantities.
        workers: Pool size.

    Returns:
        ScenarioResult with the grid table and, for (omega0, omega1) grids,
        the singular-point overlay.
    """
    axes = list(sweep.axes)
    inner = axes[0]
    inner_points = inner.points()
    outer = axes[1] if len(axes) > 1 else None
    outer_points = outer.points() if outer is not None else np.array([np.nan])

    fixed = {
        "omega0": sweep.omega0,
        "omega1": sweep.omega1,
        "ramp0": sweep.ramp0,
        "te_ratio": sweep.te_ratio,
    }
    for axis in axes:
        fixed.pop(axis.name)

    grid_inner, grid_outer = np.meshgrid(inner_points, outer_points)
    flat_inner = grid_inner.ravel()
    flat_outer = grid_outer.ravel()

    tasks = []
    for first in range(0, flat_inner.size, CHUNK_CELLS):
        columns = {inner.name: flat_inner[first:first + CHUNK_CELLS]}
        if outer is not None:
            columns[outer.name] = flat_outer[first:first + CHUNK_CELLS]
        task = {"quantity": sweep.quantity, "fixed": fixed, "columns": columns}
        if sweep.quantity == "final_a0":
            task.update(
                timing=timing_config.model_dump() if timing_config is not None else {},
                substeps=substeps,
                correction=correction,
            )
        tasks.append(task)

    logger.info("Sweeping %s over %d cells in %d chunks", sweep.quantity, flat_inner.size, len(tasks))
    chunks = run_tasks(evaluate_cells, tasks, workers, desc="sweep", show_progress=show_progress)
    values = np.concatenate(chunks) if chunks else np.array([])

    result = ScenarioResult("sweep")
    header = [f"quantity {sweep.quantity}"]
    header += [f"fixed {name}={value!r}" for name, value in fixed.items()]
    header.append(f"axis {inner.name}: {len(inner_points)} points")
    if outer is not None:
        header.append(f"axis {outer.name}: {len(outer_points)} points")
    if sweep.quantity == "adiabaticity":
        header.append(f"adiabaticity capped at {ADIABATICITY_CAP:g}")
        values = np.minimum(values, ADIABATICITY_CAP)

    if outer is None:
        columns = (inner.name, sweep.quantity)
        rows = [[flat_inner[k], values[k]] for k in range(values.size)]
    else:
        columns = (outer.name, inner.name, sweep.quantity)
        rows = [[flat_outer[k], flat_inner[k], values[k]] for k in range(values.size)]
    result.add_table("sweep_grid", columns, rows, header)

    names = {axis.name for axis in axes}
    if sweep.overlay_singular_points and names == {"omega0", "omega1"}:
        omega1_max = float(np.max(grid_outer if outer.name == "omega1" else grid_inner))
        points = singular_points(sweep.te_ratio, sweep.singular_l_max, omega1_max=omega1_max)
        result.add_document("sweep_singular_points", {
            "te_ratio": sweep.te_ratio,
            "l_max": sweep.singular_l_max,
            "points": [point._asdict() for point in points],
        })

    result.summary = {
        "quantity": sweep.quantity,
        "cells": int(values.size),
        "min": float(np.min(values)) if values.size else None,
        "max": float(np.max(values)) if values.size else None,
    }
    return result


__all__ = [
    "resolve_workers",
    "run_tasks",
    "evaluate_cells",
    "sweep_map",
]
