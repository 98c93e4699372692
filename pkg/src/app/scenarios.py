"""
Scenarios
Canned experiments: cycle properties, linear ramps, the ramp-rate map,
harmonic paths, return-to-origin excursions, the continuous-limit
comparison and the singular-point catalogue.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, conlist

from src.core.config import validate_model
from src.core.factories import ValidatorFactory
from src.core.interfaces import IScenario
from src.core.results import ScenarioResult
from src.physics.adiabaticity import (
    ADIABATICITY_CAP,
    adiabaticity_grid,
    circle_crossings,
    critical_rate_minima,
    critical_rates,
    singular_points,
)
from src.physics.bloch import BlochSimulator, SequenceTiming, excite, simulate_batch
from src.physics.cycle import CycleParams, azimuthal_correction, cycle_rotation, effective_rotation, energy_levels
from src.physics.profiles import BiLinear, Constant, FieldProfile, Harmonic, Linear
from src.theory.adiabatic import AdiabaticPredictor
from src.theory.continuous import ContinuousSolver
from src.theory.first_order import FirstOrderPrediction, FirstOrderPredictor, first_order_residual
from src.theory.mode_trace import ModeTrace, dynamic_axis_series, mode_trace_from_echoes
from src.theory.segmentation import segment_regions
from src.app.sweeps import run_tasks
from src.utils.helpers import StatisticsCalculator

logger = logging.getLogger(__name__)

CAP_NOTE = f"adiabaticity capped at {ADIABATICITY_CAP:g}"


def _label(value: float) -> str:
    return f"{value:g}"


def pulse_oriented_axis(params: CycleParams, dynamic: bool = False) -> np.ndarray:
    """Effective axis with its transverse part along the refocusing pulse."""
    er = effective_rotation(params, dynamic=dynamic)
    sign = np.where(np.asarray(er.signed_transverse) < 0.0, -1.0, 1.0)
    return sign[..., None] * er.axis


# ---------- Worker legs (module level for the process pool) ----------

def _simulator(profile: FieldProfile, timing: SequenceTiming, task: Dict[str, Any]) -> BlochSimulator:
    return BlochSimulator(profile, timing, task["substeps"], task["correction"])


def _linear_ramp_leg(task: Dict[str, Any]) -> Dict[str, Any]:
    rate = task["rate"]
    timing: SequenceTiming = task["timing"]
    profile = FieldProfile(Linear(rate, task["start"]), Constant(task["omega1"]))
    train = _simulator(profile, timing, task).solve()
    series = dynamic_axis_series(profile, timing)
    trace = mode_trace_from_echoes(train, profile, timing, series)
    first_order = FirstOrderPredictor(profile, timing).solve()
    segmentation = segment_regions(profile, timing, threshold=task["threshold"])
    return {
        "rate": rate,
        "timing": timing,
        "train": train,
        "trace": trace,
        "first_order": first_order,
        "first_order_residual": first_order_residual(train.magnetization, first_order),
        "segmentation": segmentation,
    }


def _ramp_map_leg(task: Dict[str, Any]) -> np.ndarray:
    rate = task["rate"]
    timing: SequenceTiming = task["timing"]
    profile = FieldProfile(Linear(rate, task["start"]), Constant(task["omega1"]))
    train = _simulator(profile, timing, task).solve()
    trace = mode_trace_from_echoes(train, profile, timing)
    return np.interp(task["omega0_grid"], trace.omega0, trace.a0)


def _harmonic_leg(task: Dict[str, Any]) -> Dict[str, Any]:
    timing: SequenceTiming = task["timing"]
    profile = FieldProfile(Harmonic(task["amplitude"], task["period"]), Constant(task["omega1"]))
    train = _simulator(profile, timing, task).solve()
    series = dynamic_axis_series(profile, timing)
    trace = mode_trace_from_echoes(train, profile, timing, series)
    prediction = AdiabaticPredictor(profile, timing, series).solve(train.magnetization[0])
    return {"period": task["period"], "train": train, "trace": trace, "prediction": prediction}


def _return_to_origin_chunk(task: Dict[str, Any]) -> Dict[str, np.ndarray]:
    starts = np.asarray(task["starts"], dtype=float)
    peaks = np.asarray(task["peaks"], dtype=float)
    capture = np.asarray(task["capture"], dtype=int)
    base: SequenceTiming = task["timing"]
    timing = base.with_echo_count(max(1, int(np.max(capture))))
    profile = FieldProfile(BiLinear(starts, peaks, task["rate"]), Constant(task["omega1"]))
    m_start = excite(profile, timing)
    m_end = simulate_batch(
        profile, timing, m0=m_start, capture=capture,
        substeps_per_interval=task["substeps"],
        commutator_correction=task["correction"],
    )

    # dynamic axes of the first cycle and of the cycle ending at the captured echo
    first = np.full(len(starts), 0.5)
    last = np.where(capture > 0, capture - 0.5, 0.5)
    phase = timing.refocusing_phase
    return {
        "start": np.atleast_2d(m_start),
        "end": m_end,
        "axis_start": pulse_oriented_axis(profile.cycle_params(first, timing.te_ratio, phase), dynamic=True),
        "axis_end": pulse_oriented_axis(profile.cycle_params(last, timing.te_ratio, phase), dynamic=True),
    }


def _continuous_leg(task: Dict[str, Any]) -> Dict[str, Any]:
    timing: SequenceTiming = task["timing"]
    profile = FieldProfile(Linear(task["rate"], task["start"]), Constant(task["omega1"]))
    train = _simulator(profile, timing, task).solve()
    series = dynamic_axis_series(profile, timing)
    direct = mode_trace_from_echoes(train, profile, timing, series)
    solver = ContinuousSolver(profile, timing, task["steps_per_cycle"], task["method"], series)
    return {"rate": task["rate"], "direct": direct, "continuous": solver.solve(train.magnetization[0])}


# ---------- Base ----------

class _NoParams(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BaseScenario(IScenario):
    """
    Common plumbing: scenario parameters, timing, validation reports.

    Subclasses set ``name`` and ``Params`` and implement ``run``.
    """

    name = ""
    Params = _NoParams

    def __init__(self, config, workers: int = 1, show_progress: bool = False) -> None:
        self._config = config
        self._params = validate_model(self.Params, config.scenario_params, prefix="scenario_params")
        self._workers = workers
        self._show_progress = show_progress

    @property
    def params(self):
        return self._params

    @property
    def full_scale(self) -> bool:
        return bool(self._config.full_scale)

    def get_scenario_name(self) -> str:
        return self.name

    def _timing(self, **changes: Any) -> SequenceTiming:
        values = self._config.timing.model_dump()
        values.update(changes)
        return SequenceTiming(**values)

    def _sim_options(self) -> Dict[str, Any]:
        return {
            "substeps": self._config.substeps_per_interval,
            "correction": self._config.commutator_correction,
        }

    def _run_legs(self, func, tasks: List[Dict[str, Any]], desc: str) -> List[Any]:
        return run_tasks(func, tasks, self._workers, desc=desc, show_progress=self._show_progress)

    def _validate(self, result: ScenarioResult, kind: str, data: Any, subject: str, **kwargs: Any) -> bool:
        from src.core import registry  # noqa: F401

        validator = ValidatorFactory.create_validator(kind, **kwargs)
        valid = validator.validate(data)
        report = validator.get_validation_report()
        report["subject"] = subject
        result.add_validation(report)
        if not valid:
            logger.warning("%s failed for %s: %s", validator.validator_name, subject, report["errors"])
        return valid

    def __str__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"


# ---------- cycle-properties ----------

class CyclePropertiesScenario(BaseScenario):
    """Static cycle properties along omega0 for several pulse spacings."""

    name = "cycle-properties"

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid")

        te_ratios: List[float] = Field(default_factory=lambda: [8.0, 8.1, 15.0])
        omega1: float = Field(default=1.0, ge=0.0)
        omega0_min: float = -6.0
        omega0_max: float = 6.0
        points: Optional[int] = Field(default=None, ge=2)

    def run(self) -> ScenarioResult:
        p = self.params
        points = p.points or (12001 if self.full_scale else 1201)
        omega0 = np.linspace(p.omega0_min, p.omega0_max, points)
        result = ScenarioResult(self.name)
        minima: Dict[str, List[float]] = {}

        for te_ratio in p.te_ratios:
            params = CycleParams(omega0, p.omega1, te_ratio)
            er = effective_rotation(params)
            rates = critical_rates(params)
            gap = energy_levels(params).gap
            theta = np.where(er.degenerate_axis, np.nan, np.arctan2(er.n_perp, er.n_z))
            rows = [
                [omega0[k], er.alpha[k], er.signed_transverse[k], er.n_z[k], theta[k],
                 gap[k], rates.nu0_crit[k], rates.nu1_crit[k]]
                for k in range(points)
            ]
            result.add_table(
                f"cycle_properties_te{_label(te_ratio)}",
                ("omega0_norm", "alpha", "n_perp", "n_z", "theta", "energy_gap", "nu0_crit", "nu1_crit"),
                rows,
                [f"te_ratio {te_ratio!r}", f"omega1_norm {p.omega1!r}",
                 "energy_gap in units of 1/t_E", "n_perp signed along the refocusing pulse"],
            )
            minima[_label(te_ratio)] = critical_rate_minima(te_ratio, p.omega1).tolist()

        result.add_document("critical_rate_minima", {"omega1": p.omega1, "minima": minima})
        result.summary = {"te_ratios": p.te_ratios, "points": points, "critical_rate_minima": minima}
        return result


# ---------- linear-ramp ----------

class LinearRampScenario(BaseScenario):
    """Echo trains, mode traces, first-order predictions for linear B0 ramps."""

    name = "linear-ramp"

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid")

        rates: Optional[List[float]] = None
        start: float = 0.0
        omega0_stop: float = 6.0
        omega1: float = Field(default=1.0, ge=0.0)
        static_echoes: int = Field(default=200, ge=1)
        max_echoes: int = Field(default=200_000, ge=1)
        delta_epsilon_echoes: int = Field(default=40, ge=1)

    def _rates(self) -> List[float]:
        if self.params.rates is not None:
            return list(self.params.rates)
        if self.full_scale:
            return [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
        return [1e-3, 1e-2]

    def _echo_count(self, rate: float) -> int:
        p = self.params
        if rate == 0.0:
            return p.static_echoes
        return min(p.max_echoes, max(1, math.ceil(abs(p.omega0_stop - p.start) / abs(rate))))

    def run(self) -> ScenarioResult:
        p = self.params
        tasks = [
            {
                "rate": rate,
                "start": p.start,
                "omega1": p.omega1,
                "timing": self._timing(echo_count=self._echo_count(rate)),
                "threshold": self._config.threshold,
                **self._sim_options(),
            }
            for rate in self._rates()
        ]
        legs = self._run_legs(_linear_ramp_leg, tasks, "ramps")

        result = ScenarioResult(self.name)
        summary = []
        for leg in legs:
            label = f"linear_ramp_{_label(leg['rate'])}"
            train, trace = leg["train"], leg["trace"]
            first_order: FirstOrderPrediction = leg["first_order"]
            residual = leg["first_order_residual"]
            timing: SequenceTiming = leg["timing"]

            header = [f"rate {leg['rate']!r}", f"te_ratio {timing.te_ratio!r}", f"echo_count {timing.echo_count}"]
            result.add_table(f"{label}_echo_train", train.COLUMNS, train.rows(), header)
            result.add_table(f"{label}_mode_trace", ModeTrace.COLUMNS, trace.rows(), header + [CAP_NOTE])
            result.add_table(f"{label}_first_order", FirstOrderPrediction.COLUMNS, first_order.rows(), header)
            result.add_document(f"{label}_segmentation", leg["segmentation"].to_document())

            self._validate(result, "echo_train", train, label)
            self._validate(result, "mode_partition", trace, label)
            self._validate(result, "segmentation", leg["segmentation"], label)

            window = min(p.delta_epsilon_echoes, len(train) - 1)
            m = train.magnetization[1:window + 1]
            measured = math.degrees(float(np.mean(np.arctan2(m[:, 1], m[:, 0])))) if window else 0.0
            predicted = math.degrees(float(azimuthal_correction(
                CycleParams(p.start, p.omega1, timing.te_ratio, ramp0=leg["rate"])
            )))
            summary.append({
                "rate": leg["rate"],
                "echo_count": timing.echo_count,
                "delta_epsilon_measured_deg": measured,
                "delta_epsilon_predicted_deg": predicted,
                "min_adiabaticity": float(np.min(trace.adiabaticity[1:])) if len(trace) > 1 else math.inf,
                "final_a0": float(trace.a0[-1]),
                "non_adiabatic_regions": len(leg["segmentation"].non_adiabatic()),
                "first_order_echoes": residual.echoes,
                "first_order_my_error": None if residual.windows == 0 else residual.max_error,
            })

        result.summary = {"ramps": summary}
        return result


# ---------- ramp-rate-map ----------

class RampRateMapScenario(BaseScenario):
    """a0 over (omega0, ramp) from one simulation per rate, with the A map and contour."""

    name = "ramp-rate-map"

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid")

        rates: Optional[conlist(PositiveFloat, min_length=1)] = None
        start: float = 0.0
        omega0_stop: float = 6.0
        omega0_points: Optional[int] = Field(default=None, ge=2)
        omega1: float = Field(default=1.0, ge=0.0)

    def _rates(self) -> List[float]:
        if self.params.rates is not None:
            return list(self.params.rates)
        if self.full_scale:
            return np.geomspace(1e-4, 1e-1, 13).tolist()
        return [3e-4, 1e-3, 3e-3, 1e-2]

    def run(self) -> ScenarioResult:
        p = self.params
        rates = self._rates()
        points = p.omega0_points or (1201 if self.full_scale else 241)
        omega0_grid = np.linspace(p.start, p.omega0_stop, points)
        span = abs(p.omega0_stop - p.start)

        tasks = [
            {
                "rate": rate,
                "start": p.start,
                "omega1": p.omega1,
                "omega0_grid": omega0_grid,
                "timing": self._timing(echo_count=max(1, math.ceil(span / rate))),
                **self._sim_options(),
            }
            for rate in rates
        ]
        a0_rows = self._run_legs(_ramp_map_leg, tasks, "rates")

        te_ratio = self._config.timing.te_ratio
        a_map = adiabaticity_grid(te_ratio, omega0_grid, ramp_values=rates, omega1=p.omega1)
        capped = a_map.capped()

        rows = []
        for i, rate in enumerate(rates):
            for j, omega0 in enumerate(omega0_grid):
                rows.append([rate, omega0, a0_rows[i][j], capped[i, j]])

        result = ScenarioResult(self.name)
        header = [f"te_ratio {te_ratio!r}", f"axis ramp0: {len(rates)} values",
                  f"axis omega0_norm: {points} points", CAP_NOTE]
        result.add_table("ramp_rate_map", ("ramp0", "omega0_norm", "a0", "adiabaticity"), rows, header)
        contour = a_map.contour(self._config.threshold)
        result.add_document("ramp_rate_contour", {
            "threshold": self._config.threshold,
            "te_ratio": te_ratio,
            "crossings": [{"ramp0": ramp, "omega0": omega0} for ramp, omega0 in contour],
        })
        result.summary = {"rates": rates, "omega0_points": points, "contour_points": len(contour)}
        return result


# ---------- harmonic ----------

class HarmonicScenario(BaseScenario):
    """Harmonic offset paths of increasing speed."""

    name = "harmonic"

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid")

        amplitude: float = 1.4
        periods: List[float] = Field(default_factory=lambda: [3e4, 3002.0, 300.2])
        periods_shown: float = Field(default=2.0, gt=0.0)
        omega1: float = Field(default=1.0, ge=0.0)
        map_omega0_points: int = Field(default=161, ge=2)
        map_ramp_points: int = Field(default=141, ge=2)

    def run(self) -> ScenarioResult:
        p = self.params
        tasks = [
            {
                "amplitude": p.amplitude,
                "period": period,
                "omega1": p.omega1,
                "timing": self._timing(echo_count=max(1, int(round(p.periods_shown * period)))),
                **self._sim_options(),
            }
            for period in p.periods
        ]
        legs = self._run_legs(_harmonic_leg, tasks, "paths")

        result = ScenarioResult(self.name)
        summary = []
        for leg in legs:
            label = f"harmonic_T{_label(leg['period'])}"
            train, trace, prediction = leg["train"], leg["trace"], leg["prediction"]
            header = [f"amplitude {p.amplitude!r}", f"period {leg['period']!r}",
                      f"te_ratio {self._config.timing.te_ratio!r}"]
            result.add_table(f"{label}_echo_train", train.COLUMNS, train.rows(), header)
            result.add_table(f"{label}_mode_trace", ModeTrace.COLUMNS, trace.rows(), header + [CAP_NOTE])
            result.add_table(f"{label}_adiabatic_prediction", train.COLUMNS, prediction.train.rows(), header)
            self._validate(result, "echo_train", train, label)
            self._validate(result, "mode_partition", trace, label)

            one_period = min(len(train) - 1, int(round(leg["period"])))
            drift = float(np.linalg.norm(train.magnetization[one_period] - train.magnetization[0]))
            summary.append({
                "period": leg["period"],
                "echo_count": len(train) - 1,
                "min_adiabaticity": float(np.min(trace.adiabaticity[1:])),
                "return_drift": drift,
                "max_cp_magnitude": float(np.max(trace.cp_magnitude)),
                "max_a0_prediction_error": StatisticsCalculator.max_abs_difference(
                    trace.a0, prediction.trace.a0
                ),
            })

        # phase diagram in the (omega0, d omega0 / d tau) plane
        fastest = 2.0 * math.pi * abs(p.amplitude) / min(p.periods)
        ramps = np.linspace(-1.2 * fastest, 1.2 * fastest, p.map_ramp_points)
        omega0_grid = np.linspace(-1.2 * abs(p.amplitude), 1.2 * abs(p.amplitude), p.map_omega0_points)
        a_map = adiabaticity_grid(self._config.timing.te_ratio, omega0_grid, ramp_values=ramps, omega1=p.omega1)
        capped = a_map.capped()
        rows = [[ramps[i], omega0_grid[j], capped[i, j]]
                for i in range(len(ramps)) for j in range(len(omega0_grid))]
        result.add_table("harmonic_phase_diagram", ("ramp0", "omega0_norm", "adiabaticity"), rows,
                         [f"te_ratio {self._config.timing.te_ratio!r}", CAP_NOTE])

        result.summary = {"paths": summary}
        return result


# ---------- return-to-origin ----------

class ReturnToOriginScenario(BaseScenario):
    """
    Reversibility of bilinear excursions start -> peak -> start.

    Each cell is scored by the change of its CPMG amplitude, the projection
    on the pulse-oriented dynamic axis of the first and of the last cycle.
    A cell has an adiabatic path when [start, peak] lies inside one region
    with A > threshold at the ramp rate; the central square is the largest
    centred square of such cells.
    """

    name = "return-to-origin"

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid")

        rate: float = Field(default=1e-3, gt=0.0)
        span: float = Field(default=4.0, gt=0.0)
        grid: Optional[int] = Field(default=None, ge=2)
        omega1: float = Field(default=1.0, ge=0.0)
        tolerance: float = Field(default=0.02, gt=0.0)
        adiabaticity_step: float = Field(default=5e-4, gt=0.0)
        chunks_per_worker: int = Field(default=4, ge=1)

    def _simulate(self, starts: np.ndarray, peaks: np.ndarray, capture: np.ndarray, base: SequenceTiming):
        p = self.params
        order = np.argsort(capture, kind="stable")
        n_chunks = min(len(order), max(1, self._workers) * p.chunks_per_worker)
        groups = [idx for idx in np.array_split(order, n_chunks) if len(idx)]
        tasks = [
            {
                "starts": starts[idx], "peaks": peaks[idx], "capture": capture[idx],
                "rate": p.rate, "omega1": p.omega1, "timing": base, **self._sim_options(),
            }
            for idx in groups
        ]
        logger.info("Return-to-origin: %d cells in %d chunks", len(starts), len(tasks))
        chunks = self._run_legs(_return_to_origin_chunk, tasks, "cells")

        merged = {key: np.empty((len(starts), 3)) for key in ("start", "end", "axis_start", "axis_end")}
        for idx, chunk in zip(groups, chunks):
            for key, values in merged.items():
                values[idx] = chunk[key]
        return merged

    def run(self) -> ScenarioResult:
        p = self.params
        size = p.grid or (200 if self.full_scale else 60)
        axis = np.linspace(-p.span, p.span, size)
        peaks, starts = np.meshgrid(axis, axis)
        starts, peaks = starts.ravel(), peaks.ravel()
        durations = 2.0 * np.abs(peaks - starts) / p.rate
        capture = np.rint(durations).astype(int)

        base = self._timing(echo_count=1)
        te_ratio = base.te_ratio
        cells = self._simulate(starts, peaks, capture, base)
        cpmg_start = np.sum(cells["start"] * cells["axis_start"], axis=-1)
        cpmg_end = np.sum(cells["end"] * cells["axis_end"], axis=-1)
        change = np.abs(cpmg_end - cpmg_start)
        reversible = change < p.tolerance

        regions = segment_regions(
            omega0_range=(-p.span, p.span), ramp=p.rate, te_ratio=te_ratio, omega1=p.omega1,
            threshold=self._config.threshold,
            points=int(math.ceil(2.0 * p.span / p.adiabaticity_step)) + 1,
        )
        adiabatic_path = regions.covers(starts, peaks)

        rows = [
            [starts[k], peaks[k], durations[k], cells["end"][k, 0],
             cpmg_end[k] * cells["axis_end"][k, 0], change[k], int(reversible[k]), int(adiabatic_path[k])]
            for k in range(len(starts))
        ]
        result = ScenarioResult(self.name)
        header = [f"rate {p.rate!r}", f"te_ratio {te_ratio!r}", f"grid {size}x{size}",
                  f"reversible when |M_CPMG(T) - M_CPMG(0)| < {p.tolerance!r}",
                  f"adiabatic_path when A > {self._config.threshold!r} on all of [start, peak]"]
        result.add_table(
            "return_to_origin_map",
            ("omega0_start", "omega0_peak", "duration", "Mx_T", "M_cpmg_x_T", "cpmg_change",
             "reversible", "adiabatic_path"),
            rows, header,
        )

        values = np.minimum(np.asarray(critical_rates(CycleParams(axis, p.omega1, te_ratio)).nu0_crit) / p.rate,
                            ADIABATICITY_CAP)
        m_exc = excite(FieldProfile(Constant(axis), Constant(p.omega1)), base)
        static_axis = pulse_oriented_axis(CycleParams(axis, p.omega1, te_ratio, base.refocusing_phase))
        initial = np.sum(m_exc * static_axis, axis=-1)
        result.add_table(
            "return_to_origin_profile",
            ("omega0_norm", "initial_cpmg_amplitude", "adiabaticity"),
            [[axis[k], initial[k], values[k]] for k in range(size)],
            [f"rate {p.rate!r}", f"te_ratio {te_ratio!r}", CAP_NOTE],
        )
        result.add_document("return_to_origin_regions", regions.to_document())

        half_width = central_square_half_width(starts, peaks, adiabatic_path)
        inside = np.maximum(np.abs(starts), np.abs(peaks)) <= half_width
        crossing = ~adiabatic_path
        result.summary = {
            "cells": int(len(starts)),
            "reversible_cells": int(np.count_nonzero(reversible)),
            "adiabatic_path_cells": int(np.count_nonzero(adiabatic_path)),
            "central_square_half_width": half_width,
            "reversible_square_half_width": central_square_half_width(starts, peaks, reversible),
            "grid_step": float(axis[1] - axis[0]),
            "max_change_inside_square": float(np.max(change[inside])) if np.any(inside) else None,
            "mean_change_inside_square": float(np.mean(change[inside])) if np.any(inside) else None,
            "mean_change_non_adiabatic_paths": float(np.mean(change[crossing])) if np.any(crossing) else None,
        }
        logger.info(
            "Central square half-width %.4g (grid step %.4g)", half_width, result.summary["grid_step"]
        )
        return result


def central_square_half_width(starts: np.ndarray, peaks: np.ndarray, accepted: np.ndarray) -> float:
    """
    Largest w such that every cell with |start|, |peak| <= w is accepted.

    Returns 0.0 when no centred square qualifies.
    """
    radius = np.maximum(np.abs(starts), np.abs(peaks))
    best = 0.0
    for w in np.unique(radius):
        inside = radius <= w
        if np.all(accepted[inside]):
            best = float(w)
        else:
            break
    return best


# ---------- continuous-compare ----------

class ContinuousCompareScenario(BaseScenario):
    """Direct simulation against the continuous-limit solver."""

    name = "continuous-compare"

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid")

        te_ratio: float = Field(default=8.0, gt=1.0)
        rates: List[float] = Field(default_factory=lambda: [5e-4, 1e-3])
        start: float = 0.0
        omega0_stop: float = 3.0
        omega1: float = Field(default=1.0, ge=0.0)
        steps_per_cycle: int = Field(default=8, ge=1)
        method: Literal["magnus4", "rk4"] = "magnus4"

    def run(self) -> ScenarioResult:
        p = self.params
        span = abs(p.omega0_stop - p.start)
        tasks = [
            {
                "rate": rate,
                "start": p.start,
                "omega1": p.omega1,
                "steps_per_cycle": p.steps_per_cycle,
                "method": p.method,
                "timing": self._timing(te_ratio=p.te_ratio, echo_count=max(1, math.ceil(span / abs(rate)))),
                **self._sim_options(),
            }
            for rate in p.rates
        ]
        legs = self._run_legs(_continuous_leg, tasks, "ramps")

        result = ScenarioResult(self.name)
        summary = []
        for leg in legs:
            label = f"continuous_compare_{_label(leg['rate'])}"
            direct: ModeTrace = leg["direct"]
            continuous = leg["continuous"]
            cont: ModeTrace = continuous.trace
            rows = [
                [int(direct.cycle[k]), direct.omega0[k], direct.a0[k], cont.a0[k],
                 direct.cp_magnitude[k], cont.cp_magnitude[k]]
                for k in range(len(direct))
            ]
            result.add_table(
                label,
                ("cycle", "omega0_norm", "a0_direct", "a0_continuous", "cp_direct", "cp_continuous"),
                rows,
                [f"rate {leg['rate']!r}", f"te_ratio {p.te_ratio!r}",
                 f"steps_per_cycle {p.steps_per_cycle}", f"method {p.method}"],
            )
            self._validate(result, "mode_partition", direct, f"{label} direct")
            summary.append({
                "rate": leg["rate"],
                "a0_rms": StatisticsCalculator.rms_difference(direct.a0, cont.a0),
                "cp_rms": StatisticsCalculator.rms_difference(direct.cp_magnitude, cont.cp_magnitude),
                "axis_flips": int(len(continuous.flip_taus)),
                "renormalisations": int(continuous.renormalisations),
            })
        result.summary = {"ramps": summary}
        return result


# ---------- singular-points ----------

class SingularPointsScenario(BaseScenario):
    """Unity-propagator points with brute-force verification."""

    name = "singular-points"

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid")

        te_ratios: List[float] = Field(default_factory=lambda: [8.0, 15.0])
        l_max: int = Field(default=3, ge=1)
        circle_omega1: float = Field(default=1.0, ge=0.0)

    def run(self) -> ScenarioResult:
        p = self.params
        result = ScenarioResult(self.name)
        rows = []
        worst = 0.0
        for te_ratio in p.te_ratios:
            for point in singular_points(te_ratio, p.l_max):
                rotation = cycle_rotation(CycleParams(point.omega0, point.omega1, te_ratio))
                residual = float(np.linalg.norm(rotation.vector))
                worst = max(worst, residual)
                rows.append([te_ratio, point.l, point.m, point.omega0, point.omega1, residual])
        result.add_table(
            "singular_points",
            ("te_ratio", "l", "m", "omega0_norm", "omega1_norm", "identity_residual"),
            rows,
            ["identity_residual = |vector part of the cycle quaternion|"],
        )
        crossings = circle_crossings(p.circle_omega1, p.l_max)
        result.add_document("circle_crossings", {
            "omega1": p.circle_omega1,
            "l_max": p.l_max,
            "omega0": crossings.tolist(),
        })
        result.summary = {"points": len(rows), "max_identity_residual": worst}
        if worst > 1e-9:
            logger.warning("Singular point residual %.3e exceeds 1e-9", worst)
        return result


SCENARIOS = (
    CyclePropertiesScenario,
    LinearRampScenario,
    RampRateMapScenario,
    HarmonicScenario,
    ReturnToOriginScenario,
    ContinuousCompareScenario,
    SingularPointsScenario,
)


__all__ = [
    "BaseScenario",
    "CyclePropertiesScenario",
    "LinearRampScenario",
    "RampRateMapScenario",
    "HarmonicScenario",
    "ReturnToOriginScenario",
    "ContinuousCompareScenario",
    "SingularPointsScenario",
    "SCENARIOS",
    "central_square_half_width",
    "pulse_oriented_axis",
]
