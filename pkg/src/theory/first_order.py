"""
First-Order Prediction
Transverse magnetization to first order in 1/A for a magnetization locked
to the dynamic effective axis, and its windowed comparison with a
simulated echo train.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np

from src.core.base_classes import BaseSolver
from src.core.exceptions import InvalidInputError
from src.physics.adiabaticity import ADIABATICITY_CAP
from src.physics.cycle import azimuthal_correction
from src.theory.mode_trace import axis_series

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 16
VALIDITY_LIMIT = 0.1


class FirstOrderPoint(NamedTuple):
    mx: Any
    my_abs: Any


@dataclass(frozen=True, eq=False)
class FirstOrderPrediction:
    tau: np.ndarray
    omega0: np.ndarray
    n_perp: np.ndarray
    inverse_adiabaticity: np.ndarray
    mx: np.ndarray
    my_abs: np.ndarray

    COLUMNS = ("tau", "omega0_norm", "n_perp", "inverse_adiabaticity", "Mx_first_order", "My_abs_first_order")

    def __len__(self) -> int:
        return len(self.tau)

    def rows(self) -> list:
        return [
            [self.tau[k], self.omega0[k], self.n_perp[k],
             self.inverse_adiabaticity[k], self.mx[k], self.my_abs[k]]
            for k in range(len(self))
        ]


def first_order_formula(n_perp, delta_epsilon, inverse_adiabaticity) -> FirstOrderPoint:
    """
    Mx = [cos(de) n_perp - (1/A) sin(de)] / sqrt(1 + 1/A^2)
    |My| = [sin(de) n_perp + (1/A) cos(de)] / sqrt(1 + 1/A^2)
    """
    n_perp = np.asarray(n_perp, dtype=float)
    de = np.asarray(delta_epsilon, dtype=float)
    inv = np.asarray(inverse_adiabaticity, dtype=float)
    scale = 1.0 / np.sqrt(1.0 + inv * inv)
    mx = scale * (np.cos(de) * n_perp - inv * np.sin(de))
    my = np.abs(scale * (np.sin(de) * n_perp + inv * np.cos(de)))
    if mx.ndim == 0:
        return FirstOrderPoint(float(mx), float(my))
    return FirstOrderPoint(mx, my)


def _predict(profile, tau, timing) -> FirstOrderPrediction:
    series = axis_series(profile, tau, timing.te_ratio, timing.refocusing_phase)
    params = profile.cycle_params(series.tau, timing.te_ratio, timing.refocusing_phase)
    delta_epsilon = np.broadcast_to(np.asarray(azimuthal_correction(params), dtype=float), series.tau.shape)

    # signed transverse component on the continuous branch
    phase = series.reference_phase
    n_perp = series.axes[:, 0] * np.cos(phase) + series.axes[:, 1] * np.sin(phase)
    with np.errstate(divide="ignore"):
        inverse = np.where(np.isinf(series.adiabaticity), 0.0, 1.0 / series.adiabaticity)
    inverse = np.where(np.isfinite(inverse), inverse, ADIABATICITY_CAP)

    point = first_order_formula(n_perp, delta_epsilon, inverse)
    return FirstOrderPrediction(
        tau=series.tau,
        omega0=series.omega0,
        n_perp=n_perp,
        inverse_adiabaticity=inverse,
        mx=np.atleast_1d(point.mx),
        my_abs=np.atleast_1d(point.my_abs),
    )


def first_order_predict(profile, tau, timing) -> FirstOrderPoint:
    """
    First-order (Mx, |My|) at ``tau`` along a profile.

    ``tau`` may be a scalar or an increasing 1-D array; n_perp is taken on
    the continuous axis branch that starts along the refocusing pulse.
    """
    prediction = _predict(profile, tau, timing)
    if np.ndim(tau) == 0:
        return FirstOrderPoint(float(prediction.mx[0]), float(prediction.my_abs[0]))
    return FirstOrderPoint(prediction.mx, prediction.my_abs)


class FirstOrderResidual(NamedTuple):
    """Windowed |My| residual over the leading stretch where 1/A < limit."""

    echoes: int
    windows: int
    max_error: float
    rms_error: float


def first_order_residual(
    magnetization,
    prediction: FirstOrderPrediction,
    window: int = DEFAULT_WINDOW,
    limit: float = VALIDITY_LIMIT,
) -> FirstOrderResidual:
    """
    Compare simulated My with the first-order |My| before the first transition.

    A magnetization that starts on the static axis precesses around the
    first-order axis on a cone of half-angle ~ delta_epsilon + 1/A, so
    single echoes swing My by twice that. Both series are therefore
    averaged over ``window`` consecutive echoes (signed My for the
    simulation) before comparing, and only echoes up to the first one with
    1/A >= ``limit`` are used.

    Args:
        magnetization: Simulated echoes 0..N, shape (N + 1, 3).
        prediction: First-order prediction at echoes 1..N.
        window: Echoes per moving average.
        limit: Largest 1/A the comparison extends to.

    Returns:
        FirstOrderResidual; ``windows`` is 0 when the stretch is shorter
        than one window, in which case both errors are NaN.
    """
    window = int(window)
    if window < 1:
        raise InvalidInputError("window must be at least 1")
    magnetization = np.asarray(magnetization, dtype=float)
    index = np.asarray(prediction.tau, dtype=int)
    beyond = np.flatnonzero(prediction.inverse_adiabaticity >= limit)
    head = int(beyond[0]) if len(beyond) else len(prediction)

    if head < window:
        logger.info("First-order stretch of %d echoes is shorter than the window %d", head, window)
        return FirstOrderResidual(head, 0, math.nan, math.nan)

    kernel = np.full(window, 1.0 / window)
    simulated = np.abs(np.convolve(magnetization[index[:head], 1], kernel, mode="valid"))
    predicted = np.convolve(prediction.my_abs[:head], kernel, mode="valid")
    diff = simulated - predicted
    return FirstOrderResidual(
        echoes=head,
        windows=len(diff),
        max_error=float(np.max(np.abs(diff))),
        rms_error=float(np.sqrt(np.mean(diff * diff))),
    )


class FirstOrderPredictor(BaseSolver):
    """First-order prediction at every echo 1..N of a profile."""

    def _run(self) -> FirstOrderPrediction:
        tau = np.arange(1, self._timing.echo_count + 1, dtype=float)
        return _predict(self._profile, tau, self._timing)


__all__ = [
    "DEFAULT_WINDOW",
    "VALIDITY_LIMIT",
    "FirstOrderPoint",
    "FirstOrderPrediction",
    "FirstOrderResidual",
    "first_order_formula",
    "first_order_predict",
    "first_order_residual",
    "FirstOrderPredictor",
]
