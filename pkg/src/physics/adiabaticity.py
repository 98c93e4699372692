"""
Adiabaticity Map
Geometry of the effective axis (theta), critical ramp rates, the
adiabaticity parameter A, singular points and 2-D maps.

theta is the polar angle of the rotation axis: n_perp = sin(theta),
n_z = cos(theta). The axis is only defined up to sign, so derivatives of
theta are taken modulo pi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import argrelmin

from src.core.exceptions import DegenerateAxisError, InvalidInputError
from src.physics.cycle import CycleParams, cycle_rotation, effective_rotation

logger = logging.getLogger(__name__)

DERIVATIVE_STEP = 1e-5
ADIABATICITY_CAP = 1e9
DEFAULT_THRESHOLD = 2.0
SINGULAR_TOL = 1e-9


class CriticalRates(NamedTuple):
    """Critical ramp rates per echo spacing; +inf marks a safe direction."""

    nu0_crit: Any
    nu1_crit: Any


class SingularPoint(NamedTuple):
    """Unity-propagator point with its integer labels."""

    omega0: float
    omega1: float
    l: int
    m: int


@dataclass(frozen=True)
class AdiabaticityTrace:
    """A sampled once per refocusing cycle at the cycle centres."""

    tau: np.ndarray
    omega0: np.ndarray
    omega1: np.ndarray
    adiabaticity: np.ndarray

    def __len__(self) -> int:
        return len(self.tau)

    @property
    def minimum(self) -> float:
        return float(np.min(self.adiabaticity)) if len(self) else math.inf

    def capped(self) -> np.ndarray:
        return np.minimum(self.adiabaticity, ADIABATICITY_CAP)


@dataclass(frozen=True)
class AdiabaticityMap:
    """
    Gridded A (or critical-rate) values.

    ``values[i, j]`` belongs to ``second_axis[i]`` and ``omega0[j]``.
    """

    omega0: np.ndarray
    second_axis: np.ndarray
    second_axis_name: str
    quantity: str
    values: np.ndarray
    te_ratio: float

    def capped(self) -> np.ndarray:
        return np.minimum(self.values, ADIABATICITY_CAP)

    def contour(self, threshold: float = DEFAULT_THRESHOLD) -> List[Tuple[float, float]]:
        """
        Threshold crossings along the omega0 axis of every row.

        Returns:
            (second-axis value, interpolated omega0) pairs in row order.
        """
        crossings: List[Tuple[float, float]] = []
        capped = self.capped()
        for second, row in zip(self.second_axis, capped):
            above = row > threshold
            edges = np.flatnonzero(above[1:] != above[:-1])
            for j in edges:
                y0, y1 = row[j], row[j + 1]
                x0, x1 = self.omega0[j], self.omega0[j + 1]
                fraction = (threshold - y0) / (y1 - y0) if y1 != y0 else 0.5
                crossings.append((float(second), float(x0 + fraction * (x1 - x0))))
        return crossings


def _scalarise(value):
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value


# ---------- Axis geometry ----------

def _axis_components(p: CycleParams) -> Tuple[np.ndarray, np.ndarray]:
    """(n_z, signed transverse) of the static axis."""
    er = effective_rotation(p)
    return np.asarray(er.n_z, dtype=float), np.asarray(er.signed_transverse, dtype=float)


def theta(p: CycleParams) -> Any:
    """
    Polar angle of the effective axis, theta = atan2(n_perp, n_z) in [0, pi].

    Raises:
        DegenerateAxisError: At a unity propagator; the message names the
            nearest singular point.
    """
    er = effective_rotation(p)
    if np.any(er.degenerate_axis):
        omega0 = float(np.ravel(np.asarray(p.omega0_norm))[0])
        omega1 = float(np.ravel(np.asarray(p.omega1_norm))[0])
        te_ratio = float(np.ravel(np.asarray(p.te_ratio))[0])
        nearest = nearest_singular_point(omega0, omega1, te_ratio)
        hint = f"; nearest singular point ({nearest.omega0:.6g}, {nearest.omega1:.6g})" if nearest else ""
        raise DegenerateAxisError(
            f"Axis undefined at (omega0={omega0:.6g}, omega1={omega1:.6g}){hint}",
            point=(omega0, omega1),
        )
    return _scalarise(np.arctan2(er.n_perp, er.n_z))


def theta_derivative(p: CycleParams, wrt: str = "omega0", h: float = DERIVATIVE_STEP) -> Any:
    """
    Central-difference d(theta)/d(omega) of the static axis.

    Sign flips of the canonical axis are removed by measuring the angle
    between the neighbouring axes modulo pi. Near omega1 = 0 the omega1
    difference becomes one-sided.
    """
    if wrt == "omega0":
        centre = np.asarray(p.omega0_norm, dtype=float)
        lower = p.with_fields(omega0_norm=centre - h, ramp0=0.0, ramp1=0.0)
        upper = p.with_fields(omega0_norm=centre + h, ramp0=0.0, ramp1=0.0)
        span = 2.0 * h
    elif wrt == "omega1":
        centre = np.asarray(p.omega1_norm, dtype=float)
        low_value = np.maximum(centre - h, 0.0)
        lower = p.with_fields(omega1_norm=low_value, ramp0=0.0, ramp1=0.0)
        upper = p.with_fields(omega1_norm=centre + h, ramp0=0.0, ramp1=0.0)
        span = centre + h - low_value
    else:
        raise InvalidInputError(f"Unknown derivative variable: '{wrt}'")

    z_lo, s_lo = _axis_components(lower)
    z_hi, s_hi = _axis_components(upper)
    step = np.arctan2(z_lo * s_hi - s_lo * z_hi, z_lo * z_hi + s_lo * s_hi)
    step = np.where(step > 0.5 * np.pi, step - np.pi, step)
    step = np.where(step <= -0.5 * np.pi, step + np.pi, step)
    return _scalarise(step / span)


def richardson_theta_derivative(
    p: CycleParams, wrt: str = "omega0", h: float = DERIVATIVE_STEP
) -> Any:
    """Richardson-extrapolated derivative (4 D(h/2) - D(h)) / 3."""
    coarse = np.asarray(theta_derivative(p, wrt, h))
    fine = np.asarray(theta_derivative(p, wrt, 0.5 * h))
    return _scalarise((4.0 * fine - coarse) / 3.0)


# ---------- Rates and A ----------

def _rate(alpha: np.ndarray, derivative: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(
            derivative == 0.0,
            np.where(alpha > 0.0, np.inf, 0.0),
            alpha / np.abs(derivative),
        )


def critical_rates(p: CycleParams, h: float = DERIVATIVE_STEP) -> CriticalRates:
    """
    nu0_crit = |alpha / (d theta / d omega0)|, nu1_crit likewise for omega1.

    A vanishing derivative with alpha > 0 gives +inf; alpha = 0 (a singular
    point) gives 0.
    """
    alpha = np.asarray(effective_rotation(p).alpha, dtype=float)
    d0 = np.asarray(theta_derivative(p, "omega0", h))
    d1 = np.asarray(theta_derivative(p, "omega1", h))
    return CriticalRates(_scalarise(_rate(alpha, d0)), _scalarise(_rate(alpha, d1)))


def adiabaticity(p: CycleParams, h: float = DERIVATIVE_STEP) -> Any:
    """
    Adiabaticity parameter from the instantaneous ramps in ``p``.

    1/A = |ramp0 / nu0 + ramp1 / nu1| with the signed theta derivatives
    inside the modulus. With ramp1 = 0 this is exactly nu0 / |ramp0|.
    Both ramps zero gives +inf.
    """
    alpha = np.asarray(effective_rotation(p).alpha, dtype=float)
    ramp0 = np.asarray(p.ramp0, dtype=float)
    ramp1 = np.asarray(p.ramp1, dtype=float)
    d0 = np.asarray(theta_derivative(p, "omega0", h))

    with np.errstate(divide="ignore", invalid="ignore"):
        if np.all(ramp1 == 0.0):
            nu0 = _rate(alpha, d0)
            value = np.where(ramp0 == 0.0, np.inf, nu0 / np.abs(ramp0))
        else:
            d1 = np.asarray(theta_derivative(p, "omega1", h))
            rate = np.abs(ramp0 * d0 + ramp1 * d1)
            value = np.where(
                rate == 0.0,
                np.where((ramp0 == 0.0) & (ramp1 == 0.0), np.inf,
                         np.where(alpha > 0.0, np.inf, 0.0)),
                alpha / rate,
            )
    value = np.where(np.isnan(value), 0.0, value)
    return _scalarise(value)


# ---------- Singular points ----------

def _is_identity(omega0: float, omega1: float, te_ratio: float) -> bool:
    rotation = cycle_rotation(CycleParams(omega0, omega1, te_ratio))
    return bool(np.linalg.norm(rotation.vector) < SINGULAR_TOL)


def singular_points(
    te_ratio: float,
    l_max: int,
    omega1_max: float = math.inf,
    verify: bool = True,
) -> List[SingularPoint]:
    """
    Unity-propagator points (omega0, omega1) of the refocusing cycle.

    Enumerates integers 1 <= l <= l_max and l <= m < l * te_ratio with
    omega0 = +-2 (m - l) / (te_ratio - 1), omega1 = sqrt(4 l^2 - omega0^2)
    in (0, omega1_max]. With ``verify`` every candidate is checked against
    the brute-force cycle composition and non-identity candidates dropped.

    Returns:
        Points sorted by (l, m, omega0).
    """
    if te_ratio <= 1.0:
        raise InvalidInputError("te_ratio must exceed 1")
    if l_max < 1:
        return []

    seen = set()
    points: List[SingularPoint] = []
    for l in range(1, int(l_max) + 1):
        m = l
        while m < l * te_ratio:
            magnitude = 2.0 * (m - l) / (te_ratio - 1.0)
            radius_sq = 4.0 * l * l - magnitude * magnitude
            if radius_sq > 0.0:
                omega1 = math.sqrt(radius_sq)
                signs = (1.0,) if magnitude == 0.0 else (1.0, -1.0)
                for sign in signs:
                    omega0 = sign * magnitude
                    key = (round(omega0, 12), round(omega1, 12))
                    if omega1 > omega1_max or key in seen:
                        continue
                    if verify and not _is_identity(omega0, omega1, te_ratio):
                        logger.debug("Discarded non-identity candidate (%g, %g)", omega0, omega1)
                        continue
                    seen.add(key)
                    points.append(SingularPoint(omega0, omega1, l, m))
            m += 1

    points.sort(key=lambda point: (point.l, point.m, point.omega0))
    return points


def nearest_singular_point(
    omega0: float, omega1: float, te_ratio: float
) -> Optional[SingularPoint]:
    l_max = max(1, int(math.ceil(0.5 * math.hypot(omega0, omega1))) + 1)
    points = singular_points(te_ratio, l_max, verify=False)
    if not points:
        return None
    return min(points, key=lambda pt: math.hypot(pt.omega0 - omega0, pt.omega1 - omega1))


def circle_crossings(omega1: float, l_max: int) -> np.ndarray:
    """Offsets where a fixed-omega1 line meets the circles of radius 2l."""
    values = []
    for l in range(1, int(l_max) + 1):
        radius_sq = 4.0 * l * l - omega1 * omega1
        if radius_sq > 0.0:
            root = math.sqrt(radius_sq)
            values.extend([-root, root])
    return np.sort(np.array(values))


# ---------- Maps ----------

def critical_rate_minima(
    te_ratio: float,
    omega1: float = 1.0,
    omega0_grid: Optional[Sequence[float]] = None,
    order: int = 3,
) -> np.ndarray:
    """Offsets of the local minima of nu0_crit along a fixed-omega1 line."""
    grid = np.asarray(
        omega0_grid if omega0_grid is not None else np.linspace(-6.0, 6.0, 2401),
        dtype=float,
    )
    nu0 = np.asarray(critical_rates(CycleParams(grid, omega1, te_ratio)).nu0_crit)
    finite = np.where(np.isfinite(nu0), nu0, np.finfo(float).max)
    (indices,) = argrelmin(finite, order=order)
    return grid[indices]


def adiabaticity_grid(
    te_ratio: float,
    omega0_values: Sequence[float],
    ramp_values: Optional[Sequence[float]] = None,
    omega1_values: Optional[Sequence[float]] = None,
    omega1: float = 1.0,
    ramp0: float = 0.0,
    quantity: str = "adiabaticity",
) -> AdiabaticityMap:
    """
    2-D map over omega0 and either the ramp rate or omega1.

    Args:
        te_ratio: t_E / t_180.
        omega0_values: Offset axis (columns).
        ramp_values: Ramp-rate axis (rows); A = nu0_crit / |ramp|.
        omega1_values: Nutation axis (rows), used when ``ramp_values`` is None.
        omega1: Fixed omega1 for ramp maps.
        ramp0: Fixed ramp for omega1 maps of A.
        quantity: ``adiabaticity``, ``nu0_crit`` or ``nu1_crit``.

    Returns:
        AdiabaticityMap with rows ordered like the given second axis.
    """
    omega0_axis = np.asarray(omega0_values, dtype=float)
    if omega0_axis.ndim != 1 or len(omega0_axis) == 0:
        raise InvalidInputError("omega0 axis must be a non-empty 1-D sequence")
    if quantity not in ("adiabaticity", "nu0_crit", "nu1_crit"):
        raise InvalidInputError(f"Unknown map quantity: '{quantity}'")

    if ramp_values is not None:
        ramps = np.asarray(ramp_values, dtype=float)
        rates = critical_rates(CycleParams(omega0_axis, omega1, te_ratio))
        if quantity == "adiabaticity":
            nu0 = np.asarray(rates.nu0_crit)[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.where(
                    ramps[:, None] == 0.0, np.inf, nu0 / np.abs(ramps[:, None])
                )
        else:
            row = np.asarray(getattr(rates, quantity))
            values = np.broadcast_to(row, (len(ramps), len(omega0_axis))).copy()
        return AdiabaticityMap(omega0_axis, ramps, "ramp0", quantity, values, te_ratio)

    if omega1_values is None:
        raise InvalidInputError("Either ramp_values or omega1_values is required")
    omega1_axis = np.asarray(omega1_values, dtype=float)
    w0, w1 = np.meshgrid(omega0_axis, omega1_axis)
    params = CycleParams(w0, w1, te_ratio, ramp0=ramp0)
    if quantity == "adiabaticity":
        values = np.asarray(adiabaticity(params))
    else:
        values = np.asarray(getattr(critical_rates(params), quantity))
    return AdiabaticityMap(omega0_axis, omega1_axis, "omega1", quantity, values, te_ratio)


def adiabaticity_trace(profile, timing) -> AdiabaticityTrace:
    """
    A along a field profile, sampled at the cycle centres tau = j - 1/2.

    Args:
        profile: FieldProfile.
        timing: SequenceTiming (te_ratio, echo_count, refocusing_phase).
    """
    tau = np.arange(1, timing.echo_count + 1, dtype=float) - 0.5
    params = profile.cycle_params(tau, timing.te_ratio, timing.refocusing_phase)
    values = np.asarray(adiabaticity(params), dtype=float)
    omega0 = np.broadcast_to(np.asarray(params.omega0_norm, dtype=float), tau.shape)
    omega1 = np.broadcast_to(np.asarray(params.omega1_norm, dtype=float), tau.shape)
    return AdiabaticityTrace(tau, omega0.copy(), omega1.copy(), np.broadcast_to(values, tau.shape).copy())


__all__ = [
    "DERIVATIVE_STEP",
    "ADIABATICITY_CAP",
    "DEFAULT_THRESHOLD",
    "CriticalRates",
    "SingularPoint",
    "AdiabaticityTrace",
    "AdiabaticityMap",
    "theta",
    "theta_derivative",
    "richardson_theta_derivative",
    "critical_rates",
    "adiabaticity",
    "singular_points",
    "nearest_singular_point",
    "circle_crossings",
    "critical_rate_minima",
    "adiabaticity_grid",
    "adiabaticity_trace",
]
