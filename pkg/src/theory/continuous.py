"""
Continuous-Limit Solver
Integrates dm/dtau = g(tau) x m under the continuous average field of the
refocusing cycles, g being the principal rotation vector alpha n of the
dynamic cycle, and projects the result onto the instantaneous eigenbases
once per echo.

The default stepper is a fourth-order Magnus step evaluated at the two
Gauss-Legendre points and applied as an exact rotation, so |m| is kept
to rounding error. g jumps from +pi n to -pi n where alpha crosses pi;
those cuts are located by bisection and used as step boundaries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.base_classes import BaseSolver
from src.core.exceptions import InvalidInputError
from src.physics.bloch import excite
from src.physics.cycle import effective_rotation
from src.physics.eigenmodes import decompose
from src.theory.mode_trace import (
    AxisSeries,
    ModeTrace,
    axis_series,
    dynamic_axis_series,
    echo_cycle_index,
)

logger = logging.getLogger(__name__)

DEFAULT_STEPS_PER_CYCLE = 8
RENORMALISE_TOL = 1e-6
METHODS = ("magnus4", "rk4")

_GAUSS = 0.5 + np.array([-1.0, 1.0]) * np.sqrt(3.0) / 6.0
_COMMUTATOR = np.sqrt(3.0) / 12.0
_BISECTIONS = 60


@dataclass(frozen=True, eq=False)
class ContinuousResult:
    trace: ModeTrace
    magnetization: np.ndarray
    flip_taus: np.ndarray
    renormalisations: int
    steps_per_cycle: int
    method: str = "magnus4"


def principal_generator(profile, tau, te_ratio: float, pulse_phase: float = 0.0) -> np.ndarray:
    """Rotation vectors alpha n (alpha in [0, pi]) of the dynamic cycles centred at ``tau``."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    er = effective_rotation(profile.cycle_params(tau, te_ratio, pulse_phase), dynamic=True)
    alpha = np.broadcast_to(np.asarray(er.alpha, dtype=float), tau.shape)
    axis = np.broadcast_to(er.axis, tau.shape + (3,))
    return alpha[:, None] * axis


def _locate_cuts(profile, timing, nodes: np.ndarray) -> np.ndarray:
    """
    tau of every alpha = pi crossing, where the principal vector reverses.

    Candidates come from sign changes of g between the nodes and the
    Gauss points of each step; each is then bisected to rounding error.
    """
    h = nodes[1] - nodes[0]
    dense = np.sort(np.concatenate([nodes, (nodes[:-1, None] + _GAUSS * h).ravel()]))
    g = principal_generator(profile, dense, timing.te_ratio, timing.refocusing_phase)
    alpha = np.linalg.norm(g, axis=-1)
    dots = np.sum(g[:-1] * g[1:], axis=-1)
    jump = (dots < 0.0) & (np.minimum(alpha[:-1], alpha[1:]) > 0.5 * np.pi)
    # alpha touching pi at a single sample is not a cut
    lone = jump[:-1] & jump[1:] & (np.sum(g[:-2] * g[2:], axis=-1) > 0.0)
    jump[:-1] &= ~lone
    jump[1:] &= ~lone
    jumps = np.flatnonzero(jump)
    if not len(jumps):
        return np.empty(0)

    left = dense[jumps].copy()
    right = dense[jumps + 1].copy()
    g_left = g[jumps]
    for _ in range(_BISECTIONS):
        mid = 0.5 * (left + right)
        same = np.sum(
            principal_generator(profile, mid, timing.te_ratio, timing.refocusing_phase) * g_left,
            axis=-1,
        ) > 0.0
        left = np.where(same, mid, left)
        right = np.where(same, right, mid)
    return 0.5 * (left + right)


def _rotation_matrices(rotvec: np.ndarray) -> np.ndarray:
    """Rodrigues matrices exp([v]x) for an (n, 3) array of rotation vectors."""
    angle = np.linalg.norm(rotvec, axis=-1)
    k = rotvec / np.where(angle > 0.0, angle, 1.0)[:, None]
    cross = np.zeros((len(rotvec), 3, 3))
    cross[:, 0, 1], cross[:, 0, 2] = -k[:, 2], k[:, 1]
    cross[:, 1, 0], cross[:, 1, 2] = k[:, 2], -k[:, 0]
    cross[:, 2, 0], cross[:, 2, 1] = -k[:, 1], k[:, 0]
    sin = np.sin(angle)[:, None, None]
    cos = np.cos(angle)[:, None, None]
    return np.eye(3) + sin * cross + (1.0 - cos) * (cross @ cross)


def _magnus_steps(profile, timing, m: np.ndarray, steps_per_cycle: int, out: np.ndarray):
    n_echoes = timing.echo_count
    nodes = np.arange(steps_per_cycle * n_echoes + 1) / steps_per_cycle
    cuts = _locate_cuts(profile, timing, nodes)
    bounds = np.union1d(nodes, cuts)
    lengths = np.diff(bounds)

    points = bounds[:-1, None] + _GAUSS * lengths[:, None]
    g = principal_generator(
        profile, points.ravel(), timing.te_ratio, timing.refocusing_phase
    ).reshape(len(lengths), 2, 3)
    omega = (0.5 * lengths[:, None] * (g[:, 0] + g[:, 1])
             + _COMMUTATOR * (lengths ** 2)[:, None] * np.cross(g[:, 1], g[:, 0]))
    matrices = _rotation_matrices(omega)

    echo_at = np.searchsorted(bounds, np.arange(1, n_echoes + 1, dtype=float))
    record = np.zeros(len(bounds), dtype=int)
    record[echo_at] = np.arange(1, n_echoes + 1)

    renormalisations = 0
    for i, matrix in enumerate(matrices):
        m = matrix @ m
        norm = float(np.linalg.norm(m))
        if abs(norm - 1.0) > RENORMALISE_TOL:
            m = m / norm
            renormalisations += 1
            logger.debug("Renormalised at tau=%.6g (|m| = %.9f)", bounds[i + 1], norm)
        if record[i + 1]:
            out[record[i + 1]] = m
    return cuts, renormalisations, len(matrices)


def _rk4_generators(field: AxisSeries) -> tuple:
    """
    Generator vectors on the half-step grid, one branch per RK4 step.

    Each step keeps the (-pi, pi] fold chosen at its start so the three
    stage samples never straddle an axis flip; flips land on step
    boundaries.
    """
    alphas = field.alphas
    start = alphas[0:-1:2]
    shift = np.where(start > np.pi, 2.0 * np.pi, 0.0)
    stage_a = (alphas[0:-1:2] - shift)[:, None] * field.axes[0:-1:2]
    stage_b = (alphas[1::2] - shift)[:, None] * field.axes[1::2]
    stage_c = (alphas[2::2] - shift)[:, None] * field.axes[2::2]
    return np.stack([stage_a, stage_b, stage_c], axis=1), shift


def _rk4_steps(profile, timing, m: np.ndarray, steps_per_cycle: int, out: np.ndarray):
    n_steps = steps_per_cycle * timing.echo_count
    h = 1.0 / steps_per_cycle
    grid = np.arange(2 * n_steps + 1) * (0.5 * h)
    field = axis_series(
        profile, grid, timing.te_ratio, timing.refocusing_phase, with_adiabaticity=False
    )
    generators, shift = _rk4_generators(field)
    flips = (np.flatnonzero(np.diff(shift) != 0.0) + 1) * h

    renormalisations = 0
    for k in range(n_steps):
        g_a, g_b, g_c = generators[k]
        k1 = np.cross(g_a, m)
        k2 = np.cross(g_b, m + 0.5 * h * k1)
        k3 = np.cross(g_b, m + 0.5 * h * k2)
        k4 = np.cross(g_c, m + h * k3)
        m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        norm = float(np.linalg.norm(m))
        if abs(norm - 1.0) > RENORMALISE_TOL:
            m = m / norm
            renormalisations += 1
            logger.debug("Renormalised at tau=%.6g (|m| = %.9f)", (k + 1) * h, norm)
        if (k + 1) % steps_per_cycle == 0:
            out[(k + 1) // steps_per_cycle] = m
    return flips, renormalisations, n_steps


def continuous_mode_evolution(
    profile,
    timing,
    m0=None,
    steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE,
    series: Optional[AxisSeries] = None,
    method: str = "magnus4",
) -> ContinuousResult:
    """
    Continuous-limit evolution with fixed steps per echo spacing.

    Args:
        profile: FieldProfile (piecewise smooth).
        timing: SequenceTiming; echoes 0..N are reported.
        m0: Magnetization at tau = 0, default the excitation result.
        steps_per_cycle: Steps per echo spacing.
        series: Precomputed cycle axis series used for the projections.
        method: ``"magnus4"`` (exact rotations) or ``"rk4"``.

    Returns:
        ContinuousResult with the mode trace, the magnetization at integer
        tau, the tau of every generator cut and the renormalisation count.
    """
    steps_per_cycle = int(steps_per_cycle)
    if steps_per_cycle < 1:
        raise InvalidInputError("steps_per_cycle must be at least 1")
    if method not in METHODS:
        raise InvalidInputError(f"method must be one of {METHODS}, got {method!r}")
    n_echoes = timing.echo_count

    m = np.asarray(excite(profile, timing) if m0 is None else m0, dtype=float).reshape(3).copy()
    out = np.empty((n_echoes + 1, 3))
    out[0] = m
    stepper = _magnus_steps if method == "magnus4" else _rk4_steps
    flip_taus, renormalisations, n_steps = stepper(profile, timing, m, steps_per_cycle, out)

    if renormalisations:
        logger.info("Continuous solver renormalised %d of %d steps", renormalisations, n_steps)
    if len(flip_taus):
        logger.info("Continuous solver crossed %d axis flips", len(flip_taus))

    series = series if series is not None else dynamic_axis_series(profile, timing)
    index = echo_cycle_index(n_echoes)
    amplitudes = decompose(out, series.basis_at(index))
    tau = np.arange(n_echoes + 1, dtype=float)
    omega0 = np.broadcast_to(np.asarray(profile.omega0.value(tau), dtype=float), tau.shape)
    trace = ModeTrace(
        cycle=np.arange(n_echoes + 1),
        tau=tau,
        omega0=omega0.copy(),
        a0=np.asarray(amplitudes.a0, dtype=float),
        cp_magnitude=np.asarray(amplitudes.cp_magnitude, dtype=float),
        adiabaticity=series.adiabaticity[index],
    )
    return ContinuousResult(trace, out, flip_taus, renormalisations, steps_per_cycle, method)


class ContinuousSolver(BaseSolver):
    """Continuous-limit evolution of one profile with a fixed stepper."""

    def __init__(
        self,
        profile,
        timing,
        steps_per_cycle: int = DEFAULT_STEPS_PER_CYCLE,
        method: str = "magnus4",
        series: Optional[AxisSeries] = None,
    ) -> None:
        super().__init__(profile, timing)
        self.__steps = steps_per_cycle
        self.__method = method
        self.__series = series

    def _run(self, m0=None) -> ContinuousResult:
        return continuous_mode_evolution(
            self._profile, self._timing, m0, self.__steps, self.__series, self.__method
        )


__all__ = [
    "DEFAULT_STEPS_PER_CYCLE",
    "METHODS",
    "ContinuousResult",
    "continuous_mode_evolution",
    "principal_generator",
    "ContinuousSolver",
]
