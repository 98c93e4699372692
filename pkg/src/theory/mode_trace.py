"""
Mode Trace
Per-cycle eigenbasis series along a field profile and the CPMG / CP
amplitudes of an echo train projected onto it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, List, Optional

import numpy as np

from src.physics.adiabaticity import ADIABATICITY_CAP, adiabaticity
from src.physics.cycle import effective_rotation
from src.physics.eigenmodes import (
    EigenBasis,
    align_axes,
    decompose,
    eigenbasis_from_axis,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ModeTrace:
    """
    Per-echo mode amplitudes.

    Row k describes echo k; the optional phases are cumulative dynamic
    (sum of alpha) and geometric (sum of Gamma for the k = +1 mode).
    """

    cycle: np.ndarray
    tau: np.ndarray
    omega0: np.ndarray
    a0: np.ndarray
    cp_magnitude: np.ndarray
    adiabaticity: np.ndarray
    dynamic_phase: Optional[np.ndarray] = None
    geometric_phase: Optional[np.ndarray] = None

    COLUMNS = ("cycle", "tau", "omega0_norm", "a0", "cp_magnitude", "adiabaticity")

    def __len__(self) -> int:
        return len(self.cycle)

    def norm_residual(self) -> float:
        """max |a0^2 + |a_CP|^2 - 1| over the trace."""
        if not len(self):
            return 0.0
        return float(np.max(np.abs(self.a0 ** 2 + self.cp_magnitude ** 2 - 1.0)))

    def rows(self) -> List[list]:
        capped = np.minimum(self.adiabaticity, ADIABATICITY_CAP)
        return [
            [int(self.cycle[k]), self.tau[k], self.omega0[k],
             self.a0[k], self.cp_magnitude[k], capped[k]]
            for k in range(len(self))
        ]


@dataclass(frozen=True, eq=False)
class AxisSeries:
    """
    Continuity-aligned effective rotations sampled at the points ``tau``.

    ``axes`` and ``alphas`` follow one branch (alpha may exceed pi after a
    flip); ``basis`` holds one eigenbasis per sample.
    """

    tau: np.ndarray
    omega0: np.ndarray
    axes: np.ndarray
    alphas: np.ndarray
    reference_phase: np.ndarray
    flip_indices: np.ndarray
    basis: EigenBasis
    adiabaticity: np.ndarray

    def __len__(self) -> int:
        return len(self.tau)

    def basis_at(self, index: Any) -> EigenBasis:
        return EigenBasis(self.basis.v0[index], self.basis.v_plus[index])

    def generator_alphas(self) -> np.ndarray:
        """Aligned angles folded into (-pi, pi] for use as a continuous generator."""
        return np.where(self.alphas > np.pi, self.alphas - 2.0 * np.pi, self.alphas)


def axis_series(profile, tau, te_ratio: float, pulse_phase: float = 0.0,
                dynamic: bool = True, with_adiabaticity: bool = True) -> AxisSeries:
    """
    Effective rotations of cycles centred at ``tau``, on one continuous branch.

    The branch is chosen so the first axis points along the refocusing
    pulse direction.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    params = profile.cycle_params(tau, te_ratio, pulse_phase)
    er = effective_rotation(params, dynamic=dynamic)

    phase = np.broadcast_to(np.asarray(er.reference_phase, dtype=float), tau.shape)
    signed = np.broadcast_to(np.asarray(er.signed_transverse, dtype=float), tau.shape)
    n_z = np.broadcast_to(np.asarray(er.n_z, dtype=float), tau.shape)
    alpha = np.broadcast_to(np.asarray(er.alpha, dtype=float), tau.shape)
    degenerate = np.broadcast_to(np.asarray(er.degenerate_axis, dtype=bool), tau.shape)
    raw_axes = np.stack([signed * np.cos(phase), signed * np.sin(phase), n_z], axis=-1)

    pulse_direction = np.array([np.cos(pulse_phase), np.sin(pulse_phase), 0.0])
    aligned = align_axes(raw_axes, alpha, degenerate, reference=pulse_direction)
    basis = eigenbasis_from_axis(aligned.axes, phase)

    if with_adiabaticity:
        values = np.broadcast_to(np.asarray(adiabaticity(params), dtype=float), tau.shape).copy()
    else:
        values = np.full(tau.shape, np.nan)
    omega0 = np.broadcast_to(np.asarray(params.omega0_norm, dtype=float), tau.shape).copy()
    return AxisSeries(
        tau=tau,
        omega0=omega0,
        axes=aligned.axes,
        alphas=aligned.alphas,
        reference_phase=phase.copy(),
        flip_indices=aligned.flip_indices,
        basis=basis,
        adiabaticity=values,
    )


def dynamic_axis_series(profile, timing, dynamic: bool = True) -> AxisSeries:
    """Axis series of cycles 1..N (centres tau = j - 1/2)."""
    centres = np.arange(1, timing.echo_count + 1, dtype=float) - 0.5
    return axis_series(profile, centres, timing.te_ratio, timing.refocusing_phase, dynamic)


def echo_cycle_index(echo_count: int) -> np.ndarray:
    """Series index used for each echo 0..N: echo j uses cycle j, echo 0 cycle 1."""
    return np.maximum(np.arange(echo_count + 1), 1) - 1


def mode_trace_from_echoes(train, profile, timing, series: Optional[AxisSeries] = None) -> ModeTrace:
    """
    Project a simulated echo train onto the instantaneous dynamic eigenbases.

    Args:
        train: EchoTrain with echoes 0..N.
        profile: The profile the train was simulated with.
        timing: Its sequence timing.
        series: Precomputed axis series of cycles 1..N.

    Returns:
        ModeTrace with one row per echo.
    """
    series = series if series is not None else dynamic_axis_series(profile, timing)
    index = echo_cycle_index(len(train) - 1)
    amplitudes = decompose(train.magnetization, series.basis_at(index))
    residual = float(np.max(np.abs(np.asarray(amplitudes.norm_squared) - train.norms() ** 2)))
    if residual > 1e-9:
        logger.warning("Mode norm partition off by %.3e", residual)
    return ModeTrace(
        cycle=np.arange(len(train)),
        tau=np.asarray(train.tau, dtype=float),
        omega0=np.asarray(train.omega0, dtype=float),
        a0=np.asarray(amplitudes.a0, dtype=float),
        cp_magnitude=np.asarray(amplitudes.cp_magnitude, dtype=float),
        adiabaticity=series.adiabaticity[index],
    )


__all__ = [
    "ModeTrace",
    "AxisSeries",
    "axis_series",
    "dynamic_axis_series",
    "echo_cycle_index",
    "mode_trace_from_echoes",
]
