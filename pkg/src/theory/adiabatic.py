"""
Adiabatic Prediction
Echo train predicted by freezing the mode amplitudes at their initial
projections; the CP part carries the accumulated dynamic and geometric
phases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.base_classes import BaseSolver
from src.physics.bloch import EchoTrain, excite
from src.physics.eigenmodes import decompose, geometric_phase_series
from src.theory.mode_trace import (
    AxisSeries,
    ModeTrace,
    dynamic_axis_series,
    echo_cycle_index,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AdiabaticPrediction:
    trace: ModeTrace
    train: EchoTrain


def adiabatic_predict(profile, timing, m_exc=None, series: Optional[AxisSeries] = None) -> AdiabaticPrediction:
    """
    Adiabatic evolution of the magnetization along a profile.

    M(N) = a0 v0(N) + 2 Re[a+ exp(-i sum alpha + i sum Gamma) v+(N)], with
    the amplitudes projected on the cycle-1 basis. Validity is judged by A
    and is not enforced here.

    Args:
        profile: FieldProfile.
        timing: SequenceTiming.
        m_exc: Magnetization at tau = 0; defaults to the excitation result.
        series: Precomputed axis series of cycles 1..N.

    Returns:
        AdiabaticPrediction with the frozen-amplitude trace and echo train.
    """
    series = series if series is not None else dynamic_axis_series(profile, timing)
    if m_exc is None:
        m_exc = excite(profile, timing)
    m_exc = np.asarray(m_exc, dtype=float).reshape(3)

    amplitudes = decompose(m_exc, series.basis_at(0))
    n_echoes = timing.echo_count

    dynamic = np.concatenate([[0.0], np.cumsum(series.alphas)])
    increments = geometric_phase_series(series.basis.v_plus)
    geometric = np.concatenate([[0.0, 0.0], np.cumsum(increments)])[: n_echoes + 1]

    index = echo_cycle_index(n_echoes)
    v0 = series.basis.v0[index]
    v_plus = series.basis.v_plus[index]
    factor = amplitudes.a_plus * np.exp(-1j * dynamic + 1j * geometric)
    magnetization = amplitudes.a0 * v0 + 2.0 * np.real(factor[:, None] * v_plus)

    tau = np.arange(n_echoes + 1, dtype=float)
    omega0 = np.broadcast_to(np.asarray(profile.omega0.value(tau), dtype=float), tau.shape)
    trace = ModeTrace(
        cycle=np.arange(n_echoes + 1),
        tau=tau,
        omega0=omega0.copy(),
        a0=np.full(n_echoes + 1, amplitudes.a0),
        cp_magnitude=np.full(n_echoes + 1, amplitudes.cp_magnitude),
        adiabaticity=series.adiabaticity[index],
        dynamic_phase=dynamic,
        geometric_phase=geometric,
    )
    train = EchoTrain(tau, omega0.copy(), magnetization, {"prediction": "adiabatic"})
    return AdiabaticPrediction(trace, train)


class AdiabaticPredictor(BaseSolver):
    """Frozen-amplitude prediction of one profile, optionally on a shared axis series."""

    def __init__(self, profile, timing, series: Optional[AxisSeries] = None) -> None:
        super().__init__(profile, timing)
        self.__series = series

    def _run(self, m_exc=None) -> AdiabaticPrediction:
        return adiabatic_predict(self._profile, self._timing, m_exc, self.__series)


__all__ = ["AdiabaticPrediction", "adiabatic_predict", "AdiabaticPredictor"]
