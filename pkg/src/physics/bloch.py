"""
Bloch Simulator
Direct piecewise-rotation simulation of a CPMG sequence under
time-dependent w~0(tau) and w~1(tau), sampled at the nominal echo centres.

Layout in tau (units of t_E): the excitation pulse is centred at tau = 0,
refocusing pulse j (width 1/te_ratio) is centred at tau = j - 1/2 and echo j
sits at tau = j. Relaxation is not modelled.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np

from src import __version__
from src.core.base_classes import BaseSolver
from src.core.exceptions import InvalidInputError
from src.physics.cycle import EffectiveRotation
from src.physics.profiles import FieldProfile
from src.physics.rotation import Z_AXIS, rotate_batch, rotate_z_batch

logger = logging.getLogger(__name__)

DEFAULT_SUBSTEPS = 4
_BLOCK_BUDGET = 2_000_000


@dataclass(frozen=True)
class SequenceTiming:
    """Timing of one CPMG sequence in units of t_180 and t_E."""

    te_ratio: float = 15.0
    echo_count: int = 1000
    t90_ratio: float = 0.5
    excitation_phase: float = 0.5 * np.pi
    refocusing_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.te_ratio <= 1.0:
            raise InvalidInputError("te_ratio must exceed 1")
        if self.echo_count < 1:
            raise InvalidInputError("echo_count must be at least 1")
        if self.t90_ratio <= 0.0 or self.t90_ratio + 1.0 > self.te_ratio:
            raise InvalidInputError(
                "t90_ratio must be positive and the excitation pulse must end "
                "before the first refocusing pulse"
            )

    @property
    def pulse_width(self) -> float:
        """Refocusing pulse duration in echo spacings."""
        return 1.0 / self.te_ratio

    def with_echo_count(self, echo_count: int) -> "SequenceTiming":
        return SequenceTiming(
            self.te_ratio, int(echo_count), self.t90_ratio,
            self.excitation_phase, self.refocusing_phase,
        )


@dataclass(frozen=True, eq=False)
class EchoRecord:
    index: int
    tau: float
    omega0: float
    magnetization: np.ndarray


@dataclass(frozen=True, eq=False)
class EchoTrain:
    """
    Magnetization at echoes k = 0..N (echo 0 is the referred excitation).

    ``magnetization`` has shape (N + 1, 3).
    """

    tau: np.ndarray
    omega0: np.ndarray
    magnetization: np.ndarray
    manifest: Dict[str, Any] = field(default_factory=dict)

    COLUMNS = ("echo_index", "tau", "omega0_norm", "Mx", "My", "Mz")

    def __len__(self) -> int:
        return len(self.tau)

    def __iter__(self) -> Iterator[EchoRecord]:
        for k in range(len(self)):
            yield self.record(k)

    def record(self, k: int) -> EchoRecord:
        return EchoRecord(k, float(self.tau[k]), float(self.omega0[k]), self.magnetization[k].copy())

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.magnetization, axis=-1)

    def rows(self) -> List[list]:
        return [
            [k, self.tau[k], self.omega0[k], *self.magnetization[k]]
            for k in range(len(self))
        ]


# ---------- Excitation ----------

def excite(profile: FieldProfile, timing: SequenceTiming, m_initial=None) -> np.ndarray:
    """
    Magnetization after the excitation pulse, referred to tau = 0.

    One rectangular pulse of duration t90 at the excitation phase with the
    fields at sequence start; the free precession over the second half of
    the pulse is then undone so the result sits at the pulse centre.

    Args:
        profile: Field profile (scalar or batched parameters).
        timing: Sequence timing.
        m_initial: Starting magnetization, default +z.

    Returns:
        Vector of shape (3,) or (B, 3) for batched profiles.
    """
    omega0 = np.asarray(profile.omega0.value(0.0), dtype=float)
    omega1 = np.asarray(profile.omega1.value(0.0), dtype=float)
    omega0, omega1 = np.broadcast_arrays(omega0, omega1)
    phase = timing.excitation_phase

    rotvec = np.pi * timing.t90_ratio * np.stack(
        [omega1 * np.cos(phase), omega1 * np.sin(phase), omega0], axis=-1
    )
    start = Z_AXIS if m_initial is None else np.asarray(m_initial, dtype=float)
    m = rotate_batch(np.broadcast_to(start, rotvec.shape).copy(), rotvec)

    half = 0.5 * timing.t90_ratio / timing.te_ratio
    referral = -np.pi * timing.te_ratio * np.asarray(profile.omega0.integral(0.0, half))
    return rotate_z_batch(m, np.broadcast_to(referral, m.shape[:-1]))


# ---------- Propagation kernels ----------

def _cycle_block(
    profile: FieldProfile,
    timing: SequenceTiming,
    first: int,
    last: int,
    substeps: int,
    commutator_correction: bool,
):
    """Free-precession angles and pulse rotation vectors for cycles first..last."""
    te = timing.te_ratio
    width = timing.pulse_width
    phase = timing.refocusing_phase
    centre = (np.arange(first, last + 1, dtype=float) - 0.5)[:, None]

    free_before = np.pi * te * np.asarray(
        profile.omega0.integral(centre - 0.5, centre - 0.5 * width)
    )
    free_after = np.pi * te * np.asarray(
        profile.omega0.integral(centre + 0.5 * width, centre + 0.5)
    )

    offsets = ((np.arange(substeps) + 0.5) / substeps - 0.5) * width
    tau_sub = centre[:, None, :] + offsets[None, :, None]
    omega0 = np.asarray(profile.omega0.value(tau_sub), dtype=float)
    omega1 = np.asarray(profile.omega1.value(centre), dtype=float)[:, None, :]
    omega0, omega1 = np.broadcast_arrays(omega0, omega1)

    b = np.pi * np.stack(
        [omega1 * np.cos(phase), omega1 * np.sin(phase), omega0], axis=-1
    )
    dt = 1.0 / substeps
    rotvec = b * dt
    if commutator_correction:
        ramp = np.asarray(profile.omega0.derivative(tau_sub), dtype=float)
        ramp = np.broadcast_to(ramp, omega0.shape)
        b_dot = np.zeros_like(b)
        b_dot[..., 2] = np.pi * ramp / te
        rotvec = rotvec + (dt ** 3 / 12.0) * np.cross(b_dot, b)
    return free_before, rotvec, free_after


def _propagate(
    profile: FieldProfile,
    timing: SequenceTiming,
    m0: np.ndarray,
    substeps: int,
    commutator_correction: bool,
    capture: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Propagate B trajectories through ``timing.echo_count`` cycles.

    Returns (N + 1, B, 3) echoes, or (B, 3) magnetizations at the echo index
    given per trajectory in ``capture``.
    """
    m = np.array(m0, dtype=float)
    batch = m.shape[0]
    n_cycles = timing.echo_count

    if capture is None:
        out = np.empty((n_cycles + 1, batch, 3))
        out[0] = m
    else:
        capture = np.asarray(capture, dtype=int)
        out = np.empty((batch, 3))
        by_echo: Dict[int, np.ndarray] = {}
        for k in np.unique(capture):
            by_echo[int(k)] = np.flatnonzero(capture == k)
        if 0 in by_echo:
            out[by_echo[0]] = m[by_echo[0]]

    block = max(1, min(n_cycles, _BLOCK_BUDGET // (3 * substeps * batch)))
    first = 1
    while first <= n_cycles:
        last = min(n_cycles, first + block - 1)
        free_before, rotvec, free_after = _cycle_block(
            profile, timing, first, last, substeps, commutator_correction
        )
        for k in range(last - first + 1):
            m = rotate_z_batch(m, free_before[k])
            for i in range(substeps):
                m = rotate_batch(m, rotvec[k, i])
            m = rotate_z_batch(m, free_after[k])
            echo = first + k
            if capture is None:
                out[echo] = m
            elif echo in by_echo:
                out[by_echo[echo]] = m[by_echo[echo]]
        first = last + 1
    return out


def _batch_size(profile: FieldProfile) -> int:
    shape = np.broadcast(
        np.asarray(profile.omega0.value(0.0)), np.asarray(profile.omega1.value(0.0))
    ).shape
    return int(np.prod(shape)) if shape else 1


def _check_substeps(substeps: int) -> int:
    substeps = int(substeps)
    if substeps < 1:
        raise InvalidInputError("substeps_per_interval must be at least 1")
    return substeps


# ---------- Public API ----------

def simulate_batch(
    profile: FieldProfile,
    timing: SequenceTiming,
    m0=None,
    capture=None,
    substeps_per_interval: int = DEFAULT_SUBSTEPS,
    commutator_correction: bool = True,
) -> np.ndarray:
    """
    Simulate many independent trajectories sharing one timing.

    Args:
        profile: Profile whose waveform parameters have batch shape (B,).
        timing: Sequence timing; ``echo_count`` cycles are simulated.
        m0: Initial magnetization (B, 3) at tau = 0; default is excitation.
        capture: Optional per-trajectory echo index to return.
        substeps_per_interval: Midpoint substeps per refocusing pulse.
        commutator_correction: Add the second-order term for ramping fields.

    Returns:
        (N + 1, B, 3) echoes, or (B, 3) captured magnetizations.

    Raises:
        ProfileRangeError: If the profile does not cover the run.
    """
    substeps = _check_substeps(substeps_per_interval)
    profile.check_range(-0.5 * timing.t90_ratio / timing.te_ratio, float(timing.echo_count))
    start = excite(profile, timing) if m0 is None else np.asarray(m0, dtype=float)
    start = np.atleast_2d(start)
    batch = max(start.shape[0], _batch_size(profile))
    if capture is not None:
        capture = np.asarray(capture, dtype=int)
        if np.any(capture < 0) or np.any(capture > timing.echo_count):
            raise InvalidInputError("capture indices must lie within 0..echo_count")
        batch = max(batch, len(capture))
    start = np.broadcast_to(start, (batch, 3))
    return _propagate(profile, timing, start, substeps, commutator_correction, capture)


def simulate_cpmg(
    profile: FieldProfile,
    timing: SequenceTiming,
    substeps_per_interval: int = DEFAULT_SUBSTEPS,
    commutator_correction: bool = True,
    m0=None,
) -> EchoTrain:
    """
    Simulate one CPMG echo train.

    Free precession uses the exact integral of w~0 over each interval;
    refocusing pulses are split into midpoint substeps with w~1 held at its
    pulse-centre value.

    Args:
        profile: Field profile with scalar parameters.
        timing: Sequence timing.
        substeps_per_interval: Substeps per refocusing pulse (default 4).
        commutator_correction: Second-order correction for ramping w~0.
        m0: Optional magnetization at tau = 0 replacing the excitation.

    Returns:
        EchoTrain with echoes 0..N.
    """
    echoes = simulate_batch(
        profile, timing, m0=m0,
        substeps_per_interval=substeps_per_interval,
        commutator_correction=commutator_correction,
    )
    if echoes.shape[1] != 1:
        raise InvalidInputError("simulate_cpmg expects a single profile; use simulate_batch")
    tau = np.arange(timing.echo_count + 1, dtype=float)
    omega0 = np.broadcast_to(np.asarray(profile.omega0.value(tau), dtype=float), tau.shape)
    manifest = {
        "profile": profile.describe(),
        "timing": asdict(timing),
        "substeps_per_interval": int(substeps_per_interval),
        "commutator_correction": bool(commutator_correction),
        "version": __version__,
    }
    return EchoTrain(tau, omega0.copy(), echoes[:, 0, :], manifest)


def static_propagate(
    er: EffectiveRotation,
    m_exc,
    n: int,
    omega0_norm: float = float("nan"),
) -> EchoTrain:
    """N-fold application of one fixed effective rotation to ``m_exc``."""
    if n < 0:
        raise InvalidInputError("echo count must be non-negative")
    matrix = er.to_rotation().matrix()
    m = np.empty((n + 1, 3))
    m[0] = np.asarray(m_exc, dtype=float)
    for k in range(1, n + 1):
        m[k] = matrix @ m[k - 1]
    tau = np.arange(n + 1, dtype=float)
    return EchoTrain(tau, np.full(n + 1, omega0_norm), m, {"static": True, "version": __version__})


class BlochSimulator(BaseSolver):
    """Direct simulation of one profile with fixed integration options."""

    def __init__(
        self,
        profile: FieldProfile,
        timing: SequenceTiming,
        substeps_per_interval: int = DEFAULT_SUBSTEPS,
        commutator_correction: bool = True,
    ) -> None:
        super().__init__(profile, timing)
        self.__substeps = _check_substeps(substeps_per_interval)
        self.__correction = commutator_correction

    def _run(self, m0=None) -> EchoTrain:
        logger.info(
            "Simulating %d echoes (te_ratio=%g, substeps=%d)",
            self._timing.echo_count, self._timing.te_ratio, self.__substeps,
        )
        return simulate_cpmg(self._profile, self._timing, self.__substeps, self.__correction, m0)

    def __str__(self) -> str:
        return f"BlochSimulator(profile={self._profile}, echoes={self._timing.echo_count})"


__all__ = [
    "DEFAULT_SUBSTEPS",
    "SequenceTiming",
    "EchoRecord",
    "EchoTrain",
    "excite",
    "simulate_batch",
    "simulate_cpmg",
    "static_propagate",
    "BlochSimulator",
]
