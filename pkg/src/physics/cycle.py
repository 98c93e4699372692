"""
Cycle Propagator
Closed-form effective rotation of one refocusing cycle
(free precession, refocusing pulse, free precession) and its oracle.

Normalised units: frequencies in units of the nominal nutation frequency,
times in units of the nominal 180 degree pulse, so a frequency w~ rotates by
pi * w~ per t_180. The refocusing pulse duration is fixed at t_180; w~1 only
scales the nutation rate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Any, NamedTuple

import numpy as np

from src.core.exceptions import InvalidInputError
from src.physics.rotation import Rotation, quaternion_product

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class CycleParams:
    """
    Static and instantaneous-rate description of one refocusing cycle.

    Fields accept floats or broadcastable numpy arrays.
    """

    omega0_norm: Any
    omega1_norm: Any = 1.0
    te_ratio: Any = 15.0
    pulse_phase: Any = 0.0
    ramp0: Any = 0.0
    ramp1: Any = 0.0

    def __post_init__(self) -> None:
        if np.any(np.asarray(self.te_ratio) <= 1.0):
            raise InvalidInputError("te_ratio must exceed 1")
        if np.any(np.asarray(self.omega1_norm) < 0.0):
            raise InvalidInputError("omega1_norm must be non-negative")

    def with_fields(self, **changes: Any) -> "CycleParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class EffectiveRotation:
    """
    Per-cycle propagator summary {n_perp, n_z, epsilon, alpha}.

    ``n_perp`` is the magnitude of the transverse axis component and
    ``epsilon`` its azimuth; ``alpha`` lies in [0, pi]. ``reference_phase``
    is the azimuth epsilon was folded against (pulse phase, plus the ramp
    correction for dynamic cycles), so the sign-carrying transverse
    component can be recovered.
    """

    n_perp: Any
    n_z: Any
    epsilon: Any
    alpha: Any
    degenerate_axis: Any
    reference_phase: Any = 0.0

    @property
    def axis(self) -> np.ndarray:
        n_perp = np.asarray(self.n_perp, dtype=float)
        eps = np.asarray(self.epsilon, dtype=float)
        return np.stack(
            [n_perp * np.cos(eps), n_perp * np.sin(eps), np.asarray(self.n_z, dtype=float)],
            axis=-1,
        )

    @property
    def signed_transverse(self) -> np.ndarray:
        """Axis component along the refocusing-pulse direction."""
        return np.asarray(self.n_perp) * np.cos(
            np.asarray(self.epsilon) - np.asarray(self.reference_phase)
        )

    @property
    def quaternion(self) -> np.ndarray:
        """(cos(alpha/2), sin(alpha/2) n) with shape (..., 4); identity when degenerate."""
        half = 0.5 * np.asarray(self.alpha, dtype=float)
        return np.concatenate([np.cos(half)[..., None], np.sin(half)[..., None] * self.axis], axis=-1)

    def to_rotation(self) -> Rotation:
        if bool(np.any(self.degenerate_axis)):
            return Rotation.identity()
        return Rotation(*self.quaternion)


class EnergyLevels(NamedTuple):
    """Quasi-energies E_k in units of 1/t_E for k = -1, 0, +1."""

    minus: Any
    zero: Any
    plus: Any

    @property
    def gap(self) -> Any:
        return self.plus


# ---------- Internal kernels ----------

def _wrap_angle(angle):
    return np.mod(np.asarray(angle) + np.pi, 2.0 * np.pi) - np.pi


def _closed_form_parts(omega0, omega1, te_ratio):
    """
    Quaternion of the static cycle with the pulse along +x.

    Returns (cos(alpha/2), transverse, longitudinal) before canonicalisation.
    """
    omega0 = np.asarray(omega0, dtype=float)
    omega1 = np.asarray(omega1, dtype=float)
    big_omega = np.hypot(omega0, omega1)
    safe = np.where(big_omega > 0.0, big_omega, 1.0)
    r0 = np.where(big_omega > 0.0, omega0 / safe, 0.0)
    r1 = np.where(big_omega > 0.0, omega1 / safe, 0.0)

    beta1 = 0.5 * np.pi * omega0 * (np.asarray(te_ratio, dtype=float) - 1.0)
    beta2 = 0.5 * np.pi * big_omega

    cos_half = np.cos(beta1) * np.cos(beta2) - r0 * np.sin(beta1) * np.sin(beta2)
    transverse = r1 * np.sin(beta2)
    longitudinal = np.sin(beta1) * np.cos(beta2) + r0 * np.cos(beta1) * np.sin(beta2)
    return cos_half, transverse, longitudinal


def _canonical(cos_half, transverse, longitudinal, pulse_phase) -> EffectiveRotation:
    """Fold a raw quaternion into alpha in [0, pi] with n_perp >= 0."""
    delta = np.hypot(transverse, longitudinal)
    degenerate = delta < DEGENERATE_TOL
    sign = np.where(cos_half < 0.0, -1.0, 1.0)
    alpha = np.where(degenerate, 0.0, 2.0 * np.arctan2(delta, np.abs(cos_half)))

    safe = np.where(degenerate, 1.0, delta)
    t_signed = np.where(degenerate, 1.0, sign * transverse / safe)
    n_z = np.where(degenerate, 0.0, sign * longitudinal / safe)
    phase = np.asarray(pulse_phase, dtype=float)
    eps = np.where(degenerate, 0.0, np.where(t_signed < 0.0, phase + np.pi, phase))

    result = EffectiveRotation(
        n_perp=_scalarise(np.abs(t_signed)),
        n_z=_scalarise(n_z),
        epsilon=_scalarise(_wrap_angle(eps)),
        alpha=_scalarise(alpha),
        degenerate_axis=_scalarise(degenerate),
        reference_phase=_scalarise(phase),
    )
    if np.any(degenerate):
        logger.debug("Unity propagator encountered; axis defaults to x")
    return result


def _scalarise(value):
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value


# ---------- Public API ----------

def effective_rotation(p: CycleParams, dynamic: bool = False) -> EffectiveRotation:
    """
    Closed-form effective rotation of one refocusing cycle.

    Args:
        p: Cycle parameters; ramp terms are ignored unless ``dynamic``.
        dynamic: Add the first-order azimuthal correction from ``p.ramp0``.

    Returns:
        EffectiveRotation with alpha in [0, pi]. At a unity propagator the
        degenerate flag is set, alpha is 0 and the axis defaults to x.
    """
    cos_half, transverse, longitudinal = _closed_form_parts(
        p.omega0_norm, p.omega1_norm, p.te_ratio
    )
    phase = np.asarray(p.pulse_phase, dtype=float)
    if dynamic:
        phase = phase + azimuthal_correction(p)
    return _canonical(cos_half, transverse, longitudinal, phase)


def cycle_quaternion(p: CycleParams) -> np.ndarray:
    """
    Full quaternion (w, x, y, z) of free precession, pulse, free precession.

    Each interval is built from its own axis and angle and the three are
    multiplied out; broadcasts over array fields to shape (..., 4).
    """
    omega0, omega1, te_ratio, phase = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p.omega0_norm, p.omega1_norm, p.te_ratio, p.pulse_phase))
    )
    big_omega = np.hypot(omega0, omega1)
    safe = np.where(big_omega > 0.0, big_omega, 1.0)

    half_free = 0.25 * np.pi * omega0 * (te_ratio - 1.0)
    zero = np.zeros_like(omega0)
    free = np.stack([np.cos(half_free), zero, zero, np.sin(half_free)], axis=-1)

    half_pulse = 0.5 * np.pi * big_omega
    sin_pulse = np.sin(half_pulse) / safe
    pulse = np.stack([
        np.cos(half_pulse),
        sin_pulse * omega1 * np.cos(phase),
        sin_pulse * omega1 * np.sin(phase),
        sin_pulse * omega0,
    ], axis=-1)
    return quaternion_product(free, quaternion_product(pulse, free))


def cycle_rotation(p: CycleParams) -> Rotation:
    """Brute-force composition of the three cycle intervals (scalar params)."""
    return Rotation(*cycle_quaternion(p).reshape(4))


def effective_rotation_oracle(p: CycleParams) -> EffectiveRotation:
    """
    Effective rotation read off the full composed quaternion.

    The axis keeps all three vector components, so a y part the closed
    form does not have shows up as an epsilon off the pulse phase.
    Agrees with ``effective_rotation`` to rounding error.
    """
    q = cycle_quaternion(p)
    sign = np.where(q[..., 0] < 0.0, -1.0, 1.0)
    vector = sign[..., None] * q[..., 1:]
    delta = np.linalg.norm(vector, axis=-1)
    degenerate = delta < DEGENERATE_TOL
    alpha = np.where(degenerate, 0.0, 2.0 * np.arctan2(delta, np.abs(q[..., 0])))

    axis = vector / np.where(degenerate, 1.0, delta)[..., None]
    n_perp = np.where(degenerate, 1.0, np.hypot(axis[..., 0], axis[..., 1]))
    eps = np.where(degenerate, 0.0, np.arctan2(axis[..., 1], axis[..., 0]))
    return EffectiveRotation(
        n_perp=_scalarise(n_perp),
        n_z=_scalarise(np.where(degenerate, 0.0, axis[..., 2])),
        epsilon=_scalarise(eps),
        alpha=_scalarise(alpha),
        degenerate_axis=_scalarise(degenerate),
        reference_phase=_scalarise(np.asarray(p.pulse_phase, dtype=float)),
    )


def azimuthal_correction(p: CycleParams) -> Any:
    """
    First-order azimuthal shift of the axis under a B0 ramp.

    delta_epsilon = (pi / 8) * (t_E / t_180) * d(w~0)/d(tau), in radians.
    """
    return _scalarise(
        np.pi / 8.0 * np.asarray(p.te_ratio, dtype=float) * np.asarray(p.ramp0, dtype=float)
    )


def energy_levels(p: CycleParams) -> EnergyLevels:
    """E_k = k * alpha / t_E, reported in units of 1/t_E."""
    alpha = np.asarray(effective_rotation(p).alpha, dtype=float)
    zero = np.zeros_like(alpha)
    return EnergyLevels(
        minus=_scalarise(-alpha),
        zero=_scalarise(zero),
        plus=_scalarise(alpha),
    )
