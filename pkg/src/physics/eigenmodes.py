"""
Eigenmode Analysis
Eigenbasis of the per-cycle propagator, CPMG (k=0) / CP (k=+-1) mode
decomposition, projections and geometric-phase increments.

A rotation by alpha about n has eigenvectors v0 = n (eigenvalue 1) and
v+, v- = conj(v+) with eigenvalues exp(-i alpha), exp(+i alpha).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

import numpy as np

from src.core.exceptions import DegenerateAxisError, InvalidInputError
from src.physics.cycle import EffectiveRotation

logger = logging.getLogger(__name__)

IMAGINARY_RESIDUE_TOL = 1e-8
ORTHOGONAL_OVERLAP_TOL = 1e-6
_UNIT_TOL = 1e-9
_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class EigenBasis:
    """
    Eigenvectors of one effective rotation.

    ``v0`` is real with shape (..., 3); ``v_plus`` is complex with the same
    shape. Leading dimensions describe a batch (e.g. one basis per cycle).
    """

    v0: np.ndarray
    v_plus: np.ndarray

    @property
    def v_minus(self) -> np.ndarray:
        return np.conj(self.v_plus)

    def gram(self) -> np.ndarray:
        """Matrix of inner products v_k . conj(v_l) for k, l in (0, +1, -1)."""
        vectors = np.stack([self.v0.astype(complex), self.v_plus, self.v_minus])
        return np.einsum("k...i,l...i->...kl", vectors, np.conj(vectors))

    def __len__(self) -> int:
        return 1 if self.v0.ndim == 1 else self.v0.shape[0]


@dataclass(frozen=True)
class ModeAmplitudes:
    """
    Projections of a magnetization vector onto an eigenbasis.

    a_minus is implied as conj(a_plus).
    """

    a0: Any
    a_plus: Any

    @property
    def a_minus(self) -> Any:
        return np.conj(self.a_plus)

    @property
    def cp_magnitude(self) -> Any:
        return np.sqrt(2.0) * np.abs(self.a_plus)

    @property
    def norm_squared(self) -> Any:
        return np.asarray(self.a0) ** 2 + np.asarray(self.cp_magnitude) ** 2


class PhaseIncrement(NamedTuple):
    """Geometric-phase increment and whether the overlap was well resolved."""

    gamma: float
    well_defined: bool


class AlignedAxes(NamedTuple):
    """Continuous branch of a series of rotation axes."""

    axes: np.ndarray
    alphas: np.ndarray
    flipped: np.ndarray
    flip_indices: np.ndarray


# ---------- Basis construction ----------

def eigenbasis_from_axis(axis, reference_phase: Any = 0.0) -> EigenBasis:
    """
    Build the eigenbasis of a rotation about ``axis``.

    The transverse frame is anchored to the in-plane direction at
    ``reference_phase``, so the gauge of v+ is smooth along a series of axes
    whose transverse part passes through zero. For an axis with azimuth
    equal to the reference phase this reproduces the cylindrical form
    v+ = (-i/sqrt2)(n_z cos e - i sin e, n_z sin e + i cos e, -n_perp).

    Args:
        axis: Unit vector(s), shape (..., 3).
        reference_phase: In-plane anchor azimuth, broadcastable to axis[..., 0].

    Returns:
        EigenBasis with the batch shape of ``axis``.
    """
    v0 = np.asarray(axis, dtype=float)
    if v0.shape[-1] != 3:
        raise InvalidInputError(f"Axis must have 3 components, got {v0.shape}")
    if np.any(np.abs(np.linalg.norm(v0, axis=-1) - 1.0) > _UNIT_TOL):
        raise InvalidInputError("Eigenbasis axis is not unit length")

    phase = np.asarray(reference_phase, dtype=float)
    anchor = np.stack(
        [-np.sin(phase), np.cos(phase), np.zeros_like(phase)], axis=-1
    )
    anchor = np.broadcast_to(anchor, v0.shape)

    e2 = anchor - np.sum(anchor * v0, axis=-1, keepdims=True) * v0
    e2_norm = np.linalg.norm(e2, axis=-1, keepdims=True)
    if np.any(e2_norm < _UNIT_TOL):
        # axis along the anchor itself: fall back to the x direction
        backup = np.broadcast_to(np.array([1.0, 0.0, 0.0]), v0.shape)
        backup = backup - np.sum(backup * v0, axis=-1, keepdims=True) * v0
        e2 = np.where(e2_norm < _UNIT_TOL, backup, e2)
        e2_norm = np.linalg.norm(e2, axis=-1, keepdims=True)
    e2 = e2 / e2_norm
    e1 = np.cross(e2, v0)

    v_plus = -1j * _INV_SQRT2 * (e1 + 1j * e2)
    return EigenBasis(v0=v0.copy(), v_plus=v_plus)


def eigenbasis(
    er: EffectiveRotation,
    fallback_axis: Optional[np.ndarray] = None,
) -> EigenBasis:
    """
    Eigenbasis of an effective rotation.

    The sign-carrying transverse component is used so the basis varies
    smoothly through n_perp = 0.

    Args:
        er: Effective rotation (scalar or batched fields).
        fallback_axis: Axis used where ``er`` is degenerate, typically the
            previous cycle's axis.

    Raises:
        DegenerateAxisError: If ``er`` is degenerate and no fallback is given.
    """
    phase = np.asarray(er.reference_phase, dtype=float)
    signed = np.asarray(er.signed_transverse, dtype=float)
    axis = np.stack(
        [signed * np.cos(phase), signed * np.sin(phase),
         np.asarray(er.n_z, dtype=float)],
        axis=-1,
    )
    degenerate = np.asarray(er.degenerate_axis, dtype=bool)
    if np.any(degenerate):
        if fallback_axis is None:
            raise DegenerateAxisError(
                "Eigenbasis requested at a unity propagator without a fallback axis"
            )
        fallback = np.broadcast_to(np.asarray(fallback_axis, dtype=float), axis.shape)
        axis = np.where(degenerate[..., None], fallback, axis)
        logger.debug("Degenerate cycle: carried-over axis used for eigenbasis")
    return eigenbasis_from_axis(axis, phase)


# ---------- Projections ----------

def decompose(m, basis: EigenBasis) -> ModeAmplitudes:
    """
    Project magnetization onto the eigenbasis: a_k = M . conj(v_k).

    Args:
        m: Magnetization, shape (..., 3), broadcastable against the basis.
        basis: Eigenbasis.

    Returns:
        ModeAmplitudes; a0 is the real part of its projection.
    """
    m = np.asarray(m)
    a0_complex = np.sum(m * np.conj(basis.v0), axis=-1)
    a_plus = np.sum(m * np.conj(basis.v_plus), axis=-1)

    residue = float(np.max(np.abs(np.imag(a0_complex)), initial=0.0))
    if residue > IMAGINARY_RESIDUE_TOL:
        logger.warning("CPMG amplitude has imaginary residue %.3e", residue)

    a0 = np.real(a0_complex)
    if np.ndim(a0) == 0:
        return ModeAmplitudes(a0=float(a0), a_plus=complex(a_plus))
    return ModeAmplitudes(a0=a0, a_plus=a_plus)


def reconstruct(
    amplitudes: ModeAmplitudes,
    basis: EigenBasis,
    n: int,
    alpha: float,
) -> np.ndarray:
    """
    Magnetization after ``n`` applications of the rotation:
    M = sum_k a_k exp(-i k n alpha) v_k.
    """
    phase = np.exp(-1j * n * np.asarray(alpha))
    a0 = np.asarray(amplitudes.a0)[..., None]
    cp = np.asarray(amplitudes.a_plus * phase)[..., None] * basis.v_plus
    total = a0 * basis.v0 + cp + np.conj(cp)
    residue = float(np.max(np.abs(np.imag(total)), initial=0.0))
    if residue > 1e-10:
        logger.warning("Reconstructed magnetization has imaginary residue %.3e", residue)
    return np.real(total)


def project_cpmg(m, axis) -> np.ndarray:
    """CPMG component (M . n) n of the magnetization."""
    axis = np.asarray(axis, dtype=float)
    if np.any(np.abs(np.linalg.norm(axis, axis=-1) - 1.0) > _UNIT_TOL):
        raise InvalidInputError("Projection axis is not unit length")
    m = np.asarray(m, dtype=float)
    return np.sum(m * axis, axis=-1, keepdims=True) * axis


# ---------- Phases and continuity ----------

def geometric_phase_increment(v_now, v_next) -> PhaseIncrement:
    """
    Geometric phase gained between successive eigenvectors of one mode:
    Gamma = -Im ln(conj(v_now) . v_next).

    Real eigenvectors (the k=0 mode) give exactly zero; a negative real
    overlap is an axis sign flip rather than a phase.
    """
    v_now = np.asarray(v_now)
    v_next = np.asarray(v_next)
    inner = np.vdot(v_now, v_next)
    well_defined = bool(abs(inner) >= ORTHOGONAL_OVERLAP_TOL)
    if not well_defined:
        logger.debug("Near-orthogonal successive eigenvectors (|overlap| = %.3e)", abs(inner))
    if not (np.iscomplexobj(v_now) or np.iscomplexobj(v_next)):
        return PhaseIncrement(0.0, well_defined)
    if np.all(np.imag(v_now) == 0.0) and np.all(np.imag(v_next) == 0.0):
        return PhaseIncrement(0.0, well_defined)
    return PhaseIncrement(float(-np.angle(inner)), well_defined)


def geometric_phase_series(vectors: np.ndarray) -> np.ndarray:
    """
    Increments between consecutive rows of a (J, 3) eigenvector series.

    Returns an array of J - 1 increments; poorly resolved steps are counted
    and reported once.
    """
    vectors = np.asarray(vectors)
    if len(vectors) < 2:
        return np.zeros(0)
    if not np.iscomplexobj(vectors) or np.all(np.imag(vectors) == 0.0):
        return np.zeros(len(vectors) - 1)
    inner = np.sum(np.conj(vectors[:-1]) * vectors[1:], axis=-1)
    poorly_resolved = int(np.count_nonzero(np.abs(inner) < ORTHOGONAL_OVERLAP_TOL))
    if poorly_resolved:
        logger.warning(
            "%d geometric-phase increments from near-orthogonal eigenvectors",
            poorly_resolved,
        )
    return -np.angle(inner)


def align_axes(axes, alphas, degenerate=None, reference=None) -> AlignedAxes:
    """
    Continuous branch of a series of canonical rotation axes.

    Degenerate entries inherit the previous axis. Where successive axes
    anti-align the remainder of the series is negated and alpha is mapped
    to 2 pi - alpha, which describes the same rotation.

    Args:
        axes: Canonical axes, shape (J, 3).
        alphas: Canonical angles in [0, pi], shape (J,).
        degenerate: Optional boolean mask of unity propagators.
        reference: Optional direction; the whole series is negated when its
            first axis points away from it.

    Returns:
        AlignedAxes with the flip indices j where axis j was negated
        relative to axis j - 1.
    """
    axes = np.array(axes, dtype=float).reshape(-1, 3)
    alphas = np.array(alphas, dtype=float).reshape(-1)
    if degenerate is not None:
        mask = np.broadcast_to(np.asarray(degenerate, dtype=bool), alphas.shape)
        for j in np.flatnonzero(mask):
            if j > 0:
                axes[j] = axes[j - 1]

    first_sign = 1.0
    if reference is not None and len(axes) and float(np.dot(axes[0], reference)) < 0.0:
        first_sign = -1.0

    if len(axes) < 2:
        flipped = np.full(len(axes), first_sign < 0.0)
        return AlignedAxes(
            axes * first_sign, np.where(flipped, 2.0 * np.pi - alphas, alphas),
            flipped, np.zeros(0, int),
        )

    steps = np.where(np.sum(axes[1:] * axes[:-1], axis=-1) < 0.0, -1.0, 1.0)
    signs = first_sign * np.concatenate([[1.0], np.cumprod(steps)])
    flipped = signs < 0.0
    aligned_alphas = np.where(flipped, 2.0 * np.pi - alphas, alphas)
    flip_indices = np.flatnonzero(steps < 0.0) + 1
    if len(flip_indices):
        logger.debug("Axis branch flips at cycles %s", flip_indices.tolist())
    return AlignedAxes(axes * signs[:, None], aligned_alphas, flipped, flip_indices)


__all__ = [
    "EigenBasis",
    "ModeAmplitudes",
    "PhaseIncrement",
    "AlignedAxes",
    "eigenbasis",
    "eigenbasis_from_axis",
    "decompose",
    "reconstruct",
    "project_cpmg",
    "geometric_phase_increment",
    "geometric_phase_series",
    "align_axes",
]
