"""
Rotation Core
Exact SO(3) algebra on the Bloch sphere backed by unit quaternions.

Convention: a positive angle about an axis is a right-handed rotation, so
free precession by beta about +z takes x to (cos beta, sin beta, 0).
"""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

from src.core.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])

_UNIT_TOL = 1e-9
_DEGENERATE_TOL = 1e-12


class AxisAngle(NamedTuple):
    """Canonical axis-angle form with angle in [0, pi]."""

    axis: np.ndarray
    angle: float
    degenerate: bool


class Rotation:
    """
    Unit quaternion (w, x, y, z) acting on 3-vectors.

    Instances are immutable; every composition returns a renormalised
    quaternion so drift stays bounded over long echo trains.
    """

    __slots__ = ("__q",)

    def __init__(self, w: float, x: float, y: float, z: float) -> None:
        q = np.array([w, x, y, z], dtype=float)
        norm = np.linalg.norm(q)
        if norm == 0.0:
            raise InvalidInputError("Zero quaternion is not a rotation")
        self.__q = q / norm

    # ---------- Constructors ----------

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Rotation":
        """
        Build the right-handed rotation by ``angle`` about ``axis``.

        Args:
            axis: Unit 3-vector.
            angle: Rotation angle in radians, any real value.

        Returns:
            Rotation instance.

        Raises:
            InvalidInputError: If ``axis`` is not unit length within 1e-9.
        """
        axis = np.asarray(axis, dtype=float)
        if axis.shape != (3,):
            raise InvalidInputError(f"Axis must be a 3-vector, got {axis.shape}")
        norm = np.linalg.norm(axis)
        if abs(norm - 1.0) > _UNIT_TOL:
            raise InvalidInputError(f"Axis is not unit length: |axis| = {norm!r}")
        half = 0.5 * float(angle)
        s = np.sin(half)
        return cls(np.cos(half), axis[0] * s, axis[1] * s, axis[2] * s)

    @classmethod
    def from_rotation_vector(cls, rotvec) -> "Rotation":
        """Rotation by |rotvec| about rotvec / |rotvec|."""
        rotvec = np.asarray(rotvec, dtype=float)
        angle = float(np.linalg.norm(rotvec))
        if angle == 0.0:
            return cls.identity()
        return cls.from_axis_angle(rotvec / angle, angle)

    # ---------- Properties ----------

    @property
    def quaternion(self) -> np.ndarray:
        return self.__q.copy()

    @property
    def w(self) -> float:
        return float(self.__q[0])

    @property
    def vector(self) -> np.ndarray:
        return self.__q[1:].copy()

    # ---------- Algebra ----------

    def __mul__(self, other: "Rotation") -> "Rotation":
        """Hamilton product: ``self * other`` applies ``other`` first."""
        if not isinstance(other, Rotation):
            return NotImplemented
        return Rotation(*quaternion_product(self.__q, other.__q))

    def then(self, second: "Rotation") -> "Rotation":
        return second * self

    def inverse(self) -> "Rotation":
        w, x, y, z = self.__q
        return Rotation(w, -x, -y, -z)

    def power(self, n: int) -> "Rotation":
        """Apply this rotation ``n`` times in a row."""
        result = Rotation.identity()
        for _ in range(int(n)):
            result = result.then(self)
        return result

    def apply(self, v) -> np.ndarray:
        """Rotate a 3-vector; the norm is preserved."""
        v = np.asarray(v, dtype=float)
        u = self.__q[1:]
        t = 2.0 * np.cross(u, v)
        return v + self.__q[0] * t + np.cross(u, t)

    def matrix(self) -> np.ndarray:
        """Rotation matrix R with R @ v equal to ``apply(v)``."""
        w, x, y, z = self.__q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def to_axis_angle(self) -> AxisAngle:
        """
        Canonical axis-angle extraction with angle in [0, pi].

        The quaternion sign is chosen with w >= 0, which flips the axis when
        needed. For the identity the axis is undefined; x is returned with
        the degenerate flag set.
        """
        q = self.__q if self.__q[0] >= 0.0 else -self.__q
        vec = q[1:]
        sin_half = float(np.linalg.norm(vec))
        if sin_half < _DEGENERATE_TOL:
            logger.debug("Identity rotation: axis defaults to x")
            return AxisAngle(X_AXIS.copy(), 0.0, True)
        angle = 2.0 * float(np.arctan2(sin_half, q[0]))
        return AxisAngle(vec / sin_half, angle, False)

    # ---------- Special Methods ----------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Rotation):
            return False
        return bool(
            np.allclose(self.__q, other.__q, atol=1e-12)
            or np.allclose(self.__q, -other.__q, atol=1e-12)
        )

    def __hash__(self) -> int:
        q = self.__q if self.__q[0] >= 0.0 else -self.__q
        return hash(tuple(np.round(q, 12)))

    def __repr__(self) -> str:
        w, x, y, z = self.__q
        return f"Rotation(w={w:.6g}, x={x:.6g}, y={y:.6g}, z={z:.6g})"


# ---------- Functional API ----------

def from_axis_angle(axis, angle: float) -> Rotation:
    return Rotation.from_axis_angle(axis, angle)


def compose(first: Rotation, second: Rotation) -> Rotation:
    """Rotation equal to applying ``first`` and then ``second``."""
    return second * first


def apply(r: Rotation, v) -> np.ndarray:
    return r.apply(v)


def to_axis_angle(r: Rotation) -> AxisAngle:
    return r.to_axis_angle()


# ---------- Batched kernels ----------

def rotate_batch(m: np.ndarray, rotvec: np.ndarray) -> np.ndarray:
    """
    Rodrigues rotation of many vectors by many rotation vectors.

    Args:
        m: Array of shape (..., 3).
        rotvec: Rotation vectors broadcastable to ``m``; direction is the
            axis and length the right-handed angle.

    Returns:
        Rotated vectors, same shape as ``m``.
    """
    angle = np.linalg.norm(rotvec, axis=-1, keepdims=True)
    k = rotvec / np.where(angle > 0.0, angle, 1.0)
    cos = np.cos(angle)
    sin = np.sin(angle)
    k_dot_m = np.sum(k * m, axis=-1, keepdims=True)
    return m * cos + np.cross(k, m) * sin + k * k_dot_m * (1.0 - cos)


def rotate_z_batch(m: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Right-handed rotation about +z of vectors ``m`` (..., 3)."""
    cos = np.cos(angle)
    sin = np.sin(angle)
    out = np.empty_like(m)
    out[..., 0] = m[..., 0] * cos - m[..., 1] * sin
    out[..., 1] = m[..., 0] * sin + m[..., 1] * cos
    out[..., 2] = m[..., 2]
    return out


def quaternion_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion arrays (..., 4); ``b`` acts first."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)
