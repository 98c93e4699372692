import numpy as np
import pytest
from scipy.linalg import expm

from src.core.exceptions import InvalidInputError
from src.physics.rotation import (
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    Rotation,
    apply,
    compose,
    from_axis_angle,
    quaternion_product,
    rotate_batch,
    rotate_z_batch,
    to_axis_angle,
)


def _generator(axis):
    x, y, z = axis
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


class TestConstruction:
    def test_quarter_turn_about_z(self):
        np.testing.assert_allclose(apply(from_axis_angle(Z_AXIS, np.pi / 2), X_AXIS), Y_AXIS, atol=1e-15)

    def test_refocusing_flip(self):
        np.testing.assert_allclose(apply(from_axis_angle(X_AXIS, np.pi), Z_AXIS), -Z_AXIS, atol=1e-15)

    def test_zero_angle_is_identity(self):
        assert from_axis_angle(X_AXIS, 0.0) == Rotation.identity()

    def test_non_unit_axis_rejected(self):
        with pytest.raises(InvalidInputError):
            from_axis_angle([1.0, 1.0, 0.0], 0.3)

    def test_matches_matrix_exponential(self, random_unit_vectors):
        for axis, angle in zip(random_unit_vectors(20), np.linspace(-4.0, 4.0, 20)):
            r = from_axis_angle(axis, angle)
            np.testing.assert_allclose(r.matrix(), expm(angle * _generator(axis)), atol=1e-12)


class TestComposition:
    def test_double_flip_is_identity(self):
        rx = from_axis_angle(X_AXIS, np.pi)
        assert compose(rx, rx) == Rotation.identity()

    def test_z_rotations_add(self):
        assert compose(from_axis_angle(Z_AXIS, 0.4), from_axis_angle(Z_AXIS, 1.1)) == from_axis_angle(Z_AXIS, 1.5)

    def test_order_first_then_second(self, random_unit_vectors):
        a = from_axis_angle(X_AXIS, 0.7)
        b = from_axis_angle(Y_AXIS, 1.3)
        for v in random_unit_vectors(5):
            np.testing.assert_allclose(compose(a, b).apply(v), b.apply(a.apply(v)), atol=1e-12)

    def test_associative(self, random_unit_vectors, rng):
        axes = random_unit_vectors(30)
        angles = rng.uniform(-np.pi, np.pi, 30)
        rotations = [from_axis_angle(ax, an) for ax, an in zip(axes, angles)]
        for a, b, c in zip(rotations[0::3], rotations[1::3], rotations[2::3]):
            left = compose(compose(a, b), c)
            right = compose(a, compose(b, c))
            np.testing.assert_allclose(left.matrix(), right.matrix(), atol=1e-12)

    def test_norm_stays_bounded_over_long_products(self):
        step = from_axis_angle(np.array([0.6, 0.0, 0.8]), 0.123)
        result = step.power(20000)
        assert abs(np.linalg.norm(result.quaternion) - 1.0) < 1e-12
        expected = from_axis_angle(np.array([0.6, 0.0, 0.8]), 0.123 * 20000)
        np.testing.assert_allclose(result.matrix(), expected.matrix(), atol=1e-9)


class TestApply:
    def test_identity(self, random_unit_vectors):
        for v in random_unit_vectors(5):
            np.testing.assert_allclose(Rotation.identity().apply(v), v)

    def test_flip_y_about_x(self):
        np.testing.assert_allclose(from_axis_angle(X_AXIS, np.pi).apply(Y_AXIS), -Y_AXIS, atol=1e-15)

    def test_precession(self):
        beta = 0.83
        np.testing.assert_allclose(
            from_axis_angle(Z_AXIS, beta).apply(X_AXIS), [np.cos(beta), np.sin(beta), 0.0], atol=1e-15
        )

    def test_isometry(self, random_unit_vectors):
        r = from_axis_angle(random_unit_vectors(1)[0], 2.2)
        u, v = random_unit_vectors(2) * np.array([[2.0], [0.5]])
        ru, rv = r.apply(u), r.apply(v)
        assert np.linalg.norm(ru) == pytest.approx(np.linalg.norm(u), abs=1e-12)
        assert ru @ rv == pytest.approx(u @ v, abs=1e-12)


class TestAxisAngle:
    def test_identity_is_flagged(self):
        axis, angle, degenerate = to_axis_angle(Rotation.identity())
        assert degenerate
        assert angle == 0.0
        np.testing.assert_array_equal(axis, X_AXIS)

    def test_three_quarter_turn_is_canonicalised(self):
        axis, angle, degenerate = to_axis_angle(from_axis_angle(Z_AXIS, 1.5 * np.pi))
        assert not degenerate
        assert angle == pytest.approx(np.pi / 2, abs=1e-12)
        np.testing.assert_allclose(axis, -Z_AXIS, atol=1e-12)

    def test_negative_scalar_part(self):
        r = Rotation(-0.5, 0.5, 0.5, 0.5)
        axis, angle, _ = r.to_axis_angle()
        assert 0.0 <= angle <= np.pi
        assert from_axis_angle(axis, angle) == r

    def test_round_trip(self, random_unit_vectors, rng):
        for axis, angle in zip(random_unit_vectors(50), rng.uniform(0.01, np.pi - 0.01, 50)):
            out_axis, out_angle, _ = to_axis_angle(from_axis_angle(axis, angle))
            np.testing.assert_allclose(out_axis, axis, atol=1e-10)
            assert out_angle == pytest.approx(angle, abs=1e-10)


class TestBatchKernels:
    def test_rotate_batch_matches_scalar(self, random_unit_vectors, rng):
        m = random_unit_vectors(10)
        rotvec = random_unit_vectors(10) * rng.uniform(0.0, 3.0, (10, 1))
        out = rotate_batch(m, rotvec)
        for k in range(10):
            np.testing.assert_allclose(out[k], Rotation.from_rotation_vector(rotvec[k]).apply(m[k]), atol=1e-12)

    def test_zero_rotation_vector(self):
        m = np.array([[0.0, 0.6, 0.8]])
        np.testing.assert_allclose(rotate_batch(m, np.zeros((1, 3))), m)

    def test_rotate_z_batch(self):
        out = rotate_z_batch(np.array([[1.0, 0.0, 0.3]]), np.array([np.pi / 2]))
        np.testing.assert_allclose(out, [[0.0, 1.0, 0.3]], atol=1e-15)

    def test_quaternion_product_matches_compose(self, random_unit_vectors, rng):
        axes = random_unit_vectors(8)
        angles = rng.uniform(0.0, np.pi, 8)
        first = np.array([from_axis_angle(a, t).quaternion for a, t in zip(axes, angles)])
        second = first[::-1]
        product = quaternion_product(second, first)
        for k in range(8):
            expected = compose(Rotation(*first[k]), Rotation(*second[k]))
            assert Rotation(*product[k]) == expected
