import numpy as np
import pytest

from src.core.exceptions import DegenerateAxisError, InvalidInputError
from src.physics.cycle import CycleParams, effective_rotation
from src.physics.eigenmodes import (
    align_axes,
    decompose,
    eigenbasis,
    eigenbasis_from_axis,
    geometric_phase_increment,
    geometric_phase_series,
    project_cpmg,
    reconstruct,
)
from src.physics.rotation import X_AXIS, Y_AXIS, Z_AXIS, from_axis_angle

SQRT_HALF = np.sqrt(0.5)


def test_basis_for_z_axis():
    basis = eigenbasis_from_axis(Z_AXIS)
    np.testing.assert_allclose(basis.v0, Z_AXIS)
    np.testing.assert_allclose(basis.v_plus, [-1j * SQRT_HALF, SQRT_HALF, 0.0], atol=1e-15)


def test_basis_for_x_axis():
    basis = eigenbasis(effective_rotation(CycleParams(0.0, 1.0, 15.0)))
    np.testing.assert_allclose(basis.v0, X_AXIS, atol=1e-12)
    np.testing.assert_allclose(basis.v_plus, [0.0, SQRT_HALF, 1j * SQRT_HALF], atol=1e-12)


def test_orthonormal_and_conjugate(random_unit_vectors, rng):
    axes = random_unit_vectors(200)
    basis = eigenbasis_from_axis(axes, rng.uniform(-np.pi, np.pi, 200))
    np.testing.assert_allclose(basis.gram(), np.broadcast_to(np.eye(3), (200, 3, 3)), atol=1e-10)
    np.testing.assert_array_equal(basis.v_minus, np.conj(basis.v_plus))


def test_modes_are_rotation_eigenvectors():
    axis = np.array([0.6, 0.0, 0.8])
    alpha = 1.1
    basis = eigenbasis_from_axis(axis)
    matrix = from_axis_angle(axis, alpha).matrix()
    np.testing.assert_allclose(matrix @ basis.v_plus, np.exp(-1j * alpha) * basis.v_plus, atol=1e-12)
    np.testing.assert_allclose(matrix @ basis.v0, basis.v0, atol=1e-12)


def test_degenerate_axis_needs_fallback():
    er = effective_rotation(CycleParams(0.0, 2.0, 8.0))
    with pytest.raises(DegenerateAxisError):
        eigenbasis(er)
    basis = eigenbasis(er, fallback_axis=Y_AXIS)
    np.testing.assert_allclose(basis.v0, Y_AXIS)


def test_non_unit_axis_rejected():
    with pytest.raises(InvalidInputError):
        eigenbasis_from_axis([1.0, 1.0, 0.0])


class TestDecompose:
    def test_pure_cpmg(self):
        axis = np.array([0.0, 0.6, 0.8])
        amplitudes = decompose(axis, eigenbasis_from_axis(axis))
        assert amplitudes.a0 == pytest.approx(1.0)
        assert abs(amplitudes.a_plus) == pytest.approx(0.0, abs=1e-15)

    def test_pure_cp(self):
        amplitudes = decompose(X_AXIS, eigenbasis_from_axis(Z_AXIS))
        assert amplitudes.a0 == pytest.approx(0.0, abs=1e-15)
        assert amplitudes.cp_magnitude == pytest.approx(1.0)

    def test_norm_partition(self, random_unit_vectors):
        m = random_unit_vectors(500) * 1.7
        basis = eigenbasis_from_axis(random_unit_vectors(500))
        amplitudes = decompose(m, basis)
        np.testing.assert_allclose(amplitudes.norm_squared, 1.7 ** 2, atol=1e-9)

    def test_round_trip(self, random_unit_vectors):
        m = random_unit_vectors(1000)
        basis = eigenbasis_from_axis(random_unit_vectors(1000))
        np.testing.assert_allclose(reconstruct(decompose(m, basis), basis, 0, 0.7), m, atol=1e-10)


class TestReconstruct:
    def test_matches_repeated_rotation(self):
        axis = np.array([0.48, 0.6, 0.64])
        alpha = 2.3
        basis = eigenbasis_from_axis(axis)
        m0 = np.array([1.0, 0.0, 0.0])
        amplitudes = decompose(m0, basis)
        rotation = from_axis_angle(axis, alpha)
        for n in (1, 2, 7):
            np.testing.assert_allclose(reconstruct(amplitudes, basis, n, alpha), rotation.power(n).apply(m0), atol=1e-12)

    def test_pure_cpmg_independent_of_echo(self):
        axis = np.array([0.0, 0.6, 0.8])
        basis = eigenbasis_from_axis(axis)
        amplitudes = decompose(axis, basis)
        for n in (0, 5, 100):
            np.testing.assert_allclose(reconstruct(amplitudes, basis, n, 1.3), axis, atol=1e-12)

    def test_pure_cp_alternates_at_pi(self):
        basis = eigenbasis_from_axis(X_AXIS)
        amplitudes = decompose(Y_AXIS, basis)
        np.testing.assert_allclose(reconstruct(amplitudes, basis, 1, np.pi), -Y_AXIS, atol=1e-12)
        np.testing.assert_allclose(reconstruct(amplitudes, basis, 2, np.pi), Y_AXIS, atol=1e-12)


class TestProjection:
    def test_parallel(self):
        axis = np.array([0.0, 0.6, 0.8])
        np.testing.assert_allclose(project_cpmg(axis, axis), axis)

    def test_perpendicular(self):
        np.testing.assert_allclose(project_cpmg(Y_AXIS, X_AXIS), np.zeros(3))


class TestGeometricPhase:
    def test_identical_vectors(self):
        v = eigenbasis_from_axis(np.array([0.6, 0.0, 0.8])).v_plus
        assert geometric_phase_increment(v, v).gamma == pytest.approx(0.0, abs=1e-15)

    def test_real_mode_is_exactly_zero(self):
        increment = geometric_phase_increment(X_AXIS, np.array([0.6, 0.8, 0.0]))
        assert increment.gamma == 0.0
        assert increment.well_defined

    def test_conjugate_modes_are_opposite(self):
        first = eigenbasis_from_axis(np.array([0.6, 0.0, 0.8]))
        second = eigenbasis_from_axis(np.array([0.0, 0.6, 0.8]))
        plus = geometric_phase_increment(first.v_plus, second.v_plus).gamma
        minus = geometric_phase_increment(first.v_minus, second.v_minus).gamma
        assert plus == pytest.approx(-minus, abs=1e-14)
        assert plus != 0.0

    def test_orthogonal_vectors_flagged(self):
        assert not geometric_phase_increment(X_AXIS, Y_AXIS).well_defined

    def test_series_of_real_vectors(self):
        np.testing.assert_array_equal(geometric_phase_series(np.stack([X_AXIS, Y_AXIS, Z_AXIS])), np.zeros(2))


class TestAlignAxes:
    def test_flip_is_removed(self):
        axes = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [-0.8, 0.0, -0.6]])
        aligned = align_axes(axes, np.array([3.0, 3.1, 3.0]))
        np.testing.assert_allclose(aligned.axes[1], X_AXIS)
        np.testing.assert_allclose(aligned.axes[2], [0.8, 0.0, 0.6])
        np.testing.assert_array_equal(aligned.flip_indices, [1])
        assert aligned.alphas[1] == pytest.approx(2.0 * np.pi - 3.1)

    def test_degenerate_entries_inherit_previous(self):
        axes = np.array([Y_AXIS, X_AXIS, Y_AXIS])
        aligned = align_axes(axes, np.array([1.0, 0.0, 1.0]), degenerate=[False, True, False])
        np.testing.assert_allclose(aligned.axes[1], Y_AXIS)

    def test_reference_orients_first_axis(self):
        aligned = align_axes(np.array([[-1.0, 0.0, 0.0]]), np.array([2.0]), reference=X_AXIS)
        np.testing.assert_allclose(aligned.axes[0], X_AXIS)
