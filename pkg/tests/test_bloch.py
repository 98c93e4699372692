import numpy as np
import pytest

from src.core.exceptions import InvalidInputError, ProfileRangeError
from src.physics.bloch import (
    BlochSimulator,
    SequenceTiming,
    excite,
    simulate_batch,
    simulate_cpmg,
    static_propagate,
)
from src.physics.cycle import CycleParams, effective_rotation
from src.physics.profiles import BiLinear, Constant, FieldProfile, Linear
from src.physics.rotation import X_AXIS, Y_AXIS, Z_AXIS, from_axis_angle


class TestSequenceTiming:
    def test_defaults(self):
        timing = SequenceTiming()
        assert timing.te_ratio == 15.0
        assert timing.t90_ratio == 0.5
        assert timing.excitation_phase == pytest.approx(np.pi / 2)
        assert timing.pulse_width == pytest.approx(1.0 / 15.0)

    @pytest.mark.parametrize(
        "kwargs", [{"te_ratio": 1.0}, {"echo_count": 0}, {"t90_ratio": 0.0}, {"te_ratio": 1.2, "t90_ratio": 0.5}]
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidInputError):
            SequenceTiming(**kwargs)


class TestExcitation:
    def test_on_resonance(self):
        m = excite(FieldProfile.constant(0.0), SequenceTiming())
        np.testing.assert_allclose(m, X_AXIS, atol=1e-15)

    def test_no_pulse(self):
        m = excite(FieldProfile.constant(0.0, 0.0), SequenceTiming())
        np.testing.assert_allclose(m, Z_AXIS, atol=1e-15)

    def test_off_resonance_referral(self):
        timing = SequenceTiming(te_ratio=15.0)
        pulse = from_axis_angle(np.array([0.0, 1.0, 1.0]) / np.sqrt(2.0), 0.5 * np.pi * np.sqrt(2.0))
        referral = from_axis_angle(Z_AXIS, -0.25 * np.pi)
        expected = referral.apply(pulse.apply(Z_AXIS))
        np.testing.assert_allclose(excite(FieldProfile.constant(1.0), timing), expected, atol=1e-12)


class TestSimulation:
    def test_ideal_cpmg(self):
        train = simulate_cpmg(FieldProfile.constant(0.0), SequenceTiming(echo_count=1000))
        assert len(train) == 1001
        np.testing.assert_allclose(train.magnetization, np.broadcast_to(X_AXIS, (1001, 3)), atol=1e-9)

    def test_static_offset_matches_effective_rotation(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=1000)
        train = simulate_cpmg(FieldProfile.constant(0.7), timing)
        er = effective_rotation(CycleParams(0.7, 1.0, 15.0))
        oracle = static_propagate(er, train.magnetization[0], 1000)
        np.testing.assert_allclose(train.magnetization, oracle.magnetization, atol=1e-8)

    def test_norm_conserved(self):
        timing = SequenceTiming(te_ratio=8.0, echo_count=5000)
        train = simulate_cpmg(FieldProfile.linear(1e-3, -2.0, omega1=0.9), timing)
        np.testing.assert_allclose(train.norms(), 1.0, atol=1e-9)

    def test_azimuthal_shift_at_fast_ramp(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=40)
        train = simulate_cpmg(FieldProfile.linear(1e-2, 0.0), timing)
        m = train.magnetization[1:41]
        shift = np.degrees(np.mean(np.arctan2(m[:, 1], m[:, 0])))
        assert abs(shift) == pytest.approx(3.4, abs=0.3)

    def test_substep_convergence(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=200)
        profile = FieldProfile.linear(1e-3, -0.1)
        coarse = simulate_cpmg(profile, timing, substeps_per_interval=4)
        fine = simulate_cpmg(profile, timing, substeps_per_interval=8)
        finer = simulate_cpmg(profile, timing, substeps_per_interval=16)
        np.testing.assert_allclose(coarse.magnetization, fine.magnetization, atol=1e-5)
        np.testing.assert_allclose(fine.magnetization, finer.magnetization, atol=1e-6)

    def test_deterministic(self):
        timing = SequenceTiming(echo_count=300)
        profile = FieldProfile.linear(3e-3, 0.2)
        first = simulate_cpmg(profile, timing)
        second = simulate_cpmg(profile, timing)
        assert np.array_equal(first.magnetization, second.magnetization)

    def test_rows_schema(self):
        train = simulate_cpmg(FieldProfile.constant(0.2), SequenceTiming(echo_count=3))
        rows = train.rows()
        assert train.COLUMNS == ("echo_index", "tau", "omega0_norm", "Mx", "My", "Mz")
        assert [row[0] for row in rows] == [0, 1, 2, 3]
        assert all(len(row) == 6 for row in rows)
        assert train.manifest["substeps_per_interval"] == 4

    def test_profile_must_cover_run(self):
        profile = FieldProfile.tabulated([0.0, 10.0], [0.0, 0.1])
        with pytest.raises(ProfileRangeError):
            simulate_cpmg(profile, SequenceTiming(echo_count=20))

    def test_rejects_zero_substeps(self):
        with pytest.raises(InvalidInputError):
            simulate_cpmg(FieldProfile.constant(0.0), SequenceTiming(echo_count=2), substeps_per_interval=0)

    def test_custom_start(self):
        train = simulate_cpmg(FieldProfile.constant(0.0), SequenceTiming(echo_count=4), m0=Y_AXIS)
        np.testing.assert_allclose(train.magnetization[1], -Y_AXIS, atol=1e-12)
        np.testing.assert_allclose(train.magnetization[2], Y_AXIS, atol=1e-12)


class TestBatch:
    def test_batch_matches_single_runs(self):
        timing = SequenceTiming(echo_count=60)
        starts = np.array([-0.4, 0.3, 1.1])
        batch = simulate_batch(FieldProfile(Linear(2e-3, starts), Constant(1.0)), timing)
        assert batch.shape == (61, 3, 3)
        for b, start in enumerate(starts):
            single = simulate_cpmg(FieldProfile.linear(2e-3, start), timing)
            np.testing.assert_allclose(batch[:, b, :], single.magnetization, atol=1e-12)

    def test_capture_returns_requested_echo(self):
        timing = SequenceTiming(echo_count=40)
        profile = FieldProfile(BiLinear(np.array([0.0, 0.5]), np.array([0.5, 0.0]), 0.05), Constant(1.0))
        full = simulate_batch(profile, timing)
        captured = simulate_batch(profile, timing, capture=[20, 35])
        np.testing.assert_allclose(captured[0], full[20, 0], atol=1e-14)
        np.testing.assert_allclose(captured[1], full[35, 1], atol=1e-14)

    def test_capture_out_of_range(self):
        with pytest.raises(InvalidInputError):
            simulate_batch(FieldProfile.constant(0.0), SequenceTiming(echo_count=5), capture=[6])


class TestStaticPropagate:
    def test_constant_train_along_axis(self):
        er = effective_rotation(CycleParams(0.0, 1.0, 15.0))
        train = static_propagate(er, X_AXIS, 10)
        np.testing.assert_allclose(train.magnetization, np.broadcast_to(X_AXIS, (11, 3)), atol=1e-12)

    def test_alternating_perpendicular(self):
        er = effective_rotation(CycleParams(0.0, 1.0, 15.0))
        train = static_propagate(er, Y_AXIS, 3)
        np.testing.assert_allclose(train.magnetization[1::2], np.broadcast_to(-Y_AXIS, (2, 3)), atol=1e-12)
        np.testing.assert_allclose(train.magnetization[2], Y_AXIS, atol=1e-12)

    def test_negative_count(self):
        with pytest.raises(InvalidInputError):
            static_propagate(effective_rotation(CycleParams(0.0, 1.0, 15.0)), X_AXIS, -1)


def test_solver_wrapper():
    solver = BlochSimulator(FieldProfile.constant(0.3), SequenceTiming(echo_count=5))
    train = solver.solve()
    assert solver.result is train
    assert len(train.magnetization) == 6
