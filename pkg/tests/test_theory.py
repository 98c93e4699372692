import math

import numpy as np
import pytest

from src.core.exceptions import InvalidInputError
from src.physics.adiabaticity import ADIABATICITY_CAP
from src.physics.bloch import SequenceTiming, simulate_cpmg
from src.physics.profiles import FieldProfile
from src.theory.adiabatic import AdiabaticPredictor, adiabatic_predict
from src.theory.continuous import ContinuousSolver, continuous_mode_evolution, principal_generator
from src.theory.first_order import (
    FirstOrderPrediction,
    FirstOrderPredictor,
    first_order_formula,
    first_order_predict,
    first_order_residual,
)
from src.theory.mode_trace import dynamic_axis_series, echo_cycle_index, mode_trace_from_echoes
from src.theory.segmentation import ADIABATIC, NON_ADIABATIC, segment_regions, segment_samples


def _rms(a, b):
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


class TestModeTrace:
    def test_echo_cycle_index(self):
        np.testing.assert_array_equal(echo_cycle_index(4), [0, 0, 1, 2, 3])

    def test_static_profile_keeps_amplitudes(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=300)
        profile = FieldProfile.constant(0.7)
        trace = mode_trace_from_echoes(simulate_cpmg(profile, timing), profile, timing)
        assert len(trace) == 301
        np.testing.assert_allclose(trace.a0, trace.a0[0], atol=1e-8)
        np.testing.assert_allclose(trace.cp_magnitude, trace.cp_magnitude[0], atol=1e-8)
        assert trace.norm_residual() < 1e-9

    def test_series_starts_along_refocusing_pulse(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=10)
        series = dynamic_axis_series(FieldProfile.constant(0.0), timing)
        np.testing.assert_allclose(series.axes[0], [1.0, 0.0, 0.0], atol=1e-12)

    def test_rows_cap_adiabaticity(self):
        timing = SequenceTiming(echo_count=3)
        profile = FieldProfile.constant(0.1)
        rows = mode_trace_from_echoes(simulate_cpmg(profile, timing), profile, timing).rows()
        assert all(row[-1] == ADIABATICITY_CAP for row in rows)


class TestAdiabaticPrediction:
    def test_static_profile_matches_simulation(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=500)
        profile = FieldProfile.constant(0.7)
        prediction = adiabatic_predict(profile, timing)
        simulated = simulate_cpmg(profile, timing)
        np.testing.assert_allclose(prediction.train.magnetization, simulated.magnetization, atol=1e-8)
        np.testing.assert_allclose(prediction.trace.geometric_phase, 0.0, atol=1e-12)

    def test_amplitudes_are_frozen(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=200)
        prediction = adiabatic_predict(FieldProfile.linear(1e-3, 0.2), timing)
        assert np.all(prediction.trace.a0 == prediction.trace.a0[0])
        np.testing.assert_allclose(prediction.train.norms(), 1.0, atol=1e-12)

    def test_custom_start(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=20)
        prediction = adiabatic_predict(FieldProfile.constant(0.0), timing, m_exc=[0.0, 1.0, 0.0])
        assert prediction.trace.a0[0] == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(prediction.train.magnetization[1], [0.0, -1.0, 0.0], atol=1e-12)

    @pytest.mark.slow
    def test_slow_harmonic_path_is_spin_locked(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=30000)
        profile = FieldProfile.harmonic(1.4, 30000.0)
        simulated = mode_trace_from_echoes(simulate_cpmg(profile, timing), profile, timing)
        predicted = adiabatic_predict(profile, timing).trace
        assert np.max(np.abs(simulated.a0 - predicted.a0)) < 0.01

    def test_solver_wrapper(self):
        solver = AdiabaticPredictor(FieldProfile.constant(0.4), SequenceTiming(echo_count=7))
        prediction = solver.solve()
        assert solver.result is prediction
        assert len(prediction.trace) == 8


class TestFirstOrder:
    def test_no_correction_without_ramp(self):
        point = first_order_formula(0.8, 0.0, 0.0)
        assert point.mx == pytest.approx(0.8)
        assert point.my_abs == pytest.approx(0.0)

    def test_azimuth_only(self):
        point = first_order_formula(0.9, 0.1, 0.0)
        assert point.mx == pytest.approx(0.9 * math.cos(0.1))
        assert point.my_abs == pytest.approx(0.9 * math.sin(0.1))

    def test_inverse_adiabaticity_only(self):
        point = first_order_formula(1.0, 0.0, 0.5)
        scale = 1.0 / math.sqrt(1.25)
        assert point.mx == pytest.approx(scale)
        assert point.my_abs == pytest.approx(0.5 * scale)

    def test_vectorised(self):
        point = first_order_formula(np.array([1.0, 0.5]), 0.0, np.array([0.0, 0.0]))
        np.testing.assert_allclose(point.mx, [1.0, 0.5])

    def test_scalar_prediction_on_resonance(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=10)
        point = first_order_predict(FieldProfile.constant(0.0), 3.0, timing)
        assert point.mx == pytest.approx(1.0, abs=1e-12)
        assert point.my_abs == pytest.approx(0.0, abs=1e-12)

    def test_tracks_simulation_in_adiabatic_region(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=8000)
        profile = FieldProfile.linear(1e-4, 0.0)
        simulated = simulate_cpmg(profile, timing)
        predicted = first_order_predict(profile, simulated.tau[1:], timing)
        assert _rms(predicted.mx, simulated.magnetization[1:, 0]) < 0.02

    def test_solver_wrapper(self):
        solver = FirstOrderPredictor(FieldProfile.linear(1e-3, 0.1), SequenceTiming(echo_count=12))
        prediction = solver.solve()
        assert len(prediction) == 12
        assert solver.result is prediction
        assert prediction.COLUMNS[-1] == "My_abs_first_order"

    def test_residual_averages_out_cone_precession(self):
        n = 64
        prediction = FirstOrderPrediction(
            tau=np.arange(1, n + 1, dtype=float),
            omega0=np.zeros(n),
            n_perp=np.ones(n),
            inverse_adiabaticity=np.full(n, 0.01),
            mx=np.ones(n),
            my_abs=np.full(n, 0.02),
        )
        magnetization = np.zeros((n + 1, 3))
        magnetization[1::2, 1] = 0.04
        residual = first_order_residual(magnetization, prediction, window=16)
        assert residual.echoes == n
        assert residual.windows == n - 15
        assert residual.max_error == pytest.approx(0.0, abs=1e-12)

    def test_residual_stops_at_first_transition(self):
        n = 40
        inverse = np.full(n, 0.01)
        inverse[10] = 0.2
        prediction = FirstOrderPrediction(
            np.arange(1, n + 1, dtype=float), np.zeros(n), np.ones(n), inverse, np.ones(n), np.zeros(n),
        )
        residual = first_order_residual(np.zeros((n + 1, 3)), prediction, window=16)
        assert residual.echoes == 10
        assert residual.windows == 0
        assert math.isnan(residual.max_error)

    def test_residual_rejects_empty_window(self):
        prediction = FirstOrderPrediction(*(np.ones(3) for _ in range(6)))
        with pytest.raises(InvalidInputError):
            first_order_residual(np.zeros((4, 3)), prediction, window=0)

    @pytest.mark.slow
    @pytest.mark.parametrize("rate", [1e-3, 3e-3, 1e-2])
    def test_my_follows_first_order_until_first_transition(self, rate):
        timing = SequenceTiming(te_ratio=15.0, echo_count=int(round(2.0 / rate)))
        profile = FieldProfile.linear(rate, 0.0)
        simulated = simulate_cpmg(profile, timing)
        prediction = FirstOrderPredictor(profile, timing).solve()
        residual = first_order_residual(simulated.magnetization, prediction)
        assert residual.windows > 0
        assert residual.max_error < 5.0 * rate


class TestAdiabaticFreezing:
    def test_linear_ramp_keeps_cpmg_amplitude(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=8000)
        profile = FieldProfile.linear(1e-4, 0.0)
        trace = mode_trace_from_echoes(simulate_cpmg(profile, timing), profile, timing)
        assert np.min(trace.adiabaticity) > 100.0
        np.testing.assert_allclose(trace.a0, 1.0, atol=0.01)


class TestContinuous:
    def test_static_profile_keeps_amplitude(self):
        timing = SequenceTiming(te_ratio=15.0, echo_count=50)
        result = continuous_mode_evolution(FieldProfile.constant(0.0), timing)
        np.testing.assert_allclose(result.trace.a0, 1.0, atol=1e-9)
        assert len(result.flip_taus) == 0

    def test_norm_conserved(self):
        timing = SequenceTiming(te_ratio=8.0, echo_count=400)
        result = continuous_mode_evolution(FieldProfile.linear(5e-3, -1.0), timing)
        np.testing.assert_allclose(np.linalg.norm(result.magnetization, axis=1), 1.0, atol=1e-6)

    def test_step_refinement(self):
        timing = SequenceTiming(te_ratio=8.0, echo_count=300)
        profile = FieldProfile.linear(1e-3, 0.5)
        coarse = continuous_mode_evolution(profile, timing, steps_per_cycle=8)
        fine = continuous_mode_evolution(profile, timing, steps_per_cycle=16)
        np.testing.assert_allclose(coarse.trace.a0, fine.trace.a0, atol=1e-3)

    def test_exact_rotations_need_no_renormalisation(self):
        timing = SequenceTiming(te_ratio=8.0, echo_count=400)
        result = continuous_mode_evolution(FieldProfile.linear(5e-3, -1.0), timing)
        assert result.renormalisations == 0
        np.testing.assert_allclose(np.linalg.norm(result.magnetization, axis=1), 1.0, atol=1e-12)

    def test_magnus_step_converges(self):
        timing = SequenceTiming(te_ratio=8.0, echo_count=300)
        profile = FieldProfile.linear(1e-3, 0.5)
        coarse = continuous_mode_evolution(profile, timing, steps_per_cycle=8)
        fine = continuous_mode_evolution(profile, timing, steps_per_cycle=32)
        np.testing.assert_allclose(coarse.magnetization, fine.magnetization, atol=1e-4)
        np.testing.assert_allclose(coarse.flip_taus, fine.flip_taus, atol=1e-9)

    def test_cuts_sit_where_alpha_reaches_pi(self):
        timing = SequenceTiming(te_ratio=8.0, echo_count=400)
        profile = FieldProfile.linear(5e-3, -1.0)
        result = continuous_mode_evolution(profile, timing)
        assert len(result.flip_taus) > 0
        for tau in result.flip_taus:
            before, after = principal_generator(profile, [tau - 1e-6, tau + 1e-6], timing.te_ratio)
            assert np.linalg.norm(before) == pytest.approx(math.pi, abs=1e-3)
            assert np.dot(before, after) < 0.0

    def test_rk4_method_is_selectable(self):
        timing = SequenceTiming(te_ratio=8.0, echo_count=50)
        result = continuous_mode_evolution(FieldProfile.linear(1e-3, 0.5), timing, method="rk4")
        assert result.method == "rk4"
        np.testing.assert_allclose(np.linalg.norm(result.magnetization, axis=1), 1.0, atol=1e-6)

    def test_rejects_unknown_method(self):
        with pytest.raises(InvalidInputError):
            continuous_mode_evolution(FieldProfile.constant(0.0), SequenceTiming(echo_count=2), method="euler")

    def test_rejects_zero_steps(self):
        with pytest.raises(InvalidInputError):
            continuous_mode_evolution(FieldProfile.constant(0.0), SequenceTiming(echo_count=2), steps_per_cycle=0)

    @pytest.mark.slow
    @pytest.mark.parametrize("rate", [5e-4, 1e-3])
    def test_agrees_with_direct_simulation(self, rate):
        timing = SequenceTiming(te_ratio=8.0, echo_count=int(round(3.0 / rate)))
        profile = FieldProfile.linear(rate, 0.0)
        simulated = mode_trace_from_echoes(simulate_cpmg(profile, timing), profile, timing)
        continuous = continuous_mode_evolution(profile, timing).trace
        assert _rms(simulated.a0, continuous.a0) < 0.05
        assert _rms(simulated.cp_magnitude, continuous.cp_magnitude) < 0.05

    def test_solver_wrapper(self):
        solver = ContinuousSolver(FieldProfile.constant(0.2), SequenceTiming(echo_count=5))
        assert solver.result is None
        result = solver.solve()
        assert result.steps_per_cycle == 8
        assert result.method == "magnus4"
        assert solver.result is result


class TestSegmentation:
    def test_sample_partition(self):
        segmentation = segment_samples([0.0, 1.0, 2.0, 3.0, 4.0], [5.0, 5.0, 1.0, 1.0, 5.0])
        assert [r.label for r in segmentation] == [ADIABATIC, NON_ADIABATIC, ADIABATIC]
        assert [(r.start, r.stop) for r in segmentation] == [(0.0, 1.5), (1.5, 3.5), (3.5, 4.0)]
        assert segmentation.regions[1].min_adiabaticity == 1.0

    def test_boundary_belongs_to_left_region(self):
        segmentation = segment_samples([0.0, 1.0, 2.0, 3.0], [5.0, 5.0, 1.0, 1.0])
        assert segmentation.label_at(1.5) == ADIABATIC
        assert segmentation.label_at(1.6) == NON_ADIABATIC
        with pytest.raises(InvalidInputError):
            segmentation.label_at(3.5)

    def test_covers_needs_a_single_adiabatic_region(self):
        segmentation = segment_samples([0.0, 1.0, 2.0, 3.0, 4.0], [5.0, 5.0, 1.0, 1.0, 5.0])
        np.testing.assert_array_equal(
            segmentation.covers([0.0, 1.0, 0.5, 3.8, 2.0], [1.4, 0.2, 3.8, 3.6, 2.0]),
            [True, True, False, True, False],
        )

    def test_static_profile_is_one_adiabatic_region(self):
        segmentation = segment_regions(FieldProfile.constant(0.3), SequenceTiming(echo_count=10))
        assert len(segmentation) == 1
        assert segmentation.variable == "tau"
        assert segmentation.domain == (0.0, 10.0)
        assert segmentation.to_document()["regions"][0]["min_adiabaticity"] == ADIABATICITY_CAP

    def test_fast_ramp_has_slow_bands_around_1_7(self):
        segmentation = segment_regions(omega0_range=(-4.0, 4.0), ramp=1e-3, te_ratio=15.0, points=801)
        bands = segmentation.non_adiabatic()
        assert any(r.start < 2.0 and r.stop > 1.4 for r in bands)
        assert any(r.start < -1.4 and r.stop > -2.0 for r in bands)

    def test_threshold_extremes(self):
        kwargs = dict(omega0_range=(-1.0, 1.0), ramp=1e-3, te_ratio=15.0, points=101)
        everything_slow = segment_regions(threshold=math.inf, **kwargs)
        assert [r.label for r in everything_slow] == [NON_ADIABATIC]
        everything_fast = segment_regions(threshold=0.0, **kwargs)
        assert [r.label for r in everything_fast] == [ADIABATIC]

    def test_neighbours_alternate(self):
        segmentation = segment_regions(omega0_range=(-6.0, 6.0), ramp=2e-3, te_ratio=8.0)
        labels = [r.label for r in segmentation]
        assert all(a != b for a, b in zip(labels, labels[1:]))
        assert segmentation.domain == (-6.0, 6.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {},
            {"profile": FieldProfile.constant(0.0)},
            {"omega0_range": (1.0, -1.0), "te_ratio": 15.0},
            {"omega0_range": (-1.0, 1.0), "te_ratio": 15.0, "points": 1},
        ],
    )
    def test_rejects_incomplete_requests(self, kwargs):
        with pytest.raises(InvalidInputError):
            segment_regions(**kwargs)

    def test_rejects_negative_threshold(self):
        with pytest.raises(InvalidInputError):
            segment_samples([0.0, 1.0], [1.0, 1.0], threshold=-1.0)
