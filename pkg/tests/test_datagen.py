"""Generators: determinism, fault injection exactness, CSTR physics checks."""

import numpy as np
import pytest
from dataclasses import replace

from olppmon.datagen import (CstrConfig, NumericalConfig, cstr_fault,
                             fault_labels, gen_numerical,
                             inject_fault_numerical, lowpass_filter,
                             numerical_fault, simulate_cstr, with_half_step)


class TestNumericalSystem:
    def test_noise_free_identity(self):
        x, t = gen_numerical(NumericalConfig(n_samples=300, seed=1,
                                             noise_halfwidth=0.0))
        np.testing.assert_allclose(x[2], x[0] ** 2 + x[0], atol=1e-14)
        np.testing.assert_allclose(x[1], np.cos(t), atol=1e-14)

    def test_noise_bound(self):
        x, t = gen_numerical(NumericalConfig(n_samples=1000, seed=2))
        assert np.max(np.abs(x[0] - t)) <= 0.05
        assert np.max(np.abs(x[1] - np.cos(t))) <= 0.05
        assert np.max(np.abs(x[2] - (t**2 + t))) <= 0.05

    def test_deterministic_for_fixed_seed(self):
        a, _ = gen_numerical(NumericalConfig(n_samples=100, seed=3))
        b, _ = gen_numerical(NumericalConfig(n_samples=100, seed=3))
        np.testing.assert_array_equal(a, b)

    def test_t_range(self):
        _, t = gen_numerical(NumericalConfig(n_samples=500, seed=4))
        assert t.min() >= -1.0 and t.max() <= 1.0


class TestNumericalFaults:
    def test_fault1_exact_step(self):
        x, _ = gen_numerical(NumericalConfig(n_samples=1000, seed=5))
        faulty = inject_fault_numerical(x, 1, 500)
        np.testing.assert_array_equal(faulty[0, 500:], x[0, 500:] + 0.6)
        np.testing.assert_array_equal(faulty[1:], x[1:])

    @pytest.mark.parametrize("fid,var,mag", [(1, 0, 0.6), (2, 1, 0.8),
                                             (3, 2, 1.0)])
    def test_magnitudes(self, fid, var, mag):
        x, _ = gen_numerical(NumericalConfig(n_samples=600, seed=6))
        faulty = inject_fault_numerical(x, fid, 500)
        assert faulty[var, 500] - x[var, 500] == pytest.approx(mag)
        spec = numerical_fault(fid)
        assert spec.magnitude == mag

    def test_pre_onset_untouched(self):
        x, _ = gen_numerical(NumericalConfig(n_samples=700, seed=7))
        faulty = inject_fault_numerical(x, 2, 500)
        np.testing.assert_array_equal(faulty[:, :500], x[:, :500])

    def test_bad_fault_or_onset(self):
        x, _ = gen_numerical(NumericalConfig(n_samples=100, seed=8))
        with pytest.raises(ValueError):
            inject_fault_numerical(x, 4)
        with pytest.raises(ValueError):
            inject_fault_numerical(x, 1, onset_index=100)

    def test_labels(self):
        labels = fault_labels(10, 3, 6)
        np.testing.assert_array_equal(labels, [0, 0, 0, 0, 0, 0, 3, 3, 3, 3])


QUIET = CstrConfig(v1_std=0.0, v2_std=0.0, meas_std=(0.0, 0.0, 0.0, 0.0))


class TestCstr:
    def test_settles_to_operating_point(self):
        x, _ = simulate_cstr(QUIET, 300, seed=0)
        # noise-free closed loop should hold the steady state
        assert abs(x[0, -1] - x[0, -61]) <= 1e-6
        assert abs(x[0, -1] - 0.5) <= 1e-3
        assert abs(x[1, -1] - 350.0) <= 0.1

    def test_deterministic_for_fixed_seed(self):
        a, _ = simulate_cstr(CstrConfig(), 200, seed=9)
        b, _ = simulate_cstr(CstrConfig(), 200, seed=9)
        np.testing.assert_array_equal(a, b)

    def test_fault4_feed_temperature_ratio(self):
        fault = cstr_fault(4, onset_index=50)
        _, labels, internals = simulate_cstr(QUIET, 120, seed=0, fault=fault,
                                             return_internals=True)
        tf = internals["t_f"]
        np.testing.assert_allclose(tf[:50], 350.0)
        np.testing.assert_allclose(tf[50:] / tf[:50].mean(), 1.01, rtol=1e-12)
        assert labels[49] == 0 and labels[50] == 4

    def test_fault5_volume_ramp_slope(self):
        fault = cstr_fault(5, onset_index=30)
        _, _, internals = simulate_cstr(QUIET, 120, seed=0, fault=fault,
                                        return_internals=True)
        vol = internals["volume"]
        np.testing.assert_allclose(vol[:30], 100.0)
        slopes_per_min = np.diff(vol[30:]) * 60.0
        np.testing.assert_allclose(slopes_per_min, -4.0 / 500.0, rtol=1e-9)

    def test_pre_onset_bit_equal_to_normal_run(self):
        normal, _ = simulate_cstr(CstrConfig(), 100, seed=10)
        faulty, _ = simulate_cstr(CstrConfig(), 100, seed=10,
                                  fault=cstr_fault(4, onset_index=60))
        np.testing.assert_array_equal(faulty[:, :60], normal[:, :60])

    def test_halved_dt_converges(self):
        base, _ = simulate_cstr(QUIET, 120, seed=0)
        fine, _ = simulate_cstr(with_half_step(QUIET), 120, seed=0)
        rel = np.max(np.abs(fine - base) / np.maximum(np.abs(base), 1.0))
        assert rel <= 1e-4

    def test_unstable_configuration_raises(self):
        # sign-flipped temperature loop drives the reactor into runaway
        hot = replace(QUIET, kp_tc=-100.0, ki_tc=-100.0)
        with pytest.raises(RuntimeError, match="unstable"):
            simulate_cstr(hot, 3600, seed=0)

    def test_dt_must_divide_sampling_interval(self):
        with pytest.raises(ValueError, match="divide"):
            CstrConfig(dt=0.3)

    def test_fault_id_validated(self):
        with pytest.raises(ValueError):
            simulate_cstr(QUIET, 10, fault=numerical_fault(1))


class TestLowpass:
    def test_recursion_definition(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((2, 50))
        y = lowpass_filter(x, 0.8)
        np.testing.assert_array_equal(y[:, 0], x[:, 0])
        for i in range(1, 50):
            np.testing.assert_allclose(y[:, i], 0.8 * y[:, i - 1] + 0.2 * x[:, i],
                                       atol=1e-15)

    def test_zero_retention_is_identity(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((2, 20))
        np.testing.assert_allclose(lowpass_filter(x, 0.0), x, atol=0)

    def test_retention_validated(self):
        with pytest.raises(ValueError):
            lowpass_filter(np.ones((1, 5)), 1.0)
