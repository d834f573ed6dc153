import math
import unittest

import numpy as np

from awgn_channel import (
    NOISE,
    SYMBOLS,
    TOTAL_POWER,
    NoiseSpec,
    awgn_complex,
    awgn_real,
    complex_noise_power,
    dimension_variance,
    make_generator,
    noise_density,
)
from layered_bpsk_model import InvalidParameterError


class NoiseSpecTests(unittest.TestCase):
    def test_rejects_negative_or_nan_variance(self):
        with self.assertRaises(InvalidParameterError):
            NoiseSpec(-1.0)
        with self.assertRaises(InvalidParameterError):
            NoiseSpec(float("nan"))

    def test_rejects_out_of_range_seed(self):
        with self.assertRaises(InvalidParameterError):
            NoiseSpec(1.0, seed=-1)
        with self.assertRaises(InvalidParameterError):
            NoiseSpec(1.0, stream_id=2**64)

    def test_with_stream_keeps_seed_and_variance(self):
        spec = NoiseSpec(0.5, seed=9, stream_id=1).with_stream(7)
        self.assertEqual((spec.sigma2, spec.seed, spec.stream_id), (0.5, 9, 7))


class AwgnTests(unittest.TestCase):
    def test_zero_variance_returns_input_copy(self):
        x = np.array([1.0, -0.5, 0.25])
        y = awgn_real(x, NoiseSpec(0.0, seed=3))
        np.testing.assert_array_equal(y, x)
        self.assertIsNot(y, x)
        c = np.array([1 + 1j, -1j])
        np.testing.assert_array_equal(awgn_complex(c, NoiseSpec(0.0)), c)

    def test_same_seed_and_stream_is_reproducible(self):
        x = np.zeros(1000)
        a = awgn_real(x, NoiseSpec(1.0, seed=42, stream_id=3))
        b = awgn_real(x, NoiseSpec(1.0, seed=42, stream_id=3))
        c = awgn_real(x, NoiseSpec(1.0, seed=42, stream_id=4))
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c))

    def test_purposes_give_independent_generators(self):
        a = make_generator(1, 0, NOISE).standard_normal(8)
        b = make_generator(1, 0, SYMBOLS).standard_normal(8)
        self.assertFalse(np.array_equal(a, b))

    def test_real_noise_variance(self):
        y = awgn_real(np.zeros(1_000_000), NoiseSpec(2.5, seed=1))
        ratio = float(np.var(y)) / 2.5
        self.assertGreaterEqual(ratio, 0.99)
        self.assertLessEqual(ratio, 1.01)

    def test_disjoint_streams_are_uncorrelated(self):
        n = 1_000_000
        a = awgn_real(np.zeros(n), NoiseSpec(1.0, seed=42, stream_id=3))
        b = awgn_real(np.zeros(n), NoiseSpec(1.0, seed=42, stream_id=4))
        rho = float(np.corrcoef(a, b)[0, 1])
        self.assertLess(abs(rho), 3.0 / math.sqrt(n))

    def test_complex_noise_splits_power_over_axes(self):
        y = awgn_complex(np.zeros(400_000, dtype=complex), NoiseSpec(2.0, seed=1))
        self.assertAlmostEqual(float(np.var(y.real)), 1.0, delta=0.02)
        self.assertAlmostEqual(float(np.var(y.imag)), 1.0, delta=0.02)
        self.assertLess(abs(float(np.mean(y.real * y.imag))), 0.01)


class NoiseConventionTests(unittest.TestCase):
    def test_mapping(self):
        self.assertEqual(dimension_variance(0.4), 0.4)
        self.assertEqual(dimension_variance(0.4, TOTAL_POWER), 0.2)
        self.assertEqual(complex_noise_power(0.4), 0.8)
        self.assertEqual(complex_noise_power(0.4, TOTAL_POWER), 0.4)
        self.assertEqual(noise_density(0.4), 0.8)
        self.assertEqual(noise_density(dimension_variance(0.4, TOTAL_POWER)), 0.4)
        with self.assertRaises(InvalidParameterError):
            dimension_variance(0.4, "per-axis")


if __name__ == "__main__":
    unittest.main()
