import math
import unittest

from layered_bpsk_model import (
    ALIGNED,
    CASE_TRIPLES,
    OPPOSED,
    SPLIT,
    BpskSymbol,
    InvalidParameterError,
    LayerConfig,
    all_cases,
    as_symbol,
    case_class_probabilities,
    case_index,
    classify_block,
    decide,
    select_weights,
)


class WeightTableTests(unittest.TestCase):
    def test_amplitudes_match_case_table_for_alpha_one_beta_half(self):
        expected = {
            1: (1.5, -0.5),
            2: (0.5, -1.5),
            3: (-0.5, 1.5),
            4: (-1.5, 0.5),
            5: (1.0, 1.0),
            6: (-1.0, -1.0),
            7: (-0.25, -0.25),
            8: (0.25, 0.25),
        }
        for case in all_cases(1.0, 0.5):
            self.assertEqual((case.amp_odd, case.amp_even), expected[case.index], case)

    def test_branches_follow_symbol_pattern(self):
        self.assertEqual(select_weights(1, -1, -1, 1.0, 0.5), select_weights(-1, 1, 1, 1.0, 0.5))
        self.assertEqual(classify_block(1, 1, 1, 2.0, 1.0).branch, ALIGNED)
        self.assertEqual(classify_block(-1, -1, 1, 2.0, 1.0).branch, OPPOSED)
        self.assertEqual(classify_block(-1, 1, -1, 2.0, 1.0).branch, SPLIT)
        w = select_weights(1, 1, -1, 2.0, 1.0)
        self.assertEqual((w.w1, w.w2), (0.0, 0.5))

    def test_case_index_covers_all_rows_once(self):
        self.assertEqual(sorted(case_index(*t) for t in CASE_TRIPLES), list(range(1, 9)))
        self.assertEqual(case_index(1, -1, 1), 1)
        self.assertEqual(case_index(-1, -1, 1), 8)

    def test_case_class_probabilities(self):
        self.assertEqual(case_class_probabilities(1.0, 0.5), {SPLIT: 0.5, ALIGNED: 0.25, OPPOSED: 0.25})

    def test_invalid_symbols_and_amplitudes_rejected(self):
        with self.assertRaises(InvalidParameterError):
            as_symbol(0)
        with self.assertRaises(InvalidParameterError):
            select_weights(1, 1, 1, 0.5, 0.5)
        with self.assertRaises(InvalidParameterError):
            select_weights(1, 1, 1, 1.0, 0.0)
        with self.assertRaises(InvalidParameterError):
            select_weights(1, 1, 1, math.nan, 0.5)


class DecisionTests(unittest.TestCase):
    def test_exact_zero_decides_plus(self):
        self.assertIs(decide(0.0), BpskSymbol.PLUS)
        self.assertIs(decide(-0.0), BpskSymbol.PLUS)
        self.assertIs(decide(-1e-300), BpskSymbol.MINUS)


class LayerConfigTests(unittest.TestCase):
    def test_from_ratio_normalises_average_power(self):
        for ratio in (1.5, 2.0, 3.0, 4.0, 10.0):
            cfg = LayerConfig.from_ratio(ratio, 0.1)
            self.assertAlmostEqual(cfg.alpha / cfg.beta, ratio, places=12)
            self.assertAlmostEqual((12 * cfg.alpha**2 + 9 * cfg.beta**2) / 16, 1.0, places=12)
            self.assertEqual((cfg.alpha_q, cfg.beta_q), (cfg.alpha, cfg.beta))

    def test_validation(self):
        with self.assertRaises(InvalidParameterError):
            LayerConfig.symmetric(1.0, 0.5, 0.0)
        with self.assertRaises(InvalidParameterError):
            LayerConfig(1.0, 0.5, 0.4, 0.5, 1.0)
        with self.assertRaises(InvalidParameterError):
            LayerConfig.from_ratio(1.0, 1.0)

    def test_quadrature_layer_and_with_sigma2(self):
        cfg = LayerConfig(2.0, 1.0, 3.0, 0.5, 0.2)
        q = cfg.quadrature_layer()
        self.assertEqual((q.alpha, q.beta, q.sigma2), (3.0, 0.5, 0.2))
        self.assertEqual(cfg.with_sigma2(4.0).sigma2, 4.0)
        self.assertEqual(cfg.with_sigma2(4.0).alpha_q, 3.0)


if __name__ == "__main__":
    unittest.main()
