"""
Test the churn metrics and the bound checkers
"""
import math
import unittest
import warnings

import numpy as np

from churnkit.churn import BoundReport, PairedPredictions, PredictionMargin, StabilityCounts, check_churn_err_bound, \
    check_hellinger_sandwich, check_kl_proxy_bound, check_margin_event, entropy_confidence_curve, \
    entropy_minimizer_check, error_rate, excess_soft_churn, hard_churn, log_collision_proxy, margin, soft_churn, \
    soft_churn_floor, stability_counts
from churnkit.exceptions import InvalidInputError
from churnkit.probability import ProbVector


class PairedPredictionsTestCase(unittest.TestCase):
    def test_from_prob_vectors(self):
        pp = PairedPredictions([ProbVector([0.9, 0.1])], [ProbVector([0.2, 0.8])], [0])
        self.assertEqual(len(pp), 1)
        self.assertEqual(pp.classes, 2)
        np.testing.assert_array_equal(pp.labels, [0])

    def test_bad_input(self):
        with self.assertRaisesRegex(InvalidInputError, "differ in shape"):
            PairedPredictions([[0.5, 0.5]], [[0.5, 0.5], [1.0, 0.0]])
        with self.assertRaisesRegex(InvalidInputError, "must sum to 1"):
            PairedPredictions([[0.5, 0.6]], [[0.5, 0.5]])
        with self.assertRaisesRegex(InvalidInputError, "at least two classes"):
            PairedPredictions([[1.0]], [[1.0]])
        with self.assertRaisesRegex(InvalidInputError, r"Labels must be in \[0, 2\)"):
            PairedPredictions([[0.5, 0.5]], [[0.5, 0.5]], [2])
        with self.assertRaisesRegex(InvalidInputError, "integer"):
            PairedPredictions([[0.5, 0.5]], [[0.5, 0.5]], [0.0])
        with self.assertRaisesRegex(InvalidInputError, "Expected 1 labels"):
            PairedPredictions([[0.5, 0.5]], [[0.5, 0.5]], [0, 1])

    def test_require_labels(self):
        with self.assertRaisesRegex(InvalidInputError, "labelled samples"):
            PairedPredictions([[0.5, 0.5]], [[0.5, 0.5]]).require_labels()

    def test_swapped(self):
        pp = PairedPredictions([[0.9, 0.1]], [[0.2, 0.8]], [1])
        swapped = pp.swapped()
        np.testing.assert_array_equal(swapped.model1, [[0.2, 0.8]])
        np.testing.assert_array_equal(swapped.model2, [[0.9, 0.1]])


class ChurnTestCase(unittest.TestCase):
    def setUp(self):
        self.pp = PairedPredictions(
            [[0.9, 0.1], [0.2, 0.8], [0.6, 0.4]],
            [[0.7, 0.3], [0.6, 0.4], [0.4, 0.6]],
            [0, 1, 1],
        )

    def test_hard_churn(self):
        self.assertAlmostEqual(hard_churn(self.pp), 2 / 3)
        self.assertEqual(hard_churn(PairedPredictions(self.pp.model1, self.pp.model1)), 0.0)

    def test_hard_churn_ties(self):
        # The lowest index wins a tie, so these predict the same label
        pp = PairedPredictions([[0.5, 0.5]], [[0.6, 0.4]])
        self.assertEqual(hard_churn(pp), 0.0)

    def test_soft_churn(self):
        self.assertAlmostEqual(soft_churn(self.pp), 1 - (0.66 + 0.44 + 0.48) / 3)
        disjoint = PairedPredictions([[1.0, 0.0]], [[0.0, 1.0]])
        self.assertEqual(soft_churn(disjoint), 1.0)

    def test_soft_churn_decomposes(self):
        self.assertAlmostEqual(soft_churn_floor(self.pp), 1 - (0.82 + 0.68 + 0.52 + 0.58 + 0.52 + 0.52) / 6)
        self.assertAlmostEqual(excess_soft_churn(self.pp), 0.08)
        self.assertAlmostEqual(soft_churn_floor(self.pp) + excess_soft_churn(self.pp), soft_churn(self.pp))

    def test_identical_predictions_have_no_excess(self):
        # Uncertain models that agree still churn when they sample
        pp = PairedPredictions([[0.8, 0.1, 0.1], [0.1, 0.1, 0.8]], [[0.8, 0.1, 0.1], [0.1, 0.1, 0.8]])
        self.assertEqual(excess_soft_churn(pp), 0.0)
        self.assertAlmostEqual(soft_churn(pp), 1 - 0.66)
        self.assertAlmostEqual(soft_churn_floor(pp), soft_churn(pp))

    def test_log_collision_proxy(self):
        self.assertAlmostEqual(log_collision_proxy(self.pp),
                               -(math.log(0.66) + math.log(0.44) + math.log(0.48)) / 3)
        disjoint = PairedPredictions([[1.0, 0.0]], [[0.0, 1.0]])
        self.assertEqual(log_collision_proxy(disjoint), math.inf)

    def test_error_rate(self):
        self.assertAlmostEqual(error_rate(self.pp.model1, self.pp.labels), 1 / 3)
        with self.assertRaisesRegex(InvalidInputError, "need labels"):
            error_rate(self.pp.model1, None)

    def test_margin(self):
        result = margin([0.2, 0.5, 0.3])
        self.assertEqual(result.label, 1)
        self.assertAlmostEqual(result.margin, 0.2)
        self.assertEqual(margin(ProbVector([0.5, 0.5])), PredictionMargin(0, 0.0))

    def test_stability_counts(self):
        counts = stability_counts(self.pp)
        self.assertEqual(counts, StabilityCounts(1, 1, 0, 1))
        self.assertEqual(counts.total, 3)


class BoundCheckTestCase(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(42)
        self.random_pp = PairedPredictions(rng.dirichlet(np.ones(4), size=500), rng.dirichlet(np.ones(4), size=500),
                                           rng.integers(4, size=500))

    def test_churn_err(self):
        pp = PairedPredictions([[0.9, 0.1], [0.2, 0.8], [0.6, 0.4]], [[0.7, 0.3], [0.6, 0.4], [0.4, 0.6]], [0, 1, 1])
        report = check_churn_err_bound(pp)
        self.assertTrue(report.holds)
        self.assertEqual(report.bound, 'churn-err')
        self.assertAlmostEqual(report.values['churn'], 2 / 3)
        self.assertAlmostEqual(report.values['err1'], 1 / 3)
        self.assertAlmostEqual(report.values['err2'], 1 / 3)
        self.assertAlmostEqual(report.min_slack, 0.0)

    def test_all_bounds_hold(self):
        for checker in (check_churn_err_bound, check_kl_proxy_bound, check_hellinger_sandwich, check_margin_event):
            with self.subTest(checker=checker.__name__):
                report = checker(self.random_pp)
                self.assertTrue(report.holds, report)
                self.assertEqual(report.samples, 500)

    def test_kl_proxy_disjoint_support(self):
        # inf <= inf holds
        report = check_kl_proxy_bound(PairedPredictions([[1.0, 0.0]], [[0.0, 1.0]]))
        self.assertTrue(report.holds)
        self.assertIsNone(report.values['log_collision_proxy'])
        self.assertEqual(report.values['infinite_log_collision_proxy'], 1)

    def test_kl_proxy_partly_disjoint_support(self):
        pp = PairedPredictions([[1.0, 0.0], [0.5, 0.5], [0.9, 0.1]], [[0.0, 1.0], [0.5, 0.5], [0.9, 0.1]])
        with warnings.catch_warnings():
            warnings.simplefilter('error', RuntimeWarning)
            report = check_kl_proxy_bound(pp)

        self.assertTrue(report.holds)
        self.assertAlmostEqual(report.values['log_collision_proxy'], -(math.log(0.5) + math.log(0.82)) / 2)
        self.assertAlmostEqual(report.values['cross_entropy_12'],
                               (math.log(2) - 0.9 * math.log(0.9) - 0.1 * math.log(0.1)) / 2)
        for name in ('log_collision_proxy', 'cross_entropy_12', 'cross_entropy_21'):
            with self.subTest(name=name):
                self.assertTrue(math.isfinite(report.values[name]))
                self.assertEqual(report.values['infinite_' + name], 1)

    def test_hellinger_sandwich_values(self):
        report = check_hellinger_sandwich(self.random_pp)
        values = report.values
        self.assertLessEqual(values['half_mean_tv_sq'], values['mean_hellinger_sq'])
        self.assertLessEqual(values['mean_hellinger_sq'], values['soft_churn'])
        self.assertLessEqual(values['soft_churn'], values['upper_bound'])

    def test_margin_event(self):
        report = check_margin_event(self.random_pp)
        self.assertGreaterEqual(report.values['event_frequency'], report.values['churn'])
        self.assertEqual(report.values['flipped'], round(hard_churn(self.random_pp) * 500))

    def test_churn_err_needs_labels(self):
        with self.assertRaisesRegex(InvalidInputError, "labelled samples"):
            check_churn_err_bound(PairedPredictions([[0.5, 0.5]], [[0.5, 0.5]]))

    def test_report(self):
        self.assertTrue(BoundReport('test', 10, 0, 0.5).holds)
        self.assertFalse(BoundReport('test', 10, 1, -0.5).holds)


class EntropyTestCase(unittest.TestCase):
    def test_minimizer(self):
        labels = [0, 1]
        confident = [[0.9, 0.1], [0.1, 0.9]]
        uncertain = [[0.6, 0.4], [0.4, 0.6]]
        report = entropy_minimizer_check([uncertain, confident], labels, 1.0)
        self.assertTrue(report.holds)
        self.assertEqual(report.values['best_index'], 1)
        self.assertEqual(report.values['regularised_index'], 1)

    def test_minimizer_tie_break(self):
        report = entropy_minimizer_check([[[0.5, 0.5]], [[0.5, 0.5]]], [0], 0.0)
        self.assertEqual(report.values['best_index'], 0)

    def test_minimizer_bad_input(self):
        with self.assertRaisesRegex(InvalidInputError, "at least one candidate"):
            entropy_minimizer_check([], [0], 1.0)
        with self.assertRaisesRegex(InvalidInputError, "nonnegative"):
            entropy_minimizer_check([[[0.5, 0.5]]], [0], -1.0)

    def test_confidence_curve(self):
        value, derivative = entropy_confidence_curve(0.0)
        self.assertAlmostEqual(value, math.log(2))
        self.assertEqual(derivative, 0.0)

        value, derivative = entropy_confidence_curve(1.0)
        self.assertEqual(value, 0.0)
        self.assertEqual(derivative, -math.inf)

        values, derivatives = entropy_confidence_curve(np.linspace(0.0, 0.99, 50))
        self.assertTrue(np.all(np.diff(values) < 0))
        self.assertTrue(np.all(derivatives[1:] < 0))

    def test_confidence_curve_range(self):
        with self.assertRaisesRegex(InvalidInputError, r"in \[0, 1\]"):
            entropy_confidence_curve(1.5)


if __name__ == '__main__':
    unittest.main()
