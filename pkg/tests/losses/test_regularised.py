"""
Test the regularised log-losses and their gradients
"""
import math
import unittest

import numpy as np

from churnkit.exceptions import InvalidInputError
from churnkit.losses.regularised import RegParams, entropic_log_loss, entropic_logistic_loss, kl_log_loss, \
    kl_logistic_loss, log_loss, regularised_log_loss, regularised_minimizer, softmax_reg_loss_grad, \
    softmax_reg_loss_grad_batch, softplus
from churnkit.probability import ProbVector, sigmoid
from churnkit.training.gradcheck import numerical_gradient, relative_error


class RegParamsTestCase(unittest.TestCase):
    def test_valid(self):
        self.assertEqual(RegParams(), RegParams(0.0, 'entropic'))
        self.assertEqual(RegParams(1.0, 'kl-uniform').alpha, 1.0)
        self.assertEqual(RegParams(5.0, 'entropic').alpha, 5.0)

    def test_bad(self):
        bad = [
            ((0.3, 'reverse-kl'), "kind must be one of"),
            ((-0.1, 'entropic'), "nonnegative"),
            ((np.inf, 'entropic'), "nonnegative"),
            ((1.5, 'kl-uniform'), r"mixing weight in \[0, 1\]"),
        ]
        for args, message in bad:
            with self.subTest(args=args):
                with self.assertRaisesRegex(InvalidInputError, message):
                    RegParams(*args)


class LogLossTestCase(unittest.TestCase):
    def test_softplus(self):
        self.assertAlmostEqual(softplus(0.0), math.log(2))
        self.assertEqual(softplus(1000.0), 1000.0)
        self.assertEqual(softplus(-1000.0), 0.0)

    def test_log_loss(self):
        self.assertAlmostEqual(log_loss([0.5, 0.5], 0), math.log(2))
        self.assertEqual(log_loss([1.0, 0.0], 0), 0.0)
        self.assertEqual(log_loss([1.0, 0.0], 1), math.inf)

    def test_bad_label(self):
        with self.assertRaisesRegex(InvalidInputError, "not a class index"):
            log_loss([0.5, 0.5], 2)

    def test_entropic(self):
        params = RegParams(0.3, 'entropic')
        self.assertAlmostEqual(entropic_log_loss([0.5, 0.5], 0, params), 1.3 * math.log(2), places=12)
        self.assertEqual(entropic_log_loss([1.0, 0.0], 0, params), 0.0)
        self.assertEqual(entropic_log_loss([0.0, 1.0], 0, params), math.inf)

    def test_kl(self):
        self.assertAlmostEqual(kl_log_loss([0.5, 0.5], 0, RegParams(0.3, 'kl-uniform')), 0.7 * math.log(2),
                               places=12)
        self.assertAlmostEqual(kl_log_loss(ProbVector.uniform(4), 3, RegParams(1.0, 'kl-uniform')), 0.0,
                               places=12)

    def test_kl_identity(self):
        p = np.array([0.2, 0.3, 0.5])
        expected = 0.6 * -math.log(0.5) + 0.4 * (-math.log(3) - np.mean(np.log(p)))
        self.assertAlmostEqual(kl_log_loss(p, 2, RegParams(0.4, 'kl-uniform')), expected, places=12)

    def test_zero_alpha_is_log_loss(self):
        rng = np.random.default_rng(3)
        for p, y in zip(rng.dirichlet(np.ones(4), size=200), rng.integers(4, size=200)):
            plain = log_loss(p, y)
            self.assertEqual(entropic_log_loss(p, y, RegParams(0.0, 'entropic')), plain)
            self.assertEqual(kl_log_loss(p, y, RegParams(0.0, 'kl-uniform')), plain)

    def test_dispatch(self):
        p = [0.2, 0.8]
        self.assertEqual(regularised_log_loss(p, 1, RegParams(0.5, 'entropic')),
                         entropic_log_loss(p, 1, RegParams(0.5, 'entropic')))
        self.assertEqual(regularised_log_loss(p, 1, RegParams(0.5, 'kl-uniform')),
                         kl_log_loss(p, 1, RegParams(0.5, 'kl-uniform')))
        self.assertEqual(regularised_log_loss(p, 1, RegParams(0.5, 'none')), log_loss(p, 1))


class LogisticLossTestCase(unittest.TestCase):
    def setUp(self):
        self.grid = np.linspace(-6.0, 6.0, 50)

    def test_entropic_values(self):
        value, derivative = entropic_logistic_loss(0.0, 1, RegParams(0.0))
        self.assertAlmostEqual(value, math.log(2))
        self.assertAlmostEqual(derivative, -0.5)

        value, _ = entropic_logistic_loss(0.0, 1, RegParams(0.3))
        self.assertAlmostEqual(value, 1.3 * math.log(2), places=12)

    def test_entropic_matches_log_loss(self):
        params = RegParams(0.7)
        for f in self.grid:
            for y in (0, 1):
                with self.subTest(f=f, y=y):
                    p = sigmoid(f).as_prob_vector()
                    self.assertAlmostEqual(entropic_logistic_loss(f, y, params)[0], entropic_log_loss(p, y, params),
                                           places=9)

    def test_kl_values(self):
        for alpha in (0.0, 0.3, 1.0):
            with self.subTest(alpha=alpha):
                value, _ = kl_logistic_loss(0.0, 1, RegParams(alpha, 'kl-uniform'))
                self.assertAlmostEqual(value, (1 - alpha) * math.log(2), places=12)

    def test_kl_symmetry(self):
        params = RegParams(0.3, 'kl-uniform')
        for f in self.grid:
            with self.subTest(f=f):
                self.assertAlmostEqual(kl_logistic_loss(f, 1, params)[0], kl_logistic_loss(-f, 0, params)[0],
                                       places=12)

    def test_kl_matches_log_loss(self):
        params = RegParams(0.3, 'kl-uniform')
        for f in self.grid:
            with self.subTest(f=f):
                p = sigmoid(f).as_prob_vector()
                self.assertAlmostEqual(kl_logistic_loss(f, 1, params)[0], kl_log_loss(p, 1, params), places=9)

    def test_saturation(self):
        for loss, params in ((entropic_logistic_loss, RegParams(0.3)),
                             (kl_logistic_loss, RegParams(0.3, 'kl-uniform'))):
            for f in (-800.0, 800.0):
                with self.subTest(loss=loss.__name__, f=f):
                    value, derivative = loss(f, 1, params)
                    self.assertTrue(math.isfinite(value))
                    self.assertTrue(math.isfinite(derivative))

    def test_derivatives(self):
        step = 1e-6
        for loss, params in ((entropic_logistic_loss, RegParams(0.3)),
                             (kl_logistic_loss, RegParams(0.3, 'kl-uniform'))):
            for y in (0, 1):
                with self.subTest(loss=loss.__name__, y=y):
                    analytic = np.array([loss(f, y, params)[1] for f in self.grid])
                    numeric = np.array([(loss(f + step, y, params)[0] - loss(f - step, y, params)[0]) / (2 * step)
                                        for f in self.grid])
                    self.assertLess(relative_error(analytic, numeric), 1e-5)

    def test_bad_input(self):
        with self.assertRaisesRegex(InvalidInputError, "finite"):
            entropic_logistic_loss(np.inf, 1, RegParams(0.3))
        with self.assertRaisesRegex(InvalidInputError, "0 or 1"):
            kl_logistic_loss(0.0, -1, RegParams(0.3, 'kl-uniform'))


class SoftmaxLossTestCase(unittest.TestCase):
    def test_plain_gradient(self):
        value, grad = softmax_reg_loss_grad([0.0, 0.0], 0, RegParams(0.0))
        self.assertAlmostEqual(value, math.log(2))
        np.testing.assert_allclose(grad, [-0.5, 0.5])

    def test_temperature(self):
        value, grad = softmax_reg_loss_grad([0.0, 0.0], 0, RegParams(0.0), temperature=2.0)
        self.assertAlmostEqual(value, math.log(2))
        np.testing.assert_allclose(grad, [-1.0, 1.0])

    def test_values_match_log_losses(self):
        scores = np.array([0.5, -1.0, 2.0])
        p = np.exp(scores) / np.sum(np.exp(scores))
        for params in (RegParams(0.4, 'entropic'), RegParams(0.4, 'kl-uniform')):
            with self.subTest(kind=params.kind):
                value, _ = softmax_reg_loss_grad(scores, 1, params)
                self.assertAlmostEqual(value, regularised_log_loss(p, 1, params), places=12)

    def test_kl_stationary_at_uniform(self):
        _, grad = softmax_reg_loss_grad([1.5, 1.5, 1.5], 2, RegParams(1.0, 'kl-uniform'))
        np.testing.assert_allclose(grad, 0.0, atol=1e-15)

    def test_gradients(self):
        rng = np.random.default_rng(11)
        for params in (RegParams(0.0, 'none'), RegParams(0.5, 'entropic'), RegParams(0.3, 'kl-uniform')):
            for _ in range(20):
                scores = rng.normal(size=5)
                y = int(rng.integers(5))
                with self.subTest(kind=params.kind, scores=scores, y=y):
                    _, analytic = softmax_reg_loss_grad(scores, y, params, 1.5)
                    numeric = numerical_gradient(lambda s: softmax_reg_loss_grad(s, y, params, 1.5)[0], scores)
                    self.assertLess(relative_error(analytic, numeric), 1e-5)

    def test_batch_is_mean(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=(4, 3))
        labels = np.array([0, 2, 1, 1])
        params = RegParams(0.2, 'entropic')
        value, grad = softmax_reg_loss_grad_batch(scores, labels, params)
        singles = [softmax_reg_loss_grad(row, y, params) for row, y in zip(scores, labels)]
        self.assertAlmostEqual(value, np.mean([single[0] for single in singles]), places=12)
        np.testing.assert_allclose(grad, np.array([single[1] for single in singles]) / 4, atol=1e-15)

    def test_bad_input(self):
        with self.assertRaisesRegex(InvalidInputError, "not a class index"):
            softmax_reg_loss_grad([0.0, 0.0], 2, RegParams(0.0))
        with self.assertRaisesRegex(InvalidInputError, "Temperature"):
            softmax_reg_loss_grad([0.0, 0.0], 0, RegParams(0.0), temperature=0.0)


class MinimizerTestCase(unittest.TestCase):
    def test_unregularised(self):
        self.assertAlmostEqual(regularised_minimizer(0.7, RegParams(0.0)), 0.7, places=3)

    def test_entropy_raises_confidence(self):
        minimizers = [regularised_minimizer(0.7, RegParams(alpha)) for alpha in (0.0, 0.2, 0.4, 0.8)]
        self.assertTrue(all(low <= high for low, high in zip(minimizers, minimizers[1:])), minimizers)
        self.assertGreater(minimizers[-1], minimizers[0])

    def test_bad_eta(self):
        with self.assertRaisesRegex(InvalidInputError, r"Eta must be in \(0, 1\)"):
            regularised_minimizer(1.0, RegParams(0.0))


if __name__ == '__main__':
    unittest.main()
