"""
Test the distances between distributions
"""
import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from churnkit.divergence import collision, hellinger, hellinger_sq, l1, lp_dist, lp_dist_max, lp_dist_normalized, tv
from churnkit.exceptions import InvalidInputError
from churnkit.probability import ProbVector

pairs = st.integers(min_value=2, max_value=6).flatmap(
    lambda size: st.tuples(*[st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=size, max_size=size)
                             .filter(lambda values: sum(values) > 0.01)] * 2))

triples = st.integers(min_value=2, max_value=6).flatmap(
    lambda size: st.tuples(*[st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=size, max_size=size)
                             .filter(lambda values: sum(values) > 0.01)] * 3))


def normalised(values):
    values = np.array(values)
    return values / values.sum()


class DivergenceTestCase(unittest.TestCase):
    def setUp(self):
        self.p = ProbVector([0.9, 0.1])
        self.u = ProbVector.uniform(2)

    def test_known_values(self):
        self.assertAlmostEqual(tv(self.p, self.u), 0.4)
        self.assertAlmostEqual(l1(self.p, self.u), 0.8)
        self.assertAlmostEqual(hellinger_sq(self.p, self.u), 0.10557280900008414, places=12)
        self.assertAlmostEqual(hellinger(self.p, self.u) ** 2, 0.10557280900008414, places=12)
        self.assertAlmostEqual(collision(self.p, self.u), 0.5)

    def test_disjoint(self):
        p, q = [1.0, 0.0], [0.0, 1.0]
        self.assertEqual(tv(p, q), 1.0)
        self.assertEqual(l1(p, q), 2.0)
        self.assertEqual(hellinger_sq(p, q), 1.0)
        self.assertEqual(collision(p, q), 0.0)
        for exponent in (0.5, 1.0, 2.0, 4.0):
            with self.subTest(exponent=exponent):
                self.assertAlmostEqual(lp_dist_normalized(p, q, exponent), 1.0)

    def test_identical(self):
        for function in (tv, l1, hellinger_sq, hellinger):
            with self.subTest(function=function.__name__):
                self.assertAlmostEqual(function(self.p, self.p), 0.0)

    def test_lp_dist(self):
        p, q = [0.5, 0.5, 0.0], [0.25, 0.25, 0.5]
        self.assertAlmostEqual(lp_dist(p, q, 1.0), 1.0)
        self.assertAlmostEqual(lp_dist(p, q, 2.0), math.sqrt(0.375))
        # Below one the outer power is left out
        self.assertAlmostEqual(lp_dist(p, q, 0.5), 2 * math.sqrt(0.25) + math.sqrt(0.5))

    def test_lp_dist_max(self):
        self.assertEqual(lp_dist_max(1.0), 2.0)
        self.assertAlmostEqual(lp_dist_max(4.0), 2 ** 0.25)
        self.assertAlmostEqual(lp_dist_max(0.5), 2.0)
        self.assertAlmostEqual(lp_dist_max(0.5, classes=4), 2 * math.sqrt(2))
        self.assertAlmostEqual(lp_dist_max(2.0, classes=10), math.sqrt(2))
        with self.assertRaisesRegex(InvalidInputError, "at least two classes"):
            lp_dist_max(0.5, classes=1)

    def test_normalized_even_split(self):
        # Two disjoint halves spread the deviations evenly, which is the worst case below one
        p, q = [0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]
        self.assertAlmostEqual(lp_dist_normalized(p, q, 0.5), 1.0)
        self.assertAlmostEqual(lp_dist_normalized([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], 0.5),
                               1 / math.sqrt(2))

    def test_normalized_odd_classes(self):
        # With an odd number of classes the divisor is not reached
        normalized = lp_dist_normalized([1.0, 0.0, 0.0], [0.0, 0.5, 0.5], 0.5)
        self.assertAlmostEqual(normalized, (1 + 2 * math.sqrt(0.5)) / math.sqrt(6))
        self.assertLess(normalized, 1.0)

    def test_bad_exponent(self):
        for exponent in (0.0, -1.0, np.inf, np.nan):
            with self.subTest(exponent=exponent):
                with self.assertRaisesRegex(InvalidInputError, "Exponent must be positive"):
                    lp_dist(self.p, self.u, exponent)

    def test_dimension_mismatch(self):
        with self.assertRaisesRegex(InvalidInputError, "Dimension mismatch"):
            tv([0.5, 0.5], [0.2, 0.3, 0.5])

    def test_batch(self):
        p = np.array([[1.0, 0.0], [0.5, 0.5]])
        q = np.array([[0.0, 1.0], [0.5, 0.5]])
        np.testing.assert_allclose(tv(p, q), [1.0, 0.0])
        np.testing.assert_allclose(collision(p, q), [0.0, 0.5])

    @settings(max_examples=300, deadline=None)
    @given(pairs)
    def test_inequalities(self, pair):
        p, q = normalised(pair[0]), normalised(pair[1])
        distance = tv(p, q)
        squared = hellinger_sq(p, q)

        self.assertAlmostEqual(tv(p, q), tv(q, p), places=12)
        self.assertAlmostEqual(l1(p, q), 2 * distance, places=12)
        self.assertLessEqual(squared, distance + 1e-12)
        self.assertLessEqual(0.5 * distance ** 2, squared + 1e-12)
        self.assertLessEqual(squared, 1.0 - collision(p, q) + 1e-12)
        for exponent in (0.5, 1.0, 2.0, 4.0):
            normalized = lp_dist_normalized(p, q, exponent)
            self.assertGreaterEqual(normalized, 0.0)
            self.assertLessEqual(normalized, 1.0 + 1e-12)

    @settings(max_examples=300, deadline=None)
    @given(triples)
    def test_triangle_inequality(self, triple):
        p, q, r = (normalised(values) for values in triple)
        self.assertLessEqual(tv(p, r), tv(p, q) + tv(q, r) + 1e-12)
        for exponent in (1.0, 1.5, 2.0, 4.0):
            self.assertLessEqual(lp_dist(p, r, exponent), lp_dist(p, q, exponent) + lp_dist(q, r, exponent) + 1e-12,
                                 "r = {}".format(exponent))

    @settings(max_examples=300, deadline=None)
    @given(pairs)
    def test_l1_is_lp_dist_of_one(self, pair):
        p, q = normalised(pair[0]), normalised(pair[1])
        self.assertAlmostEqual(lp_dist(p, q, 1.0), l1(p, q), places=12)


if __name__ == '__main__':
    unittest.main()
