"""
Distances between prediction distributions. Like the functions in :mod:`churnkit.probability` these accept single
distributions or batches along the last axis.

Total variation uses the convention D_TV = ½·Σ|p - q|, the plain L1 distance is available as :func:`l1`.
"""
import numpy as np

from churnkit.exceptions import InvalidInputError
from churnkit.probability import as_pair, scalar_or_array


def tv(p, q):
    """
    Total variation distance ½·Σ|p_j - q_j|.

    :param p: The first distribution
    :param q: The second distribution
    :return: A real in [0, 1]
    """
    p, q = as_pair(p, q)
    return scalar_or_array(0.5 * np.sum(np.abs(p - q), axis=-1))


def l1(p, q):
    """
    L1 distance Σ|p_j - q_j|, which is twice the total variation distance.

    :param p: The first distribution
    :param q: The second distribution
    :return: A real in [0, 2]
    """
    p, q = as_pair(p, q)
    return scalar_or_array(np.sum(np.abs(p - q), axis=-1))


def hellinger_sq(p, q):
    """
    Squared Hellinger distance 1 - Σ√(p_j·q_j), clipped to [0, 1] to absorb rounding.

    :param p: The first distribution
    :param q: The second distribution
    :return: A real in [0, 1]
    """
    p, q = as_pair(p, q)
    return scalar_or_array(np.clip(1.0 - np.sum(np.sqrt(p * q), axis=-1), 0.0, 1.0))


def hellinger(p, q):
    """
    Hellinger distance (1/√2)·‖√p - √q‖₂.

    :param p: The first distribution
    :param q: The second distribution
    :return: A real in [0, 1]
    """
    p, q = as_pair(p, q)
    return scalar_or_array(np.sqrt(0.5 * np.sum((np.sqrt(p) - np.sqrt(q)) ** 2, axis=-1)))


def collision(p, q):
    """
    Collision probability Σ p_j·q_j: the chance that independent draws from p and q coincide.

    :param p: The first distribution
    :param q: The second distribution
    :return: A real in [0, 1]
    """
    p, q = as_pair(p, q)
    return scalar_or_array(np.sum(p * q, axis=-1))


def _check_exponent(exponent: float):
    if not np.isfinite(exponent) or exponent <= 0:
        raise InvalidInputError("Exponent must be positive and finite, got {}".format(exponent))


def lp_dist(p, q, exponent: float):
    """
    The Lr distance (Σ|p_j - q_j|^r)^(1/r) for r ≥ 1. For 0 < r < 1 the sum of powered deviations Σ|p_j - q_j|^r is
    returned without the outer power, it is not a norm in that range.

    :param p: The first distribution
    :param q: The second distribution
    :param exponent: The exponent r
    :return: A nonnegative real
    """
    _check_exponent(exponent)
    p, q = as_pair(p, q)

    powered = np.sum(np.abs(p - q) ** exponent, axis=-1)
    if exponent >= 1:
        return scalar_or_array(powered ** (1.0 / exponent))
    return scalar_or_array(powered)


def lp_dist_max(exponent: float, classes: int = 2) -> float:
    """
    The largest value :func:`lp_dist` takes on pairs of distributions over the given number of classes. For r ≥ 1 it
    is reached at two disjoint one-hot vectors. For r < 1 spreading the deviations evenly gives more, so the bound
    2^r·K^(1-r) is used, which is reached when K is even and equals 2 for two classes.

    :param exponent: The exponent r
    :param classes: The number of classes K
    :return: The maximum
    """
    _check_exponent(exponent)
    if classes < 2:
        raise InvalidInputError("Need at least two classes")
    if exponent >= 1:
        return 2.0 ** (1.0 / exponent)
    return 2.0 ** exponent * classes ** (1.0 - exponent)


def lp_dist_normalized(p, q, exponent: float):
    """
    :func:`lp_dist` scaled to [0, 1] by :func:`lp_dist_max`. For r ≥ 1 the divisor is 2^(1/r), the distance of two
    disjoint one-hot vectors. For r < 1 it is 2^r·K^(1-r), the value of two distributions that put 2/K on disjoint
    halves of the classes. That divisor is the exact maximum for an even K, for an odd K it is an upper bound and
    normalised values stay below 1.

    :param p: The first distribution
    :param q: The second distribution
    :param exponent: The exponent r
    :return: A real in [0, 1]
    """
    p, q = as_pair(p, q)
    return scalar_or_array(lp_dist(p, q, exponent) / lp_dist_max(exponent, p.shape[-1]))
