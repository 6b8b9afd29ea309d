"""
Probability vectors, score vectors and the information-theoretic quantities defined on them. All logarithms are
natural logarithms, so entropies are in nats.

Every quantity accepts either a :class:`ProbVector` or a plain array. Arrays with more than one dimension are treated
as a batch of distributions along the last axis, in which case an array of results is returned.
"""
import logging

import numpy as np
from scipy.special import expit, logsumexp, rel_entr, xlogy

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

NEGATIVE_CLAMP = 1e-12
"""Entries in [-NEGATIVE_CLAMP, 0) are treated as rounding noise and set to zero"""

RENORMALISE_TOLERANCE = 1e-9
"""Sums that deviate at most this much from 1 are renormalised, larger deviations are rejected"""


def clean_simplex(values, what: str = 'Probability vector') -> np.ndarray:
    """
    Validate and clean one or more probability vectors along the last axis.

    :param values: Array-like with the probabilities
    :param what: Description of the input for error messages
    :return: A new float array with tiny negative entries clamped and rows renormalised
    """
    array = np.array(values, dtype=float)
    if array.ndim == 0 or array.shape[-1] < 1:
        raise InvalidInputError("{} must have at least one entry".format(what))

    if not np.all(np.isfinite(array)):
        raise InvalidInputError("{} contains non-finite entries".format(what))

    if np.any(array < -NEGATIVE_CLAMP):
        raise InvalidInputError("{} contains negative entries".format(what))
    array[array < 0] = 0.0

    sums = array.sum(axis=-1, keepdims=True)
    if np.any(np.abs(sums - 1) > RENORMALISE_TOLERANCE):
        raise InvalidInputError("{} must sum to 1".format(what))

    return array / sums


def as_array(p) -> np.ndarray:
    """
    Unwrap a :class:`ProbVector` or :class:`ScoreVector`, or convert an array-like to a float array.

    :param p: The input
    :return: A float array
    """
    if isinstance(p, (ProbVector, ScoreVector)):
        return p.values

    array = np.asarray(p, dtype=float)
    if array.ndim == 0:
        raise InvalidInputError("Expected a vector, got a scalar")
    return array


def as_pair(p, q) -> tuple:
    """
    Unwrap two distributions and check that their dimensions match.

    :param p: The first distribution (or batch)
    :param q: The second distribution (or batch)
    :return: Both as float arrays
    """
    p = as_array(p)
    q = as_array(q)
    if p.shape != q.shape:
        raise InvalidInputError("Dimension mismatch: {} vs {}".format(p.shape, q.shape))
    return p, q


def scalar_or_array(result):
    """
    Return plain floats for single distributions and arrays for batches.
    """
    if np.ndim(result) == 0:
        return float(result)
    return result


class ProbVector(Element):
    """
    A categorical distribution over K classes. The values are stored in a read-only numpy array.
    """

    def __init__(self, values):
        self.values = clean_simplex(values)
        self.values.flags.writeable = False
        self.validate()

    def validate(self):
        """
        A probability vector is one-dimensional and has at least two classes
        """
        if self.values.ndim != 1:
            raise InvalidInputError("ProbVector must be one-dimensional")
        if len(self.values) < 2:
            raise InvalidInputError("ProbVector needs at least two classes")

    def __repr__(self):
        return 'ProbVector({})'.format(self.values.tolist())

    def __len__(self):
        return len(self.values)

    def __getitem__(self, item):
        return float(self.values[item])

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)

    @property
    def classes(self) -> int:
        """
        The number of classes K
        """
        return len(self.values)

    @classmethod
    def uniform(cls, classes: int) -> 'ProbVector':
        """
        The uniform distribution over the given number of classes.

        :param classes: The number of classes K
        :return: The uniform distribution
        """
        if classes < 2:
            raise InvalidInputError("Need at least two classes")
        return cls(np.full(classes, 1.0 / classes))


class ScoreVector(Element):
    """
    Unnormalised real scores (logits) for K classes.
    """

    def __init__(self, values):
        self.values = np.array(values, dtype=float)
        self.values.flags.writeable = False
        self.validate()

    def validate(self):
        """
        Scores must be finite and there must be at least one of them
        """
        if self.values.ndim != 1 or len(self.values) < 1:
            raise InvalidInputError("ScoreVector must be a non-empty vector")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("ScoreVector contains non-finite entries")

    def __repr__(self):
        return 'ScoreVector({})'.format(self.values.tolist())

    def __len__(self):
        return len(self.values)


class BinaryProb(Element):
    """
    The probability of the positive class in a binary problem.
    """

    def __init__(self, p: float):
        self.p = float(p)
        self.validate()

    def validate(self):
        """
        The probability must be in [0, 1]
        """
        if not 0.0 <= self.p <= 1.0:
            raise InvalidInputError("BinaryProb must be in [0, 1], got {}".format(self.p))

    def __float__(self):
        return self.p

    def as_prob_vector(self) -> ProbVector:
        """
        The equivalent two-class distribution, negative class first.

        :return: The distribution (1 - p, p)
        """
        return ProbVector([1.0 - self.p, self.p])


def softmax_array(scores, temperature: float = 1.0) -> np.ndarray:
    """
    Numerically stable softmax along the last axis of an array of scores.

    :param scores: The scores, one or more rows
    :param temperature: Multiplier applied to the scores
    :return: The probabilities
    """
    z = temperature * as_array(scores)
    return np.exp(z - logsumexp(z, axis=-1, keepdims=True))


def log_softmax_array(scores, temperature: float = 1.0) -> np.ndarray:
    """
    Numerically stable log-softmax along the last axis of an array of scores.

    :param scores: The scores, one or more rows
    :param temperature: Multiplier applied to the scores
    :return: The log-probabilities, always finite for finite scores
    """
    z = temperature * as_array(scores)
    return z - logsumexp(z, axis=-1, keepdims=True)


def softmax(scores, temperature: float = 1.0) -> ProbVector:
    """
    Convert scores to a probability vector with p_k proportional to exp(temperature * s_k).

    :param scores: A ScoreVector or a one-dimensional array of finite scores
    :param temperature: Multiplier applied to the scores, must be positive
    :return: The probability vector
    """
    if not np.isfinite(temperature) or temperature <= 0:
        raise InvalidInputError("Temperature must be positive and finite")

    if not isinstance(scores, ScoreVector):
        scores = ScoreVector(scores)

    return ProbVector(softmax_array(scores.values, temperature))


def sigmoid(score: float) -> BinaryProb:
    """
    The logistic function 1 / (1 + exp(-f)), evaluated without overflow.

    :param score: The real score f
    :return: The probability of the positive class
    """
    if not np.isfinite(score):
        raise InvalidInputError("Score must be finite")
    return BinaryProb(expit(score))


def entropy(p):
    """
    Shannon entropy H(p) = -sum p_k log p_k, with 0 log 0 = 0.

    :param p: A distribution or a batch of distributions
    :return: The entropy in nats
    """
    p = as_array(p)
    return scalar_or_array(-np.sum(xlogy(p, p), axis=-1))


def binary_entropy(p):
    """
    Entropy of the Bernoulli distribution (1 - p, p).

    :param p: The probability of the positive class, a BinaryProb, float or array of floats
    :return: The entropy in nats
    """
    p = np.asarray(float(p) if isinstance(p, BinaryProb) else p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise InvalidInputError("Binary probabilities must be in [0, 1]")
    return scalar_or_array(-xlogy(p, p) - xlogy(1 - p, 1 - p))


def cross_entropy(p, q):
    """
    Cross entropy H(p, q) = -sum p_k log q_k. This is +inf when q_k = 0 for some k with p_k > 0.

    :param p: The reference distribution
    :param q: The model distribution
    :return: The cross entropy in nats
    """
    p, q = as_pair(p, q)
    return scalar_or_array(-np.sum(xlogy(p, q), axis=-1))


def kl(p, q):
    """
    Kullback-Leibler divergence KL(p || q) = sum p_k log(p_k / q_k). This is +inf when q_k = 0 for some k with
    p_k > 0, and exactly zero when p equals q.

    :param p: The reference distribution
    :param q: The model distribution
    :return: The divergence in nats
    """
    p, q = as_pair(p, q)
    return scalar_or_array(np.sum(rel_entr(p, q), axis=-1))


def kl_from_uniform(p):
    """
    KL(U || p) where U is the uniform distribution over the classes of p. This equals
    -log K - (1/K) sum log p_k.

    :param p: A distribution or a batch of distributions
    :return: The divergence in nats
    """
    p = as_array(p)
    uniform = np.full_like(p, 1.0 / p.shape[-1])
    return kl(uniform, p)
