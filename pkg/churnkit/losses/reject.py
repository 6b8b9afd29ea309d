"""
Binary classification with a reject option. A scorer abstains when its margin y·f(x) lies within δ of zero and pays
a cost d < ½ for that, a confident mistake costs 1.

The convex surrogate φ_d has slope a = (1 - d)/d on the negative side. The smooth surrogate replaces both kinks by
softplus terms of sharpness α and converges to φ_d from above as α grows.
"""
import logging

import numpy as np
from scipy.special import expit

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError, SingularLinkError
from churnkit.grid import GridSpec
from churnkit.losses.regularised import softplus
from churnkit.probability import BinaryProb, scalar_or_array

from typing import Optional, Tuple

logger = logging.getLogger(__name__)

SINGULAR_TOLERANCE = 1e-12

DEFAULT_SEARCH = GridSpec(-3.0, 3.0, 601)

REFINE_WIDTH = 1e-6


class RejectParams(Element):
    """
    Rejection cost d, rejection half-width δ, surrogate sharpness α and surrogate slope a. The slope defaults to
    (1 - d)/d.
    """

    def __init__(self, d: float, delta: float = 0.0, alpha: float = 1.0, a: Optional[float] = None):
        self.d = float(d)
        self.delta = float(delta)
        self.alpha = float(alpha)
        self.a = a
        self.validate()

        if self.a is None:
            self.a = (1.0 - self.d) / self.d

    def validate(self):
        """
        0 < d < ½, δ ≥ 0, α ≥ 1 and a > 1
        """
        if not 0 < self.d < 0.5:
            raise InvalidInputError("Rejection cost d must be in (0, 0.5)")
        if not np.isfinite(self.delta) or self.delta < 0:
            raise InvalidInputError("Rejection half-width delta must be nonnegative")
        if not np.isfinite(self.alpha) or self.alpha < 1:
            raise InvalidInputError("Sharpness alpha must be at least 1")
        if self.a is not None:
            self.a = float(self.a)
            if not np.isfinite(self.a) or self.a <= 1:
                raise InvalidInputError("Surrogate slope a must be larger than 1")


def _check_scores(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("Scores must be finite")
    return z


def reject_loss(z, params: RejectParams):
    """
    1 for a margin below -δ, d for a margin within [-δ, δ] and 0 otherwise.

    :param z: One or more margins y·f(x)
    :param params: The reject parameters
    :return: The losses
    """
    z = _check_scores(z)
    return scalar_or_array(np.where(z < -params.delta, 1.0, np.where(z <= params.delta, params.d, 0.0)))


def bayes_reject(eta, params: RejectParams) -> int:
    """
    The Bayes-optimal decision: +1 if η > 1 - d, -1 if η < d and 0 (reject) in between.

    :param eta: The probability of the positive class
    :param params: The reject parameters
    :return: -1, 0 or +1
    """
    eta = float(eta if isinstance(eta, BinaryProb) else BinaryProb(eta))
    if eta > 1.0 - params.d:
        return 1
    if eta < params.d:
        return -1
    return 0


def convex_surrogate(z, params: RejectParams):
    """
    φ_d(z): 1 - a·z for z < 0, 1 - z for 0 ≤ z < 1 and 0 for z ≥ 1.

    :param z: One or more margins
    :param params: The reject parameters
    :return: The surrogate losses
    """
    z = _check_scores(z)
    return scalar_or_array((params.a - 1.0) * np.maximum(-z, 0.0) + np.maximum(1.0 - z, 0.0))


def smooth_surrogate(z, params: RejectParams) -> Tuple:
    """
    φ̄_{d,α}(z) = (1/α)·[(a - 1)·softplus(α·z) + softplus(α - α·z)] - (a - 1)·z and its derivative.

    It is evaluated as φ_d(z) + (1/α)·[(a - 1)·softplus(-α·|z|) + softplus(-α·|1 - z|)], the same function without
    the cancellation between large terms.

    :param z: One or more margins
    :param params: The reject parameters
    :return: The surrogate losses and their derivatives to z
    """
    z = _check_scores(z)
    alpha = params.alpha
    excess = ((params.a - 1.0) * softplus(-alpha * np.abs(z)) + softplus(-alpha * np.abs(1.0 - z))) / alpha
    value = convex_surrogate(z, params) + excess
    derivative = (params.a - 1.0) * expit(alpha * z) - expit(alpha * (1.0 - z)) - (params.a - 1.0)
    return scalar_or_array(value), scalar_or_array(derivative)


def link(v, params: RejectParams):
    """
    The link that turns a score into a probability estimate:

    F̄(v) = ((1 - a)·σ(α·v) - σ(α·v + α)) / ((1 - a) - σ(α·v + α) - σ(α - α·v))

    It is increasing, maps 0 to ½ and inverts :func:`bayes_optimal_score`.

    :param v: One or more scores
    :param params: The reject parameters
    :return: The probability estimates
    """
    v = _check_scores(v)
    alpha = params.alpha
    numerator = (1.0 - params.a) * expit(alpha * v) - expit(alpha * v + alpha)
    denominator = (1.0 - params.a) - expit(alpha * v + alpha) - expit(alpha - alpha * v)

    if np.any(np.abs(denominator) < SINGULAR_TOLERANCE):
        raise SingularLinkError("Link denominator vanishes")

    return scalar_or_array(numerator / denominator)


def _expected_surrogate(z: float, eta: float, params: RejectParams) -> float:
    positive, _ = smooth_surrogate(z, params)
    negative, _ = smooth_surrogate(-z, params)
    value = eta * positive + (1.0 - eta) * negative
    if not np.isfinite(value):
        raise InvalidInputError("Expected surrogate is not finite at z={}".format(z))
    return value


def bayes_optimal_score(eta, params: RejectParams, search: GridSpec = DEFAULT_SEARCH) -> float:
    """
    The score z minimising η·φ̄(z) + (1 - η)·φ̄(-z): a grid search refined by ternary search to a bracket narrower
    than 1e-6.

    :param eta: The probability of the positive class, in (0, 1)
    :param params: The reject parameters
    :param search: The grid to search first
    :return: The optimal score
    """
    eta = float(eta if isinstance(eta, BinaryProb) else BinaryProb(eta))
    if not 0 < eta < 1:
        raise InvalidInputError("Eta must be in (0, 1)")

    grid = search.values()
    objective = np.array([_expected_surrogate(z, eta, params) for z in grid])
    best = int(np.argmin(objective))

    low = grid[max(best - 1, 0)]
    high = grid[min(best + 1, len(grid) - 1)]
    while high - low > REFINE_WIDTH:
        left = low + (high - low) / 3.0
        right = high - (high - low) / 3.0
        if _expected_surrogate(left, eta, params) <= _expected_surrogate(right, eta, params):
            high = right
        else:
            low = left

    return (low + high) / 2.0


def inverse_link_consistency(eta, params: RejectParams, search: GridSpec = DEFAULT_SEARCH) -> float:
    """
    How far the link maps the Bayes-optimal score away from the probability it was computed for.

    :param eta: The probability of the positive class
    :param params: The reject parameters
    :param search: The grid to search first
    :return: The absolute difference between link(z*) and η
    """
    score = bayes_optimal_score(eta, params, search)
    return abs(link(score, params) - float(eta))


def reject_risk(scores, labels, params: RejectParams) -> float:
    """
    Empirical risk P(y·f(x) < -δ) + d·P(|y·f(x)| ≤ δ).

    :param scores: The scores f(x) of the sample
    :param labels: The labels, -1 or +1
    :param params: The reject parameters
    :return: The risk
    """
    scores = _check_scores(scores)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.size < 1:
        raise InvalidInputError("Need a non-empty sample")
    if labels.shape != scores.shape:
        raise InvalidInputError("Need one label per score")
    if not np.all(np.isin(labels, (-1, 1))):
        raise InvalidInputError("Labels must be -1 or +1")

    margins = labels * scores
    return float(np.mean(margins < -params.delta) + params.d * np.mean(np.abs(margins) <= params.delta))
