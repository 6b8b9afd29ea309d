"""
Log-losses with an entropy or KL-to-uniform regulariser. Adding α·H(p) rewards confident predictions, mixing in
α·KL(U || p) keeps that pressure while penalising degenerate predictions. Both reduce to the plain log-loss at α = 0.

The logistic forms work on a real score f and use softplus(x) = log(1 + e^x) throughout so that they stay finite
and differentiable in the saturated regions.
"""
import numpy as np
from scipy.special import expit

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError
from churnkit.probability import ProbVector, ScoreVector, as_array, entropy, kl_from_uniform, log_softmax_array

from typing import Tuple

REGULARISER_KINDS = ('entropic', 'kl-uniform', 'none')


def softplus(x):
    """
    log(1 + e^x) without overflow.

    :param x: One or more reals
    :return: The softplus values
    """
    return np.logaddexp(0.0, x)


class RegParams(Element):
    """
    The kind and strength of the regulariser.
    """

    def __init__(self, alpha: float = 0.0, kind: str = 'entropic'):
        self.alpha = float(alpha)
        self.kind = kind
        self.validate()

    def validate(self):
        """
        Alpha is a nonnegative weight, and a mixing weight in [0, 1] for the KL regulariser
        """
        if self.kind not in REGULARISER_KINDS:
            raise InvalidInputError("Regulariser kind must be one of {}".format(', '.join(REGULARISER_KINDS)))
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise InvalidInputError("Alpha must be nonnegative")
        if self.kind == 'kl-uniform' and self.alpha > 1:
            raise InvalidInputError("Alpha of the KL regulariser is a mixing weight in [0, 1]")


def _label_log_prob(p: ProbVector, y: int) -> float:
    if not 0 <= y < len(p):
        raise InvalidInputError("Label {} is not a class index of a {}-class distribution".format(y, len(p)))

    with np.errstate(divide='ignore'):
        return float(np.log(p.values[y]))


def log_loss(p, y: int) -> float:
    """
    The plain log-loss -log p_y, +inf when p_y = 0.

    :param p: The predicted distribution
    :param y: The true class
    :return: The loss
    """
    if not isinstance(p, ProbVector):
        p = ProbVector(p)
    return -_label_log_prob(p, y)


def entropic_log_loss(p, y: int, params: RegParams) -> float:
    """
    -log p_y + α·H(p)

    :param p: The predicted distribution
    :param y: The true class
    :param params: The regulariser strength
    :return: The loss, +inf when p_y = 0
    """
    if not isinstance(p, ProbVector):
        p = ProbVector(p)
    return log_loss(p, y) + params.alpha * entropy(p)


def kl_log_loss(p, y: int, params: RegParams) -> float:
    """
    (1 - α)·(-log p_y) + α·KL(U || p)

    :param p: The predicted distribution
    :param y: The true class
    :param params: The mixing weight
    :return: The loss, +inf when p lacks full support
    """
    if not isinstance(p, ProbVector):
        p = ProbVector(p)

    base = log_loss(p, y)
    if params.alpha == 0:
        return base

    regulariser = kl_from_uniform(p)
    if params.alpha == 1:
        return regulariser
    return (1.0 - params.alpha) * base + params.alpha * regulariser


def regularised_log_loss(p, y: int, params: RegParams) -> float:
    """
    The log-loss with the regulariser named by ``params.kind``.

    :param p: The predicted distribution
    :param y: The true class
    :param params: The regulariser
    :return: The loss
    """
    if params.kind == 'entropic':
        return entropic_log_loss(p, y, params)
    if params.kind == 'kl-uniform':
        return kl_log_loss(p, y, params)
    return log_loss(p, y)


def _check_binary(f: float, y: int):
    if not np.isfinite(f):
        raise InvalidInputError("Score must be finite")
    if y not in (0, 1):
        raise InvalidInputError("Binary labels must be 0 or 1")


def entropic_logistic_loss(f: float, y: int, params: RegParams) -> Tuple[float, float]:
    """
    -log σ(±f) + α·H_bin(σ(f)), with the sign following the label, and its derivative to f.

    :param f: The real score
    :param y: The true label, 0 or 1
    :param params: The regulariser strength
    :return: The loss and d loss / df
    """
    _check_binary(f, y)
    sign = 1.0 if y == 1 else -1.0

    positive = expit(f)
    negative = expit(-f)

    # H_bin(σ(f)) = σ(f)·softplus(-f) + σ(-f)·softplus(f), with dH/df = -f·σ(f)·σ(-f)
    value = softplus(-sign * f) + params.alpha * (positive * softplus(-f) + negative * softplus(f))
    derivative = -sign * expit(-sign * f) - params.alpha * f * positive * negative
    return float(value), float(derivative)


def kl_logistic_loss(f: float, y: int, params: RegParams) -> Tuple[float, float]:
    """
    (1 - α)·(-log σ(±f)) + α·KL(U || σ(f)), with the sign following the label, and its derivative to f.

    :param f: The real score
    :param y: The true label, 0 or 1
    :param params: The mixing weight
    :return: The loss and d loss / df
    """
    _check_binary(f, y)
    sign = 1.0 if y == 1 else -1.0

    # KL(U || σ(f)) = ½·(softplus(f) + softplus(-f)) - log 2, with derivative σ(f) - ½
    regulariser = 0.5 * (softplus(f) + softplus(-f)) - np.log(2.0)
    value = (1.0 - params.alpha) * softplus(-sign * f) + params.alpha * regulariser
    derivative = -(1.0 - params.alpha) * sign * expit(-sign * f) + params.alpha * (expit(f) - 0.5)
    return float(value), float(derivative)


def softmax_reg_loss_grad_batch(scores: np.ndarray, labels: np.ndarray, params: RegParams,
                                temperature: float = 1.0) -> Tuple[float, np.ndarray]:
    """
    Mean regularised log-loss of softmax(temperature·scores) over a batch, and its gradient to the scores.

    :param scores: An m×K array of scores
    :param labels: The m true classes
    :param params: The regulariser
    :param temperature: Multiplier applied to the scores before the softmax
    :return: The mean loss and the m×K gradient of the mean loss
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    rows, classes = scores.shape
    rows_index = np.arange(rows)

    log_p = log_softmax_array(scores, temperature)
    p = np.exp(log_p)
    one_hot = np.zeros_like(p)
    one_hot[rows_index, labels] = 1.0

    base = -log_p[rows_index, labels]
    base_grad = p - one_hot

    if params.kind == 'entropic' and params.alpha > 0:
        row_entropy = -np.sum(p * log_p, axis=1)
        losses = base + params.alpha * row_entropy
        grad = base_grad - params.alpha * p * (log_p + row_entropy[:, np.newaxis])
    elif params.kind == 'kl-uniform' and params.alpha > 0:
        regulariser = -np.log(classes) - np.mean(log_p, axis=1)
        losses = (1.0 - params.alpha) * base + params.alpha * regulariser
        grad = (1.0 - params.alpha) * base_grad + params.alpha * (p - 1.0 / classes)
    else:
        losses = base
        grad = base_grad

    return float(np.mean(losses)), grad * (temperature / rows)


def softmax_reg_loss_grad(scores, y: int, params: RegParams, temperature: float = 1.0) -> Tuple[float, np.ndarray]:
    """
    Regularised log-loss of softmax(temperature·scores) and its gradient to the scores. At α = 0 the gradient is the
    familiar temperature·(p - onehot(y)).

    :param scores: A ScoreVector or a vector of finite scores
    :param y: The true class
    :param params: The regulariser
    :param temperature: Multiplier applied to the scores before the softmax
    :return: The loss and the gradient
    """
    if not isinstance(scores, ScoreVector):
        scores = ScoreVector(scores)
    if not 0 <= y < len(scores):
        raise InvalidInputError("Label {} is not a class index".format(y))
    if not np.isfinite(temperature) or temperature <= 0:
        raise InvalidInputError("Temperature must be positive and finite")

    value, grad = softmax_reg_loss_grad_batch(as_array(scores)[np.newaxis, :], np.array([y]), params, temperature)
    return value, grad[0]


def regularised_minimizer(eta: float, params: RegParams, points: int = 999) -> float:
    """
    The binary prediction p minimising the expected regularised log-loss when the positive class has probability
    eta, found on the grid 1/(points + 1), ..., points/(points + 1). Raising α moves the minimiser toward the nearest
    confident prediction.

    :param eta: The probability of the positive class
    :param params: The regulariser
    :param points: The number of grid points
    :return: The minimising probability of the positive class
    """
    if not 0 < eta < 1:
        raise InvalidInputError("Eta must be in (0, 1)")

    grid = np.arange(1, points + 1) / (points + 1)
    expected = []
    for p in grid:
        prediction = ProbVector([1.0 - p, p])
        expected.append(eta * regularised_log_loss(prediction, 1, params)
                        + (1.0 - eta) * regularised_log_loss(prediction, 0, params))

    return float(grid[int(np.argmin(expected))])
