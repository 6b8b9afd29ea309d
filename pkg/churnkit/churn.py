"""
Hard churn, soft churn, prediction margins and executable checkers for the churn bounds.

The checkers work on per-sample values and empirical means. Every inequality is compared with a tolerance of
:data:`BOUND_TOLERANCE`, a violation is a slack (right side minus left side) below minus that tolerance. Reductions
run in index order so reports are reproducible.
"""
import logging
from collections import OrderedDict

import numpy as np

from churnkit.divergence import collision, hellinger_sq, l1, tv
from churnkit.element import Element
from churnkit.exceptions import InvalidInputError
from churnkit.probability import ProbVector, as_array, binary_entropy, clean_simplex, cross_entropy, entropy

from typing import Iterable, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-12


def stack_predictions(predictions, what: str = 'Predictions') -> np.ndarray:
    """
    Turn a sequence of ProbVectors, or an array with one distribution per row, into a validated 2D array.

    :param predictions: The predictions
    :param what: Description of the input for error messages
    :return: An n×K array of cleaned distributions
    """
    if isinstance(predictions, np.ndarray):
        array = predictions
    else:
        array = np.array([as_array(p) for p in predictions], dtype=float)

    if array.ndim != 2 or array.shape[0] < 1:
        raise InvalidInputError("{} must be a non-empty table of distributions".format(what))
    if array.shape[1] < 2:
        raise InvalidInputError("{} need at least two classes".format(what))

    return clean_simplex(array, what)


def check_labels(labels, samples: int, classes: int) -> np.ndarray:
    """
    Validate class labels.

    :param labels: One class index per sample
    :param samples: The expected number of labels
    :param classes: The number of classes K
    :return: The labels as an integer array
    """
    labels = np.asarray(labels)
    if labels.shape != (samples,):
        raise InvalidInputError("Expected {} labels, got shape {}".format(samples, labels.shape))
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidInputError("Labels must be integer class indices")
    if np.any((labels < 0) | (labels >= classes)):
        raise InvalidInputError("Labels must be in [0, {})".format(classes))
    return labels.astype(np.int64)


class PredictionMargin(Element):
    """
    The predicted label of a distribution and its confidence: the gap to the best competing class.
    """

    def __init__(self, label: int, margin: float):
        self.label = int(label)
        self.margin = float(margin)
        self.validate()

    def validate(self):
        """
        Labels are class indices, margins can't be negative
        """
        if self.label < 0:
            raise InvalidInputError("Label must be a class index")
        if not 0.0 <= self.margin <= 1.0:
            raise InvalidInputError("Margin must be in [0, 1]")


class PairedPredictions(Element):
    """
    The predictions of two models on the same samples, optionally with the true labels.
    """

    def __init__(self, model1, model2, labels: Optional[Sequence[int]] = None):
        self.model1 = stack_predictions(model1, 'Predictions of model 1')
        self.model2 = stack_predictions(model2, 'Predictions of model 2')
        self.labels = labels
        self.validate()

    def validate(self):
        """
        Both models must have predicted the same number of samples over the same classes
        """
        if self.model1.shape != self.model2.shape:
            raise InvalidInputError("Paired predictions differ in shape: {} vs {}".format(
                self.model1.shape, self.model2.shape))

        if self.labels is not None:
            self.labels = check_labels(self.labels, *self.model1.shape)

    def __len__(self):
        return self.model1.shape[0]

    @property
    def classes(self) -> int:
        """
        The number of classes K
        """
        return self.model1.shape[1]

    def swapped(self) -> 'PairedPredictions':
        """
        The same predictions with the roles of the models exchanged.

        :return: New paired predictions
        """
        return PairedPredictions(self.model2, self.model1, self.labels)

    def require_labels(self) -> np.ndarray:
        """
        The labels, for operations that can't work without them.

        :return: The labels
        """
        if self.labels is None:
            raise InvalidInputError("This operation needs labelled samples")
        return self.labels


class BoundReport(Element):
    """
    The outcome of checking an inequality on a sample.
    """

    def __init__(self, bound: str, samples: int, violations: int, min_slack: float, values: dict = None):
        self.bound = bound
        self.samples = int(samples)
        self.violations = int(violations)
        self.min_slack = float(min_slack)
        self.values = OrderedDict(values or {})

    @property
    def holds(self) -> bool:
        """
        Whether no violations were found
        """
        return self.violations == 0


def _slacks(lhs, rhs) -> np.ndarray:
    # Slack of lhs <= rhs, where inf <= inf holds with zero slack
    with np.errstate(invalid='ignore'):
        slack = np.asarray(rhs, dtype=float) - np.asarray(lhs, dtype=float)
    return np.where(np.isnan(slack), 0.0, slack)


def _finite_mean(values) -> Tuple[Optional[float], int]:
    # Mean over the finite values, None if there are none, and the number of infinite values
    values = np.atleast_1d(np.asarray(values, dtype=float))
    finite = np.isfinite(values)
    mean = float(np.mean(values[finite])) if np.any(finite) else None
    return mean, int(np.count_nonzero(~finite))


def _summarise(bound: str, samples: int, slack_sets: Iterable[np.ndarray], values: dict) -> BoundReport:
    violations = 0
    min_slack = np.inf
    for slacks in slack_sets:
        slacks = np.atleast_1d(slacks)
        if slacks.size == 0:
            continue
        violations += int(np.count_nonzero(slacks < -BOUND_TOLERANCE))
        min_slack = min(min_slack, float(np.min(slacks)))

    if violations:
        logger.warning("Bound {} violated {} times, worst slack {:.3g}".format(bound, violations, min_slack))
    else:
        logger.debug("Bound {} holds on {} samples".format(bound, samples))

    return BoundReport(bound, samples, violations, min_slack, values)


def margins_array(predictions) -> Tuple[np.ndarray, np.ndarray]:
    """
    The predicted labels and margins of a table of distributions.

    :param predictions: An n×K table of distributions
    :return: The lowest-index argmax labels and the gaps to the best competitors
    """
    predictions = as_array(predictions)
    labels = np.argmax(predictions, axis=-1)
    ordered = np.sort(predictions, axis=-1)
    return labels, ordered[..., -1] - ordered[..., -2]


def margin(p) -> PredictionMargin:
    """
    The predicted label (lowest index among ties) and the gap between its probability and the best other one.

    :param p: A distribution
    :return: The prediction margin
    """
    if not isinstance(p, ProbVector):
        p = ProbVector(p)

    label, gap = margins_array(p.values)
    return PredictionMargin(int(label), float(gap))


def hard_churn(pp: PairedPredictions) -> float:
    """
    The fraction of samples on which the predicted labels of the two models differ.

    :param pp: The paired predictions
    :return: A real in [0, 1]
    """
    return float(np.mean(np.argmax(pp.model1, axis=1) != np.argmax(pp.model2, axis=1)))


def soft_churn(pp: PairedPredictions) -> float:
    """
    One minus the mean collision probability, the churn of two models that sample their predictions.

    :param pp: The paired predictions
    :return: A real in [0, 1]
    """
    return float(1.0 - np.mean(collision(pp.model1, pp.model2)))


def soft_churn_floor(pp: PairedPredictions) -> float:
    """
    The soft churn that remains when both models predict the same distributions: one minus the average of the mean
    self-collisions Σp² and Σq². It only depends on how uncertain each model is on its own.

    :param pp: The paired predictions
    :return: A real in [0, 1)
    """
    return float(1.0 - 0.5 * (np.mean(collision(pp.model1, pp.model1)) + np.mean(collision(pp.model2, pp.model2))))


def excess_soft_churn(pp: PairedPredictions) -> float:
    """
    Soft churn above :func:`soft_churn_floor`, which is half the mean squared L2 distance ½·mean Σ(p - q)². It is
    zero exactly when the models agree on every sample.

    :param pp: The paired predictions
    :return: A real in [0, 1]
    """
    return float(0.5 * np.mean(np.sum((pp.model1 - pp.model2) ** 2, axis=1)))


def log_collision_proxy(pp: PairedPredictions) -> float:
    """
    The mean of -log collision, +inf if any pair of predictions has disjoint support.

    :param pp: The paired predictions
    :return: A nonnegative extended real
    """
    collisions = collision(pp.model1, pp.model2)
    with np.errstate(divide='ignore'):
        return float(np.mean(-np.log(collisions)))


def error_rate(predictions, labels) -> float:
    """
    The fraction of samples whose predicted label differs from the true label.

    :param predictions: The predicted distributions
    :param labels: The true labels
    :return: A real in [0, 1]
    """
    if labels is None:
        raise InvalidInputError("Error rates need labels")

    predictions = stack_predictions(predictions)
    labels = check_labels(labels, *predictions.shape)
    return float(np.mean(np.argmax(predictions, axis=1) != labels))


def check_churn_err_bound(pp: PairedPredictions) -> BoundReport:
    """
    Churn is at most the sum of the error rates of both models.

    :param pp: Labelled paired predictions
    :return: The report, with churn, err1 and err2 as values
    """
    labels = pp.require_labels()
    churn = hard_churn(pp)
    err1 = error_rate(pp.model1, labels)
    err2 = error_rate(pp.model2, labels)

    return _summarise('churn-err', len(pp), [_slacks(churn, err1 + err2)], {
        'churn': churn,
        'err1': err1,
        'err2': err2,
    })


def check_kl_proxy_bound(pp: PairedPredictions) -> BoundReport:
    """
    Per sample, -log collision(p, q) is at most both cross entropies H(p, q) and H(q, p).

    :param pp: The paired predictions
    :return: The report, with the means of all three quantities as values
    """
    with np.errstate(divide='ignore'):
        proxy = -np.log(collision(pp.model1, pp.model2))
    forward = cross_entropy(pp.model1, pp.model2)
    backward = cross_entropy(pp.model2, pp.model1)

    # Disjoint supports make all three quantities infinite, the means are over the other samples
    values = OrderedDict()
    for name, quantity in (('log_collision_proxy', proxy), ('cross_entropy_12', forward),
                           ('cross_entropy_21', backward)):
        values[name], values['infinite_' + name] = _finite_mean(quantity)

    return _summarise('kl-proxy', len(pp), [_slacks(proxy, forward), _slacks(proxy, backward)], values)


def check_hellinger_sandwich(pp: PairedPredictions) -> BoundReport:
    """
    Soft churn is sandwiched by the Hellinger and total variation distances:

    soft churn ≥ mean hellinger² ≥ ½·mean tv², and soft churn ≤ 1 - mean Σp² + mean l1(p, q).

    The chain is checked on the aggregates and, because every step holds per sample, on every sample as well.

    :param pp: The paired predictions
    :return: The report, with the four aggregates as values
    """
    p, q = pp.model1, pp.model2
    one_minus_collision = 1.0 - collision(p, q)
    squared_hellinger = hellinger_sq(p, q)
    half_tv_squared = 0.5 * tv(p, q) ** 2
    upper = 1.0 - collision(p, p) + l1(p, q)

    churn = soft_churn(pp)
    mean_hellinger_sq = float(np.mean(squared_hellinger))
    mean_half_tv_squared = float(np.mean(half_tv_squared))
    upper_bound = float(np.mean(upper))

    return _summarise('hellinger-sandwich', len(pp), [
        _slacks(mean_hellinger_sq, churn),
        _slacks(mean_half_tv_squared, mean_hellinger_sq),
        _slacks(churn, upper_bound),
        _slacks(squared_hellinger, one_minus_collision),
        _slacks(half_tv_squared, squared_hellinger),
        _slacks(one_minus_collision, upper),
    ], {
        'soft_churn': churn,
        'mean_hellinger_sq': mean_hellinger_sq,
        'half_mean_tv_sq': mean_half_tv_squared,
        'upper_bound': upper_bound,
    })


def check_margin_event(pp: PairedPredictions) -> BoundReport:
    """
    Whenever the predicted labels differ, the L1 distance between the predictions is at least the smaller of the two
    margins. Consequently churn is at most the frequency of that event.

    :param pp: The paired predictions
    :return: The report, with churn and the event frequency as values
    """
    labels1, margins1 = margins_array(pp.model1)
    labels2, margins2 = margins_array(pp.model2)
    distances = l1(pp.model1, pp.model2)
    smallest = np.minimum(margins1, margins2)

    flipped = labels1 != labels2
    churn = float(np.mean(flipped))
    event_frequency = float(np.mean(distances >= smallest - BOUND_TOLERANCE))

    return _summarise('churn-margin', len(pp), [
        _slacks(smallest[flipped], distances[flipped]),
        _slacks(churn, event_frequency),
    ], {
        'churn': churn,
        'event_frequency': event_frequency,
        'flipped': int(np.count_nonzero(flipped)),
    })


def entropy_minimizer_check(candidates: Sequence, labels, alpha: float) -> BoundReport:
    """
    Among a finite set of predictors, the one minimising log-loss + α·mean entropy never has a higher mean entropy
    than the one minimising the log-loss alone. Ties are broken toward lower mean entropy, then lower index.

    :param candidates: Tables of predictions, one per candidate predictor, all on the same labelled samples
    :param labels: The true labels
    :param alpha: The entropy weight, nonnegative
    :return: The report, with the chosen indices and their mean entropies as values
    """
    if len(candidates) < 1:
        raise InvalidInputError("Need at least one candidate predictor")
    if not np.isfinite(alpha) or alpha < 0:
        raise InvalidInputError("Alpha must be nonnegative")

    log_losses = []
    entropies = []
    for index, candidate in enumerate(candidates):
        table = stack_predictions(candidate, 'Candidate {}'.format(index))
        table_labels = check_labels(labels, *table.shape)
        with np.errstate(divide='ignore'):
            log_losses.append(float(np.mean(-np.log(table[np.arange(len(table)), table_labels]))))
        entropies.append(float(np.mean(entropy(table))))

    def pick(objectives: list) -> int:
        return min(range(len(candidates)), key=lambda i: (objectives[i], entropies[i], i))

    best = pick(log_losses)
    regularised = pick([loss + alpha * ent for loss, ent in zip(log_losses, entropies)])

    return _summarise('entropy-minimizer', len(candidates), [_slacks(entropies[regularised], entropies[best])], {
        'best_index': best,
        'regularised_index': regularised,
        'entropy_best': entropies[best],
        'entropy_regularised': entropies[regularised],
    })


def entropy_confidence_curve(gamma) -> Tuple:
    """
    The entropy of a binary prediction as a function of its margin, g(γ) = H_bin((1 + γ)/2), together with its
    derivative ½·log((1 - γ)/(1 + γ)). The curve is strictly decreasing on [0, 1].

    :param gamma: One or more margins in [0, 1]
    :return: The entropies and the derivatives
    """
    gamma = np.asarray(gamma, dtype=float)
    if np.any((gamma < 0) | (gamma > 1)):
        raise InvalidInputError("Margins must be in [0, 1]")

    with np.errstate(divide='ignore'):
        derivative = 0.5 * np.log((1.0 - gamma) / (1.0 + gamma))

    values = binary_entropy((1.0 + gamma) / 2.0)
    if np.ndim(derivative) == 0:
        return values, float(derivative)
    return values, derivative


class StabilityCounts(Element):
    """
    How many predictions stay the same between two models, split by whether the first model is correct.
    """

    def __init__(self, correct_stable: int, correct_unstable: int, incorrect_stable: int, incorrect_unstable: int):
        self.correct_stable = int(correct_stable)
        self.correct_unstable = int(correct_unstable)
        self.incorrect_stable = int(incorrect_stable)
        self.incorrect_unstable = int(incorrect_unstable)

    @property
    def total(self) -> int:
        """
        The number of samples
        """
        return self.correct_stable + self.correct_unstable + self.incorrect_stable + self.incorrect_unstable


def stability_counts(pp: PairedPredictions) -> StabilityCounts:
    """
    Count stable and unstable predictions, for correct and for incorrect predictions of the first model.

    :param pp: Labelled paired predictions
    :return: The counts
    """
    labels = pp.require_labels()
    predicted1 = np.argmax(pp.model1, axis=1)
    stable = predicted1 == np.argmax(pp.model2, axis=1)
    correct = predicted1 == labels

    return StabilityCounts(
        correct_stable=np.count_nonzero(correct & stable),
        correct_unstable=np.count_nonzero(correct & ~stable),
        incorrect_stable=np.count_nonzero(~correct & stable),
        incorrect_unstable=np.count_nonzero(~correct & ~stable),
    )
