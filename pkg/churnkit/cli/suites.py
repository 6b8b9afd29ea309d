"""
Self-checks on seeded random instances: the churn inequalities, the entropy properties and the hand-written
gradients. Every check produces a :class:`churnkit.churn.BoundReport`, so a clean run has zero violations throughout.
"""
import logging

import numpy as np

from churnkit.churn import BoundReport, PairedPredictions, check_churn_err_bound, check_hellinger_sandwich, \
    check_kl_proxy_bound, check_margin_event, entropy_confidence_curve, entropy_minimizer_check
from churnkit.element import Element
from churnkit.grid import GridSpec
from churnkit.losses.cross_example import MiningSpec, ce_mining_loss, ce_softmax_loss, sampled_softmax_loss, \
    snm_loss
from churnkit.losses.regularised import RegParams, softmax_reg_loss_grad_batch
from churnkit.training.engine import classification_objective
from churnkit.training.gradcheck import numerical_gradient, relative_error
from churnkit.training.models import init_params

from typing import Callable, List

logger = logging.getLogger(__name__)

BOUND_CLASSES = (2, 3, 5, 10)

# Share of rows replaced by one-hot predictions, which exercise ties and disjoint supports
ONE_HOT_SHARE = 0.02

ENTROPY_FAMILIES = 1000

CONFIDENCE_GRID = GridSpec(0.01, 0.99, 99)
CONFIDENCE_TOLERANCE = 1e-6

GRADIENT_TOLERANCE = 1e-4
GRADIENT_INSTANCES = 100


class SuiteResult(Element):
    """
    The reports of a suite run. The suite passes when no report has violations.
    """

    def __init__(self, seed: int, samples: int, reports: List[BoundReport]):
        self.seed = int(seed)
        self.samples = int(samples)
        self.reports = reports

    @property
    def violations(self) -> int:
        """
        The total number of violations
        """
        return sum(report.violations for report in self.reports)


def random_predictions(rng: np.random.Generator, rows: int, classes: int) -> np.ndarray:
    """
    Random distributions: uniform on the simplex, sharpened for some rows and one-hot for a few.

    :param rng: The generator to draw from
    :param rows: The number of distributions
    :param classes: The number of classes
    :return: A rows×classes table
    """
    # Normalised exponentials are uniform on the simplex
    table = rng.exponential(size=(rows, classes))
    sharpness = rng.choice([1.0, 4.0], size=(rows, 1))
    table = table ** sharpness
    table /= table.sum(axis=1, keepdims=True)

    one_hot = rng.random(rows) < ONE_HOT_SHARE
    table[one_hot] = np.eye(classes)[rng.integers(classes, size=np.count_nonzero(one_hot))]
    return table


def _renamed(report: BoundReport, name: str) -> BoundReport:
    return BoundReport(name, report.samples, report.violations, report.min_slack, report.values)


def bound_reports(rng: np.random.Generator, samples: int) -> List[BoundReport]:
    """
    Run the four churn inequality checkers on random paired predictions for several numbers of classes.

    :param rng: The generator to draw from
    :param samples: The number of paired predictions per number of classes
    :return: The reports
    """
    reports = []
    for classes in BOUND_CLASSES:
        pp = PairedPredictions(random_predictions(rng, samples, classes), random_predictions(rng, samples, classes),
                               rng.integers(classes, size=samples))
        for checker in (check_churn_err_bound, check_kl_proxy_bound, check_margin_event, check_hellinger_sandwich):
            report = checker(pp)
            reports.append(_renamed(report, '{} classes={}'.format(report.bound, classes)))
    return reports


def entropy_reports(rng: np.random.Generator, families: int = ENTROPY_FAMILIES) -> List[BoundReport]:
    """
    Check that regularising with entropy never selects a less confident predictor, and that the analytic derivative
    of the entropy-confidence curve matches central differences.

    :param rng: The generator to draw from
    :param families: The number of random candidate families
    :return: The reports
    """
    violations = 0
    min_slack = np.inf
    for _ in range(families):
        labels = rng.integers(3, size=16)
        candidates = [random_predictions(rng, 16, 3) for _ in range(4)]
        report = entropy_minimizer_check(candidates, labels, float(rng.uniform(0.0, 2.0)))
        violations += report.violations
        min_slack = min(min_slack, report.min_slack)
    minimizer = BoundReport('entropy-minimizer', families, violations, min_slack)

    gammas = CONFIDENCE_GRID.values()
    step = 1e-6
    _, derivative = entropy_confidence_curve(gammas)
    upper, _ = entropy_confidence_curve(gammas + step)
    lower, _ = entropy_confidence_curve(gammas - step)
    errors = np.abs(derivative - (upper - lower) / (2.0 * step))
    confidence = BoundReport('entropy-confidence', len(gammas), np.count_nonzero(errors > CONFIDENCE_TOLERANCE),
                             CONFIDENCE_TOLERANCE - float(np.max(errors)), {'max_error': float(np.max(errors))})

    return [minimizer, confidence]


def separated_matrix(rng: np.random.Generator, n: int, spacing: float = 0.1) -> np.ndarray:
    """
    A random n×n matrix whose entries are at least `spacing` apart, so small perturbations never change which
    negatives are mined.

    :param rng: The generator to draw from
    :param n: The size
    :param spacing: The smallest gap between entries
    :return: The matrix
    """
    return (rng.permutation(n * n) * spacing).reshape(n, n) - n * n * spacing / 2.0


def _gradient_report(name: str, errors: List[float]) -> BoundReport:
    worst = max(errors)
    return BoundReport('gradient {}'.format(name), len(errors), sum(error > GRADIENT_TOLERANCE for error in errors),
                       GRADIENT_TOLERANCE - worst, {'max_relative_error': worst})


def _model_gradient_error(fn: Callable[[], float], arrays: List[np.ndarray], analytic: List[np.ndarray]) -> float:
    numeric = []
    for array in arrays:
        def at(values, array=array):
            saved = array.copy()
            array[...] = values
            try:
                return fn()
            finally:
                array[...] = saved

        numeric.append(numerical_gradient(at, array.copy()))

    return relative_error(np.concatenate([grad.ravel() for grad in analytic]),
                          np.concatenate([grad.ravel() for grad in numeric]))


def gradient_reports(rng: np.random.Generator, instances: int = GRADIENT_INSTANCES) -> List[BoundReport]:
    """
    Compare the hand-written gradients of the regularised log-losses, the retrieval losses and the classification
    objective through both architectures with central differences.

    :param rng: The generator to draw from
    :param instances: The number of random instances per gradient
    :return: The reports
    """
    reports = []

    for reg in (RegParams(0.3, 'entropic'), RegParams(0.3, 'kl-uniform')):
        errors = []
        for _ in range(instances):
            scores = rng.normal(size=(4, 5))
            labels = rng.integers(5, size=4)
            _, analytic = softmax_reg_loss_grad_batch(scores, labels, reg, 1.5)
            numeric = numerical_gradient(lambda s: softmax_reg_loss_grad_batch(s, labels, reg, 1.5)[0], scores)
            errors.append(relative_error(analytic, numeric))
        reports.append(_gradient_report('softmax {}'.format(reg.kind), errors))

    retrieval_losses = [
        ('sampled-softmax', sampled_softmax_loss),
        ('snm', lambda s: snm_loss(s, MiningSpec(k=2))),
        ('ce-softmax', ce_softmax_loss),
        ('ce-mining', lambda s: ce_mining_loss(s, MiningSpec(fraction=0.25))),
    ]
    for name, loss in retrieval_losses:
        errors = []
        for _ in range(instances):
            matrix = separated_matrix(rng, 6)
            _, analytic = loss(matrix)
            errors.append(relative_error(analytic, numerical_gradient(lambda s: loss(s)[0], matrix)))
        reports.append(_gradient_report(name, errors))

    reg = RegParams(0.3, 'kl-uniform')
    for architecture in ('linear', 'mlp1'):
        errors = []
        for _ in range(instances):
            params = init_params(int(rng.integers(2 ** 32)), architecture, 4, 3, 5)
            inputs = rng.normal(size=(6, 4))
            labels = rng.integers(3, size=6)
            _, analytic, _ = classification_objective(params, inputs, labels, reg)
            errors.append(_model_gradient_error(lambda: classification_objective(params, inputs, labels, reg)[0],
                                                params.arrays(), analytic))
        reports.append(_gradient_report('model {}'.format(architecture), errors))

    return reports


def run_suite(samples: int, seed: int) -> SuiteResult:
    """
    Run all checks.

    :param samples: The number of random paired predictions per number of classes
    :param seed: The seed of all random instances
    :return: The result
    """
    if samples < 1:
        raise ValueError("Need at least one sample")

    rng = np.random.default_rng(seed)
    reports = bound_reports(rng, samples) + entropy_reports(rng) + gradient_reports(rng)

    result = SuiteResult(seed, samples, reports)
    if result.violations:
        logger.error("Checks found {} violations".format(result.violations))
    else:
        logger.info("All {} checks passed".format(len(reports)))
    return result
