"""
Tables of loss values over a grid, for plotting loss curves and the score map of the reject surrogate
"""
import math

import numpy as np

from churnkit.grid import GridSpec
from churnkit.losses.cross_example import MiningSpec
from churnkit.losses.registry import loss_registry
from churnkit.losses.regularised import RegParams, entropic_log_loss, kl_log_loss
from churnkit.losses.reject import RejectParams, bayes_optimal_score, convex_surrogate, link, smooth_surrogate
from churnkit.probability import ProbVector

from typing import List, Sequence

CURVES = ('entropic', 'kl', 'reject', 'link', 'xex')

DEFAULT_GRIDS = {
    'entropic': GridSpec(0.01, 0.99, 99),
    'kl': GridSpec(0.01, 0.99, 99),
    'reject': GridSpec(-3.0, 3.0, 601),
    'link': GridSpec(-3.0, 3.0, 601),
    'xex': GridSpec(-3.0, 3.0, 601),
}

DEFAULT_ALPHAS = {
    'entropic': (0.0, 0.1, 0.3, 0.5),
    'kl': (0.0, 0.1, 0.3, 0.5, 1.0),
    'reject': (1.0, 2.0, 4.0, 8.0, 32.0),
    'link': (1.0, 2.0, 4.0, 8.0, 32.0),
    'xex': (0.25, 0.5),
}

CURVE_HEADERS = {
    'entropic': ('x', 'value', 'alpha'),
    'kl': ('x', 'value', 'alpha'),
    'reject': ('x', 'value', 'alpha', 'd'),
    'link': ('x', 'value', 'alpha', 'd'),
    'xex': ('x', 'value', 'loss', 'fraction'),
}

REJECT_MAP_HEADER = ('eta', 'alpha', 'd', 'z_star', 'link_of_z_star')

DEFAULT_ETA_GRID = GridSpec(0.01, 0.99, 99)


def regularised_curve(kind: str, alphas: Sequence[float], grid: GridSpec) -> List[tuple]:
    """
    The regularised log-loss of a binary prediction, as a function of the probability x it assigns to the true class.

    :param kind: 'entropic' or 'kl'
    :param alphas: The regulariser strengths
    :param grid: The probabilities, within (0, 1]
    :return: Rows of (x, value, alpha)
    """
    loss, reg_kind = (entropic_log_loss, 'entropic') if kind == 'entropic' else (kl_log_loss, 'kl-uniform')

    rows = []
    for alpha in alphas:
        params = RegParams(alpha, reg_kind)
        for x in grid.values():
            rows.append((x, loss(ProbVector([1.0 - x, x]), 1, params), alpha))
    return rows


def reject_curve(alphas: Sequence[float], d: float, grid: GridSpec) -> List[tuple]:
    """
    The smooth reject surrogate for every sharpness, followed by the convex surrogate it converges to, which is
    listed with an infinite sharpness.

    :param alphas: The sharpness values, at least 1
    :param d: The rejection cost
    :param grid: The margins
    :return: Rows of (x, value, alpha, d)
    """
    rows = []
    for alpha in alphas:
        values, _ = smooth_surrogate(grid.values(), RejectParams(d, alpha=alpha))
        rows.extend(zip(grid.values(), values, [alpha] * grid.points, [d] * grid.points))

    values = convex_surrogate(grid.values(), RejectParams(d))
    rows.extend(zip(grid.values(), values, [math.inf] * grid.points, [d] * grid.points))
    return rows


def link_curve(alphas: Sequence[float], d: float, grid: GridSpec) -> List[tuple]:
    """
    The probability estimate that the link assigns to every score.

    :param alphas: The sharpness values, at least 1
    :param d: The rejection cost
    :param grid: The scores
    :return: Rows of (x, value, alpha, d)
    """
    rows = []
    for alpha in alphas:
        values = link(grid.values(), RejectParams(d, alpha=alpha))
        rows.extend(zip(grid.values(), values, [alpha] * grid.points, [d] * grid.points))
    return rows

# Scores of a batch of four queries against their documents, the swept positive score replaces the first entry
XEX_BACKGROUND = np.array([
    [0.0, 0.2, -0.5, 0.1],
    [0.3, 1.0, 1.5, -0.2],
    [-0.4, 0.6, 2.0, 0.0],
    [0.9, -0.1, 0.4, 0.5],
])


def xex_curve(fractions: Sequence[float], grid: GridSpec) -> List[tuple]:
    """
    The batch value of every built-in retrieval loss as the score of the first matching pair moves over the grid,
    with the other scores held at :data:`XEX_BACKGROUND`. The mining losses get a block per fraction, the others are
    listed with fraction 1, which keeps every negative.

    :param fractions: The mining fractions, in (0, 1]
    :param grid: The positive scores
    :return: Rows of (x, value, loss, fraction)
    """
    rows = []
    for name, loss_class in loss_registry.builtin.items():
        for fraction in (fractions if loss_class.uses_mining else (1.0,)):
            loss = loss_class(MiningSpec(fraction=fraction) if loss_class.uses_mining else None)
            for x in grid.values():
                scores = XEX_BACKGROUND.copy()
                scores[0, 0] = x
                value, _ = loss(scores)
                rows.append((x, value, name, fraction))
    return rows


def loss_curve(kind: str, alphas: Sequence[float] = None, d: float = 0.3, grid: GridSpec = None) -> List[tuple]:
    """
    The rows of a loss curve table.

    :param kind: One of :data:`CURVES`
    :param alphas: The parameter values to tabulate, mining fractions for the xex curve, a default sweep when not given
    :param d: The rejection cost, only for the reject and link curves
    :param grid: The grid, a default grid when not given
    :return: The rows, matching :data:`CURVE_HEADERS`
    """
    if kind not in CURVES:
        raise ValueError("Curve must be one of {}".format(', '.join(CURVES)))

    alphas = DEFAULT_ALPHAS[kind] if alphas is None else alphas
    grid = grid or DEFAULT_GRIDS[kind]

    if kind in ('entropic', 'kl'):
        return regularised_curve(kind, alphas, grid)
    if kind == 'reject':
        return reject_curve(alphas, d, grid)
    if kind == 'xex':
        return xex_curve(alphas, grid)
    return link_curve(alphas, d, grid)


def reject_map(alphas: Sequence[float] = None, d: float = 0.3, eta_grid: GridSpec = DEFAULT_ETA_GRID) -> List[tuple]:
    """
    The score minimising the expected smooth surrogate for every probability on the grid, and what the link maps that
    score back to.

    :param alphas: The sharpness values, at least 1
    :param d: The rejection cost
    :param eta_grid: The probabilities of the positive class, within (0, 1)
    :return: Rows of (eta, alpha, d, z_star, link_of_z_star)
    """
    alphas = DEFAULT_ALPHAS['reject'] if alphas is None else alphas

    rows = []
    for alpha in alphas:
        params = RejectParams(d, alpha=alpha)
        for eta in eta_grid.values():
            score = bayes_optimal_score(eta, params)
            rows.append((eta, alpha, d, score, link(score, params)))
    return rows
