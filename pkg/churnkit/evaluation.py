"""
Retrieval and stability evaluation: Recall@k, global precision-recall curves, histograms and score envelopes
"""
import math

import numpy as np
from scipy.integrate import trapezoid

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError

from typing import Optional, Sequence


def _score_table(similarities) -> np.ndarray:
    # Accept SimilarityMatrix and anything with an `entries` attribute without importing the loss package
    scores = np.asarray(getattr(similarities, 'entries', similarities), dtype=float)
    if scores.ndim != 2 or scores.size == 0:
        raise InvalidInputError("Expected a non-empty matrix of scores")
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("Scores must be finite")
    return scores


def _match_columns(matches: Optional[Sequence[int]], queries: int, documents: int) -> np.ndarray:
    if matches is None:
        if queries > documents:
            raise InvalidInputError("Without explicit matches every query needs its own document")
        return np.arange(queries)

    matches = np.asarray(matches)
    if matches.shape != (queries,) or np.any((matches < 0) | (matches >= documents)):
        raise InvalidInputError("Need one valid document index per query")
    return matches


def match_ranks(similarities, matches: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    The zero-based rank of the matching document of every query. Documents with equal scores are ranked by index.

    :param similarities: An n×m score matrix, queries in rows
    :param matches: The matching document of every query, by default query i matches document i
    :return: The ranks
    """
    scores = _score_table(similarities)
    queries, documents = scores.shape
    matches = _match_columns(matches, queries, documents)

    match_scores = scores[np.arange(queries), matches][:, np.newaxis]
    earlier = np.arange(documents)[np.newaxis, :] < matches[:, np.newaxis]
    return np.sum((scores > match_scores) | ((scores == match_scores) & earlier), axis=1)


def recall_at_k(similarities, k: int, matches: Optional[Sequence[int]] = None) -> float:
    """
    The fraction of queries whose matching document is among the k best scoring documents.

    :param similarities: An n×m score matrix, queries in rows
    :param k: The cut-off, between 1 and m
    :param matches: The matching document of every query, by default query i matches document i
    :return: A real in [0, 1]
    """
    documents = _score_table(similarities).shape[1]
    if not 1 <= k <= documents:
        raise InvalidInputError("k must be between 1 and {}".format(documents))

    return float(np.mean(match_ranks(similarities, matches) < k))


class PRCurve(Element):
    """
    A precision-recall curve as (recall, precision) points and the area under it.
    """

    def __init__(self, points, auc: float):
        self.points = np.array(points, dtype=float).reshape(-1, 2)
        self.auc = float(auc)
        self.validate()

    def validate(self):
        """
        Recalls can't decrease and precisions are probabilities
        """
        if np.any(np.diff(self.points[:, 0]) < 0):
            raise InvalidInputError("Recalls must be nondecreasing")
        if np.any((self.points[:, 1] < 0) | (self.points[:, 1] > 1)):
            raise InvalidInputError("Precisions must be in [0, 1]")
        if not 0 <= self.auc <= 1:
            raise InvalidInputError("Area under the curve must be in [0, 1]")

    @property
    def recalls(self) -> np.ndarray:
        """
        The recall of every point
        """
        return self.points[:, 0]

    @property
    def precisions(self) -> np.ndarray:
        """
        The precision of every point
        """
        return self.points[:, 1]


def pr_curve(scores, matches) -> PRCurve:
    """
    Sweep one global threshold over all scores, highest first, with one point per distinct score. The curve starts
    at recall 0 with the precision of the first threshold and the area is integrated with the trapezoid rule.

    :param scores: The scores of all query-document pairs, any shape
    :param matches: Whether each pair is a match, same shape as the scores
    :return: The curve
    """
    scores = np.asarray(scores, dtype=float).ravel()
    matches = np.asarray(matches, dtype=bool).ravel()
    if scores.shape != matches.shape:
        raise InvalidInputError("Need one match flag per score")
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("Scores must be finite")

    positives = np.count_nonzero(matches)
    if positives == 0:
        raise InvalidInputError("A precision-recall curve needs at least one positive")

    order = np.argsort(-scores, kind='stable')
    sorted_scores = scores[order]
    true_positives = np.cumsum(matches[order])

    # The last position of every run of equal scores
    threshold_ends = np.append(np.nonzero(np.diff(sorted_scores))[0], len(sorted_scores) - 1)
    selected = true_positives[threshold_ends]
    precision = selected / (threshold_ends + 1.0)
    recall = selected / positives

    points = np.column_stack([np.append(0.0, recall), np.append(precision[0], precision)])
    return PRCurve(points, np.clip(trapezoid(points[:, 1], points[:, 0]), 0.0, 1.0))


class Histogram(Element):
    """
    Bin edges and the number of values in each bin. The last bin includes its right edge.
    """

    def __init__(self, edges, counts):
        self.edges = np.asarray(edges, dtype=float)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.validate()

    def validate(self):
        """
        There is one more edge than there are bins
        """
        if self.edges.ndim != 1 or self.counts.shape != (len(self.edges) - 1,):
            raise InvalidInputError("A histogram needs one more edge than it has bins")

    @property
    def total(self) -> int:
        """
        The number of values counted
        """
        return int(np.sum(self.counts))


def histogram(values, bins: int = 10, edges: Optional[Sequence[float]] = None) -> Histogram:
    """
    Count values in fixed-width bins spanning their range, or in explicitly given bins.

    :param values: The finite values to count
    :param bins: The number of fixed-width bins
    :param edges: Explicit bin edges, overriding the number of bins
    :return: The histogram
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise InvalidInputError("Cannot build a histogram of nothing")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("Histogram values must be finite")

    if edges is not None:
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise InvalidInputError("Histogram edges must be increasing")
        # Values outside explicit edges would silently disappear
        if values.min() < edges[0] or values.max() > edges[-1]:
            raise InvalidInputError("Values fall outside the histogram edges")
        counts, edges = np.histogram(values, bins=edges)
    else:
        if bins < 1:
            raise InvalidInputError("A histogram needs at least one bin")
        counts, edges = np.histogram(values, bins=bins)

    return Histogram(edges, counts)


def nearest_rank_percentile(sorted_values: np.ndarray, percentile: float) -> np.ndarray:
    """
    The nearest-rank percentile along the first axis of already sorted values.

    :param sorted_values: Values sorted ascending along the first axis
    :param percentile: The percentile, between 0 and 100
    :return: The percentile values
    """
    count = sorted_values.shape[0]
    rank = max(1, math.ceil(percentile / 100.0 * count))
    return sorted_values[rank - 1]


class ScoreProfile(Element):
    """
    The scores of a sample of queries against all documents, each row sorted from best to worst, with percentile
    envelopes across the queries at every rank.
    """

    def __init__(self, queries, curves, lower, upper, percentiles=(5.0, 95.0)):
        self.queries = np.asarray(queries, dtype=np.int64)
        self.curves = np.asarray(curves, dtype=float)
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.percentiles = tuple(float(percentile) for percentile in percentiles)

    @property
    def width(self) -> float:
        """
        The mean distance between the envelopes
        """
        return float(np.mean(self.upper - self.lower))


def score_distribution_profile(similarities, queries: Optional[Sequence[int]] = None,
                               percentiles: Sequence[float] = (5.0, 95.0)) -> ScoreProfile:
    """
    Sorted score curves of a sample of queries and their lower and upper nearest-rank percentile envelopes.

    :param similarities: An n×m score matrix, queries in rows
    :param queries: The indices of the sampled queries, all queries by default
    :param percentiles: The lower and upper percentile
    :return: The profile
    """
    scores = _score_table(similarities)
    if queries is None:
        queries = np.arange(scores.shape[0])

    queries = np.asarray(queries, dtype=np.int64)
    if queries.ndim != 1 or queries.size == 0:
        raise InvalidInputError("Need at least one query to profile")
    if np.any((queries < 0) | (queries >= scores.shape[0])):
        raise InvalidInputError("Query index out of range")

    low, high = percentiles
    if not 0 <= low <= high <= 100:
        raise InvalidInputError("Percentiles must be ordered and within [0, 100]")

    curves = -np.sort(-scores[queries], axis=1)
    across_queries = np.sort(curves, axis=0)
    return ScoreProfile(queries, curves,
                        lower=nearest_rank_percentile(across_queries, low),
                        upper=nearest_rank_percentile(across_queries, high),
                        percentiles=(low, high))


def high_score_fraction(similarities, threshold: float) -> float:
    """
    The fraction of queries with at least one document scoring at or above the threshold.

    :param similarities: An n×m score matrix, queries in rows
    :param threshold: The score threshold
    :return: A real in [0, 1]
    """
    scores = _score_table(similarities)
    return float(np.mean(np.any(scores >= threshold, axis=1)))
