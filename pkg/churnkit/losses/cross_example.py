"""
Batch softmax losses for retrieval. Row i of a similarity matrix holds the scores of query i against all documents in
the batch, the diagonal holds the matching pairs. Every loss is the mean over queries of

    -s_ii + log(e^s_ii + Σ_{s ∈ N_i} e^s)

and they differ only in the negative set N_i:

- sampled softmax: the off-diagonal scores of row i
- stochastic negative mining: the k largest off-diagonal scores of row i
- cross-example softmax: all off-diagonal scores of the whole batch, shared by all queries
- cross-example negative mining: the k largest off-diagonal scores of the whole batch

Mined sets are treated as constants when differentiating. Ties are broken by (value descending, row, column).
"""
import logging
import math

import numpy as np
from scipy.special import logsumexp

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError

from typing import Optional, Tuple

logger = logging.getLogger(__name__)


class SimilarityMatrix(Element):
    """
    Square matrix of finite scores between n queries (rows) and their n documents (columns).
    """

    def __init__(self, entries):
        self.entries = np.array(entries, dtype=float)
        self.entries.flags.writeable = False
        self.validate()

    def validate(self):
        """
        The matrix must be square, non-empty and finite
        """
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1] or self.entries.shape[0] < 1:
            raise InvalidInputError("Similarity matrix must be square and non-empty")
        if not np.all(np.isfinite(self.entries)):
            raise InvalidInputError("Similarity matrix contains non-finite entries")

    @property
    def n(self) -> int:
        """
        The batch size
        """
        return self.entries.shape[0]


def as_matrix(similarities) -> np.ndarray:
    """
    Unwrap and validate a similarity matrix.

    :param similarities: A SimilarityMatrix or a square array
    :return: The entries
    """
    if not isinstance(similarities, SimilarityMatrix):
        similarities = SimilarityMatrix(similarities)
    return similarities.entries


class MiningSpec(Element):
    """
    How many negatives to keep: either a fraction of the negative set or an explicit count.
    """

    def __init__(self, fraction: Optional[float] = None, k: Optional[int] = None):
        self.fraction = fraction
        self.k = k
        self.validate()

    def validate(self):
        """
        Exactly one of fraction and k, with fraction in (0, 1] and k ≥ 1
        """
        if (self.fraction is None) == (self.k is None):
            raise InvalidInputError("Mining needs either a fraction or a count, not both")
        if self.fraction is not None:
            self.fraction = float(self.fraction)
            if not 0 < self.fraction <= 1:
                raise InvalidInputError("Mining fraction must be in (0, 1]")
        if self.k is not None:
            self.k = int(self.k)
            if self.k < 1:
                raise InvalidInputError("Mining count must be at least 1")

    def resolve(self, size: int) -> int:
        """
        The number of negatives to keep from a negative set. A fraction resolves to ceil(fraction × size).

        :param size: The size of the negative set
        :return: The count, zero for an empty negative set
        """
        if size == 0:
            return 0
        if self.fraction is not None:
            return max(1, math.ceil(self.fraction * size))
        if self.k > size:
            raise InvalidInputError("Cannot mine {} negatives from a set of {}".format(self.k, size))
        return self.k


def normalise_rows(vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scale rows to unit length.

    :param vectors: The rows to normalise
    :return: The unit rows and the original norms
    """
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2:
        raise InvalidInputError("Expected a matrix with one vector per row")

    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0):
        raise InvalidInputError("Cannot normalise a zero row")
    return vectors / norms[:, np.newaxis], norms


def cosine_scale(temperature: float, square_temperature: bool = True) -> float:
    """
    The factor applied to cosine similarities. Scaling both unit vectors by λ multiplies the cosine by λ².

    :param temperature: The temperature λ
    :param square_temperature: Whether to multiply by λ² instead of λ
    :return: The scale factor
    """
    if not np.isfinite(temperature) or temperature <= 0:
        raise InvalidInputError("Temperature must be positive and finite")
    return temperature ** 2 if square_temperature else temperature


def cosine_scores(queries, docs, temperature: float, square_temperature: bool = True) -> np.ndarray:
    """
    Scaled cosine similarities between every query and every document, also for unequal numbers of both.

    :param queries: One query vector per row
    :param docs: One document vector per row
    :param temperature: The temperature λ
    :param square_temperature: Scale by λ² (both vectors scaled) instead of λ
    :return: The score matrix
    """
    unit_queries, _ = normalise_rows(queries)
    unit_docs, _ = normalise_rows(docs)
    if unit_queries.shape[1] != unit_docs.shape[1]:
        raise InvalidInputError("Queries and documents have different dimensions")
    return cosine_scale(temperature, square_temperature) * (unit_queries @ unit_docs.T)


def cosine_scores_backward(queries, docs, grad: np.ndarray, temperature: float,
                           square_temperature: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Backpropagate a gradient on :func:`cosine_scores` to the query and document vectors.

    :param queries: The query vectors
    :param docs: The document vectors
    :param grad: The gradient of the objective to the scores
    :param temperature: The temperature λ
    :param square_temperature: Whether the scores were scaled by λ²
    :return: The gradients to the queries and to the documents
    """
    unit_queries, query_norms = normalise_rows(queries)
    unit_docs, doc_norms = normalise_rows(docs)
    scale = cosine_scale(temperature, square_temperature)

    def through_normalisation(unit, norms, grad_unit):
        # Jacobian of u / |u| is (I - û·ûᵀ) / |u|
        radial = np.sum(unit * grad_unit, axis=1, keepdims=True)
        return (grad_unit - unit * radial) / norms[:, np.newaxis]

    grad_queries = through_normalisation(unit_queries, query_norms, scale * grad @ unit_docs)
    grad_docs = through_normalisation(unit_docs, doc_norms, scale * grad.T @ unit_queries)
    return grad_queries, grad_docs


def cosine_similarity_matrix(queries, docs, temperature: float, square_temperature: bool = True) -> SimilarityMatrix:
    """
    The similarity matrix s_ij = λ²·⟨x_i/|x_i|, y_j/|y_j|⟩ of a batch of matching queries and documents.

    :param queries: n query vectors
    :param docs: n document vectors, document i matches query i
    :param temperature: The temperature λ
    :param square_temperature: Scale by λ² (both vectors scaled) instead of λ
    :return: The similarity matrix
    """
    if np.shape(queries)[0] != np.shape(docs)[0]:
        raise InvalidInputError("A batch needs as many documents as queries")
    return SimilarityMatrix(cosine_scores(queries, docs, temperature, square_temperature))


def negatives_per_query(similarities, i: int) -> np.ndarray:
    """
    The off-diagonal scores of row i, in column order.

    :param similarities: The similarity matrix
    :param i: The query index
    :return: The n - 1 negative scores of query i
    """
    entries = as_matrix(similarities)
    n = entries.shape[0]
    if not 0 <= i < n:
        raise InvalidInputError("Query index {} out of range for a batch of {}".format(i, n))
    return np.delete(entries[i], i)


def mine_per_query(similarities, mining: MiningSpec) -> np.ndarray:
    """
    Select the k largest negatives of every row.

    :param similarities: The similarity matrix
    :param mining: How many negatives to keep per row
    :return: A boolean mask of the selected entries
    """
    entries = as_matrix(similarities)
    n = entries.shape[0]
    mask = np.zeros((n, n), dtype=bool)
    k = mining.resolve(n - 1)
    if k == 0:
        return mask

    off_diagonal = ~np.eye(n, dtype=bool)
    values = entries[off_diagonal].reshape(n, n - 1)
    columns = np.nonzero(off_diagonal)[1].reshape(n, n - 1)

    # Stable sort keeps the lower column first among equal values
    order = np.argsort(-values, axis=1, kind='stable')[:, :k]
    mask[np.arange(n)[:, np.newaxis], np.take_along_axis(columns, order, axis=1)] = True
    return mask


def mine_across_batch(similarities, mining: MiningSpec) -> np.ndarray:
    """
    Select the k largest off-diagonal scores of the whole batch. Some rows may contribute all their negatives and
    others none.

    :param similarities: The similarity matrix
    :param mining: How many negatives to keep from the batch
    :return: A boolean mask of the selected entries
    """
    entries = as_matrix(similarities)
    n = entries.shape[0]
    mask = np.zeros((n, n), dtype=bool)
    k = mining.resolve(n * n - n)
    if k == 0:
        return mask

    off_diagonal = ~np.eye(n, dtype=bool)
    rows, columns = np.nonzero(off_diagonal)

    # Row-major flattening plus a stable sort gives the (value desc, row, column) order
    order = np.argsort(-entries[off_diagonal], kind='stable')[:k]
    mask[rows[order], columns[order]] = True
    return mask


def _per_query_softmax(entries: np.ndarray, negatives: np.ndarray) -> Tuple[float, np.ndarray]:
    n = entries.shape[0]
    eye = np.eye(n, dtype=bool)
    included = negatives | eye

    masked = np.where(included, entries, -np.inf)
    normaliser = logsumexp(masked, axis=1)
    value = float(np.mean(normaliser - np.diag(entries)))

    weights = np.where(included, np.exp(masked - normaliser[:, np.newaxis]), 0.0)
    return value, (weights - eye) / n


def _shared_softmax(entries: np.ndarray, negatives: np.ndarray) -> Tuple[float, np.ndarray]:
    n = entries.shape[0]
    diagonal = np.diag(entries)
    negative_scores = entries[negatives]

    if negative_scores.size:
        normaliser = np.logaddexp(diagonal, logsumexp(negative_scores))
    else:
        normaliser = diagonal.copy()
    value = float(np.mean(normaliser - diagonal))

    grad = np.zeros_like(entries)
    grad[np.diag_indices(n)] = (np.exp(diagonal - normaliser) - 1.0) / n
    if negative_scores.size:
        # Every query shares the negatives: Σ_i e^(s - lse_i) = e^(s - top)·Σ_i e^(top - lse_i), all terms ≤ 1
        top = np.max(negative_scores)
        grad[negatives] = np.exp(negative_scores - top) * np.sum(np.exp(top - normaliser)) / n
    return value, grad


def sampled_softmax_loss(similarities) -> Tuple[float, np.ndarray]:
    """
    Each matching pair ranked against the other documents of its own query.

    :param similarities: The similarity matrix
    :return: The loss and its gradient to the matrix entries
    """
    entries = as_matrix(similarities)
    return _per_query_softmax(entries, ~np.eye(entries.shape[0], dtype=bool))


def snm_loss(similarities, mining: MiningSpec) -> Tuple[float, np.ndarray]:
    """
    Stochastic negative mining: sampled softmax restricted to the k hardest negatives of each query.

    :param similarities: The similarity matrix
    :param mining: How many negatives to keep per query
    :return: The loss and its gradient to the matrix entries
    """
    entries = as_matrix(similarities)
    return _per_query_softmax(entries, mine_per_query(entries, mining))


def ce_softmax_loss(similarities) -> Tuple[float, np.ndarray]:
    """
    Cross-example softmax: each matching pair ranked against every non-matching pair in the batch.

    :param similarities: The similarity matrix
    :return: The loss and its gradient to the matrix entries
    """
    entries = as_matrix(similarities)
    return _shared_softmax(entries, ~np.eye(entries.shape[0], dtype=bool))


def ce_mining_loss(similarities, mining: MiningSpec) -> Tuple[float, np.ndarray]:
    """
    Cross-example negative mining: cross-example softmax restricted to the k hardest negatives of the whole batch.

    :param similarities: The similarity matrix
    :param mining: How many negatives to keep from the batch
    :return: The loss and its gradient to the matrix entries
    """
    entries = as_matrix(similarities)
    return _shared_softmax(entries, mine_across_batch(entries, mining))


class RetrievalLoss:
    """
    Base class for the retrieval losses that can be selected by name in experiment configurations
    """

    uses_mining = False
    """Whether this loss needs a MiningSpec"""

    def __init__(self, mining: Optional[MiningSpec] = None):
        if self.uses_mining and mining is None:
            raise InvalidInputError("{} needs a mining specification".format(self.__class__.__name__))
        self.mining = mining

    def __call__(self, similarities) -> Tuple[float, np.ndarray]:
        """
        Evaluate the loss.

        :param similarities: The similarity matrix
        :return: The loss and its gradient to the matrix entries
        """
        raise NotImplementedError

    def __repr__(self):
        if self.uses_mining:
            return '{}(mining={!r})'.format(self.__class__.__name__, self.mining)
        return '{}()'.format(self.__class__.__name__)


class SampledSoftmaxLoss(RetrievalLoss):
    """
    :func:`sampled_softmax_loss`
    """

    def __call__(self, similarities):
        return sampled_softmax_loss(similarities)


class StochasticNegativeMiningLoss(RetrievalLoss):
    """
    :func:`snm_loss`
    """
    uses_mining = True

    def __call__(self, similarities):
        return snm_loss(similarities, self.mining)


class CrossExampleSoftmaxLoss(RetrievalLoss):
    """
    :func:`ce_softmax_loss`
    """

    def __call__(self, similarities):
        return ce_softmax_loss(similarities)


class CrossExampleNegativeMiningLoss(RetrievalLoss):
    """
    :func:`ce_mining_loss`
    """
    uses_mining = True

    def __call__(self, similarities):
        return ce_mining_loss(similarities, self.mining)
