"""
Synthetic datasets: Gaussian blobs for classification and paired noisy views of shared latents for retrieval. Every
generator is fully determined by its seed.
"""
import numpy as np

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError

from typing import Tuple

VIEWS = ('random', 'identity')


class Dataset(Element):
    """
    Labelled inputs for classification.
    """

    def __init__(self, inputs, labels, classes: int):
        self.inputs = np.asarray(inputs, dtype=float)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.classes = int(classes)
        self.validate()

    def validate(self):
        """
        At least one finite sample and a valid label for every sample
        """
        if self.inputs.ndim != 2 or self.inputs.shape[0] < 1:
            raise InvalidInputError("A dataset needs at least one sample")
        if not np.all(np.isfinite(self.inputs)):
            raise InvalidInputError("Dataset inputs must be finite")
        if self.labels.shape != (self.inputs.shape[0],):
            raise InvalidInputError("A dataset needs one label per sample")
        if self.classes < 2 or np.any((self.labels < 0) | (self.labels >= self.classes)):
            raise InvalidInputError("Labels must be indices of at least two classes")

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def dimensions(self) -> int:
        """
        The input dimension d
        """
        return self.inputs.shape[1]

    def subset(self, indices) -> 'Dataset':
        """
        The samples at the given indices, in that order.

        :param indices: The sample indices
        :return: A new dataset
        """
        return Dataset(self.inputs[indices], self.labels[indices], self.classes)

    def split(self, seed: int, holdout_fraction: float = 0.2) -> Tuple['Dataset', 'Dataset']:
        """
        Split into a training and a holdout set using a seeded permutation.

        :param seed: The seed of the permutation
        :param holdout_fraction: The share of samples to hold out
        :return: The training set and the holdout set
        """
        if not 0 < holdout_fraction < 1:
            raise InvalidInputError("Holdout fraction must be in (0, 1)")

        holdout_size = int(round(holdout_fraction * len(self)))
        if not 0 < holdout_size < len(self):
            raise InvalidInputError("Dataset of {} samples is too small to split".format(len(self)))

        order = np.random.default_rng(seed).permutation(len(self))
        return self.subset(order[holdout_size:]), self.subset(order[:holdout_size])


class PairedDataset(Element):
    """
    Queries and documents where query i matches document i. Documents beyond the number of queries are distractors
    that match nothing.
    """

    def __init__(self, queries, docs):
        self.queries = np.asarray(queries, dtype=float)
        self.docs = np.asarray(docs, dtype=float)
        self.validate()

    def validate(self):
        """
        At least two pairs, and every query has a document
        """
        if self.queries.ndim != 2 or self.docs.ndim != 2:
            raise InvalidInputError("Queries and documents must be matrices")
        if self.queries.shape[0] < 2:
            raise InvalidInputError("A paired dataset needs at least two pairs")
        if self.docs.shape[0] < self.queries.shape[0]:
            raise InvalidInputError("Every query needs a matching document")
        if not (np.all(np.isfinite(self.queries)) and np.all(np.isfinite(self.docs))):
            raise InvalidInputError("Paired dataset contains non-finite values")

    def __len__(self):
        return self.queries.shape[0]

    @property
    def distractors(self) -> int:
        """
        The number of documents without a query
        """
        return self.docs.shape[0] - self.queries.shape[0]

    def split(self, train_pairs: int) -> Tuple['PairedDataset', 'PairedDataset']:
        """
        Split off the first pairs for training. The remaining pairs and all distractors are held out.

        :param train_pairs: The number of pairs to train on
        :return: The training set and the holdout set
        """
        if not 2 <= train_pairs <= len(self) - 2:
            raise InvalidInputError("Need at least two pairs on both sides of the split")

        train = PairedDataset(self.queries[:train_pairs], self.docs[:train_pairs])
        holdout = PairedDataset(self.queries[train_pairs:], self.docs[train_pairs:])
        return train, holdout


def gen_gaussian_blobs(seed: int, m: int, d: int, classes: int, separation: float) -> Dataset:
    """
    Class-balanced Gaussian clusters with unit variance. The class means lie on orthogonal axes, scaled so that every
    two means are `separation` apart.

    :param seed: The seed of the generator
    :param m: The number of samples
    :param d: The input dimension, at least the number of classes
    :param classes: The number of classes K
    :param separation: The distance between class means
    :return: The dataset
    """
    if classes < 2 or m < classes:
        raise InvalidInputError("Need at least two classes and at least one sample per class")
    if d < classes:
        raise InvalidInputError("Blobs need at least as many dimensions as classes")
    if not np.isfinite(separation) or separation < 0:
        raise InvalidInputError("Separation must be nonnegative")

    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(m) % classes)
    means = np.zeros((classes, d))
    means[np.arange(classes), np.arange(classes)] = separation / np.sqrt(2.0)
    inputs = means[labels] + rng.standard_normal((m, d))
    return Dataset(inputs, labels, classes)


def gen_paired_embeddings(seed: int, n: int, latent_dim: int, noise: float, query_dim: int = None,
                          doc_dim: int = None, distractors: int = 0, views: str = 'random') -> PairedDataset:
    """
    Noisy linear views of shared standard normal latents: query i is A·z_i + ε and document i is B·z_i + ε′. The
    views A and B are fixed random matrices, or identities when `views` is 'identity'.

    :param seed: The seed of the generator
    :param n: The number of pairs
    :param latent_dim: The latent dimension
    :param noise: The standard deviation of the view noise
    :param query_dim: The query dimension, the latent dimension by default
    :param doc_dim: The document dimension, the latent dimension by default
    :param distractors: The number of extra documents from independent latents
    :param views: 'random' or 'identity'
    :return: The paired dataset
    """
    query_dim = query_dim or latent_dim
    doc_dim = doc_dim or latent_dim
    if n < 2 or latent_dim < 1 or distractors < 0:
        raise InvalidInputError("Need at least two pairs, a latent dimension and no negative distractors")
    if not np.isfinite(noise) or noise < 0:
        raise InvalidInputError("Noise must be nonnegative")
    if views not in VIEWS:
        raise InvalidInputError("Views must be one of {}".format(', '.join(VIEWS)))

    rng = np.random.default_rng(seed)
    if views == 'identity':
        if query_dim != latent_dim or doc_dim != latent_dim:
            raise InvalidInputError("Identity views need query and document dimensions equal to the latent one")
        query_view = np.eye(latent_dim)
        doc_view = np.eye(latent_dim)
    else:
        query_view = rng.standard_normal((query_dim, latent_dim)) / np.sqrt(latent_dim)
        doc_view = rng.standard_normal((doc_dim, latent_dim)) / np.sqrt(latent_dim)

    latents = rng.standard_normal((n + distractors, latent_dim))
    queries = latents[:n] @ query_view.T + noise * rng.standard_normal((n, query_dim))
    docs = latents @ doc_view.T + noise * rng.standard_normal((n + distractors, doc_dim))
    return PairedDataset(queries, docs)
