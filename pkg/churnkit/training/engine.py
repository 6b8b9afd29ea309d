"""
Minibatch SGD with momentum for classifiers and dual encoders. A run is sequential and fully determined by its
configuration and dataset: the initial weights come from `seed_init` and the minibatch order from `seed_shuffle`.
"""
import logging

import numpy as np

from churnkit.common.logging import DEBUG_EPOCHS, DEBUG_STEPS
from churnkit.element import Element
from churnkit.exceptions import InvalidInputError, TrainingFailure
from churnkit.losses.cross_example import MiningSpec, RetrievalLoss, cosine_scores, cosine_scores_backward
from churnkit.losses.regularised import RegParams, softmax_reg_loss_grad_batch
from churnkit.losses.registry import loss_registry
from churnkit.training.datasets import Dataset, PairedDataset
from churnkit.training.models import ARCHITECTURES, ModelParams, backward, forward_with_cache, init_params

from typing import List, Optional, Tuple

logger = logging.getLogger(__name__)

CLASSIFICATION = 'classification'


class TrainConfig(Element):
    """
    Everything that determines a training run besides the data.
    """

    def __init__(self, seed_init: int, seed_shuffle: int, learning_rate: float = 0.1, momentum: float = 0.9,
                 batch_size: int = 32, epochs: int = 30, reg: RegParams = None, loss: str = CLASSIFICATION,
                 mining: Optional[MiningSpec] = None, temperature: float = 1.0, architecture: str = 'linear',
                 hidden_width: Optional[int] = None, embedding_dimensions: Optional[int] = None,
                 square_temperature: bool = True):
        self.seed_init = int(seed_init)
        self.seed_shuffle = int(seed_shuffle)
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.batch_size = int(batch_size)
        self.epochs = int(epochs)
        self.reg = reg or RegParams(0.0, 'none')
        self.loss = loss
        self.mining = mining
        self.temperature = float(temperature)
        self.architecture = architecture
        self.hidden_width = hidden_width
        self.embedding_dimensions = embedding_dimensions
        self.square_temperature = bool(square_temperature)
        self.validate()

    def validate(self):
        """
        Check the optimiser settings and that the loss and architecture exist
        """
        for seed in (self.seed_init, self.seed_shuffle):
            if not 0 <= seed < 2 ** 64:
                raise InvalidInputError("Seeds must be unsigned 64-bit integers")
        if not np.isfinite(self.learning_rate) or self.learning_rate <= 0:
            raise InvalidInputError("Learning rate must be positive")
        if not 0 <= self.momentum < 1:
            raise InvalidInputError("Momentum must be in [0, 1)")
        if self.batch_size < 1:
            raise InvalidInputError("Batch size must be at least 1")
        if self.epochs < 1:
            raise InvalidInputError("Train for at least one epoch")
        if not np.isfinite(self.temperature) or self.temperature <= 0:
            raise InvalidInputError("Temperature must be positive")
        if self.architecture not in ARCHITECTURES:
            raise InvalidInputError("Architecture must be one of {}".format(', '.join(ARCHITECTURES)))
        if self.architecture == 'mlp1' and not self.hidden_width:
            raise InvalidInputError("An mlp1 model needs a hidden width")

        if self.loss != CLASSIFICATION:
            try:
                loss_class = loss_registry.lookup(self.loss)
            except KeyError as e:
                raise InvalidInputError(e.args[0]) from e
            if loss_class.uses_mining and self.mining is None:
                raise InvalidInputError("Loss {} needs a mining specification".format(self.loss))

    def with_changes(self, **changes) -> 'TrainConfig':
        """
        A copy of this configuration with some fields replaced.

        :param changes: The fields to replace
        :return: The new configuration
        """
        fields = self.to_dict()
        fields.update(changes)
        return TrainConfig(**fields)

    def retrieval_loss(self) -> RetrievalLoss:
        """
        The configured retrieval loss.

        :return: A callable loss
        """
        return loss_registry.lookup(self.loss)(self.mining)


class EpochMetrics(Element):
    """
    The mean training loss of an epoch and, for classifiers, the training accuracy.
    """

    def __init__(self, epoch: int, loss: float, accuracy: Optional[float] = None):
        self.epoch = int(epoch)
        self.loss = float(loss)
        self.accuracy = accuracy


class TrainedModel(Element):
    """
    The outcome of a training run. Dual encoders also have document encoder parameters.
    """

    def __init__(self, config: TrainConfig, params: ModelParams, history: List[EpochMetrics],
                 doc_params: Optional[ModelParams] = None):
        self.config = config
        self.params = params
        self.history = history
        self.doc_params = doc_params


class MomentumSGD:
    """
    Stochastic gradient descent with heavy-ball momentum: v ← μ·v + g, w ← w - η·v. Updates happen in place.
    """

    def __init__(self, arrays: List[np.ndarray], learning_rate: float, momentum: float):
        self.arrays = arrays
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.velocities = [np.zeros_like(array) for array in arrays]

    def step(self, grads: List[np.ndarray]):
        """
        Apply one update.

        :param grads: One gradient per parameter array
        """
        for array, velocity, grad in zip(self.arrays, self.velocities, grads):
            velocity *= self.momentum
            velocity += grad
            array -= self.learning_rate * velocity


def classification_objective(params: ModelParams, inputs: np.ndarray, labels: np.ndarray, reg: RegParams,
                             temperature: float = 1.0) -> Tuple[float, List[np.ndarray], np.ndarray]:
    """
    The mean regularised log-loss of a minibatch and its gradient to the parameters.

    :param params: The model
    :param inputs: The minibatch inputs
    :param labels: The minibatch labels
    :param reg: The regulariser
    :param temperature: Multiplier applied to the scores before the softmax
    :return: The loss, the gradients in the order of :meth:`ModelParams.arrays` and the scores
    """
    scores, cache = forward_with_cache(params, inputs)
    loss, grad_scores = softmax_reg_loss_grad_batch(scores, labels, reg, temperature)
    return loss, backward(params, cache, grad_scores), scores


def retrieval_objective(query_params: ModelParams, doc_params: ModelParams, queries: np.ndarray, docs: np.ndarray,
                        loss: RetrievalLoss, temperature: float,
                        square_temperature: bool = True) -> Tuple[float, List[np.ndarray], List[np.ndarray]]:
    """
    A retrieval loss on the scaled cosine similarities of a minibatch of pairs, and its gradients to both encoders.

    :param query_params: The query encoder
    :param doc_params: The document encoder
    :param queries: The minibatch queries
    :param docs: The matching documents
    :param loss: The retrieval loss
    :param temperature: The temperature λ
    :param square_temperature: Scale cosines by λ² instead of λ
    :return: The loss and the gradients of the query and the document encoder
    """
    query_embeddings, query_cache = forward_with_cache(query_params, queries)
    doc_embeddings, doc_cache = forward_with_cache(doc_params, docs)
    similarities = cosine_scores(query_embeddings, doc_embeddings, temperature, square_temperature)

    value, grad_similarities = loss(similarities)
    grad_queries, grad_docs = cosine_scores_backward(query_embeddings, doc_embeddings, grad_similarities,
                                                     temperature, square_temperature)
    return value, backward(query_params, query_cache, grad_queries), backward(doc_params, doc_cache, grad_docs)


def _check_finite(loss: float, epoch: int):
    if not np.isfinite(loss):
        raise TrainingFailure("loss is {}".format(loss), epoch)


def _train_classifier(config: TrainConfig, dataset: Dataset) -> TrainedModel:
    params = init_params(config.seed_init, config.architecture, dataset.dimensions, dataset.classes,
                         config.hidden_width)
    optimiser = MomentumSGD(params.arrays(), config.learning_rate, config.momentum)
    shuffle_rng = np.random.default_rng(config.seed_shuffle)

    history = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(dataset))
        total_loss = 0.0
        correct = 0
        for step, start in enumerate(range(0, len(dataset), config.batch_size)):
            batch = order[start:start + config.batch_size]
            loss, grads, scores = classification_objective(params, dataset.inputs[batch], dataset.labels[batch],
                                                           config.reg, config.temperature)
            _check_finite(loss, epoch)
            logger.log(DEBUG_STEPS, "Epoch {} step {}: loss {:.6f}".format(epoch, step, loss))

            optimiser.step(grads)
            total_loss += loss * len(batch)
            correct += int(np.count_nonzero(np.argmax(scores, axis=1) == dataset.labels[batch]))

        metrics = EpochMetrics(epoch, total_loss / len(dataset), correct / len(dataset))
        logger.log(DEBUG_EPOCHS, "Epoch {}: loss {:.6f}, accuracy {:.4f}".format(
            epoch, metrics.loss, metrics.accuracy))
        history.append(metrics)

    return TrainedModel(config, params, history)


def _train_dual_encoder(config: TrainConfig, dataset: PairedDataset) -> TrainedModel:
    if not config.embedding_dimensions:
        raise InvalidInputError("Dual encoders need an embedding dimension")
    if not 2 <= config.batch_size <= len(dataset):
        raise InvalidInputError("Retrieval batches need between 2 and {} pairs".format(len(dataset)))

    # Independent initialisation streams for both encoders
    query_seed, doc_seed = np.random.SeedSequence(config.seed_init).spawn(2)
    query_params = init_params(query_seed, config.architecture, dataset.queries.shape[1],
                               config.embedding_dimensions, config.hidden_width)
    doc_params = init_params(doc_seed, config.architecture, dataset.docs.shape[1],
                             config.embedding_dimensions, config.hidden_width)

    optimiser = MomentumSGD(query_params.arrays() + doc_params.arrays(), config.learning_rate, config.momentum)
    shuffle_rng = np.random.default_rng(config.seed_shuffle)
    loss_fn = config.retrieval_loss()

    # Incomplete batches would change the size of the negative sets, so they are dropped
    batches_per_epoch = len(dataset) // config.batch_size

    history = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(dataset))
        total_loss = 0.0
        for step in range(batches_per_epoch):
            batch = order[step * config.batch_size:(step + 1) * config.batch_size]
            loss, query_grads, doc_grads = retrieval_objective(query_params, doc_params, dataset.queries[batch],
                                                               dataset.docs[batch], loss_fn, config.temperature,
                                                               config.square_temperature)
            _check_finite(loss, epoch)
            logger.log(DEBUG_STEPS, "Epoch {} step {}: loss {:.6f}".format(epoch, step, loss))

            optimiser.step(query_grads + doc_grads)
            total_loss += loss

        metrics = EpochMetrics(epoch, total_loss / batches_per_epoch)
        logger.log(DEBUG_EPOCHS, "Epoch {}: loss {:.6f}".format(epoch, metrics.loss))
        history.append(metrics)

    return TrainedModel(config, query_params, history, doc_params)


def train(config: TrainConfig, dataset) -> TrainedModel:
    """
    Train a classifier on a Dataset, or a pair of encoders on a PairedDataset when the configured loss is a
    retrieval loss.

    :param config: The training configuration
    :param dataset: The training data
    :return: The trained model and its per-epoch metrics
    """
    if config.loss == CLASSIFICATION:
        if not isinstance(dataset, Dataset):
            raise InvalidInputError("Classification needs a labelled Dataset")
        return _train_classifier(config, dataset)

    if not isinstance(dataset, PairedDataset):
        raise InvalidInputError("Loss {} needs a PairedDataset".format(config.loss))
    return _train_dual_encoder(config, dataset)
