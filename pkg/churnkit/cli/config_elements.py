"""
The configuration objects of experiment files
"""
import logging
import os

from cached_property import cached_property

from churnkit.common.config_datatypes import positive_int
from churnkit.common.config_elements import ConfigSection
from churnkit.losses.cross_example import MiningSpec
from churnkit.losses.regularised import RegParams
from churnkit.losses.registry import loss_registry
from churnkit.training.engine import TrainConfig
from churnkit.training.experiments import BlobSpec, PairedSpec

logger = logging.getLogger(__name__)

WORKERS_ENVIRONMENT = 'CHURNKIT_WORKERS'


class MainConfig(ConfigSection):
    """
    The top level configuration element
    """

    def clean_config_section(self):
        """
        Let the environment override the number of workers
        """
        workers = os.environ.get(WORKERS_ENVIRONMENT)
        if workers:
            try:
                self.section.workers = positive_int(workers)
            except ValueError:
                raise ValueError("{} must be a positive integer, not {!r}".format(WORKERS_ENVIRONMENT, workers))


class ExperimentSection(ConfigSection):
    """
    Settings shared by both experiments
    """

    kind = None
    """The command that runs this experiment"""

    def validate_config_section(self):
        """
        An mlp1 model needs a hidden width
        """
        if self.architecture == 'mlp1' and not self.hidden_width:
            raise ValueError("Architecture mlp1 needs a hidden-width")

    def train_settings(self) -> dict:
        """
        The training settings that both experiments share.

        :return: Keyword arguments for :class:`TrainConfig`
        """
        return {
            'learning_rate': self.learning_rate,
            'momentum': self.momentum,
            'batch_size': self.batch_size,
            'epochs': self.epochs,
            'temperature': self.temperature,
            'architecture': self.architecture,
            'hidden_width': self.hidden_width,
        }


class ChurnExperimentSection(ExperimentSection):
    """
    Configuration of a churn experiment
    """

    kind = 'churn'

    def validate_config_section(self):
        """
        Check the dataset and the sweep
        """
        super().validate_config_section()

        if self.classes < 2:
            raise ValueError("A churn experiment needs at least two classes")
        if self.dimensions < self.classes:
            raise ValueError("Dimensions must be at least the number of classes")
        if self.holdout_fraction >= 1:
            raise ValueError("The holdout fraction must be smaller than 1")

        holdout = int(round(self.holdout_fraction * self.samples))
        if not 0 < holdout < self.samples:
            raise ValueError("{} samples are too few to hold out a fraction of {}".format(
                self.samples, self.holdout_fraction))

        for alpha in self.alphas:
            # Raises a ValueError for strengths the regulariser doesn't accept
            RegParams(alpha, self.regularizer)

    @cached_property
    def train_config(self) -> TrainConfig:
        """
        The training configuration, its seeds are replaced for every model
        """
        return TrainConfig(seed_init=self.base_seed, seed_shuffle=self.base_seed,
                           reg=RegParams(0.0, self.regularizer), **self.train_settings())

    @cached_property
    def dataset_spec(self) -> BlobSpec:
        """
        The Gaussian blobs to train and evaluate on
        """
        return BlobSpec(self.samples, self.dimensions, self.classes, self.separation, self.dataset_seed,
                        self.holdout_fraction)


class RetrievalExperimentSection(ExperimentSection):
    """
    Configuration of a retrieval experiment
    """

    kind = 'retrieval'

    def validate_config_section(self):
        """
        Check the dataset, the minibatches and the mining settings
        """
        super().validate_config_section()

        if self.pairs < 2 or self.holdout_pairs < 2:
            raise ValueError("Training and holdout both need at least two pairs")
        if self.distractors < 0:
            raise ValueError("The number of distractors can't be negative")
        if not 2 <= self.batch_size <= self.pairs:
            raise ValueError("The batch size must be at least 2 and at most the number of training pairs")

        if self.mining_fraction is not None and self.mining_k is not None:
            raise ValueError("Configure either mining-fraction or mining-k, not both")

        # Every query has batch-size - 1 negatives
        if self.mining_k is not None and self.mining_k > self.batch_size - 1:
            raise ValueError("Cannot mine {} negatives from batches of {} pairs".format(
                self.mining_k, self.batch_size))

        if self.mining is None:
            mining_losses = [loss for loss in self.losses if loss_registry[loss].uses_mining]
            if mining_losses:
                raise ValueError("Losses {} need mining-fraction or mining-k".format(', '.join(mining_losses)))

    @property
    def mining(self) -> MiningSpec:
        """
        The mining settings, if any
        """
        if self.mining_fraction is None and self.mining_k is None:
            return None
        return MiningSpec(fraction=self.mining_fraction, k=self.mining_k)

    @cached_property
    def train_config(self) -> TrainConfig:
        """
        The training configuration, its loss and seeds are replaced for every run
        """
        return TrainConfig(seed_init=self.seeds[0], seed_shuffle=self.seeds[0], loss=self.losses[0],
                           mining=self.mining, embedding_dimensions=self.embedding_dimensions,
                           square_temperature=self.square_temperature, **self.train_settings())

    @cached_property
    def dataset_spec(self) -> PairedSpec:
        """
        The paired embeddings to train and evaluate on
        """
        return PairedSpec(self.pairs, self.latent_dimensions, self.noise, self.holdout_pairs, self.dataset_seed,
                          self.distractors, self.query_dimensions, self.doc_dimensions)
