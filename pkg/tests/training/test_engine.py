"""
Test the training loop for classifiers and dual encoders
"""
import unittest
from unittest.mock import patch

import numpy as np

from churnkit.common.logging import DEBUG_EPOCHS
from churnkit.exceptions import InvalidInputError, TrainingFailure
from churnkit.losses.cross_example import MiningSpec, SampledSoftmaxLoss
from churnkit.losses.regularised import RegParams
from churnkit.training.datasets import gen_gaussian_blobs, gen_paired_embeddings
from churnkit.training.engine import MomentumSGD, TrainConfig, classification_objective, train
from churnkit.training.gradcheck import numerical_gradient, relative_error
from churnkit.training.models import ModelParams, init_params, predict_proba


class TrainConfigTestCase(unittest.TestCase):
    def test_defaults(self):
        config = TrainConfig(1, 2)
        self.assertEqual(config.reg, RegParams(0.0, 'none'))
        self.assertEqual(config.loss, 'classification')
        self.assertEqual(config.architecture, 'linear')

    def test_bad(self):
        bad = [
            (dict(seed_init=-1), "unsigned 64-bit"),
            (dict(seed_shuffle=2 ** 64), "unsigned 64-bit"),
            (dict(learning_rate=0.0), "Learning rate must be positive"),
            (dict(momentum=1.0), r"Momentum must be in \[0, 1\)"),
            (dict(batch_size=0), "Batch size must be at least 1"),
            (dict(epochs=0), "at least one epoch"),
            (dict(temperature=-1.0), "Temperature must be positive"),
            (dict(architecture='resnet'), "Architecture must be one of"),
            (dict(architecture='mlp1'), "needs a hidden width"),
            (dict(loss='triplet'), "Unknown .* entry 'triplet'"),
            (dict(loss='snm'), "Loss snm needs a mining specification"),
        ]
        for changes, message in bad:
            fields = dict(seed_init=1, seed_shuffle=2)
            fields.update(changes)
            with self.subTest(changes=changes):
                with self.assertRaisesRegex(InvalidInputError, message):
                    TrainConfig(**fields)

    def test_with_changes(self):
        config = TrainConfig(1, 2, learning_rate=0.05, reg=RegParams(0.3))
        changed = config.with_changes(seed_init=9)
        self.assertEqual(changed.seed_init, 9)
        self.assertEqual(changed.learning_rate, 0.05)
        self.assertEqual(changed.reg, RegParams(0.3))
        self.assertEqual(config.seed_init, 1)

        with self.assertRaisesRegex(InvalidInputError, "Batch size"):
            config.with_changes(batch_size=0)

    def test_retrieval_loss(self):
        config = TrainConfig(1, 2, loss='sampled-softmax')
        self.assertIsInstance(config.retrieval_loss(), SampledSoftmaxLoss)
        TrainConfig(1, 2, loss='snm', mining=MiningSpec(k=2))


class MomentumSGDTestCase(unittest.TestCase):
    def test_updates(self):
        weights = np.array([1.0])
        optimiser = MomentumSGD([weights], learning_rate=0.1, momentum=0.9)

        optimiser.step([np.array([1.0])])
        self.assertAlmostEqual(weights[0], 0.9)

        # The velocity is now 1.9
        optimiser.step([np.array([1.0])])
        self.assertAlmostEqual(weights[0], 0.71)

    def test_no_momentum(self):
        weights = np.array([1.0, 2.0])
        optimiser = MomentumSGD([weights], learning_rate=0.5, momentum=0.0)
        optimiser.step([np.array([1.0, 1.0])])
        optimiser.step([np.array([1.0, 1.0])])
        np.testing.assert_allclose(weights, [0.0, 1.0])


class ObjectiveTestCase(unittest.TestCase):
    def test_classification_gradient(self):
        rng = np.random.default_rng(4)
        params = init_params(4, 'mlp1', 3, 3, 5)
        inputs = rng.normal(size=(8, 3))
        labels = rng.integers(3, size=8)
        reg = RegParams(0.4, 'entropic')

        _, grads, _ = classification_objective(params, inputs, labels, reg, 1.5)
        for index, array in enumerate(params.arrays()):
            def objective(values, index=index):
                arrays = params.copy().arrays()
                arrays[index][...] = values
                trial = ModelParams(params.architecture, arrays[0::2], arrays[1::2])
                return classification_objective(trial, inputs, labels, reg, 1.5)[0]

            with self.subTest(array=index):
                self.assertLess(relative_error(grads[index], numerical_gradient(objective, array)), 1e-5)


class ClassifierTrainingTestCase(unittest.TestCase):
    def setUp(self):
        self.dataset = gen_gaussian_blobs(1, 200, 2, 2, 4.0)
        self.config = TrainConfig(11, 12, learning_rate=0.1, momentum=0.9, batch_size=20, epochs=15)

    def test_learns(self):
        model = train(self.config, self.dataset)
        self.assertEqual(len(model.history), 15)
        self.assertLess(model.history[-1].loss, model.history[0].loss)
        self.assertGreater(model.history[-1].accuracy, 0.9)
        self.assertIsNone(model.doc_params)

    def test_deterministic(self):
        first = train(self.config, self.dataset)
        second = train(self.config, self.dataset)
        self.assertEqual(first.params, second.params)
        self.assertEqual(first.history, second.history)

        reshuffled = train(self.config.with_changes(seed_shuffle=13), self.dataset)
        self.assertNotEqual(first.params, reshuffled.params)

    def test_regularised_mlp(self):
        config = self.config.with_changes(architecture='mlp1', hidden_width=4, reg=RegParams(0.3, 'kl-uniform'),
                                          epochs=5)
        model = train(config, self.dataset)
        self.assertEqual(model.params.hidden_width, 4)
        self.assertTrue(all(np.isfinite(metrics.loss) for metrics in model.history))

    def test_regularised_full_batch_forgets_init(self):
        # The regularised objective has a unique minimiser, full batches reach it from any initial weights
        config = self.config.with_changes(learning_rate=1.0, momentum=0.6, batch_size=len(self.dataset), epochs=200,
                                          reg=RegParams(0.3, 'kl-uniform'))
        first = train(config, self.dataset)
        second = train(config.with_changes(seed_init=99), self.dataset)
        self.assertNotEqual(first.params, second.params)
        np.testing.assert_allclose(predict_proba(first.params, self.dataset.inputs),
                                   predict_proba(second.params, self.dataset.inputs), atol=1e-3)

    def test_epoch_logging(self):
        with self.assertLogs('churnkit.training.engine', DEBUG_EPOCHS) as cm:
            train(self.config.with_changes(epochs=3), self.dataset)

        self.assertEqual(len(cm.records), 3)
        self.assertTrue(all(record.levelno == DEBUG_EPOCHS for record in cm.records))
        self.assertRegex(cm.output[0], r'^EPOCH:churnkit.training.engine:Epoch 0: loss')

    def test_divergence(self):
        def nan_loss(scores, labels, reg, temperature):
            return float('nan'), np.zeros_like(scores)

        with patch('churnkit.training.engine.softmax_reg_loss_grad_batch', side_effect=nan_loss):
            with self.assertRaisesRegex(TrainingFailure, "Training failed in epoch 0: loss is nan") as cm:
                train(self.config, self.dataset)

        self.assertEqual(cm.exception.epoch, 0)

    def test_wrong_dataset(self):
        with self.assertRaisesRegex(InvalidInputError, "labelled Dataset"):
            train(self.config, gen_paired_embeddings(1, 10, 2, 0.1))


class DualEncoderTrainingTestCase(unittest.TestCase):
    def setUp(self):
        self.dataset = gen_paired_embeddings(4, 40, 4, 0.1)
        self.config = TrainConfig(21, 22, learning_rate=0.05, batch_size=8, epochs=5, loss='sampled-softmax',
                                  temperature=2.0, embedding_dimensions=4)

    def test_trains(self):
        model = train(self.config, self.dataset)
        self.assertEqual(len(model.history), 5)
        self.assertEqual(model.params.output_dimensions, 4)
        self.assertEqual(model.doc_params.output_dimensions, 4)
        self.assertNotEqual(model.params, model.doc_params)
        self.assertTrue(all(np.isfinite(metrics.loss) for metrics in model.history))
        self.assertIsNone(model.history[0].accuracy)

    def test_mining_losses(self):
        for loss in ('snm', 'ce-mining'):
            with self.subTest(loss=loss):
                model = train(self.config.with_changes(loss=loss, mining=MiningSpec(fraction=0.5), epochs=2),
                              self.dataset)
                self.assertEqual(len(model.history), 2)

    def test_deterministic(self):
        first = train(self.config, self.dataset)
        second = train(self.config, self.dataset)
        self.assertEqual(first.params, second.params)
        self.assertEqual(first.doc_params, second.doc_params)

    def test_bad(self):
        with self.assertRaisesRegex(InvalidInputError, "need an embedding dimension"):
            train(self.config.with_changes(embedding_dimensions=None), self.dataset)
        with self.assertRaisesRegex(InvalidInputError, "between 2 and 40 pairs"):
            train(self.config.with_changes(batch_size=41), self.dataset)
        with self.assertRaisesRegex(InvalidInputError, "needs a PairedDataset"):
            train(self.config, gen_gaussian_blobs(1, 20, 2, 2, 1.0))


if __name__ == '__main__':
    unittest.main()
