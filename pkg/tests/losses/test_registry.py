"""
Test the registry of retrieval losses
"""
import unittest

from churnkit.losses.cross_example import CrossExampleNegativeMiningLoss, CrossExampleSoftmaxLoss, \
    SampledSoftmaxLoss, StochasticNegativeMiningLoss
from churnkit.losses.registry import LossRegistry, loss_registry


class LossRegistryTestCase(unittest.TestCase):
    def test_names(self):
        self.assertEqual(sorted(loss_registry), ['ce-mining', 'ce-softmax', 'sampled-softmax', 'snm'])

    def test_lookup(self):
        expected = {
            'sampled-softmax': SampledSoftmaxLoss,
            'snm': StochasticNegativeMiningLoss,
            'ce-softmax': CrossExampleSoftmaxLoss,
            'ce-mining': CrossExampleNegativeMiningLoss,
        }
        for name, loss in expected.items():
            with self.subTest(name=name):
                self.assertIs(loss_registry.lookup(name), loss)

    def test_lookup_by_class_name(self):
        self.assertIs(LossRegistry().lookup('cross-example-negative-mining-loss'), CrossExampleNegativeMiningLoss)

    def test_unknown(self):
        with self.assertRaisesRegex(KeyError, "Unknown LossRegistry entry 'infonce'"):
            loss_registry.lookup('infonce')


if __name__ == '__main__':
    unittest.main()
