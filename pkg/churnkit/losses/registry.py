"""
Registry of the retrieval losses that experiments can select by name
"""
from churnkit.losses.cross_example import CrossExampleNegativeMiningLoss, CrossExampleSoftmaxLoss, \
    SampledSoftmaxLoss, StochasticNegativeMiningLoss
from churnkit.registry import Registry


class LossRegistry(Registry):
    """
    Registry for retrieval losses
    """
    entry_point = 'churnkit.losses'

    builtin = {
        'sampled-softmax': SampledSoftmaxLoss,
        'snm': StochasticNegativeMiningLoss,
        'ce-softmax': CrossExampleSoftmaxLoss,
        'ce-mining': CrossExampleNegativeMiningLoss,
    }


# Instantiate the loss registry
loss_registry = LossRegistry()
