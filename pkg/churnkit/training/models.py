"""
Tiny differentiable models with hand-written backpropagation: a linear model W·x + b and a one-hidden-layer
network W2·tanh(W1·x + b1) + b2. Inputs are rows, so a batch of m inputs gives an m×K matrix of scores.
"""
import numpy as np

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError
from churnkit.probability import softmax_array

from typing import List, Optional, Tuple

ARCHITECTURES = ('linear', 'mlp1')


class ModelParams(Element):
    """
    The weights and biases of a model, one (weight, bias) layer for 'linear' and two for 'mlp1'.
    """

    def __init__(self, architecture: str, weights: List[np.ndarray], biases: List[np.ndarray]):
        self.architecture = architecture
        self.weights = [np.asarray(weight, dtype=float) for weight in weights]
        self.biases = [np.asarray(bias, dtype=float) for bias in biases]
        self.validate()

    def validate(self):
        """
        Layer count matches the architecture, shapes chain up and everything is finite
        """
        if self.architecture not in ARCHITECTURES:
            raise InvalidInputError("Architecture must be one of {}".format(', '.join(ARCHITECTURES)))

        layers = 1 if self.architecture == 'linear' else 2
        if len(self.weights) != layers or len(self.biases) != layers:
            raise InvalidInputError("A {} model has {} layer(s)".format(self.architecture, layers))

        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            if weight.ndim != 2 or bias.shape != (weight.shape[0],):
                raise InvalidInputError("Layer {} has inconsistent shapes".format(index))
            if index and weight.shape[1] != self.weights[index - 1].shape[0]:
                raise InvalidInputError("Layer {} does not fit the previous layer".format(index))
            if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
                raise InvalidInputError("Layer {} contains non-finite parameters".format(index))

    @property
    def input_dimensions(self) -> int:
        """
        The input dimension d
        """
        return self.weights[0].shape[1]

    @property
    def output_dimensions(self) -> int:
        """
        The number of outputs K
        """
        return self.weights[-1].shape[0]

    @property
    def hidden_width(self) -> Optional[int]:
        """
        The hidden width h of an mlp1 model
        """
        if self.architecture == 'mlp1':
            return self.weights[0].shape[0]
        return None

    def arrays(self) -> List[np.ndarray]:
        """
        All parameter arrays in layer order, weight before bias. Updating them updates the model.

        :return: The parameter arrays
        """
        arrays = []
        for weight, bias in zip(self.weights, self.biases):
            arrays.extend([weight, bias])
        return arrays

    def copy(self) -> 'ModelParams':
        """
        A deep copy.

        :return: New parameters with the same values
        """
        return ModelParams(self.architecture, [weight.copy() for weight in self.weights],
                           [bias.copy() for bias in self.biases])

    def distance(self, other: 'ModelParams') -> float:
        """
        The L1 distance between two sets of parameters of the same shape.

        :param other: The other parameters
        :return: The sum of absolute differences
        """
        mine = self.arrays()
        theirs = other.arrays()
        if len(mine) != len(theirs) or any(a.shape != b.shape for a, b in zip(mine, theirs)):
            raise InvalidInputError("Cannot compare parameters of different shapes")
        return float(sum(np.sum(np.abs(a - b)) for a, b in zip(mine, theirs)))


def init_params(seed_init, architecture: str, d: int, k: int, h: Optional[int] = None) -> ModelParams:
    """
    Weights drawn uniformly from [-1/√fan_in, 1/√fan_in] and zero biases.

    :param seed_init: The seed of the generator, an integer or a numpy SeedSequence
    :param architecture: 'linear' or 'mlp1'
    :param d: The input dimension
    :param k: The number of outputs
    :param h: The hidden width, only for mlp1
    :return: The parameters
    """
    if architecture not in ARCHITECTURES:
        raise InvalidInputError("Architecture must be one of {}".format(', '.join(ARCHITECTURES)))
    if d < 1 or k < 1:
        raise InvalidInputError("Input and output dimensions must be positive")

    if architecture == 'linear':
        shapes = [(k, d)]
    else:
        if h is None or h < 1:
            raise InvalidInputError("An mlp1 model needs a positive hidden width")
        shapes = [(h, d), (k, h)]

    rng = np.random.default_rng(seed_init)
    weights = []
    for rows, fan_in in shapes:
        limit = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-limit, limit, size=(rows, fan_in)))
    return ModelParams(architecture, weights, [np.zeros(rows) for rows, _ in shapes])


def _check_inputs(params: ModelParams, inputs) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != params.input_dimensions:
        raise InvalidInputError("Expected inputs with {} columns, got shape {}".format(
            params.input_dimensions, inputs.shape))
    return inputs


def forward_with_cache(params: ModelParams, inputs) -> Tuple[np.ndarray, tuple]:
    """
    Compute the scores and keep what backpropagation needs.

    :param params: The model
    :param inputs: One input per row
    :return: The scores and the cache for :func:`backward`
    """
    inputs = _check_inputs(params, inputs)
    if params.architecture == 'linear':
        return inputs @ params.weights[0].T + params.biases[0], (inputs,)

    hidden = np.tanh(inputs @ params.weights[0].T + params.biases[0])
    return hidden @ params.weights[1].T + params.biases[1], (inputs, hidden)


def forward(params: ModelParams, inputs) -> np.ndarray:
    """
    The scores of a batch of inputs.

    :param params: The model
    :param inputs: One input per row
    :return: One row of K scores per input
    """
    scores, _ = forward_with_cache(params, inputs)
    return scores


def predict_proba(params: ModelParams, inputs, temperature: float = 1.0) -> np.ndarray:
    """
    The predicted distributions of a batch of inputs.

    :param params: The model
    :param inputs: One input per row
    :param temperature: Multiplier applied to the scores before the softmax
    :return: One distribution per row
    """
    return softmax_array(forward(params, inputs), temperature)


def backward(params: ModelParams, cache: tuple, grad_scores: np.ndarray) -> List[np.ndarray]:
    """
    Backpropagate the gradient of an objective to the scores into the parameters.

    :param params: The model
    :param cache: The cache from :func:`forward_with_cache`
    :param grad_scores: The gradient of the objective to the scores
    :return: Gradients in the order of :meth:`ModelParams.arrays`
    """
    if params.architecture == 'linear':
        inputs, = cache
        return [grad_scores.T @ inputs, np.sum(grad_scores, axis=0)]

    inputs, hidden = cache
    grad_hidden = (grad_scores @ params.weights[1]) * (1.0 - hidden ** 2)
    return [grad_hidden.T @ inputs, np.sum(grad_hidden, axis=0),
            grad_scores.T @ hidden, np.sum(grad_scores, axis=0)]
