"""
Extra datatypes for experiment configuration files
"""
from ZConfig.datatypes import RangeCheckedConversion

from churnkit.utils import parse_float_list

__all__ = ['seed', 'positive_int', 'positive_float', 'nonnegative_float', 'unit_interval', 'fraction', 'momentum',
           'float_list', 'seed_list', 'name_list', 'regularizer_kind', 'architecture', 'vary',
           'loss_variant_list']

seed = RangeCheckedConversion(int, min=0, max=2 ** 64 - 1)
"""An explicit unsigned 64-bit seed"""

positive_int = RangeCheckedConversion(int, min=1)


def positive_float(value: str) -> float:
    """
    A finite float larger than zero

    :param value: The textual value
    :return: The float
    """
    number = float(value)
    if not 0 < number < float('inf'):
        raise ValueError("{} must be a positive number".format(value))
    return number


def nonnegative_float(value: str) -> float:
    """
    A finite float of at least zero

    :param value: The textual value
    :return: The float
    """
    number = float(value)
    if not 0 <= number < float('inf'):
        raise ValueError("{} must be a nonnegative number".format(value))
    return number


def unit_interval(value: str) -> float:
    """
    A float in [0, 1]

    :param value: The textual value
    :return: The float
    """
    number = float(value)
    if not 0 <= number <= 1:
        raise ValueError("{} must be between 0 and 1".format(value))
    return number


def fraction(value: str) -> float:
    """
    A float in (0, 1]

    :param value: The textual value
    :return: The float
    """
    number = float(value)
    if not 0 < number <= 1:
        raise ValueError("{} must be larger than 0 and at most 1".format(value))
    return number


def momentum(value: str) -> float:
    """
    A float in [0, 1)

    :param value: The textual value
    :return: The float
    """
    number = float(value)
    if not 0 <= number < 1:
        raise ValueError("Momentum must be at least 0 and smaller than 1")
    return number


def float_list(value: str) -> list:
    """
    A list of floats separated by commas or whitespace, like "0, 0.3"

    :param value: The textual value
    :return: The floats
    """
    return parse_float_list(value)


def seed_list(value: str) -> list:
    """
    A list of explicit seeds separated by commas or whitespace

    :param value: The textual value
    :return: The seeds
    """
    seeds = []
    for item in value.replace(',', ' ').split():
        seeds.append(seed(item))
    if not seeds:
        raise ValueError("Expected at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ValueError("Seeds must be unique")
    return seeds


def name_list(value: str) -> list:
    """
    A list of names separated by commas or whitespace, lower cased

    :param value: The textual value
    :return: The names
    """
    names = [item.lower() for item in value.replace(',', ' ').split()]
    if not names:
        raise ValueError("Expected at least one name")
    return names


def _choice(name: str, choices: tuple):
    def convert(value: str) -> str:
        lower_value = value.lower()
        if lower_value not in choices:
            raise ValueError("{} must be one of {}".format(name, ', '.join(choices)))
        return lower_value

    convert.__name__ = name.lower().replace(' ', '_')
    return convert


regularizer_kind = _choice('Regularizer', ('entropic', 'kl-uniform', 'none'))
architecture = _choice('Architecture', ('linear', 'mlp1'))
vary = _choice('Vary', ('both', 'init', 'shuffle', 'none'))


def loss_variant_list(value: str) -> list:
    """
    A list of registered retrieval losses, like "sampled-softmax, ce-softmax"

    :param value: The textual value
    :return: The registry keys of the losses
    """
    from churnkit.losses.registry import loss_registry

    names = []
    for name in name_list(value):
        try:
            loss_class = loss_registry.lookup(name)
        except KeyError as e:
            raise ValueError(e.args[0])

        # Store the registry key, also when the alternative name was used
        key = next(key for key, item in loss_registry.items() if item is loss_class)
        if key in names:
            raise ValueError("Loss {} is listed twice".format(key))
        names.append(key)
    return names
