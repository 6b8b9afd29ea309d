"""
The base class :class:`Element` provides the basic structure for the value objects of ChurnKit: probability vectors,
parameter records, metric reports etc. This base class provides several functions:

- Validation:
    Each element can validate if its contents are valid. Subclasses raise
    :class:`churnkit.exceptions.InvalidInputError` when they are not.

- Comparison:
    Two elements are equal when they are of the same class and all their constructor parameters are equal. Numpy
    arrays are compared element-wise.

- Representation:
    The default implementation provides __str__ and __repr__ methods so that
    elements can be printed for debugging and represented as a
    parseable Python string.

- Serialisation:
    :class:`JSONElementEncoder` turns elements, numpy scalars and numpy arrays into plain JSON. Non-finite floats are
    written as the strings ``"inf"``, ``"-inf"`` and ``"nan"`` so that the output stays valid JSON.
"""
import inspect
import math
from collections import OrderedDict
from inspect import Parameter
from json.encoder import JSONEncoder

import numpy as np


def _parameter_names(element: object) -> list:
    # The constructor parameters and the properties of an element must match
    signature = inspect.signature(element.__init__)
    return [parameter.name
            for parameter in signature.parameters.values()
            if parameter.kind not in (Parameter.VAR_POSITIONAL, Parameter.VAR_KEYWORD)]


def _values_equal(mine: object, theirs: object) -> bool:
    if isinstance(mine, np.ndarray) or isinstance(theirs, np.ndarray):
        return np.array_equal(np.asarray(mine), np.asarray(theirs))
    if isinstance(mine, (list, tuple)) and isinstance(theirs, (list, tuple)):
        return len(mine) == len(theirs) and all(_values_equal(a, b) for a, b in zip(mine, theirs))
    return mine == theirs


class Element:
    """
    An Element is a value object with the following extra requirement: the constructor parameters and the internal
    state properties must be identical. So if an object has a property `alpha` which is a float then the constructor
    must accept a named parameter called `alpha` which is stored in that property.
    """

    def validate(self):
        """
        Subclasses may overwrite this method to validate their state. Subclasses are expected to raise an
        InvalidInputError if validation fails.
        """
        pass

    def __eq__(self, other: object) -> bool:
        """
        Compare this object to another object. The result will be True if they are of the same class and if the
        properties have equal values and False otherwise.

        :param other: The other object
        :return: Whether this object is equal to the other one
        """
        # Use strict comparison, one being a subclass of the other is not good enough
        if type(self) is not type(other):
            return NotImplemented

        for name in _parameter_names(self):
            if not _values_equal(getattr(self, name), getattr(other, name)):
                return False

        return True

    # Elements are mutable in principle, so don't pretend they can be hashed
    __hash__ = None

    def __repr__(self):
        """
        Return a machine-readable representation of this element.

        :return: Parseable representation of this element
        """
        options_repr = ['{}={}'.format(name, repr(getattr(self, name))) for name in _parameter_names(self)]
        return '{}({})'.format(self.__class__.__name__, ', '.join(options_repr))

    def __str__(self):
        """
        Return a human-readable and indented representation of this element.

        :return: Readable representation of this element
        """
        names = _parameter_names(self)
        if not names:
            return '{}()'.format(self.__class__.__name__)

        lines = ['{}('.format(self.__class__.__name__)]
        for name in names:
            value_str = str(getattr(self, name)).replace('\n', '\n  ')
            lines.append('  {}={},'.format(name, value_str))
        lines[-1] = lines[-1].rstrip(',')
        lines.append(')')
        return '\n'.join(lines)

    def to_dict(self) -> OrderedDict:
        """
        The constructor parameters of this element as an ordered dictionary.

        :return: The properties of this element
        """
        return OrderedDict((name, getattr(self, name)) for name in _parameter_names(self))


def json_safe(o: object) -> object:
    """
    Convert a data structure to something that the standard JSON encoder can write without producing invalid JSON.

    :param o: The object to convert
    :return: A data structure with only JSON-compatible values
    """
    if isinstance(o, Element):
        return {o.__class__.__name__: json_safe(o.to_dict())}

    if isinstance(o, dict):
        return OrderedDict((str(key), json_safe(value)) for key, value in o.items())

    if isinstance(o, (list, tuple)):
        return [json_safe(item) for item in o]

    if isinstance(o, np.ndarray):
        return json_safe(o.tolist())

    if isinstance(o, np.bool_):
        return bool(o)

    if isinstance(o, np.integer):
        return int(o)

    if isinstance(o, (float, np.floating)):
        value = float(o)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value

    return o


class JSONElementEncoder(JSONEncoder):
    """
    A JSONEncoder that can handle Elements and numpy values
    """

    def iterencode(self, o, _one_shot=False):
        """
        Sanitise the whole structure first, the standard encoder never calls :meth:`default` for floats.
        """
        return super().iterencode(json_safe(o), _one_shot)

    def default(self, o):
        """
        Return a data structure that JSON can handle

        :param o: The object to convert
        :return: A serializable data structure
        """
        converted = json_safe(o)
        if converted is o:
            return super().default(o)
        return converted
