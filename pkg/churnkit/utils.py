"""
Utility functions
"""
import hashlib
import math
import re

from typing import Iterable, List


def camelcase_to_underscore(camelcase: str) -> str:
    """
    Convert a name in CamelCase to non_camel_case

    :param camelcase: CamelCased string
    :return: non_camel_cased string
    """
    # Handle weird Camel-Case notation
    s0 = camelcase.replace('-', '_')

    # Insert an underscore before any uppercase letter which is followed by a lowercase letter
    s1 = re.sub('(.)([A-Z][a-z]+)', r'\1_\2', s0)

    # Insert an underscore before any uppercase letter which is preceded by a lowercase letter or number
    s2 = re.sub('([a-z0-9])([A-Z])', r'\1_\2', s1)

    # Lowercase and collapse double underscores
    return re.sub(r'_+', '_', s2.lower())


def camelcase_to_dash(camelcase: str) -> str:
    """
    Convert a name in CamelCase to non-camel-case

    :param camelcase: CamelCased string
    :return: non-camel-cased string
    """
    return camelcase_to_underscore(camelcase).replace('_', '-')


def format_float(value: float) -> str:
    """
    Format a float so that it round-trips exactly. Non-finite values become ``inf``, ``-inf`` and ``nan``.

    :param value: The value to format
    :return: The textual representation
    """
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return format(value, '.17g')


def parse_float_list(value: str) -> List[float]:
    """
    Parse a list of floats separated by commas and/or whitespace.

    :param value: The textual list, like "0, 0.3" or "1 2 4"
    :return: The parsed floats
    """
    items = [item for item in re.split(r'[\s,]+', value.strip()) if item]
    if not items:
        raise ValueError("Expected at least one number")

    try:
        return [float(item) for item in items]
    except ValueError:
        raise ValueError("{!r} is not a list of numbers".format(value))


def content_digest(chunks: Iterable[bytes]) -> str:
    """
    Compute the SHA-256 digest of some content, used to tie result bundles to the configuration they came from.

    :param chunks: The content in one or more pieces
    :return: The hex digest
    """
    digest = hashlib.sha256()
    for chunk in chunks:
        digest.update(chunk)
    return digest.hexdigest()
