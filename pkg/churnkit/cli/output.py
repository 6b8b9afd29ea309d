"""
Writing results. CSV files use UTF-8, LF line endings and 17 significant digits, JSON files are written with sorted
keys, so the same results always produce the same bytes.
"""
import csv
import json
import logging
import os
from collections import OrderedDict

import numpy as np

import churnkit
from churnkit.element import JSONElementEncoder
from churnkit.utils import content_digest, format_float

from typing import Iterable, Sequence

logger = logging.getLogger(__name__)


def format_cell(value: object) -> str:
    """
    Format a value for a CSV cell.

    :param value: A number, boolean or string
    :return: The text of the cell
    """
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if value is None:
        return ''
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """
    Write a table.

    :param path: The file to write
    :param header: The column names
    :param rows: The rows, one value per column
    :return: The path
    """
    with open(path, 'w', encoding='utf-8', newline='') as csv_file:
        writer = csv.writer(csv_file, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError("Row {} doesn't match header {}".format(row, header))
            writer.writerow([format_cell(value) for value in row])

    logger.info("Wrote {}".format(path))
    return path


def write_json(path: str, data: object) -> str:
    """
    Write a JSON document with sorted keys and a trailing newline.

    :param path: The file to write
    :param data: The data, may contain Elements and numpy values
    :return: The path
    """
    with open(path, 'w', encoding='utf-8', newline='\n') as json_file:
        json.dump(data, json_file, cls=JSONElementEncoder, sort_keys=True, indent=2, allow_nan=False)
        json_file.write('\n')

    logger.info("Wrote {}".format(path))
    return path


def results_bundle(command: str, config_text: str, overrides: dict, runs: object, aggregates: object) -> OrderedDict:
    """
    Everything needed to interpret and re-run an experiment: the configuration it ran with, the per-run metrics and
    their aggregates.

    :param command: The command that produced the results
    :param config_text: The text of the configuration file
    :param overrides: Settings given on the command line that override the configuration file
    :param runs: The per-run metrics
    :param aggregates: The aggregate statistics
    :return: The bundle
    """
    return OrderedDict([
        ('command', command),
        ('version', churnkit.__version__),
        ('config', config_text),
        ('config_digest', content_digest([config_text.encode('utf-8')])),
        ('overrides', overrides),
        ('runs', runs),
        ('aggregates', aggregates),
    ])


def prepare_directory(path: str) -> str:
    """
    Create the output directory if it doesn't exist yet.

    :param path: The directory
    :return: The absolute path
    """
    path = os.path.abspath(path)
    os.makedirs(path, exist_ok=True)
    return path


def slug(value: object) -> str:
    """
    A value formatted for use in a file name, like 0.3 → "0.3" and "ce-softmax" → "ce-softmax".

    :param value: The value
    :return: The file name fragment
    """
    text = format_cell(value) if not isinstance(value, float) else repr(value)
    return ''.join(char if char.isalnum() or char in '.-' else '_' for char in text)
