"""
Configuration file definition and parsing
"""
import io
import logging
import os

from ZConfig.loader import ConfigLoader, SchemaLoader

from churnkit.cli.config_elements import MainConfig

from typing import Tuple

logger = logging.getLogger(__name__)


def get_config_loader() -> ConfigLoader:
    """
    Get the config loader for experiment files

    :return: The config loader
    """
    schema_filename = os.path.abspath(os.path.join(os.path.dirname(__file__), "config_schema.xml"))

    schema_loader = SchemaLoader()
    schema = schema_loader.loadURL(url=schema_filename)
    return ConfigLoader(schema=schema)


def load_config(config_filename: str) -> Tuple[MainConfig, str]:
    """
    Load the given configuration file.

    :param config_filename: The configuration file
    :return: The parsed config and the text it was parsed from
    """
    logger.debug("Loading configuration file {}".format(config_filename))

    config_filename = os.path.realpath(config_filename)
    with open(config_filename, encoding='utf-8') as config_file:
        config_text = config_file.read()

    config_loader = get_config_loader()
    # Parse exactly the text that ends up in the results
    config, handlers = config_loader.loadFile(io.StringIO(config_text), url=config_filename)

    return config, config_text
