"""
Base class for entry point based registries
"""
import collections
import logging
from importlib.metadata import entry_points

from churnkit.utils import camelcase_to_dash

logger = logging.getLogger(__name__)


class Registry(collections.UserDict):
    """
    Base class for registries
    """

    entry_point = 'churnkit.NONE'
    """The name of the entry_point group"""

    builtin = {}
    """Items that are always available, also when the package metadata is not installed"""

    def __init__(self):
        """
        A custom dictionary that initialises itself with the entry points of the installed distributions
        """
        super().__init__()

        # A name-based alternative
        self.by_name = {}
        """An alternative name-based mapping"""

        # Try all the entry points
        for entry_point in entry_points(group=self.entry_point):
            name = entry_point.name
            if name in self.data:
                logger.warning("Multiple entry points found for {} {}, using {}".format(
                    self.__class__.__name__, name, self.data[name]))
                continue

            try:
                loaded = entry_point.load()
            except (ImportError, AttributeError):
                # Ok, this one isn't working, skip it
                logger.error("Entry point {} for {} could not be loaded".format(
                    entry_point.value, self.__class__.__name__))
                continue

            self.add(name, loaded)

        for name, item in self.builtin.items():
            if name not in self.data:
                logger.debug("Using built-in {} for {}".format(self.__class__.__name__, name))
                self.add(name, item)

    def add(self, name: str, item: object):
        """
        Store an item under its key and under its alternative name.

        :param name: The registry key
        :param item: The item to store
        """
        self.data[name] = item
        self.by_name[self.get_name(item)] = item

    def get_name(self, item: object) -> str:
        """
        Get the name for the by_name mapping.

        :param item: The item to determine the name of
        :return: The name to use as key in the mapping
        """
        return camelcase_to_dash(item.__name__)

    def lookup(self, name: str) -> object:
        """
        Find an item by its key or by its alternative name.

        :param name: The key or alternative name
        :return: The registered item
        """
        if name in self.data:
            return self.data[name]
        if name in self.by_name:
            return self.by_name[name]

        raise KeyError("Unknown {} entry {!r}, choose from {}".format(
            self.__class__.__name__, name, ', '.join(sorted(self.data))))
