"""
Evenly spaced grids for loss curves and numeric searches
"""
import numpy as np

from churnkit.element import Element
from churnkit.exceptions import InvalidInputError


class GridSpec(Element):
    """
    An evenly spaced grid from start to stop, both included.
    """

    def __init__(self, start: float, stop: float, points: int):
        self.start = float(start)
        self.stop = float(stop)
        self.points = int(points)
        self.validate()

    def validate(self):
        """
        A grid needs finite bounds in the right order and at least one point
        """
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise InvalidInputError("Grid bounds must be finite")
        if self.points < 1:
            raise InvalidInputError("A grid needs at least one point")
        if self.points > 1 and self.stop <= self.start:
            raise InvalidInputError("Grid stop must be larger than its start")

    @property
    def step(self) -> float:
        """
        The distance between neighbouring points, zero for a single point
        """
        if self.points == 1:
            return 0.0
        return (self.stop - self.start) / (self.points - 1)

    def values(self) -> np.ndarray:
        """
        The grid points.

        :return: An array of points
        """
        return np.linspace(self.start, self.stop, self.points)
