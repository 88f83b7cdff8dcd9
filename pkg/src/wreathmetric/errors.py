"""Exceptions and sentinel values shared across the package."""

from __future__ import annotations

from typing import NamedTuple


class Unreachable(NamedTuple):
    """Returned (not raised) when a search stops at ``cap`` without finding its target."""

    cap: int

    def __str__(self):
        return f"unreachable within {self.cap}"


class WreathMetricError(Exception):
    pass


class GroupMismatchError(WreathMetricError, ValueError):
    pass


class WordError(WreathMetricError, ValueError):
    """Bad generator index or token. ``position`` is the offending token's index, if known."""

    def __init__(self, message, position=None, token=None):
        super().__init__(message)
        self.position = position
        self.token = token


class TooLarge(WreathMetricError):
    def __init__(self, size, cap):
        super().__init__(f"instance has {size} points, exact TSP cap is {cap}")
        self.size = size
        self.cap = cap


class ResourceLimit(WreathMetricError):
    """A BFS hit its element budget. ``partial`` holds what was computed before stopping."""

    def __init__(self, message, radius_done, elements, partial=None):
        super().__init__(f"{message} (completed radius {radius_done}, {elements} elements)")
        self.radius_done = radius_done
        self.elements = elements
        self.partial = partial


class ActionError(WreathMetricError, ValueError):
    pass


class DifferentOrbits(ActionError):
    pass


class HomomorphismError(WreathMetricError):
    pass
