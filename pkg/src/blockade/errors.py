"""Exception hierarchy shared across the package.

Input problems (bad documents, bad parameters) and solver failures (caps,
limits) are kept separate so the service and CLI can map them to distinct
status codes.
"""

from __future__ import annotations


class BlockadeError(Exception):
    """Base class for all package errors."""


class InputError(BlockadeError):
    """Invalid input document, graph, or parameter set."""


class SolverError(BlockadeError):
    """A solver could not produce a result."""


class WidthCapError(SolverError):
    """Tree width exceeds the configured cap for the requested algorithm."""

    def __init__(self, width: int, cap: int) -> None:
        super().__init__(
            f"tree width {width} exceeds cap {cap}; "
            "try --algo ip (kernelization) or --algo anytime instead"
        )
        self.width = width
        self.cap = cap


class EnumerationCapError(SolverError):
    """Brute-force enumeration would exceed the configured cap."""


class NodeLimitError(SolverError):
    """Branch-and-bound stopped at its node limit before proving the gap."""

    def __init__(self, message: str, incumbent=None, gap: float | None = None) -> None:
        super().__init__(message)
        self.incumbent = incumbent
        self.gap = gap
