"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto exit codes: bad input or configuration -> 2,
graph degeneracy (isolated vertices, disconnected graph) -> 3, numeric
solver failure -> 4.
"""

from __future__ import annotations


class DetectionError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DetectionError):
    """Invalid input data, configuration value, or argument combination."""


class SchemaError(InputError):
    """A required column is missing from a trade file."""


class ParameterError(InputError):
    """A numeric parameter is out of its valid range (e.g. k > n)."""


class DegeneracyError(DetectionError):
    """The graph cannot be clustered as-is (isolated vertices, disconnected).

    ``components`` carries the vertex groups involved so callers can decide
    to cluster components independently.
    """

    def __init__(self, message: str, components: list[list[str]] | None = None):
        super().__init__(message)
        self.components = components or []


class NumericError(DetectionError):
    """An eigensolver or other numeric routine failed to converge."""
