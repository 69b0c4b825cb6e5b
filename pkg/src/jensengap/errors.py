"""Exception hierarchy shared by every module.

The split mirrors how failures are reported at the command line: argument
errors are usage mistakes (exit code 2), everything else is a computation
failure (exit code 1).
"""

from __future__ import annotations


class JensenGapError(Exception):
    """Base class for all package errors."""


class ArgumentError(JensenGapError):
    """An argument is outside the documented domain of an operation."""


class DomainError(JensenGapError):
    """A mathematically required condition failed (e.g. log of zero mass)."""


class DataError(JensenGapError):
    """Input data violates a precondition (e.g. a nonpositive draw)."""


class ModelError(JensenGapError):
    """A model object is internally inconsistent or unusable."""


class NumericalError(JensenGapError):
    """A computation left the range where double precision is trustworthy."""


class ComputationError(JensenGapError):
    """A numerical routine failed to reach its accuracy / consistency target."""
