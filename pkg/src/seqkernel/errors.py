"""Exception hierarchy.

Precondition violations raise :class:`ValidationError` (a ``ValueError``);
problems that only show up on the data raise the other subclasses.
"""


class SeqKernelError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(SeqKernelError, ValueError):
    """An argument violates the documented precondition of an operation."""


class DomainError(ValidationError):
    """A kernel window or quadrature window leaves the unit interval."""


class DegenerateError(SeqKernelError):
    """A ratio estimator met a zero denominator."""


class DegeneratePilotError(DegenerateError):
    """The pilot sum A_nu vanished."""


class SimulationError(SeqKernelError):
    """The coefficient function produced a non-finite value during simulation."""
