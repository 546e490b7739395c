"""Exception types shared across the solver stack.

The CLI maps these onto exit codes: invalid input -> 2, solver
failures -> 3 (see cli.main).
"""


class PhototermError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(PhototermError):
    """A physical or numerical input violates its documented range."""


class NoRootError(PhototermError):
    """A bracketed search found no sign change in the allowed interval."""


class ConvergenceError(PhototermError):
    """An iterative solve exhausted its iteration budget."""
