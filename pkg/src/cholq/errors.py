"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
NumericalError (and subclasses) -> 3, AssumptionViolation -> 4.
"""


class CholqError(Exception):
    """Base class for all package errors."""


class ConfigError(CholqError):
    """Bad user input: malformed files, invalid parameter combinations."""


class NumericalError(CholqError):
    """A solver or quadrature failed to reach its tolerance."""


class ConvergenceError(NumericalError):
    """An iterative solver ran out of iterations."""


class PhysicalityError(NumericalError):
    """A tensor left the physical domain (eigenvalue bound violated)."""


class SymmetryError(NumericalError):
    """An isotropy/symmetry residual exceeded its tolerance."""


class DomainError(ConfigError):
    """An operation was requested outside its mathematical domain."""


class AssumptionViolation(CholqError):
    """A kernel set failed the structural assumptions it must satisfy."""
