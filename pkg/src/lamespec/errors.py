"""Exception hierarchy.

Domain errors are raised for inputs outside a function's contract
(e.g. a modulus in the lower half-plane); numerical errors are raised when
an algorithm cannot reach its accuracy target on valid input.
"""


class LamespecError(Exception):
    """Base class for all package errors."""


class DomainError(LamespecError):
    """Input outside the mathematical domain of the operation."""


class PrecisionError(LamespecError):
    """Requested accuracy not reachable; carries the achieved bound."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PoleError(DomainError):
    """Evaluation requested exactly on a pole; carries the lattice point."""

    def __init__(self, message, lattice_point=None):
        super().__init__(message)
        self.lattice_point = lattice_point


class NoConvergenceError(LamespecError):
    """An iterative solver failed; carries the best residual seen."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class BranchCollisionError(LamespecError):
    """An integration contour runs through (or too close to) a branch point."""


class ConsistencyError(LamespecError):
    """An internal identity that must hold numerically failed to hold."""


class AnsatzDegenerateError(LamespecError):
    """The solution ansatz degenerates at this energy (e.g. P2(E) = 0)."""


class DegenerateEvaluationError(LamespecError):
    """A generic-position evaluation could not find a usable sample."""


class ResolutionError(LamespecError):
    """Grid too coarse for the requested operator application."""


class PathTooCloseError(LamespecError):
    """An ODE integration line passes too close to a potential pole."""


class LabelingError(LamespecError):
    """Eigenvalue labels could not be matched between two computations."""
