"""Exception hierarchy shared by all flowerflow modules."""

from __future__ import annotations


class FlowerflowError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FlowerflowError, ValueError):
    """A point, vector or argument lies outside the domain of an operation."""


class SolverError(FlowerflowError, RuntimeError):
    """A numerical solver (geodesic shooting, quadrature) failed to converge."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class RegionExit(FlowerflowError):
    """A geodesic left the manifold's working region.

    Carries the last state inside the region so callers can report where the
    trajectory escaped instead of crashing.
    """

    def __init__(self, message: str, point=None, velocity=None, t_exit: float = float("nan")):
        super().__init__(message)
        self.point = point
        self.velocity = velocity
        self.t_exit = t_exit


class RebalanceError(FlowerflowError):
    """Birkhoff subdivision would leave the unique-minimizing-geodesic regime."""

    def __init__(self, message: str, petal: int | None = None):
        super().__init__(message if petal is None else f"petal {petal}: {message}")
        self.petal = petal


class PreconditionError(FlowerflowError, ValueError):
    """An operation was called on input violating its stated precondition."""


class ScenarioError(FlowerflowError, ValueError):
    """A scenario or net file failed validation; ``path`` names the bad field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class FlowAborted(FlowerflowError):
    """A flow step failed; ``outcome`` holds the trajectory up to the failure."""

    def __init__(self, message: str, outcome=None, cause: Exception | None = None):
        super().__init__(message)
        self.outcome = outcome
        self.cause = cause
