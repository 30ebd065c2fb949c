"""Martin-boundary numerics for lattice random walks killed outside a half-space."""

from .errors import ConvergenceError, DomainError, ModelError
from .jump_model import JumpDistribution, ValidationReport, load_model, mean, parse_model, twist, validate, y_marginal
from .ladder import BoundaryFunctionTable, OneDWalk

__all__ = [
    "BoundaryFunctionTable",
    "ConvergenceError",
    "DomainError",
    "JumpDistribution",
    "ModelError",
    "OneDWalk",
    "ValidationReport",
    "load_model",
    "mean",
    "parse_model",
    "twist",
    "validate",
    "y_marginal",
]
