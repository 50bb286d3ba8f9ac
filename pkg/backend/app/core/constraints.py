"""
Structural Constraints

Network communicability and the four regulariser variants:

    kind     multiplier m          loss = sum |w_ij| * m_ij
    l1       1
    space    D
    comm     C(W)
    sernn    D * C(W)

The multiplier is gradient-stopped: d loss / d w_ij = sign(w_ij) * m_ij with D
and C held constant for the step, and C recomputed from the current weights
at every optimiser step.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Tuple

import numpy as np

from .embedding import DistanceLattice
from .errors import InvalidInputError
from .numerics import Matrix, as_matrix, matrix_exp

logger = logging.getLogger(__name__)

DEFAULT_EPSILON_STRENGTH = 1e-6


class RegularizerKind(str, Enum):
    """Learning objectives compared in the sweeps."""
    BASELINE_L1 = "l1"
    SE_SPACE_COMM = "sernn"
    SPACE_ONLY = "space"
    COMM_ONLY = "comm"


@dataclass(frozen=True)
class ConstraintContext:
    """Geometry plus the strength floor used for S^(-1/2)."""

    lattice: DistanceLattice
    epsilon_strength: float = DEFAULT_EPSILON_STRENGTH

    def __post_init__(self):
        if self.epsilon_strength <= 0:
            raise InvalidInputError(f"epsilon_strength must be positive, got {self.epsilon_strength}")


def strength_diagonal(w, epsilon: float = DEFAULT_EPSILON_STRENGTH) -> np.ndarray:
    """Total in + out absolute strength per node, floored at epsilon."""
    a = np.abs(as_matrix(w, square=True, name="W"))
    return np.maximum(a.sum(axis=1) + a.sum(axis=0), epsilon)


def communicability(w, epsilon: float = DEFAULT_EPSILON_STRENGTH) -> Matrix:
    """C = expm(S^-1/2 |W| S^-1/2). Depends on |W| only."""
    a = np.abs(as_matrix(w, square=True, name="W"))
    inv_sqrt = 1.0 / np.sqrt(strength_diagonal(a, epsilon))
    return matrix_exp(inv_sqrt[:, None] * a * inv_sqrt[None, :])


# Registry of multiplier builders, keyed by regulariser kind
_MULTIPLIERS: Dict[RegularizerKind, Callable[[Matrix, ConstraintContext], Matrix]] = {}


def register_multiplier(kind: RegularizerKind):
    """Decorator to register the multiplier for a regulariser kind."""
    def decorator(fn):
        _MULTIPLIERS[kind] = fn
        return fn
    return decorator


@register_multiplier(RegularizerKind.BASELINE_L1)
def _l1_multiplier(w: Matrix, ctx: ConstraintContext) -> Matrix:
    return np.ones_like(w)


@register_multiplier(RegularizerKind.SPACE_ONLY)
def _space_multiplier(w: Matrix, ctx: ConstraintContext) -> Matrix:
    return ctx.lattice.distances.copy()


@register_multiplier(RegularizerKind.COMM_ONLY)
def _comm_multiplier(w: Matrix, ctx: ConstraintContext) -> Matrix:
    return communicability(w, ctx.epsilon_strength)


@register_multiplier(RegularizerKind.SE_SPACE_COMM)
def _sernn_multiplier(w: Matrix, ctx: ConstraintContext) -> Matrix:
    return ctx.lattice.distances * communicability(w, ctx.epsilon_strength)


def constraint_loss(w, kind: RegularizerKind, ctx: ConstraintContext) -> Tuple[float, Matrix]:
    """
    Constraint loss and its gradient-stopped multiplier.

    Returns:
        (loss, multiplier) with loss = sum |w_ij| * m_ij

    Raises:
        InvalidInputError: W does not match the lattice size
    """
    w = as_matrix(w, square=True, name="W")
    n = ctx.lattice.n_neurons
    if w.shape != (n, n):
        raise InvalidInputError(f"W is {w.shape[0]}x{w.shape[1]} but the lattice has {n} neurons")

    multiplier = _MULTIPLIERS[RegularizerKind(kind)](w, ctx)
    loss = float(np.sum(np.abs(w) * multiplier))
    return loss, multiplier


def constraint_gradient(w: Matrix, multiplier: Matrix) -> Matrix:
    """sign(w) * m, with sign(0) = 0."""
    return np.sign(w) * multiplier


def total_loss(task_loss: float, gamma: float, constraint: float) -> float:
    """L_total = L_task + gamma * L_constraint."""
    if gamma < 0:
        raise InvalidInputError(f"gamma must be >= 0, got {gamma}")
    if not (np.isfinite(task_loss) and np.isfinite(gamma) and np.isfinite(constraint)):
        raise InvalidInputError("total_loss inputs must be finite")
    return float(task_loss + gamma * constraint)
