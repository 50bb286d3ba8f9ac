"""
Adam optimiser over named numpy parameter arrays.
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..core.errors import DivergenceError, InvalidInputError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates and the step counter."""
    beta1: float = BETA1
    beta2: float = BETA2
    epsilon: float = EPSILON
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> AdamState:
    """
    One bias-corrected Adam update, applied to `params` in place.

    Raises:
        InvalidInputError: missing gradients or mismatched shapes
        DivergenceError: non-finite gradients
    """
    if lr <= 0:
        raise InvalidInputError(f"learning rate must be positive, got {lr}")
    for name, p in params.items():
        if name not in grads:
            raise InvalidInputError(f"no gradient for parameter {name!r}")
        if grads[name].shape != p.shape:
            raise InvalidInputError(f"gradient for {name!r} has shape {grads[name].shape}, expected {p.shape}")
        if not np.all(np.isfinite(grads[name])):
            raise DivergenceError(f"non-finite gradient for {name!r}")

    state.step += 1
    c1 = 1.0 - state.beta1 ** state.step
    c2 = 1.0 - state.beta2 ** state.step

    for name, p in params.items():
        g = grads[name]
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)

    return state
