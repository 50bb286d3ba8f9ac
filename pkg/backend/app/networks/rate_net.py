"""
Rate RNN

Vanilla tanh RNN trained with hand-written backpropagation through time on
the one-choice inference task.

Task layout (T = 50 steps, 18 input channels, 4 classes):
- steps 0-19   goal: one of the four corners of a 3x3 grid, one-hot on channels 0-8
- steps 20-29  delay
- steps 30-49  choice: two edge midpoints, two-hot on channels 9-17
- target: the option nearer the goal, indexed over EDGE_MIDPOINTS

Cell: h_t = tanh(W_in x_t + W_rec h_{t-1} + b), h_0 = 0;
logits = W_out h_T + b_out.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from ..core.constraints import (
    ConstraintContext,
    RegularizerKind,
    constraint_gradient,
    constraint_loss,
    total_loss,
)
from ..core.errors import DivergenceError, InvalidInputError
from ..core.numerics import RandomSource

logger = logging.getLogger(__name__)

N_INPUTS = 18
N_CLASSES = 4
N_STEPS = 50
GOAL_STEPS = (0, 20)
CHOICE_STEPS = (30, 50)

CORNERS = ((0, 0), (0, 2), (2, 0), (2, 2))
EDGE_MIDPOINTS = ((0, 1), (1, 0), (1, 2), (2, 1))

PARAM_NAMES = ("w_in", "w_rec", "b", "w_out", "b_out")


def _cell(row: int, col: int) -> int:
    return row * 3 + col


@dataclass
class RateRNN:
    """Parameters of a single-hidden-layer rate network."""

    w_in: np.ndarray   # (N, 18)
    w_rec: np.ndarray  # (N, N), the constrained matrix
    b: np.ndarray      # (N,)
    w_out: np.ndarray  # (4, N)
    b_out: np.ndarray  # (4,)

    @property
    def n_hidden(self) -> int:
        return int(self.w_rec.shape[0])

    def parameters(self) -> Dict[str, np.ndarray]:
        """Live references; in-place updates change the network."""
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @classmethod
    def from_parameters(cls, params: Dict[str, np.ndarray]) -> "RateRNN":
        return cls(**{name: np.array(params[name], dtype=np.float64) for name in PARAM_NAMES})

    @classmethod
    def zeros(cls, n_hidden: int) -> "RateRNN":
        return cls(
            w_in=np.zeros((n_hidden, N_INPUTS)),
            w_rec=np.zeros((n_hidden, n_hidden)),
            b=np.zeros(n_hidden),
            w_out=np.zeros((N_CLASSES, n_hidden)),
            b_out=np.zeros(N_CLASSES),
        )


def init_rate_rnn(rng: RandomSource, n_hidden: int = 100, spectral_radius: float = 0.9) -> RateRNN:
    """Orthogonal W_rec scaled to the given spectral radius; uniform +-1/sqrt(fan_in) elsewhere."""
    gen = rng.generator
    q, r = np.linalg.qr(gen.standard_normal((n_hidden, n_hidden)))
    q = q * np.sign(np.diag(r))[None, :]

    in_bound = 1.0 / np.sqrt(N_INPUTS)
    out_bound = 1.0 / np.sqrt(n_hidden)
    return RateRNN(
        w_in=gen.uniform(-in_bound, in_bound, size=(n_hidden, N_INPUTS)),
        w_rec=spectral_radius * q,
        b=np.zeros(n_hidden),
        w_out=gen.uniform(-out_bound, out_bound, size=(N_CLASSES, n_hidden)),
        b_out=np.zeros(N_CLASSES),
    )


# =============================================================================
# TASK
# =============================================================================

@dataclass
class InferenceTrialBatch:
    """A batch of one-choice inference trials."""

    inputs: np.ndarray   # (T, B, 18)
    targets: np.ndarray  # (B,) class in 0..3
    goals: np.ndarray    # (B,) index into CORNERS
    options: np.ndarray  # (B, 2) indices into EDGE_MIDPOINTS

    @property
    def size(self) -> int:
        return int(self.targets.shape[0])

    def subset(self, start: int, stop: int) -> "InferenceTrialBatch":
        return InferenceTrialBatch(
            inputs=self.inputs[:, start:stop],
            targets=self.targets[start:stop],
            goals=self.goals[start:stop],
            options=self.options[start:stop],
        )


def _distance(a: Tuple[int, int], b: Tuple[int, int]) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def generate_trials(rng: RandomSource, n: int, noise_std: float = 0.1) -> InferenceTrialBatch:
    """
    Generate n noisy trials. Option pairs equidistant from the goal are resampled.
    """
    if n < 1:
        raise InvalidInputError(f"trial count must be >= 1, got {n}")
    gen = rng.generator

    goals = gen.integers(0, len(CORNERS), size=n)
    options = np.empty((n, 2), dtype=np.int64)
    targets = np.empty(n, dtype=np.int64)

    for i, g in enumerate(goals):
        goal = CORNERS[g]
        while True:
            pair = gen.choice(len(EDGE_MIDPOINTS), size=2, replace=False)
            d0 = _distance(goal, EDGE_MIDPOINTS[pair[0]])
            d1 = _distance(goal, EDGE_MIDPOINTS[pair[1]])
            if not np.isclose(d0, d1):
                break
        options[i] = pair
        targets[i] = pair[0] if d0 < d1 else pair[1]

    inputs = np.zeros((N_STEPS, n, N_INPUTS))
    batch_idx = np.arange(n)
    goal_channels = np.array([_cell(*CORNERS[g]) for g in goals])
    inputs[GOAL_STEPS[0]:GOAL_STEPS[1], batch_idx, goal_channels] = 1.0
    for k in range(2):
        option_channels = 9 + np.array([_cell(*EDGE_MIDPOINTS[o]) for o in options[:, k]])
        inputs[CHOICE_STEPS[0]:CHOICE_STEPS[1], batch_idx, option_channels] = 1.0

    if noise_std > 0:
        inputs += gen.normal(0.0, noise_std, size=inputs.shape)

    return InferenceTrialBatch(inputs=inputs, targets=targets, goals=goals, options=options)


# =============================================================================
# FORWARD / BACKWARD
# =============================================================================

def forward(net: RateRNN, batch: InferenceTrialBatch) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run the network over a batch.

    Returns:
        (hidden (T, B, N), logits (B, 4))

    Raises:
        DivergenceError: non-finite activations
    """
    x = batch.inputs
    if x.ndim != 3 or x.shape[2] != net.w_in.shape[1]:
        raise InvalidInputError(f"inputs of shape {x.shape} do not match W_in {net.w_in.shape}")

    steps, size, _ = x.shape
    hidden = np.empty((steps, size, net.n_hidden))
    h = np.zeros((size, net.n_hidden))
    for t in range(steps):
        h = np.tanh(x[t] @ net.w_in.T + h @ net.w_rec.T + net.b)
        hidden[t] = h

    logits = h @ net.w_out.T + net.b_out
    if not np.all(np.isfinite(logits)):
        raise DivergenceError("rate network produced non-finite activations")
    return hidden, logits


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, targets: np.ndarray) -> float:
    """Mean softmax cross-entropy."""
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-np.mean(log_probs[np.arange(len(targets)), targets]))


def task_loss(net: RateRNN, batch: InferenceTrialBatch) -> float:
    """L_task only."""
    _, logits = forward(net, batch)
    return cross_entropy(logits, batch.targets)


@dataclass
class LossBreakdown:
    """Loss components of one evaluation."""
    total: float
    task: float
    constraint: float
    grads: Dict[str, np.ndarray] = field(default_factory=dict)


def task_loss_and_grads(
    net: RateRNN,
    batch: InferenceTrialBatch,
    gamma: float,
    kind: RegularizerKind,
    ctx: ConstraintContext,
) -> LossBreakdown:
    """
    L_total and gradients for every parameter by BPTT over all steps.

    Only W_rec carries the constraint gradient.

    Raises:
        DivergenceError: non-finite loss or gradients
    """
    hidden, logits = forward(net, batch)
    targets = batch.targets
    size = batch.size
    l_task = cross_entropy(logits, targets)

    dlogits = _softmax(logits)
    dlogits[np.arange(size), targets] -= 1.0
    dlogits /= size

    h_last = hidden[-1]
    grads = {
        "w_out": dlogits.T @ h_last,
        "b_out": dlogits.sum(axis=0),
        "w_in": np.zeros_like(net.w_in),
        "w_rec": np.zeros_like(net.w_rec),
        "b": np.zeros_like(net.b),
    }

    x = batch.inputs
    dh = dlogits @ net.w_out
    for t in range(x.shape[0] - 1, -1, -1):
        h_t = hidden[t]
        h_prev = hidden[t - 1] if t > 0 else np.zeros_like(h_t)
        da = dh * (1.0 - h_t * h_t)
        grads["w_in"] += da.T @ x[t]
        grads["w_rec"] += da.T @ h_prev
        grads["b"] += da.sum(axis=0)
        dh = da @ net.w_rec

    l_constraint, multiplier = constraint_loss(net.w_rec, kind, ctx)
    if gamma > 0:
        grads["w_rec"] += gamma * constraint_gradient(net.w_rec, multiplier)

    l_total = total_loss(l_task, gamma, l_constraint) if np.isfinite(l_task) else float("nan")
    if not np.isfinite(l_total) or not all(np.all(np.isfinite(g)) for g in grads.values()):
        raise DivergenceError("rate network loss or gradients are non-finite")

    return LossBreakdown(total=l_total, task=l_task, constraint=l_constraint, grads=grads)


def accuracy(net: RateRNN, batch: InferenceTrialBatch) -> float:
    """Fraction of trials whose argmax logit equals the target."""
    _, logits = forward(net, batch)
    return float(np.mean(np.argmax(logits, axis=1) == batch.targets))
