"""
Spiking RNN

Recurrent leaky integrate-and-fire layer with per-neuron learnable decay, a
non-spiking leaky readout, and hand-written surrogate-gradient BPTT.

Dynamics (per sample, t = 0..T-1, V_0 = S_0 = U_0 = 0):
    I_t     = W_in x_t + W_rec S_t
    V_{t+1} = beta * V_t + I_t - V_thr * S_t        (reset by subtraction)
    S_{t+1} = step(V_{t+1} - V_thr)                  (step(u) = 1 if u >= 0)
    U_{t+1} = beta_out * U_t + W_out S_{t+1}         (never spikes, never resets)
    score_c = max_{t >= 1} U_{t,c}

Backward replaces d step / du with 1 / (rho |u| + 1)^2 and treats the reset
term as a constant.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..core.constraints import (
    ConstraintContext,
    RegularizerKind,
    constraint_gradient,
    constraint_loss,
    total_loss,
)
from ..core.errors import DivergenceError, InvalidInputError
from ..core.numerics import RandomSource, gamma_sample

logger = logging.getLogger(__name__)

DEFAULT_DT_MS = 0.5
DEFAULT_THRESHOLD = 1.0
DEFAULT_STEEPNESS = 100.0
TAU_MEAN_MS = 20.0
TAU_SHAPE = 3.0
TAU_MAX_MS = 100.0
BETA_MAX = 0.995
TAU_MIN_STEPS = 3.0

PARAM_NAMES = ("w_in", "w_rec", "beta", "w_out", "beta_out")


@dataclass
class LIFNetwork:
    """Parameters and fixed constants of a spiking network."""

    w_in: np.ndarray      # (N, C)
    w_rec: np.ndarray     # (N, N), the constrained matrix
    beta: np.ndarray      # (N,)
    w_out: np.ndarray     # (K, N)
    beta_out: np.ndarray  # (K,)
    threshold: float = DEFAULT_THRESHOLD
    dt_ms: float = DEFAULT_DT_MS
    steepness: float = DEFAULT_STEEPNESS
    tau_max_ms: float = TAU_MAX_MS
    beta_max: float = BETA_MAX

    @property
    def n_hidden(self) -> int:
        return int(self.w_rec.shape[0])

    @property
    def n_inputs(self) -> int:
        return int(self.w_in.shape[1])

    @property
    def n_classes(self) -> int:
        return int(self.w_out.shape[0])

    def parameters(self) -> Dict[str, np.ndarray]:
        """Live references; in-place updates change the network."""
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @classmethod
    def from_parameters(cls, params: Dict[str, np.ndarray], **constants) -> "LIFNetwork":
        arrays = {name: np.array(params[name], dtype=np.float64) for name in PARAM_NAMES}
        return cls(**arrays, **constants)

    def beta_bounds(self) -> Tuple[float, float]:
        """Decay range implied by tau in [3 dt, tau_max], capped at beta_max."""
        lo = float(np.exp(-1.0 / TAU_MIN_STEPS))
        hi = min(float(np.exp(-self.dt_ms / self.tau_max_ms)), self.beta_max)
        return lo, hi

    def clip_decays(self) -> None:
        """Keep tau inside its bounds; applied after every optimiser update."""
        lo, hi = self.beta_bounds()
        np.clip(self.beta, lo, hi, out=self.beta)
        np.clip(self.beta_out, lo, hi, out=self.beta_out)

    def time_constants_ms(self) -> np.ndarray:
        return -self.dt_ms / np.log(self.beta)


def surrogate_grad(u, steepness: float = DEFAULT_STEEPNESS):
    """Fast-sigmoid surrogate derivative 1 / (rho |u| + 1)^2."""
    return 1.0 / (steepness * np.abs(u) + 1.0) ** 2


def spike_fn(u: np.ndarray) -> np.ndarray:
    """Hard threshold: 1 where u >= 0."""
    return (u >= 0).astype(np.float64)


def smooth_spike_fn(u: np.ndarray, steepness: float = DEFAULT_STEEPNESS) -> np.ndarray:
    """Antiderivative of the surrogate, u / (rho |u| + 1); used for gradient checks."""
    return u / (steepness * np.abs(u) + 1.0)


def init_decays(
    rng: RandomSource,
    n: int,
    dt_ms: float = DEFAULT_DT_MS,
    tau_mean_ms: float = TAU_MEAN_MS,
    shape: float = TAU_SHAPE,
    tau_max_ms: float = TAU_MAX_MS,
    beta_max: float = BETA_MAX,
) -> np.ndarray:
    """
    beta_i = exp(-dt / tau_i) with tau ~ Gamma(shape, tau_mean / shape),
    tau clipped to [3 dt, tau_max] and beta capped at beta_max.
    """
    if n < 1:
        raise InvalidInputError(f"decay count must be >= 1, got {n}")
    tau = gamma_sample(rng, shape, tau_mean_ms / shape, n)
    tau = np.clip(tau, TAU_MIN_STEPS * dt_ms, tau_max_ms)
    return np.minimum(np.exp(-dt_ms / tau), beta_max)


def init_lif_network(
    rng: RandomSource,
    n_inputs: int,
    n_classes: int,
    n_hidden: int = 100,
    dt_ms: float = DEFAULT_DT_MS,
    threshold: float = DEFAULT_THRESHOLD,
    steepness: float = DEFAULT_STEEPNESS,
    input_scale: float = 1.5,
    recurrent_scale: float = 0.5,
    readout_scale: float = 1.0,
    tau_mean_ms: float = TAU_MEAN_MS,
    tau_shape: float = TAU_SHAPE,
    tau_max_ms: float = TAU_MAX_MS,
    beta_max: float = BETA_MAX,
) -> LIFNetwork:
    """Gaussian weights scaled by 1/sqrt(fan_in); gamma-distributed decays."""
    gen = rng.child(0).generator
    net = LIFNetwork(
        w_in=gen.normal(0.0, input_scale / np.sqrt(n_inputs), size=(n_hidden, n_inputs)),
        w_rec=gen.normal(0.0, recurrent_scale / np.sqrt(n_hidden), size=(n_hidden, n_hidden)),
        beta=init_decays(rng.child(1), n_hidden, dt_ms, tau_mean_ms, tau_shape, tau_max_ms, beta_max),
        w_out=gen.normal(0.0, readout_scale / np.sqrt(n_hidden), size=(n_classes, n_hidden)),
        beta_out=init_decays(rng.child(2), n_classes, dt_ms, tau_mean_ms, tau_shape, tau_max_ms, beta_max),
        threshold=threshold,
        dt_ms=dt_ms,
        steepness=steepness,
        tau_max_ms=tau_max_ms,
        beta_max=beta_max,
    )
    net.clip_decays()
    return net


def lif_step(
    v: np.ndarray,
    s_prev: np.ndarray,
    x: np.ndarray,
    net: LIFNetwork,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One membrane update.

    Args:
        v: membrane V_t, shape (..., N)
        s_prev: spikes emitted at the previous step, re-entering as recurrent current
        x: input at this step, shape (..., C)

    Returns:
        (V_{t+1}, S_{t+1}, I_t)

    Raises:
        DivergenceError: non-finite membranes
    """
    current = x @ net.w_in.T + s_prev @ net.w_rec.T
    reset = spike_fn(v - net.threshold)
    v_next = net.beta * v + current - net.threshold * reset
    if not np.all(np.isfinite(v_next)):
        raise DivergenceError("membrane potentials became non-finite")
    return v_next, spike_fn(v_next - net.threshold), current


# =============================================================================
# FORWARD / BACKWARD
# =============================================================================

@dataclass
class SpikingTrace:
    """Cached forward state for the backward pass."""

    inputs: np.ndarray    # (T, B, C)
    v: np.ndarray         # (T+1, B, N)
    s: np.ndarray         # (T+1, B, N)
    u: np.ndarray         # (T+1, B, K)
    reset: np.ndarray     # (T, B, N), spike values subtracted at each step
    scores: np.ndarray    # (B, K)
    peak_step: np.ndarray  # (B, K), index into u of the max

    @property
    def spike_counts(self) -> np.ndarray:
        """Hidden spikes per sample and neuron."""
        return self.s[1:].sum(axis=0)


def run_network(
    net: LIFNetwork,
    inputs: np.ndarray,
    smooth: bool = False,
    frozen_reset: Optional[np.ndarray] = None,
) -> SpikingTrace:
    """
    Unroll the network over binned inputs of shape (T, B, C).

    Args:
        smooth: use the surrogate antiderivative instead of the hard step
        frozen_reset: (T, B, N) reset values to use in place of the current
            spikes; finite differences through it match the stopped-gradient
            backward pass

    Raises:
        DivergenceError: non-finite membranes or readout
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != net.n_inputs:
        raise InvalidInputError(f"inputs of shape {x.shape} do not match W_in {net.w_in.shape}")
    steps, size, _ = x.shape
    n, k = net.n_hidden, net.n_classes

    fire = (lambda u: smooth_spike_fn(u, net.steepness)) if smooth else spike_fn

    v = np.zeros((steps + 1, size, n))
    s = np.zeros((steps + 1, size, n))
    u = np.zeros((steps + 1, size, k))
    reset = np.zeros((steps, size, n))

    for t in range(steps):
        reset[t] = frozen_reset[t] if frozen_reset is not None else s[t]
        v[t + 1] = net.beta * v[t] + x[t] @ net.w_in.T + s[t] @ net.w_rec.T - net.threshold * reset[t]
        s[t + 1] = fire(v[t + 1] - net.threshold)
        u[t + 1] = net.beta_out * u[t] + s[t + 1] @ net.w_out.T

    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(u))):
        raise DivergenceError("spiking network produced non-finite state")

    peak = np.argmax(u[1:], axis=0) + 1
    scores = np.take_along_axis(u, peak[None], axis=0)[0]
    return SpikingTrace(inputs=x, v=v, s=s, u=u, reset=reset, scores=scores, peak_step=peak)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(scores: np.ndarray, targets: np.ndarray) -> float:
    """Mean softmax cross-entropy over max-membrane scores."""
    z = scores - scores.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-np.mean(log_probs[np.arange(len(targets)), targets]))


@dataclass
class SpikingLoss:
    """Loss components plus the trace needed by backward()."""
    total: float
    task: float
    constraint: float
    scores: np.ndarray
    spike_counts: np.ndarray
    trace: SpikingTrace
    multiplier: np.ndarray = field(repr=False, default=None)


def forward_and_loss(
    net: LIFNetwork,
    inputs: np.ndarray,
    targets: np.ndarray,
    gamma: float,
    kind: RegularizerKind,
    ctx: ConstraintContext,
    smooth: bool = False,
    frozen_reset: Optional[np.ndarray] = None,
) -> SpikingLoss:
    """L_total over a binned batch; the constraint applies to W_rec only."""
    targets = np.asarray(targets, dtype=np.int64)
    trace = run_network(net, inputs, smooth=smooth, frozen_reset=frozen_reset)
    l_task = cross_entropy(trace.scores, targets)
    l_constraint, multiplier = constraint_loss(net.w_rec, kind, ctx)
    l_total = total_loss(l_task, gamma, l_constraint) if np.isfinite(l_task) else float("nan")
    if not np.isfinite(l_total):
        raise DivergenceError("spiking network loss is non-finite")
    return SpikingLoss(
        total=l_total,
        task=l_task,
        constraint=l_constraint,
        scores=trace.scores,
        spike_counts=trace.spike_counts,
        trace=trace,
        multiplier=multiplier,
    )


def backward(
    net: LIFNetwork,
    loss: SpikingLoss,
    targets: np.ndarray,
    gamma: float,
) -> Dict[str, np.ndarray]:
    """
    Reverse-mode gradients through the cached unroll.

    Raises:
        DivergenceError: non-finite gradients
    """
    tr = loss.trace
    targets = np.asarray(targets, dtype=np.int64)
    steps, size, _ = tr.inputs.shape

    dscores = _softmax(tr.scores)
    dscores[np.arange(size), targets] -= 1.0
    dscores /= size

    # Max-pooling routes each score gradient to its peak step
    du_peak = np.zeros_like(tr.u)
    rows = np.arange(size)[:, None]
    cols = np.arange(net.n_classes)[None, :]
    du_peak[tr.peak_step, rows, cols] = dscores

    grads = {name: np.zeros_like(p) for name, p in net.parameters().items()}
    g_u_carry = np.zeros((size, net.n_classes))
    g_v_next = np.zeros((size, net.n_hidden))

    for t in range(steps, 0, -1):
        g_u = du_peak[t] + g_u_carry
        grads["beta_out"] += np.sum(g_u * tr.u[t - 1], axis=0)
        grads["w_out"] += g_u.T @ tr.s[t]
        g_u_carry = g_u * net.beta_out

        g_s = g_u @ net.w_out
        if t < steps:
            g_s += g_v_next @ net.w_rec
            g_v = g_s * surrogate_grad(tr.v[t] - net.threshold, net.steepness) + g_v_next * net.beta
        else:
            g_v = g_s * surrogate_grad(tr.v[t] - net.threshold, net.steepness)

        grads["beta"] += np.sum(g_v * tr.v[t - 1], axis=0)
        grads["w_in"] += g_v.T @ tr.inputs[t - 1]
        grads["w_rec"] += g_v.T @ tr.s[t - 1]
        g_v_next = g_v

    if gamma > 0 and loss.multiplier is not None:
        grads["w_rec"] += gamma * constraint_gradient(net.w_rec, loss.multiplier)

    if not all(np.all(np.isfinite(g)) for g in grads.values()):
        raise DivergenceError("spiking network gradients are non-finite")
    return grads


def accuracy(net: LIFNetwork, inputs: np.ndarray, targets: np.ndarray) -> float:
    """Fraction of samples whose highest peak readout membrane is the target."""
    trace = run_network(net, inputs)
    return float(np.mean(np.argmax(trace.scores, axis=1) == np.asarray(targets)))
