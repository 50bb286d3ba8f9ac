"""
Trainer

Runs one network through its epochs, snapshotting after every epoch.

Design Philosophy:
- Every random draw comes from the run seed, so a config reproduces its
  checkpoints byte for byte
- Divergence ends the run and is recorded, never retried
- Both network families share the loop shape: batches -> loss/grads ->
  Adam -> evaluate -> checkpoint
"""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..core.constraints import ConstraintContext, constraint_loss
from ..core.embedding import build_lattice
from ..core.errors import DivergenceError, InvalidInputError
from ..core.numerics import RandomSource
from ..core.settings import LabSettings, get_settings
from ..networks import rate_net, spiking_net
from ..networks.spike_data import bin_events, gen_synthetic_spike_task, read_spike_dataset
from .checkpoint import as_stored, write_checkpoint, write_run_status
from .optim import AdamState, adam_step
from .schema import NetworkCheckpoint, RunResult, RunStatus, TaskName, TrainConfig

logger = logging.getLogger(__name__)

# Child-stream indices of the run seed
_INIT_STREAM = 0
_EVAL_STREAM = 1
_EPOCH_STREAM_BASE = 100


def passes_filter(checkpoint: NetworkCheckpoint, thresholds: Optional[Dict[str, float]] = None) -> bool:
    """True when accuracy strictly exceeds the task's threshold."""
    if thresholds is None:
        thresholds = get_settings().filters.thresholds
    task = TaskName(checkpoint.task).value
    if task not in thresholds:
        raise InvalidInputError(f"no accuracy threshold configured for task {task!r}")
    return checkpoint.accuracy > thresholds[task]


def _snapshot(
    config: TrainConfig,
    epoch: int,
    params: Dict[str, np.ndarray],
    accuracy: float,
    task_loss: float,
    ctx: ConstraintContext,
    constants: Optional[Dict[str, float]] = None,
) -> NetworkCheckpoint:
    stored = {name: as_stored(p) for name, p in params.items()}
    l_constraint, _ = constraint_loss(stored["w_rec"], config.kind, ctx)
    return NetworkCheckpoint(
        kind=config.kind,
        gamma=float(config.gamma),
        seed=config.seed,
        epoch=epoch,
        task=config.task,
        accuracy=float(accuracy),
        task_loss=float(task_loss),
        constraint_loss=l_constraint,
        dims=tuple(config.dims),
        params=stored,
        constants=dict(constants or {}),
    )


# =============================================================================
# RATE
# =============================================================================

def _train_rate(
    config: TrainConfig,
    settings: LabSettings,
    ctx: ConstraintContext,
    emit: Callable[[NetworkCheckpoint], None],
) -> None:
    rs = settings.rate
    root = RandomSource(config.seed)
    net = rate_net.init_rate_rnn(root.child(_INIT_STREAM), ctx.lattice.n_neurons, rs.spectral_radius)
    eval_batch = rate_net.generate_trials(root.child(_EVAL_STREAM), rs.eval_trials, rs.noise_std)

    def evaluate() -> Tuple[float, float]:
        _, logits = rate_net.forward(net, eval_batch)
        acc = float(np.mean(np.argmax(logits, axis=1) == eval_batch.targets))
        return acc, rate_net.cross_entropy(logits, eval_batch.targets)

    acc, loss = evaluate()
    emit(_snapshot(config, 0, net.parameters(), acc, loss, ctx))

    state = AdamState()
    for epoch in range(1, config.epochs + 1):
        batch = rate_net.generate_trials(root.child(_EPOCH_STREAM_BASE + epoch), rs.trials_per_epoch, rs.noise_std)
        for start in range(0, batch.size, config.batch_size):
            mini = batch.subset(start, start + config.batch_size)
            breakdown = rate_net.task_loss_and_grads(net, mini, config.gamma, config.kind, ctx)
            adam_step(net.parameters(), breakdown.grads, state, config.learning_rate)

        acc, loss = evaluate()
        logger.info(f"[{config.kind.value} gamma={config.gamma:g} seed={config.seed}] epoch {epoch}: acc={acc:.3f} loss={loss:.4f}")
        emit(_snapshot(config, epoch, net.parameters(), acc, loss, ctx))


# =============================================================================
# SPIKING
# =============================================================================

def _spiking_data(config: TrainConfig, settings: LabSettings) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, int, float]:
    """(train_x, train_y, test_x, test_y, channels, classes, dt_ms) for a spiking task."""
    sp = settings.spiking
    if config.task is TaskName.SYNTHETIC_SPIKES:
        syn = sp.synthetic
        task_rng = RandomSource(config.data_seed)
        common = dict(
            classes=syn.classes,
            channels=syn.channels,
            duration_ms=syn.duration_ms,
            template_size=syn.template_size,
            template_rate_hz=syn.template_rate_hz,
            background_rate_hz=syn.background_rate_hz,
        )
        train_set = gen_synthetic_spike_task(task_rng, samples_per_class=syn.train_samples_per_class, split=0, **common)
        test_set = gen_synthetic_spike_task(task_rng, samples_per_class=syn.test_samples_per_class, split=1, **common)
        dt_ms = sp.dt_ms
        max_steps = int(np.ceil(syn.duration_ms / dt_ms))
    else:
        train_set = read_spike_dataset(config.train_data)
        test_set = read_spike_dataset(config.test_data)
        if (train_set.channels, train_set.classes) != (test_set.channels, test_set.classes):
            raise InvalidInputError("train and test spike files disagree on channels or classes")
        dt_ms = sp.shd.dt_ms
        max_steps = sp.shd.max_steps

    train_x, train_y, _ = bin_events(train_set, dt_ms, max_steps)
    test_x, test_y, _ = bin_events(test_set, dt_ms, max_steps)
    return train_x, train_y, test_x, test_y, train_set.channels, train_set.classes, dt_ms


def _train_spiking(
    config: TrainConfig,
    settings: LabSettings,
    ctx: ConstraintContext,
    emit: Callable[[NetworkCheckpoint], None],
) -> None:
    sp = settings.spiking
    train_x, train_y, test_x, test_y, channels, classes, dt_ms = _spiking_data(config, settings)

    root = RandomSource(config.seed)
    net = spiking_net.init_lif_network(
        root.child(_INIT_STREAM),
        n_inputs=channels,
        n_classes=classes,
        n_hidden=ctx.lattice.n_neurons,
        dt_ms=dt_ms,
        threshold=sp.threshold,
        steepness=sp.surrogate_steepness,
        input_scale=sp.input_scale,
        recurrent_scale=sp.recurrent_scale,
        readout_scale=sp.readout_scale,
        tau_mean_ms=sp.tau_mean_ms,
        tau_shape=sp.tau_shape,
        tau_max_ms=sp.tau_max_ms,
        beta_max=sp.beta_max,
    )
    constants = {
        "threshold": net.threshold,
        "dt_ms": net.dt_ms,
        "steepness": net.steepness,
        "tau_max_ms": net.tau_max_ms,
        "beta_max": net.beta_max,
    }

    def evaluate() -> Tuple[float, float]:
        trace = spiking_net.run_network(net, test_x)
        acc = float(np.mean(np.argmax(trace.scores, axis=1) == test_y))
        return acc, spiking_net.cross_entropy(trace.scores, test_y)

    acc, loss = evaluate()
    emit(_snapshot(config, 0, net.parameters(), acc, loss, ctx, constants))

    state = AdamState()
    n_train = train_x.shape[1]
    for epoch in range(1, config.epochs + 1):
        order = root.child(_EPOCH_STREAM_BASE + epoch).generator.permutation(n_train)
        for start in range(0, n_train, config.batch_size):
            idx = order[start:start + config.batch_size]
            x, y = train_x[:, idx], train_y[idx]
            result = spiking_net.forward_and_loss(net, x, y, config.gamma, config.kind, ctx)
            grads = spiking_net.backward(net, result, y, config.gamma)
            adam_step(net.parameters(), grads, state, config.learning_rate)
            net.clip_decays()

        acc, loss = evaluate()
        logger.info(f"[{config.kind.value} gamma={config.gamma:g} seed={config.seed}] epoch {epoch}: acc={acc:.3f} loss={loss:.4f}")
        emit(_snapshot(config, epoch, net.parameters(), acc, loss, ctx, constants))


_TRAINERS = {
    "rate": _train_rate,
    "spiking": _train_spiking,
}


def train(
    config: TrainConfig,
    out_dir: Optional[Path] = None,
    settings: Optional[LabSettings] = None,
) -> RunResult:
    """
    Train one network, returning a checkpoint per epoch (epoch 0 first).

    When out_dir is given each checkpoint is written as soon as it exists and
    run.json records the outcome. Divergence stops the run with status
    `diverged`; earlier checkpoints are kept.

    Raises:
        InvalidInputError: unusable data files or settings
    """
    settings = settings or get_settings()
    config = config.resolved(settings)
    ctx = ConstraintContext(build_lattice(config.dims), settings.constraints.epsilon_strength)

    result = RunResult(config=config, status=RunStatus.COMPLETED, run_dir=out_dir)
    checkpoints: List[NetworkCheckpoint] = result.checkpoints

    def emit(checkpoint: NetworkCheckpoint) -> None:
        checkpoints.append(checkpoint)
        if out_dir is not None:
            write_checkpoint(checkpoint, out_dir)

    try:
        _TRAINERS[config.task.family](config, settings, ctx, emit)
    except DivergenceError as e:
        logger.warning(
            f"Run {config.kind.value} gamma={config.gamma:g} seed={config.seed} diverged "
            f"after {max(len(checkpoints) - 1, 0)} epochs: {e}"
        )
        result.status = RunStatus.DIVERGED
        result.error = str(e)

    if out_dir is not None:
        write_run_status(result, out_dir)
    return result
