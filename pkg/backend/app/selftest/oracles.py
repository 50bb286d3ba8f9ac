"""
Oracle Suite

Independent references for the numerical core:
- matrix_exp: truncated Taylor series
- eigenvalues: roots of the exact characteristic polynomial
- modularity: exhaustive search over all labelings
- modularity_heuristic: exact enumeration on planted graphs
- entropy: closed-form values
- rate_gradient / spiking_gradient: central finite differences
"""

import itertools
from math import factorial

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core.constraints import ConstraintContext, RegularizerKind, constraint_loss
from ..core.embedding import build_lattice
from ..core.numerics import ComplexSpectrum, RandomSource, eigenvalues, matrix_exp
from ..core.settings import get_settings
from ..metrics.measures import shannon_entropy, spectral_entropy
from ..metrics.modularity import exact_modularity, heuristic_modularity, modularity_q
from ..networks import rate_net, spiking_net
from .base import BaseOracle, OracleResult, register_oracle

SEED = 20240521


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """||a - n|| / max(||a|| + ||n||, floor)."""
    diff = np.linalg.norm(analytic - numeric)
    return float(diff / max(np.linalg.norm(analytic) + np.linalg.norm(numeric), floor))


def _result(name: str, max_error: float, tolerance: float, detail: str, **details) -> OracleResult:
    return OracleResult(
        name=name,
        passed=bool(max_error <= tolerance),
        max_error=float(max_error),
        tolerance=tolerance,
        detail=detail,
        details=details,
    )


@register_oracle("matrix_exp")
class MatrixExpOracle(BaseOracle):
    """e^M against a 100-term Taylor series on 50 random 6x6 matrices, ||M||_1 <= 5."""

    description = "matrix exponential vs Taylor series"
    cases = 50
    terms = 100
    tolerance = 1e-10

    def run(self) -> OracleResult:
        gen = RandomSource(SEED).generator
        worst = 0.0
        for _ in range(self.cases):
            m = gen.standard_normal((6, 6))
            m *= gen.uniform(0.1, 5.0) / np.linalg.norm(m, 1)
            series = np.zeros_like(m)
            power = np.eye(6)
            for k in range(self.terms):
                series += power / factorial(k)
                power = power @ m
            worst = max(worst, np.linalg.norm(matrix_exp(m) - series) / np.linalg.norm(series))
        return _result(self.name, worst, self.tolerance, f"{self.cases} matrices, {self.terms} terms")


def _char_poly_3x3(m: np.ndarray) -> np.ndarray:
    """Exact integer coefficients of det(lambda I - M)."""
    a = m.astype(np.int64)
    trace = a[0, 0] + a[1, 1] + a[2, 2]
    minors = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    det = (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )
    return np.array([1, -trace, minors, -det], dtype=np.float64)


@register_oracle("eigenvalues")
class EigenvalueOracle(BaseOracle):
    """
    Eigenvalues of 100 random 3x3 integer matrices against characteristic
    polynomial roots, and max |Im| on random symmetric 100x100 matrices.
    """

    description = "eigenvalues vs characteristic polynomial"
    cases = 100
    symmetric_cases = 5
    tolerance = 1e-8

    def run(self) -> OracleResult:
        gen = RandomSource(SEED + 1).generator
        worst = 0.0
        accepted = 0
        while accepted < self.cases:
            m = gen.integers(-5, 6, size=(3, 3))
            roots = np.roots(_char_poly_3x3(m))
            # Repeated roots are ill-conditioned for any method
            gaps = [abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3)]
            if min(gaps) < 1e-3:
                continue
            accepted += 1
            vals = eigenvalues(m).values
            cost = np.abs(vals[:, None] - roots[None, :])
            rows, cols = linear_sum_assignment(cost)
            worst = max(worst, float(cost[rows, cols].max()))

        worst_imag = 0.0
        for _ in range(self.symmetric_cases):
            a = gen.standard_normal((100, 100))
            worst_imag = max(worst_imag, float(np.abs(eigenvalues(a + a.T).imag).max()))

        return _result(
            self.name,
            max(worst, worst_imag),
            self.tolerance,
            f"{self.cases} integer 3x3 (max dev {worst:.2e}), "
            f"{self.symmetric_cases} symmetric 100x100 (max |Im| {worst_imag:.2e})",
        )


def brute_force_modularity(w: np.ndarray) -> float:
    """Maximum Q over every assignment of n nodes to n labels."""
    a = np.abs(w).astype(np.float64)
    np.fill_diagonal(a, 0.0)
    n, m = a.shape[0], a.sum()
    b = a - np.outer(a.sum(axis=1), a.sum(axis=0)) / m
    labels = np.array(list(itertools.product(range(n), repeat=n)))
    same = labels[:, :, None] == labels[:, None, :]
    return float((same.reshape(len(labels), -1) @ b.ravel()).max() / m)


@register_oracle("modularity")
class ModularityOracle(BaseOracle):
    """Q on 20 random weighted 6-node digraphs against exhaustive search, plus the two-block graph."""

    description = "modularity vs brute force"
    cases = 20
    tolerance = 1e-10

    def run(self) -> OracleResult:
        gen = RandomSource(SEED + 2).generator
        worst = 0.0
        for _ in range(self.cases):
            w = gen.uniform(0.0, 1.0, size=(6, 6)) * (gen.random((6, 6)) < 0.5)
            if np.abs(w).sum() - np.abs(np.diag(w)).sum() == 0:
                w[0, 1] = 1.0
            q, _ = modularity_q(w)
            worst = max(worst, abs(q - brute_force_modularity(w)))

        two_block = np.zeros((4, 4))
        two_block[0, 1] = two_block[1, 0] = two_block[2, 3] = two_block[3, 2] = 1.0
        q_block, labels = modularity_q(two_block)
        block_error = abs(q_block - 0.5)
        return _result(
            self.name,
            max(worst, block_error),
            self.tolerance,
            f"{self.cases} random digraphs, two-block Q={q_block:.12f} labels={labels.tolist()}",
        )


def planted_digraph(gen, sizes=(4, 4), inside=(0.5, 1.0), across=0.05, density=0.25) -> np.ndarray:
    """Dense strong blocks on the diagonal, sparse weak edges between them."""
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = labels.size
    same = labels[:, None] == labels[None, :]
    w = np.where(same, gen.uniform(*inside, size=(n, n)), across * gen.random((n, n)) * (gen.random((n, n)) < density))
    np.fill_diagonal(w, 0.0)
    return w


@register_oracle("modularity_heuristic")
class HeuristicModularityOracle(BaseOracle):
    """The spectral path used above the exact-enumeration size, on planted 8-node digraphs, against exact enumeration."""

    description = "heuristic modularity vs exact"
    cases = 10
    tolerance = 0.02

    def run(self) -> OracleResult:
        gen = RandomSource(SEED + 5).generator
        worst = 0.0
        for _ in range(self.cases):
            a = planted_digraph(gen)
            q_exact, _ = exact_modularity(a)
            q, _ = heuristic_modularity(a)
            worst = max(worst, q_exact - q if q <= q_exact + 1e-10 else np.inf)
        return _result(self.name, worst, self.tolerance, f"{self.cases} planted two-block digraphs, worst gap {worst:.3g}")


@register_oracle("entropy")
class EntropyOracle(BaseOracle):
    """Closed forms: H(ones 100x100) = 2 log2(100) / 100 and spectral entropy of I_4 = 2."""

    description = "entropy analytic values"
    tolerance = 1e-9

    def run(self) -> OracleResult:
        h_ones = shannon_entropy(np.ones((100, 100)))
        h_identity = spectral_entropy(ComplexSpectrum(np.ones(4, dtype=np.complex128)))
        err_ones = abs(h_ones - 2.0 * np.log2(100.0) / 100.0)
        err_identity = abs(h_identity - 2.0)
        return _result(
            self.name,
            max(err_ones, err_identity),
            self.tolerance,
            f"H(ones)={h_ones:.9f}, H_lambda(I4)={h_identity:.12f}",
        )


def _central_differences(params: dict, loss, step: float) -> dict:
    grads = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + step
            up = loss()
            p[idx] = orig - step
            down = loss()
            p[idx] = orig
            g[idx] = (up - down) / (2.0 * step)
        grads[name] = g
    return grads


@register_oracle("rate_gradient")
class RateGradientOracle(BaseOracle):
    """BPTT gradients of a 5-neuron rate net against central differences, gamma > 0, frozen multiplier."""

    description = "rate BPTT vs finite differences"
    tolerance = 1e-4
    step = 1e-6
    gamma = 0.05

    def run(self) -> OracleResult:
        rng = RandomSource(SEED + 3)
        ctx = ConstraintContext(build_lattice((5, 1, 1)))
        net = rate_net.init_rate_rnn(rng.child(0), 5, spectral_radius=0.9)
        batch = rate_net.generate_trials(rng.child(1), 8)
        kind = RegularizerKind.SE_SPACE_COMM

        breakdown = rate_net.task_loss_and_grads(net, batch, self.gamma, kind, ctx)
        _, multiplier = constraint_loss(net.w_rec, kind, ctx)

        def loss() -> float:
            return rate_net.task_loss(net, batch) + self.gamma * float(np.sum(np.abs(net.w_rec) * multiplier))

        numeric = _central_differences(net.parameters(), loss, self.step)
        errors = {name: relative_error(breakdown.grads[name], numeric[name]) for name in numeric}
        return _result(self.name, max(errors.values()), self.tolerance, "5 neurons, 8 trials", errors=errors)


@register_oracle("spiking_gradient")
class SpikingGradientOracle(BaseOracle):
    """
    Surrogate BPTT of a 5-neuron, 20-step LIF net against central differences
    of the smoothed model (surrogate antiderivative in the forward pass, reset
    frozen at its base-point values).
    """

    description = "spiking BPTT vs finite differences"
    tolerance = 1e-4
    step = 1e-6
    # A soft surrogate keeps every membrane inside the gradient-carrying band
    soft_steepness = 5.0

    def run(self) -> OracleResult:
        steepness = get_settings().spiking.surrogate_steepness
        errors = {}
        for rho in sorted({self.soft_steepness, steepness}):
            case = self._check(rho)
            errors.update({f"{name}@rho={rho:g}": err for name, err in case.items()})
        return _result(
            self.name, max(errors.values()), self.tolerance,
            f"5 neurons, 20 steps, 4 samples, rho in {{{self.soft_steepness:g}, {steepness:g}}}", errors=errors,
        )

    def _check(self, steepness: float) -> dict:
        rng = RandomSource(SEED + 4)
        ctx = ConstraintContext(build_lattice((5, 1, 1)))
        # Smoothed spikes are bounded by 1/rho; the readout grows with rho to keep the loss sensitive
        net = spiking_net.init_lif_network(
            rng.child(0), n_inputs=3, n_classes=3, n_hidden=5,
            input_scale=3.0, recurrent_scale=1.0, steepness=steepness,
            readout_scale=max(1.0, steepness / self.soft_steepness),
        )
        gen = rng.child(1).generator
        inputs = (gen.random((20, 4, 3)) < 0.3).astype(np.float64)
        targets = gen.integers(0, 3, size=4)
        kind = RegularizerKind.BASELINE_L1

        base = spiking_net.forward_and_loss(net, inputs, targets, 0.0, kind, ctx, smooth=True)
        frozen = base.trace.reset.copy()
        analytic = spiking_net.backward(net, base, targets, 0.0)

        def loss() -> float:
            trace = spiking_net.run_network(net, inputs, smooth=True, frozen_reset=frozen)
            return spiking_net.cross_entropy(trace.scores, targets)

        numeric = _central_differences(net.parameters(), loss, self.step)
        return {name: relative_error(analytic[name], numeric[name]) for name in numeric}
