"""
Numerics for seRNN Lab

Dense linear algebra, seeded randomness and the statistical primitives every
other module builds on. All arithmetic is float64.

Design Philosophy:
- Lean on LAPACK (through scipy) for the matrix exponential and eigenvalues
- One well-specified generator (PCG64) so a seed pins the whole stream
- Statistical tests reproducible from a fixed permutation seed
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy import linalg, stats

from .errors import (
    ConvergenceError,
    DegenerateVarianceError,
    InvalidInputError,
)

logger = logging.getLogger(__name__)

# Conjugate-pair matching tolerance for real-input spectra
CONJUGATE_TOL = 1e-8

# Peak memory per permutation batch (elements)
_PERMUTATION_BATCH_ELEMENTS = 2_000_000

Matrix = np.ndarray


def as_matrix(values, square: bool = False, name: str = "matrix") -> Matrix:
    """Coerce to a finite float64 2-D array, optionally square."""
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return m


# =============================================================================
# RANDOMNESS
# =============================================================================

def child_seed(parent_seed: int, index: int) -> int:
    """Derive an independent 64-bit seed: hash(parent_seed, index) via SeedSequence."""
    seq = np.random.SeedSequence([int(parent_seed), int(index)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass
class RandomSource:
    """
    Seeded PCG64 stream.

    Single-owner: hand a worker `child(i)` rather than sharing an instance.
    """

    seed: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise InvalidInputError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, index: int) -> "RandomSource":
        """Independent stream for sub-task `index`."""
        return RandomSource(child_seed(self.seed, index))


def gamma_sample(rng: RandomSource, shape: float, scale: float, n: int) -> np.ndarray:
    """
    Draw n Gamma(shape, scale) variates.

    numpy's generator uses Marsaglia-Tsang for shape >= 1; below 1 we apply
    the boost Gamma(k) = Gamma(k + 1) * U^(1/k).
    """
    if shape <= 0 or scale <= 0:
        raise InvalidInputError(f"gamma shape and scale must be positive, got k={shape}, theta={scale}")
    if n < 0:
        raise InvalidInputError(f"sample count must be non-negative, got {n}")
    if n == 0:
        return np.empty(0, dtype=np.float64)

    gen = rng.generator
    if shape >= 1.0:
        return gen.gamma(shape, scale, size=n)
    boosted = gen.gamma(shape + 1.0, scale, size=n)
    u = gen.random(size=n)
    return boosted * u ** (1.0 / shape)


# =============================================================================
# LINEAR ALGEBRA
# =============================================================================

@dataclass(frozen=True)
class ComplexSpectrum:
    """The N eigenvalues of a square matrix."""

    values: np.ndarray  # complex128, length N

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[complex]:
        return iter(self.values)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.values)

    def pairs(self) -> list:
        """(re, im) tuples."""
        return [(float(v.real), float(v.imag)) for v in self.values]

    def has_conjugate_pairs(self, tol: float = CONJUGATE_TOL) -> bool:
        """True when every non-real value has a partner (a, -b) within tol."""
        vals = self.values
        for v in vals:
            if abs(v.imag) > tol and np.min(np.abs(vals - np.conj(v))) > tol:
                return False
        return True


def matrix_exp(m) -> Matrix:
    """
    e^M by scaling-and-squaring with a Pade core (scipy.linalg.expm).

    Raises:
        InvalidInputError: non-square or non-finite input
    """
    m = as_matrix(m, square=True)
    return linalg.expm(m)


def eigenvalues(m) -> ComplexSpectrum:
    """
    All eigenvalues of a real square matrix.

    Exactly symmetric input goes through the symmetric solver, so its
    spectrum is real by construction. Everything else uses LAPACK geev
    (Hessenberg reduction then shifted QR).

    Raises:
        InvalidInputError: non-square or non-finite input
        ConvergenceError: QR iteration exhausted its budget
    """
    m = as_matrix(m, square=True)
    try:
        if np.array_equal(m, m.T):
            vals = linalg.eigvalsh(m).astype(np.complex128)
        else:
            vals = linalg.eigvals(m, check_finite=False).astype(np.complex128)
    except linalg.LinAlgError as e:
        raise ConvergenceError(f"eigenvalue iteration failed to converge for {m.shape[0]}x{m.shape[0]} input: {e}") from e
    return ComplexSpectrum(values=vals)


# =============================================================================
# STATISTICS
# =============================================================================

def _as_series(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def pearson(
    x: Sequence[float],
    y: Sequence[float],
    permutations: int = 10_000,
    seed: int = 0,
) -> Tuple[float, float]:
    """
    Sample Pearson r with a one-sided permutation p-value.

    The alternative follows the sign of r (r >= 0 tests "greater").
    With the default 10,000 shuffles the smallest p is about 1e-4.

    Raises:
        InvalidInputError: unequal lengths or fewer than 3 points
        DegenerateVarianceError: either series is constant
    """
    xs = _as_series(x, "x")
    ys = _as_series(y, "y")
    if xs.size != ys.size:
        raise InvalidInputError(f"pearson needs equal lengths, got {xs.size} and {ys.size}")
    if xs.size < 3:
        raise InvalidInputError(f"pearson needs at least 3 points, got {xs.size}")
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        raise DegenerateVarianceError("pearson is undefined for a constant series")

    yc = ys - ys.mean()
    syy = np.dot(yc, yc)

    def statistic(sample, axis=-1):
        xc = sample - sample.mean(axis=axis, keepdims=True)
        num = np.sum(xc * yc, axis=axis)
        return num / np.sqrt(np.sum(xc * xc, axis=axis) * syy)

    r = float(np.clip(statistic(xs), -1.0, 1.0))
    alternative = "greater" if r >= 0 else "less"

    result = stats.permutation_test(
        (xs,),
        statistic,
        permutation_type="pairings",
        vectorized=True,
        n_resamples=permutations,
        alternative=alternative,
        batch=max(1, _PERMUTATION_BATCH_ELEMENTS // xs.size),
        random_state=np.random.default_rng(seed),
    )
    return r, float(result.pvalue)


def mann_whitney(
    a: Sequence[float],
    b: Sequence[float],
    alternative: str = "less",
) -> Tuple[float, float]:
    """
    Mann-Whitney U of `a` against `b` with a tie-corrected normal p.

    U counts pairs with a > b (ties count one half), so U = 0 means every
    value of b is larger. `alternative="less"` tests that a tends smaller.

    Raises:
        InvalidInputError: an empty group or an unknown alternative
    """
    xa = _as_series(a, "a")
    xb = _as_series(b, "b")
    if xa.size == 0 or xb.size == 0:
        raise InvalidInputError("mann_whitney needs two non-empty groups")
    if alternative not in ("less", "greater", "two-sided"):
        raise InvalidInputError(f"unknown alternative {alternative!r}")

    result = stats.mannwhitneyu(
        xa,
        xb,
        alternative=alternative,
        method="asymptotic",
        use_continuity=False,
    )
    return float(result.statistic), float(result.pvalue)
