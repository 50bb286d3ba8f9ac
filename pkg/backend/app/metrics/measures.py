"""
Network Outcome Measures

Entropies, spectral summaries and weight statistics of a recurrent weight
matrix. All probability normalisations use |w|, since trained weights are
signed.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import stats

from ..core.embedding import DistanceLattice
from ..core.errors import InvalidInputError, UndefinedEntropyError
from ..core.numerics import ComplexSpectrum, as_matrix, pearson

logger = logging.getLogger(__name__)


def shannon_entropy(m) -> float:
    """
    H(M) = -(1/N) sum p_ij log2 p_ij with p = |M| / sum |M| over all entries.

    The 1/N prefactor is part of the definition, so the maximum for an N x N
    matrix is 2 log2(N) / N.

    Raises:
        UndefinedEntropyError: all-zero matrix
    """
    a = np.abs(as_matrix(m, square=True, name="M"))
    total = a.sum()
    if total == 0:
        raise UndefinedEntropyError("entropy of an all-zero matrix is undefined")
    return float(stats.entropy(a.ravel(), base=2) / a.shape[0])


def spectral_entropy(spectrum: ComplexSpectrum) -> float:
    """Entropy (bits) of the normalised eigenvalue moduli; 0 for an all-zero spectrum."""
    moduli = spectrum.moduli
    if moduli.size == 0:
        raise InvalidInputError("spectral entropy of an empty spectrum")
    if moduli.sum() == 0:
        return 0.0
    return float(stats.entropy(moduli, base=2))


def leading_eigenvalue(spectrum: ComplexSpectrum) -> float:
    """Spectral radius max |lambda_i|."""
    if len(spectrum) == 0:
        raise InvalidInputError("leading eigenvalue of an empty spectrum")
    return float(np.max(spectrum.moduli))


def imag_fraction(spectrum: ComplexSpectrum) -> float:
    """sum |Im lambda| / sum |lambda|; 0 for an all-zero spectrum."""
    if len(spectrum) == 0:
        raise InvalidInputError("imaginary fraction of an empty spectrum")
    total = spectrum.moduli.sum()
    if total == 0:
        return 0.0
    return float(np.abs(spectrum.imag).sum() / total)


def symmetry_index(w) -> float:
    """
    ||W - W^T|| / (||W - W^T|| + ||W + W^T||), Frobenius norms.

    0 for a symmetric matrix, 1 for an antisymmetric one.
    """
    w = as_matrix(w, square=True, name="W")
    anti = np.linalg.norm(w - w.T)
    sym = np.linalg.norm(w + w.T)
    if anti + sym == 0:
        raise InvalidInputError("symmetry index of a zero matrix is undefined")
    return float(anti / (anti + sym))


def total_weight(w) -> float:
    return float(np.abs(as_matrix(w, name="W")).sum())


def connection_probabilities(w) -> np.ndarray:
    """p_ij = |w_ij| / sum |w|."""
    a = np.abs(as_matrix(w, square=True, name="W"))
    total = a.sum()
    if total == 0:
        raise UndefinedEntropyError("connection probabilities of an all-zero matrix are undefined")
    return a / total


def probability_distance_pairs(w, lattice: DistanceLattice) -> Tuple[np.ndarray, np.ndarray]:
    """(p_ij, D_ij) over off-diagonal pairs with p_ij > 0."""
    p = connection_probabilities(w)
    if p.shape != lattice.distances.shape:
        raise InvalidInputError(
            f"W is {p.shape[0]}x{p.shape[1]} but the lattice has {lattice.n_neurons} neurons"
        )
    mask = ~np.eye(p.shape[0], dtype=bool) & (p > 0)
    return p[mask], lattice.distances[mask]


def distance_weight_correlation(
    w,
    lattice: DistanceLattice,
    permutations: int = 10_000,
    seed: int = 0,
) -> Tuple[float, float]:
    """
    Pearson r between connection probability and length, with a permutation p.

    Raises:
        InvalidInputError: fewer than 3 non-zero off-diagonal connections
        DegenerateVarianceError: equal weights or equal distances
    """
    p, d = probability_distance_pairs(w, lattice)
    if p.size < 3:
        raise InvalidInputError(f"need at least 3 non-zero off-diagonal connections, got {p.size}")
    return pearson(p, d, permutations=permutations, seed=seed)
