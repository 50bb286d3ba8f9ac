"""
Spatial Embedding

Neurons sit on an evenly spaced integer grid inside a box (default 5 x 5 x 4,
100 neurons). The pairwise Euclidean distance matrix D feeds the spatial
constraint and the distance/weight correlation.

Neuron n maps to (n mod nx, floor(n / nx) mod ny, floor(n / (nx * ny))):
x varies fastest, z slowest.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InvalidInputError

MAX_NEURONS = 10_000
DEFAULT_DIMS = (5, 5, 4)


@dataclass(frozen=True)
class DistanceLattice:
    """Neuron coordinates and their distance matrix."""

    dims: Tuple[int, int, int]
    coords: np.ndarray     # (N, 3) int
    distances: np.ndarray  # (N, N) float64

    @property
    def n_neurons(self) -> int:
        return int(self.coords.shape[0])

    @property
    def max_distance(self) -> float:
        nx, ny, nz = self.dims
        return float(np.sqrt((nx - 1) ** 2 + (ny - 1) ** 2 + (nz - 1) ** 2))

    def permuted(self, perm: Sequence[int]) -> "DistanceLattice":
        """Relabel neurons: new neuron i is old neuron perm[i]."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n_neurons)):
            raise InvalidInputError("perm must be a permutation of the neuron indices")
        return DistanceLattice(
            dims=self.dims,
            coords=self.coords[perm],
            distances=self.distances[np.ix_(perm, perm)],
        )

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "n_neurons": self.n_neurons}


def build_lattice(dims: Sequence[int] = DEFAULT_DIMS) -> DistanceLattice:
    """
    Build the lattice for a (nx, ny, nz) box with unit spacing.

    Raises:
        InvalidInputError: a dimension below 1 or more than 10^4 neurons
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise InvalidInputError(f"lattice needs three dimensions, got {dims}")
    if any(d < 1 for d in dims):
        raise InvalidInputError(f"lattice dimensions must be >= 1, got {dims}")
    nx, ny, nz = dims
    n = nx * ny * nz
    if n > MAX_NEURONS:
        raise InvalidInputError(f"lattice of {n} neurons exceeds the cap of {MAX_NEURONS}")

    idx = np.arange(n)
    coords = np.stack([idx % nx, (idx // nx) % ny, idx // (nx * ny)], axis=1)

    if n == 1:
        distances = np.zeros((1, 1))
    else:
        distances = squareform(pdist(coords.astype(np.float64), metric="euclidean"))

    return DistanceLattice(dims=dims, coords=coords, distances=distances)
