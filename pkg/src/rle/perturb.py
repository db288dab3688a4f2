"""Weak perturbations: element shuffles and their adjacency feature vectors.

A permuted sample assigns elements to layout slots (with replacement by
default).  Its element-level graph records which *elements* ended up next to
each other, and the strict lower triangle of that matrix is the feature row
fed to the surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decompose import SampleDecomposition
from .errors import AsymmetricInput

WITH_REPLACEMENT = "replacement"
PURE_SHUFFLE = "shuffle"


@dataclass(frozen=True)
class PermutedSample:
    placement: tuple  # placement[slot] = element index
    seed_draw: int  # index of the RNG draw that produced this sample


def weak_permute(
    decomp: SampleDecomposition,
    rng: np.random.Generator,
    mode: str = WITH_REPLACEMENT,
    draw_index: int = 0,
) -> PermutedSample:
    """Draw one random placement of elements into slots.

    With-replacement mode samples each slot i.i.d. uniformly over elements;
    shuffle mode draws a uniform random bijection.
    """
    n = decomp.n
    if mode == WITH_REPLACEMENT:
        placement = rng.integers(0, n, size=n)
    elif mode == PURE_SHUFFLE:
        placement = rng.permutation(n)
    else:
        raise ValueError(f"unknown permute mode {mode!r}")
    return PermutedSample(placement=tuple(int(x) for x in placement),
                          seed_draw=draw_index)


def build_adjacency(
    decomp: SampleDecomposition, perm: PermutedSample
) -> np.ndarray:
    """Element adjacency of a permuted sample as an (n, n) 0/1 matrix.

    entries[u, v] == 1 iff some placed copy of u sits in a slot adjacent to
    some placed copy of v.  Self-pairs from duplicate placements are dropped
    (zero diagonal).
    """
    n = decomp.n
    adj = np.zeros((n, n), dtype=np.uint8)
    p = perm.placement
    for s, t in decomp.layout.adjacency:
        u, v = p[s], p[t]
        if u != v:
            adj[u, v] = 1
            adj[v, u] = 1
    return adj


def lower_triangle(adj: np.ndarray) -> np.ndarray:
    """Strict lower triangle of a symmetric matrix, flattened row-major.

    Order is (1,0), (2,0), (2,1), (3,0), ...; length n(n-1)/2.
    """
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise AsymmetricInput("expected a square matrix")
    if not np.array_equal(adj, adj.T):
        raise AsymmetricInput("matrix is not symmetric")
    n = adj.shape[0]
    rows, cols = np.tril_indices(n, k=-1)
    return np.ascontiguousarray(adj[rows, cols])


def expand_lower_triangle(values: Sequence[float], n: int) -> np.ndarray:
    """Inverse of lower_triangle: rebuild the symmetric zero-diagonal matrix."""
    values = np.asarray(values)
    if values.shape != (n * (n - 1) // 2,):
        raise ValueError(
            f"expected {n * (n - 1) // 2} values for n={n}, got {values.shape}"
        )
    out = np.zeros((n, n), dtype=values.dtype if values.dtype.kind == "f" else float)
    rows, cols = np.tril_indices(n, k=-1)
    out[rows, cols] = values
    out[cols, rows] = values
    return out


def pair_index(u: int, v: int) -> int:
    """Position of unordered pair {u, v} in lower-triangle order."""
    if u == v:
        raise ValueError("no diagonal entries in the strict lower triangle")
    hi, lo = (u, v) if u > v else (v, u)
    return hi * (hi - 1) // 2 + lo


def index_pair(k: int, n: int) -> tuple:
    """Inverse of pair_index for a given matrix size; returns (hi, lo)."""
    rows, cols = np.tril_indices(n, k=-1)
    return int(rows[k]), int(cols[k])
