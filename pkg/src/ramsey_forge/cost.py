"""Clique / independent-set counting and the Ramsey cost function.

Every ``k``-subset of vertices is represented by the bitmask of the
``k(k-1)/2`` vertex pairs it spans. A subset is a clique when all those bits
are set and an independent set when none are. All counting routines accept
either a single :class:`~ramsey_forge.graphs.GraphBits` or, in the ``*_many``
variants, an integer array of packed codes so that exhaustive enumeration can
run vectorised.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .graphs import GraphBits, complement, edge_index, num_edges

__all__ = [
    "RamseyInstance",
    "subset_masks",
    "count_cliques",
    "count_independent",
    "ramsey_energy",
    "complement_symmetry_check",
    "clique_counts_many",
    "independent_counts_many",
    "ramsey_energies_many",
]


@dataclass(frozen=True)
class RamseyInstance:
    """Cost function ``h`` for ``N`` vertices, ``m``-cliques and ``n``-independent sets."""

    n_vertices: int
    clique_order: int
    independent_order: int

    def __post_init__(self):
        if self.n_vertices < 2:
            raise ValueError(f"need N >= 2, got {self.n_vertices}")
        if self.clique_order < 2 or self.independent_order < 2:
            raise ValueError(f"orders must be >= 2, got m={self.clique_order}, n={self.independent_order}")
        num_edges(self.n_vertices)

    @property
    def num_bits(self) -> int:
        return num_edges(self.n_vertices)

    def with_vertices(self, n_vertices: int) -> "RamseyInstance":
        return RamseyInstance(n_vertices, self.clique_order, self.independent_order)

    def swapped(self) -> "RamseyInstance":
        return RamseyInstance(self.n_vertices, self.independent_order, self.clique_order)


@lru_cache(maxsize=None)
def subset_masks(n_vertices: int, order: int) -> np.ndarray:
    """Pair bitmask of every ``order``-subset of ``{1..N}`` (lexicographic)."""
    if order < 2:
        raise ValueError(f"subset order must be >= 2, got {order}")
    masks = []
    for subset in combinations(range(1, n_vertices + 1), order):
        mask = 0
        for w, v in combinations(subset, 2):
            mask |= 1 << edge_index(v, w, n_vertices)
        masks.append(mask)
    out = np.array(masks, dtype=np.uint64)
    out.setflags(write=False)
    return out


def _check_order(order: int, n_vertices: int, what: str) -> None:
    if not 2 <= order <= n_vertices:
        raise ValueError(f"{what} order must lie in [2, N={n_vertices}], got {order}")


def count_cliques(g: GraphBits, m: int) -> int:
    """Number of ``m``-cliques in ``g``."""
    _check_order(m, g.n_vertices, "clique")
    code = g.code
    return sum(1 for mask in subset_masks(g.n_vertices, m).tolist() if code & mask == mask)


def count_independent(g: GraphBits, n: int) -> int:
    """Number of ``n``-independent sets in ``g``."""
    _check_order(n, g.n_vertices, "independent-set")
    code = g.code
    return sum(1 for mask in subset_masks(g.n_vertices, n).tolist() if code & mask == 0)


def ramsey_energy(g: GraphBits, inst: RamseyInstance) -> int:
    """Total number of ``m``-cliques and ``n``-independent sets.

    An order larger than ``N`` contributes nothing (no such vertex subsets).
    """
    if g.n_vertices != inst.n_vertices:
        raise ValueError(f"graph has {g.n_vertices} vertices, instance expects {inst.n_vertices}")
    total = 0
    if inst.clique_order <= g.n_vertices:
        total += count_cliques(g, inst.clique_order)
    if inst.independent_order <= g.n_vertices:
        total += count_independent(g, inst.independent_order)
    return total


def complement_symmetry_check(g: GraphBits, inst: RamseyInstance) -> bool:
    """Whether ``h_{m,n}(g) == h_{n,m}(complement(g))``."""
    return ramsey_energy(g, inst) == ramsey_energy(complement(g), inst.swapped())


def _as_codes(codes) -> np.ndarray:
    return np.asarray(codes, dtype=np.uint64)


def clique_counts_many(codes, n_vertices: int, m: int) -> np.ndarray:
    """Vectorised :func:`count_cliques` over an array of packed codes."""
    codes = _as_codes(codes)
    out = np.zeros(codes.shape, dtype=np.int64)
    if m > n_vertices:
        return out
    if m == n_vertices:
        full = np.uint64((1 << num_edges(n_vertices)) - 1)
        return (codes == full).astype(np.int64)
    tmp = np.empty(codes.shape, dtype=np.uint64)
    for mask in subset_masks(n_vertices, m):
        np.bitwise_and(codes, mask, out=tmp)
        out += tmp == mask
    return out


def independent_counts_many(codes, n_vertices: int, n: int, fast: bool = True) -> np.ndarray:
    """Vectorised :func:`count_independent`.

    With ``fast`` and ``n == 2`` the count is the number of absent pairs,
    ``L_N - popcount(code)``.
    """
    codes = _as_codes(codes)
    if n > n_vertices:
        return np.zeros(codes.shape, dtype=np.int64)
    if fast and n == 2:
        return num_edges(n_vertices) - np.bitwise_count(codes).astype(np.int64)
    out = np.zeros(codes.shape, dtype=np.int64)
    tmp = np.empty(codes.shape, dtype=np.uint64)
    for mask in subset_masks(n_vertices, n):
        np.bitwise_and(codes, mask, out=tmp)
        out += tmp == 0
    return out


def ramsey_energies_many(codes, inst: RamseyInstance, fast: bool = True) -> np.ndarray:
    """Vectorised :func:`ramsey_energy` over packed codes."""
    n = inst.n_vertices
    out = clique_counts_many(codes, n, inst.clique_order)
    out += independent_counts_many(codes, n, inst.independent_order, fast=fast)
    return out
