"""Bit-string encoding of simple graphs.

An ``N``-vertex graph is stored as the ``L_N = N(N-1)/2`` entries of its
adjacency matrix lying below the diagonal, concatenated column by column::

    a(2,1) a(3,1) ... a(N,1)  a(3,2) ... a(N,2)  ...  a(N,N-1)

Vertices are 1-based, bit positions 0-based. Bit ``i`` of the packed integer
:attr:`GraphBits.code` holds the entry at position ``i``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

__all__ = [
    "MAX_VERTICES",
    "GraphBits",
    "num_edges",
    "edge_index",
    "edge_pairs",
    "bits_from_adjacency",
    "adjacency_from_bits",
    "complement",
    "format_graph",
    "parse_graph",
]

MAX_VERTICES = 23


def num_edges(n_vertices: int) -> int:
    """Number of vertex pairs ``L_N`` of an ``N``-vertex graph."""
    _check_order(n_vertices)
    return n_vertices * (n_vertices - 1) // 2


def _check_order(n_vertices: int) -> None:
    if not isinstance(n_vertices, (int, np.integer)) or isinstance(n_vertices, bool):
        raise TypeError(f"vertex count must be an integer, got {n_vertices!r}")
    if not 1 <= n_vertices <= MAX_VERTICES:
        raise ValueError(f"vertex count must lie in [1, {MAX_VERTICES}], got {n_vertices}")


def edge_index(v: int, w: int, n_vertices: int) -> int:
    """Zero-based bit position of the pair ``{v, w}`` with ``1 <= w < v <= N``.

    >>> edge_index(2, 1, 4), edge_index(4, 3, 4)
    (0, 5)
    """
    _check_order(n_vertices)
    if not (1 <= w < v <= n_vertices):
        raise ValueError(f"need 1 <= w < v <= N, got v={v}, w={w}, N={n_vertices}")
    # columns 1..w-1 hold N-1, N-2, ..., N-w+1 entries
    before = (w - 1) * n_vertices - (w - 1) * w // 2
    return before + (v - w - 1)


@lru_cache(maxsize=None)
def edge_pairs(n_vertices: int) -> tuple[tuple[int, int], ...]:
    """All pairs ``(v, w)`` with ``v > w`` listed in bit order."""
    _check_order(n_vertices)
    return tuple((v, w) for w in range(1, n_vertices) for v in range(w + 1, n_vertices + 1))


@dataclass(frozen=True)
class GraphBits:
    """An ``N``-vertex graph packed into an integer bit-vector."""

    n_vertices: int
    code: int

    def __post_init__(self):
        _check_order(self.n_vertices)
        if not 0 <= self.code < (1 << num_edges(self.n_vertices)):
            raise ValueError(f"code {self.code} does not fit in {self.length} bits")

    @property
    def length(self) -> int:
        return num_edges(self.n_vertices)

    @classmethod
    def from_bits(cls, bits: Iterable[int] | str, n_vertices: int | None = None) -> "GraphBits":
        """Build from a 0/1 sequence (position 0 first) or a string like ``"101"``."""
        values = [int(b) for b in bits]
        if any(b not in (0, 1) for b in values):
            raise ValueError("bits must be 0 or 1")
        if n_vertices is None:
            n_vertices = _order_from_length(len(values))
        if len(values) != num_edges(n_vertices):
            raise ValueError(f"expected {num_edges(n_vertices)} bits for N={n_vertices}, got {len(values)}")
        code = sum(b << i for i, b in enumerate(values))
        return cls(n_vertices, code)

    @classmethod
    def empty(cls, n_vertices: int) -> "GraphBits":
        return cls(n_vertices, 0)

    @classmethod
    def complete(cls, n_vertices: int) -> "GraphBits":
        return cls(n_vertices, (1 << num_edges(n_vertices)) - 1)

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[tuple[int, int]]) -> "GraphBits":
        code = 0
        for v, w in edges:
            v, w = max(v, w), min(v, w)
            code |= 1 << edge_index(v, w, n_vertices)
        return cls(n_vertices, code)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.code >> i) & 1 for i in range(self.length))

    def bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)

    def has_edge(self, v: int, w: int) -> bool:
        v, w = max(v, w), min(v, w)
        return bool((self.code >> edge_index(v, w, self.n_vertices)) & 1)

    def num_present(self) -> int:
        return self.code.bit_count()

    def __str__(self) -> str:
        return format_graph(self)


def _order_from_length(length: int) -> int:
    for n in range(1, MAX_VERTICES + 1):
        if num_edges(n) == length:
            return n
    raise ValueError(f"{length} is not a triangular number N(N-1)/2 with N <= {MAX_VERTICES}")


def bits_from_adjacency(adj) -> GraphBits:
    """Encode a symmetric 0/1 adjacency matrix with zero diagonal."""
    adj = np.asarray(adj)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency matrix must be square")
    if not np.isin(adj, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    if not np.array_equal(adj, adj.T):
        raise ValueError("adjacency matrix must be symmetric")
    if np.any(np.diag(adj)):
        raise ValueError("adjacency matrix must have a zero diagonal")
    n = adj.shape[0]
    bits = [int(adj[v - 1, w - 1]) for v, w in edge_pairs(n)]
    return GraphBits.from_bits(bits, n)


def adjacency_from_bits(g: GraphBits) -> np.ndarray:
    """Symmetric 0/1 adjacency matrix (vertex ``v`` at row ``v - 1``)."""
    n = g.n_vertices
    adj = np.zeros((n, n), dtype=np.int8)
    for i, (v, w) in enumerate(edge_pairs(n)):
        if (g.code >> i) & 1:
            adj[v - 1, w - 1] = adj[w - 1, v - 1] = 1
    return adj


def complement(g: GraphBits) -> GraphBits:
    return GraphBits(g.n_vertices, g.code ^ ((1 << g.length) - 1))


_TEXT = re.compile(r"^\s*N:(\d+);bits:([01]*)\s*$")


def format_graph(g: GraphBits) -> str:
    """Text form ``N:<int>;bits:<0/1 string>``."""
    return f"N:{g.n_vertices};bits:{g.bitstring()}"


def parse_graph(text: str) -> GraphBits:
    match = _TEXT.match(text)
    if match is None:
        raise ValueError(f"not a graph record: {text!r}")
    return GraphBits.from_bits(match.group(2), int(match.group(1)))
