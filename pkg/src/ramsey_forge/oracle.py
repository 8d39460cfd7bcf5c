"""Exhaustive ground-state enumeration.

The bit-string space is cut into fixed-size integer ranges that are scored
independently and merged with an associative ``(min, count, minimizers)``
reduction, so the result does not depend on the number of worker threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cost import RamseyInstance, ramsey_energies_many
from .graphs import GraphBits
from .qubo import QuadraticModel

__all__ = [
    "ENUMERATION_CAP",
    "KEEP_LIMIT",
    "GroundTruth",
    "exhaustive_ground",
    "exhaustive_model_ground",
    "resolve_threads",
]

ENUMERATION_CAP = 30
KEEP_LIMIT = 100_000
_CHUNK_BITS = 22


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("RAMSEY_FORGE_THREADS", "1"))
    return max(1, int(threads))


@dataclass
class GroundTruth:
    instance: RamseyInstance
    e_gs: int
    degeneracy: int
    minimizers: list[GraphBits] | None = field(default=None, repr=False)


@dataclass
class _Partial:
    e_min: float
    count: int
    codes: list[int] | None

    def merge(self, other: "_Partial", keep: int) -> "_Partial":
        if other.e_min < self.e_min:
            return other
        if other.e_min > self.e_min:
            return self
        codes = None
        if self.codes is not None and other.codes is not None:
            codes = self.codes + other.codes
            if len(codes) > keep:
                codes = None
        return _Partial(self.e_min, self.count + other.count, codes)


def _reduce(scores: np.ndarray, start: int, keep: int, tol: float = 0.0) -> _Partial:
    e_min = scores.min()
    hits = np.flatnonzero(scores <= e_min + tol)
    codes = (hits + start).tolist() if len(hits) <= keep else None
    return _Partial(e_min.item(), len(hits), codes)


def _run_chunks(score, total_bits: int, threads: int | None, keep: int, tol: float = 0.0) -> _Partial:
    size = 1 << min(total_bits, _CHUNK_BITS)
    starts = range(0, 1 << total_bits, size)

    def work(start: int) -> _Partial:
        return _reduce(score(start, size), start, keep, tol)

    n_threads = resolve_threads(threads)
    if n_threads == 1:
        parts = map(work, starts)
    else:
        with ThreadPoolExecutor(n_threads) as pool:
            parts = list(pool.map(work, starts))
    result = None
    for part in parts:
        result = part if result is None else result.merge(part, keep)
    return result


def exhaustive_ground(
    inst: RamseyInstance,
    threads: int | None = None,
    keep: int = KEEP_LIMIT,
    fast: bool = True,
) -> GroundTruth:
    """Minimum of ``h^N_{m,n}`` and its degeneracy over all ``2^{L_N}`` graphs."""
    L = inst.num_bits
    if L > ENUMERATION_CAP:
        raise ValueError(f"L_N = {L} exceeds the enumeration cap of {ENUMERATION_CAP} bits")

    def score(start: int, size: int) -> np.ndarray:
        codes = np.arange(start, start + size, dtype=np.uint64)
        return ramsey_energies_many(codes, inst, fast=fast)

    part = _run_chunks(score, L, threads, keep)
    minimizers = None
    if part.codes is not None:
        minimizers = [GraphBits(inst.n_vertices, c) for c in part.codes]
    return GroundTruth(inst, int(part.e_min), part.count, minimizers)


def exhaustive_model_ground(
    model: QuadraticModel,
    threads: int | None = None,
    keep: int = KEEP_LIMIT,
    return_minimizers: bool = False,
    tol: float = 1e-9,
):
    """Exact ``(min energy, degeneracy)`` of a quadratic model by enumeration.

    Assignment ``x`` sets variable ``i`` to bit ``i`` of ``x`` (mapped to
    ``2*bit - 1`` for spin models). With ``return_minimizers`` the minimizing
    integers are returned as a third element (``None`` beyond ``keep``).
    """
    n = model.num_vars
    if n > ENUMERATION_CAP:
        raise ValueError(f"{n} variables exceed the enumeration cap of {ENUMERATION_CAP}")
    h, J, offset = model.arrays()
    spin = model.domain.value == "spin"
    shifts = np.arange(n, dtype=np.int64)

    def score(start: int, size: int) -> np.ndarray:
        idx = np.arange(start, start + size, dtype=np.int64)[:, None]
        x = ((idx >> shifts) & 1).astype(np.float64)
        if spin:
            x = 2.0 * x - 1.0
        return offset + x @ h + np.einsum("ki,ki->k", x @ J, x)

    if n == 0:
        part = _Partial(offset, 1, [0])
    else:
        part = _run_chunks(score, n, threads, keep, tol)
    e_min = part.e_min
    if abs(e_min - round(e_min)) < tol:
        e_min = int(round(e_min))
    if return_minimizers:
        return e_min, part.count, part.codes
    return e_min, part.count
