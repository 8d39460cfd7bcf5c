"""Aggregated sampler output."""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .qubo import QuadraticModel

__all__ = ["SampleSet", "model_hash"]


def model_hash(model: QuadraticModel) -> str:
    return hashlib.sha256(model.dumps().encode()).hexdigest()[:16]


@dataclass
class SampleSet:
    """Distinct spin configurations with their energies and read counts.

    Rows are sorted by energy, then lexicographically, so two sample sets
    built from the same multiset of reads compare equal.
    """

    states: np.ndarray
    energies: np.ndarray
    counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_reads(cls, reads, energies, metadata: dict | None = None) -> "SampleSet":
        reads = np.asarray(reads, dtype=np.int8)
        energies = np.asarray(energies, dtype=np.float64)
        if reads.ndim != 2 or len(reads) != len(energies):
            raise ValueError("reads must be (k, n) with one energy per read")
        if len(reads) == 0:
            return cls(reads, energies, np.zeros(0, dtype=np.int64), dict(metadata or {}))
        uniq, first, counts = np.unique(reads, axis=0, return_index=True, return_counts=True)
        e = energies[first]
        order = np.lexsort(tuple(uniq.T[::-1]) + (e,))
        return cls(uniq[order], e[order], counts[order].astype(np.int64), dict(metadata or {}))

    @classmethod
    def merge(cls, *sets: "SampleSet") -> "SampleSet":
        reads = np.concatenate([np.repeat(s.states, s.counts, axis=0) for s in sets])
        energies = np.concatenate([np.repeat(s.energies, s.counts) for s in sets])
        return cls.from_reads(reads, energies, dict(sets[0].metadata) if sets else {})

    @property
    def num_reads(self) -> int:
        return int(self.counts.sum())

    @property
    def num_vars(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return len(self.states)

    def expand(self) -> np.ndarray:
        """One row per read."""
        return np.repeat(self.states, self.counts, axis=0)

    def lowest(self) -> float:
        return float(self.energies.min())

    def check_energies(self, model: QuadraticModel, atol: float = 1e-9) -> bool:
        """Recompute energies from the stored states."""
        return bool(np.allclose(model.energies(self.states), self.energies, rtol=0, atol=atol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            np.array_equal(self.states, other.states)
            and np.array_equal(self.energies, other.energies)
            and np.array_equal(self.counts, other.counts)
        )

    # ------------------------------------------------------------------- csv
    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["energy", "multiplicity", "spins"])
        for s, e, c in zip(self.states, self.energies, self.counts):
            writer.writerow([repr(float(e)), int(c), "".join("+" if v > 0 else "-" for v in s)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, metadata: dict | None = None) -> "SampleSet":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty sample file")
        states = np.array([[1 if ch == "+" else -1 for ch in r["spins"]] for r in rows], dtype=np.int8)
        energies = np.array([float(r["energy"]) for r in rows])
        counts = np.array([int(r["multiplicity"]) for r in rows], dtype=np.int64)
        return cls(states, energies, counts, dict(metadata or {}))
