"""Chimera qubit graphs with fabrication defects.

Qubits are numbered from 1: unit cells row-major from the top-left, and within
a cell the left partition (``side=0``) before the right one (``side=1``).
Left-partition qubits couple to the same position in the cells above and
below; right-partition qubits couple to the cells left and right.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from typing import Iterable

__all__ = ["HardwareGraph", "chimera_graph", "default_hardware", "DEFAULT_DEFECTS"]


@dataclass(frozen=True)
class HardwareGraph:
    rows: int = 4
    cols: int = 4
    shore: int = 4
    defects: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if min(self.rows, self.cols, self.shore) < 1:
            raise ValueError("chimera dimensions must be positive")
        object.__setattr__(self, "defects", frozenset(int(q) for q in self.defects))
        bad = [q for q in self.defects if not 1 <= q <= self.num_qubits]
        if bad:
            raise ValueError(f"defect ids out of range 1..{self.num_qubits}: {sorted(bad)}")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols * 2 * self.shore

    def qubit(self, row: int, col: int, side: int, k: int) -> int:
        return (row * self.cols + col) * 2 * self.shore + side * self.shore + k + 1

    def coordinates(self, q: int) -> tuple[int, int, int, int]:
        """``(row, col, side, k)`` of qubit ``q``."""
        cell, rest = divmod(q - 1, 2 * self.shore)
        side, k = divmod(rest, self.shore)
        row, col = divmod(cell, self.cols)
        return row, col, side, k

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        """Every coupler ``(p, q)`` with ``p < q``, defects included."""
        out = set()
        for r in range(self.rows):
            for c in range(self.cols):
                for i in range(self.shore):
                    left = self.qubit(r, c, 0, i)
                    right = self.qubit(r, c, 1, i)
                    for j in range(self.shore):
                        out.add(_pair(left, self.qubit(r, c, 1, j)))
                    if r + 1 < self.rows:
                        out.add(_pair(left, self.qubit(r + 1, c, 0, i)))
                    if c + 1 < self.cols:
                        out.add(_pair(right, self.qubit(r, c + 1, 1, i)))
        return frozenset(out)

    @cached_property
    def usable(self) -> frozenset[int]:
        return frozenset(q for q in range(1, self.num_qubits + 1) if q not in self.defects)

    @cached_property
    def usable_edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(e for e in self.edges if e[0] in self.usable and e[1] in self.usable)

    @cached_property
    def neighbors(self) -> dict[int, frozenset[int]]:
        """Adjacency among usable qubits only."""
        adj: dict[int, set[int]] = {q: set() for q in self.usable}
        for p, q in self.usable_edges:
            adj[p].add(q)
            adj[q].add(p)
        return {q: frozenset(s) for q, s in adj.items()}

    def degree(self, q: int, include_defects: bool = True) -> int:
        if include_defects:
            return sum(1 for e in self.edges if q in e)
        return len(self.neighbors.get(q, ()))

    def has_coupler(self, p: int, q: int) -> bool:
        return _pair(p, q) in self.usable_edges

    def to_dict(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "shore": self.shore, "defects": sorted(self.defects)}

    @classmethod
    def from_dict(cls, data) -> "HardwareGraph":
        return cls(int(data["rows"]), int(data["cols"]), int(data["shore"]), frozenset(data.get("defects", ())))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "HardwareGraph":
        return cls.from_dict(json.loads(text))


def _pair(p: int, q: int) -> tuple[int, int]:
    return (p, q) if p < q else (q, p)


def chimera_graph(rows: int = 4, cols: int = 4, shore: int = 4, defects: Iterable[int] = ()) -> HardwareGraph:
    return HardwareGraph(rows, cols, shore, frozenset(defects))


def _load_default_defects() -> tuple[int, ...]:
    text = resources.files("ramsey_forge").joinpath("data/chimera_4x4_defects.json").read_text()
    return tuple(json.loads(text)["defects"])


DEFAULT_DEFECTS = _load_default_defects()


def default_hardware() -> HardwareGraph:
    """4x4 Chimera with the bundled 22-qubit defect list (106 usable)."""
    return chimera_graph(4, 4, 4, DEFAULT_DEFECTS)
