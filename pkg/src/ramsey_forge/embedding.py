"""Minor embedding of logical Ising models onto a Chimera qubit graph.

Each logical variable is represented by a connected chain of qubits held
together by ferromagnetic couplers of strength ``lam``. Samples whose chains
disagree internally are treated as infeasible and dropped, never repaired.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .chimera import HardwareGraph
from .qubo import ModelBuilder, QuadraticModel, Vartype, _frac, normalize_ranges
from .samples import SampleSet

__all__ = [
    "Embedding",
    "ValidationReport",
    "EmbeddedModel",
    "EmbeddingError",
    "LambdaTuningError",
    "LambdaTuning",
    "validate_embedding",
    "find_embedding",
    "embed_model",
    "unembed",
    "unembed_many",
    "feasible_fraction",
    "chain_strength_bound",
    "tune_lambda",
]


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class Embedding:
    chains: Mapping[int, tuple[int, ...]]
    lam: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "chains", {int(v): tuple(sorted(int(q) for q in c)) for v, c in self.chains.items()})
        object.__setattr__(self, "lam", _frac(self.lam))
        if self.lam <= 0:
            raise ValueError("chain strength must be positive")
        if any(len(c) == 0 for c in self.chains.values()):
            raise ValueError("chains must be nonempty")

    @property
    def num_qubits(self) -> int:
        return sum(len(c) for c in self.chains.values())

    def with_lambda(self, lam) -> "Embedding":
        return Embedding(self.chains, lam)

    def to_dict(self) -> dict:
        lam = int(self.lam) if self.lam.denominator == 1 else float(self.lam)
        return {"lambda": lam, "chains": {str(v): list(c) for v, c in sorted(self.chains.items())}}

    @classmethod
    def from_dict(cls, data) -> "Embedding":
        return cls({int(v): tuple(c) for v, c in data["chains"].items()}, data.get("lambda", 1))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "Embedding":
        return cls.from_dict(json.loads(text))


@dataclass
class ValidationReport:
    missing_vars: list[int] = field(default_factory=list)
    unusable: dict[int, list[int]] = field(default_factory=dict)
    overlaps: dict[int, list[int]] = field(default_factory=dict)
    disconnected: list[int] = field(default_factory=list)
    missing_edges: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.missing_vars or self.unusable or self.overlaps or self.disconnected or self.missing_edges)

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return "valid"
        parts = []
        for name in ("missing_vars", "unusable", "overlaps", "disconnected", "missing_edges"):
            value = getattr(self, name)
            if value:
                parts.append(f"{name}={value}")
        return "; ".join(parts)


def _connected(nodes: set[int], adj: Mapping[int, frozenset[int]]) -> bool:
    if not nodes:
        return False
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        for r in adj.get(q, ()):
            if r in nodes and r not in seen:
                seen.add(r)
                stack.append(r)
    return seen == nodes


def validate_embedding(emb: Embedding, model: QuadraticModel, hw: HardwareGraph) -> ValidationReport:
    report = ValidationReport()
    report.missing_vars = [v for v in range(model.num_vars) if v not in emb.chains]
    owner: dict[int, list[int]] = {}
    for v, chain in emb.chains.items():
        bad = [q for q in chain if q not in hw.usable]
        if bad:
            report.unusable[v] = bad
        for q in chain:
            owner.setdefault(q, []).append(v)
        if not bad and not _connected(set(chain), hw.neighbors):
            report.disconnected.append(v)
    report.overlaps = {q: vs for q, vs in owner.items() if len(vs) > 1}
    for u, v in model.primal_edges():
        if u in emb.chains and v in emb.chains and _inter_chain_coupler(emb.chains[u], emb.chains[v], hw) is None:
            report.missing_edges.append((u, v))
    return report


def _inter_chain_coupler(cu, cv, hw: HardwareGraph) -> tuple[int, int] | None:
    """Lexicographically smallest usable coupler ``(p in cu, q in cv)``."""
    best = None
    set_v = set(cv)
    for p in sorted(cu):
        for q in sorted(hw.neighbors.get(p, ())):
            if q in set_v:
                cand = (p, q)
                if best is None or cand < best:
                    best = cand
    return best


# ------------------------------------------------------------------ search
def _free_bfs(sources, free: set[int], adj) -> tuple[dict, dict]:
    """Hop distances through free qubits; ``sources`` sit at distance 0."""
    dist = {q: 0 for q in sources}
    parent: dict[int, int | None] = {q: None for q in sources}
    frontier = sorted(sources)
    while frontier:
        nxt = []
        for q in frontier:
            for r in adj[q]:
                if r in free and r not in dist:
                    dist[r] = dist[q] + 1
                    parent[r] = q
                    nxt.append(r)
        frontier = nxt
    return dist, parent


def _bfs_order(src, n: int, rng: random.Random) -> list[int]:
    start = rng.randrange(n)
    order, seen, i = [start], {start}, 0
    while len(order) < n:
        if i == len(order):
            nxt = rng.choice(sorted(set(range(n)) - seen))
            order.append(nxt)
            seen.add(nxt)
        nbrs = sorted(src[order[i]])
        rng.shuffle(nbrs)
        for u in nbrs:
            if u not in seen:
                seen.add(u)
                order.append(u)
        i += 1
    return order


def _prune(chain: set[int], needed: list[set[int]], adj) -> set[int]:
    """Drop leaf qubits that are not the only contact to some neighbour chain."""
    changed = True
    while changed and len(chain) > 1:
        changed = False
        for q in sorted(chain):
            if len(chain) == 1:
                break
            inside = sum(1 for r in adj[q] if r in chain)
            if inside > 1:
                continue
            rest = chain - {q}
            if all(any(r in other for p in rest for r in adj[p]) for other in needed):
                chain = rest
                changed = True
    return chain


def _greedy_chains(src, n: int, adj, rng: random.Random) -> dict[int, set[int]]:
    """Disjoint chains grown in BFS order of the source graph.

    Each variable is rooted at the free qubit reaching the most already placed
    neighbours through free qubits (fewest hops on ties). Neighbours that
    cannot be reached are left for the annealing stage to connect.
    """
    free = set(adj)
    chains: dict[int, set[int]] = {}
    for v in _bfs_order(src, n, rng):
        placed = [u for u in src[v] if u in chains]
        searches = [_free_bfs({r for p in chains[u] for r in adj[p] if r in free}, free, adj) for u in placed]
        best, root = None, None
        for q in sorted(free):
            reach = [d[q] for d, _ in searches if q in d]
            score = (-len(reach), sum(reach), rng.random())
            if best is None or score < best:
                best, root = score, q
        if root is None:
            raise EmbeddingError("hardware has fewer usable qubits than the model has variables")
        chain = {root}
        touched = []
        for u, (dist, parent) in zip(placed, searches):
            if root not in dist:
                continue
            touched.append(chains[u])
            q = root
            while q is not None:
                chain.add(q)
                q = parent[q]
        chains[v] = _prune(chain, touched, adj) if touched else chain
        free -= chains[v]
    return chains


def _splits(chain: set[int], q: int, adj) -> bool:
    """True when removing ``q`` empties or disconnects ``chain``."""
    rest = chain - {q}
    if not rest:
        return True
    start = next(iter(rest))
    seen, stack = {start}, [start]
    while stack:
        x = stack.pop()
        for r in adj[x]:
            if r in rest and r not in seen:
                seen.add(r)
                stack.append(r)
    return len(seen) != len(rest)


class _ChainState:
    """Disjoint chains plus per-pair contact counts for incremental updates."""

    def __init__(self, chains: dict[int, set[int]], edges: set[tuple[int, int]], adj):
        self.adj = adj
        self.edges = edges
        self.chains = {v: set(c) for v, c in chains.items()}
        self.owner = {q: v for v, c in chains.items() for q in c}
        self.contacts: dict[tuple[int, int], int] = {}
        for q, v in self.owner.items():
            for r in adj[q]:
                w = self.owner.get(r)
                if w is not None and w != v and q < r:
                    k = (v, w) if v < w else (w, v)
                    self.contacts[k] = self.contacts.get(k, 0) + 1
        self.missing = sum(1 for e in edges if not self.contacts.get(e))

    def move_delta(self, q: int, new: int | None) -> tuple[int, dict]:
        """Change in missing edges if qubit ``q`` is handed to ``new`` (None frees it)."""
        old = self.owner.get(q)
        changes: dict[tuple[int, int], int] = {}
        for r in self.adj[q]:
            w = self.owner.get(r)
            if w is None:
                continue
            if old is not None and w != old:
                k = (old, w) if old < w else (w, old)
                changes[k] = changes.get(k, 0) - 1
            if new is not None and w != new:
                k = (new, w) if new < w else (w, new)
                changes[k] = changes.get(k, 0) + 1
        delta = 0
        for k, c in changes.items():
            if k in self.edges:
                before = self.contacts.get(k, 0)
                delta += (before + c == 0) - (before == 0)
        return delta, changes

    def apply(self, q: int, new: int | None, delta: int, changes: dict) -> None:
        for k, c in changes.items():
            self.contacts[k] = self.contacts.get(k, 0) + c
        self.missing += delta
        old = self.owner.pop(q, None)
        if old is not None:
            self.chains[old].discard(q)
        if new is not None:
            self.chains[new].add(q)
            self.owner[q] = new

    def shrink(self) -> None:
        """Release qubits whose removal keeps every chain connected and every edge realised."""
        changed = True
        while changed:
            changed = False
            for q in sorted(self.owner):
                v = self.owner[q]
                if len(self.chains[v]) == 1 or _splits(self.chains[v], q, self.adj):
                    continue
                delta, changes = self.move_delta(q, None)
                if delta == 0:
                    self.apply(q, None, delta, changes)
                    changed = True


def _anneal_chains(state: _ChainState, rng: random.Random, steps: int, t_initial: float, t_final: float) -> bool:
    """Single-qubit reassignment annealing on the number of unrealised edges.

    A move hands a qubit to an adjacent chain (growing into a free qubit or
    stealing from a neighbour whose chain stays connected) or releases it.
    """
    adj, qubits = state.adj, sorted(state.adj)
    for step in range(steps):
        if state.missing == 0:
            return True
        temp = t_initial * (t_final / t_initial) ** (step / steps)
        q = qubits[rng.randrange(len(qubits))]
        old = state.owner.get(q)
        if old is not None and (len(state.chains[old]) == 1 or _splits(state.chains[old], q, adj)):
            continue
        if old is not None and rng.random() < _RELEASE_PROB:
            new = None
        else:
            cands = sorted({state.owner[r] for r in adj[q] if r in state.owner} - {old})
            if not cands:
                continue
            new = cands[rng.randrange(len(cands))]
        delta, changes = state.move_delta(q, new)
        if delta <= 0 or rng.random() < math.exp(-delta / temp):
            state.apply(q, new, delta, changes)
    return state.missing == 0


_RELEASE_PROB = 0.15


def _compact_chains(state: _ChainState, rng: random.Random, steps: int, temp: float = 0.3) -> None:
    """Shorten chains without losing any realised edge.

    Releasing a qubit is always taken and handing it to a neighbouring chain
    is free; growing into an unused qubit is accepted with probability
    ``exp(-1/temp)``. Moves that would unrealise an edge are rejected.
    """
    adj, qubits = state.adj, sorted(state.adj)
    grow = math.exp(-1.0 / temp)
    for _ in range(steps):
        q = qubits[rng.randrange(len(qubits))]
        old = state.owner.get(q)
        if old is not None and (len(state.chains[old]) == 1 or _splits(state.chains[old], q, adj)):
            continue
        if old is not None and rng.random() < 0.5:
            new = None
        else:
            cands = sorted({state.owner[r] for r in adj[q] if r in state.owner} - {old})
            if not cands or (old is None and rng.random() >= grow):
                continue
            new = cands[rng.randrange(len(cands))]
        delta, changes = state.move_delta(q, new)
        if delta <= 0:
            state.apply(q, new, delta, changes)


def find_embedding(
    model: QuadraticModel,
    hw: HardwareGraph,
    seed: int = 0,
    tries: int = 12,
    steps: int | None = None,
    t_initial: float = 0.4,
    t_final: float = 0.05,
) -> Embedding | None:
    """Search for a minor embedding; ``None`` when nothing valid is found.

    Each try grows disjoint chains greedily in BFS order, then anneals qubit
    ownership to realise the remaining source edges, and finally releases
    every qubit the embedding does not need. Deterministic for fixed ``seed``.
    """
    adj = hw.neighbors
    src = model.adjacency()
    n = model.num_vars
    if n == 0 or n > len(adj):
        return None
    edges = {(u, v) for u, v in model.primal_edges()}
    steps = steps if steps is not None else max(50_000, 20_000 * n)
    rng = random.Random(seed)
    for _ in range(tries):
        state = _ChainState(_greedy_chains(src, n, adj, rng), edges, adj)
        if _anneal_chains(state, rng, steps, t_initial, t_final):
            _compact_chains(state, rng, steps)
            state.shrink()
            emb = Embedding({v: tuple(sorted(c)) for v, c in state.chains.items()})
            if validate_embedding(emb, model, hw).ok:
                return emb
    return None


# ------------------------------------------------------------------ compile
@dataclass(frozen=True)
class EmbeddedModel:
    """Hardware Ising model over the qubits used by an embedding.

    ``model`` indexes qubits compactly: column ``i`` is qubit ``qubits[i]``.
    Intra-chain couplers carry ``-lam * scale`` and the offset carries
    ``+lam * scale`` per such coupler, so a sample with intact chains has
    hardware energy ``scale * logical energy``.
    """

    model: QuadraticModel
    qubits: tuple[int, ...]
    embedding: Embedding
    source: QuadraticModel
    scale: Fraction
    chain_couplers: tuple[tuple[int, int], ...]

    def column(self, qubit: int) -> int:
        return self.qubits.index(qubit)

    def chain_columns(self) -> dict[int, np.ndarray]:
        index = {q: i for i, q in enumerate(self.qubits)}
        return {v: np.array([index[q] for q in c]) for v, c in self.embedding.chains.items()}

    def logical_energy(self, hardware_energy):
        return np.asarray(hardware_energy) / float(self.scale)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "qubits": list(self.qubits),
            "embedding": self.embedding.to_dict(),
            "source": self.source.to_dict(),
            "scale": str(self.scale),
            "chain_couplers": [list(c) for c in self.chain_couplers],
        }

    @classmethod
    def from_dict(cls, data) -> "EmbeddedModel":
        return cls(
            QuadraticModel.from_dict(data["model"]),
            tuple(int(q) for q in data["qubits"]),
            Embedding.from_dict(data["embedding"]),
            QuadraticModel.from_dict(data["source"]),
            Fraction(data["scale"]),
            tuple((int(p), int(q)) for p, q in data["chain_couplers"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "EmbeddedModel":
        return cls.from_dict(json.loads(text))


def embed_model(model: QuadraticModel, emb: Embedding, hw: HardwareGraph, normalize: bool = True) -> EmbeddedModel:
    if model.domain is not Vartype.SPIN:
        raise ValueError("embed_model expects a spin model")
    report = validate_embedding(emb, model, hw)
    if not report.ok:
        raise EmbeddingError(f"invalid embedding: {report.summary()}")
    qubits = tuple(sorted(q for c in emb.chains.values() for q in c))
    index = {q: i for i, q in enumerate(qubits)}
    builder = ModelBuilder(Vartype.SPIN)
    builder.add_offset(model.offset)
    for v, chain in emb.chains.items():
        for q in chain:
            builder.label(index[q], f"q{q}")
        share = model.linear.get(v, Fraction(0)) / len(chain)
        for q in chain:
            builder.add_linear(index[q], share)
    for (u, v), c in model.quadratic.items():
        p, q = _inter_chain_coupler(emb.chains[u], emb.chains[v], hw)
        builder.add_quadratic(index[p], index[q], c)
    couplers = []
    for chain in emb.chains.values():
        members = set(chain)
        for p in chain:
            for q in hw.neighbors[p]:
                if q in members and p < q:
                    couplers.append((p, q))
                    builder.add_quadratic(index[p], index[q], -emb.lam)
                    builder.add_offset(emb.lam)
    hardware = builder.build(len(qubits))
    scale = Fraction(1)
    if normalize:
        hardware, scale = normalize_ranges(hardware)
    return EmbeddedModel(hardware, qubits, emb, model, scale, tuple(sorted(couplers)))


def unembed_many(samples, emb_model: EmbeddedModel) -> tuple[np.ndarray, np.ndarray]:
    """Logical spins per read and a mask of reads whose chains are all unanimous."""
    s = np.atleast_2d(np.asarray(samples))
    n_logical = emb_model.source.num_vars
    logical = np.zeros((len(s), n_logical), dtype=np.int8)
    ok = np.ones(len(s), dtype=bool)
    for v, cols in emb_model.chain_columns().items():
        block = s[:, cols]
        first = block[:, 0]
        ok &= (block == first[:, None]).all(axis=1)
        logical[:, v] = first
    return logical, ok


def unembed(sample, emb_model: EmbeddedModel) -> np.ndarray | None:
    """Logical spins of one read, or ``None`` if any chain is broken."""
    logical, ok = unembed_many(sample, emb_model)
    return logical[0] if ok[0] else None


def feasible_fraction(samples: SampleSet, emb_model: EmbeddedModel) -> float:
    _, ok = unembed_many(samples.states, emb_model)
    return float(samples.counts[ok].sum() / samples.num_reads)


def chain_strength_bound(model: QuadraticModel) -> Fraction:
    """``max_v |h_v| + sum_u |J_uv|``; any ``lam`` above it keeps ground-state chains intact."""
    total = {v: abs(model.linear.get(v, Fraction(0))) for v in range(model.num_vars)}
    for (u, v), c in model.quadratic.items():
        total[u] += abs(c)
        total[v] += abs(c)
    return max(total.values(), default=Fraction(0))


# ------------------------------------------------------------------ tuning
@dataclass
class LambdaTuning:
    lam: Fraction
    trace: list[tuple[float, float]]


class LambdaTuningError(RuntimeError):
    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = trace


def tune_lambda(
    model: QuadraticModel,
    emb: Embedding,
    hw: HardwareGraph,
    solver: Callable[[QuadraticModel], SampleSet],
    target: float = 0.85,
    step=Fraction(1, 2),
    initial=Fraction(1, 2),
    cap=16,
) -> LambdaTuning:
    """Raise ``lam`` until the feasible fraction first exceeds ``target``, then once more."""
    step, lam, cap = _frac(step), _frac(initial), _frac(cap)
    if step <= 0:
        raise ValueError("step must be positive")
    trace: list[tuple[float, float]] = []
    while lam <= cap:
        emb_model = embed_model(model, emb.with_lambda(lam), hw)
        frac = feasible_fraction(solver(emb_model.model), emb_model)
        trace.append((float(lam), frac))
        if frac > target:
            return LambdaTuning(lam + step, trace)
        lam += step
    raise LambdaTuningError(f"feasible fraction never exceeded {target} for lambda <= {cap}", trace)
