"""Classical samplers for Ising models.

``simulated_anneal`` runs single-spin-flip Metropolis sweeps under an
exponential cooling schedule; ``steepest_descent`` is the greedy local search
baseline. Both vectorise over independent reads. Reads are processed in
fixed-size blocks, each seeded from its own ``SeedSequence`` child and a
Philox (counter-based) bit generator, so results depend only on the seed and
read count, never on the number of worker threads.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .embedding import EmbeddedModel, unembed_many
from .oracle import resolve_threads
from .qubo import QuadraticModel, Vartype
from .samples import SampleSet, model_hash

__all__ = [
    "CoolingSchedule",
    "SuccessStats",
    "simulated_anneal",
    "steepest_descent",
    "success_statistics",
    "grid_search_schedule",
]

READ_BLOCK = 1024


@dataclass(frozen=True)
class CoolingSchedule:
    t_initial: float = 10.0
    t_final: float = 0.05
    sweeps: int = 1000

    def __post_init__(self):
        if not self.t_initial >= self.t_final > 0:
            raise ValueError(f"need t_initial >= t_final > 0, got {self.t_initial}, {self.t_final}")
        if self.sweeps < 1:
            raise ValueError("sweeps must be positive")

    def temperatures(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.t_initial])
        k = np.arange(self.sweeps) / (self.sweeps - 1)
        return self.t_initial * (self.t_final / self.t_initial) ** k


def _spin_arrays(model: QuadraticModel):
    if model.domain is not Vartype.SPIN:
        raise ValueError("samplers expect a spin model")
    h, J, offset = model.arrays()
    Jsym = J + J.T
    return h, Jsym, offset


def _block_rngs(seed, reads: int):
    sizes = [READ_BLOCK] * (reads // READ_BLOCK)
    if reads % READ_BLOCK:
        sizes.append(reads % READ_BLOCK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return [(n, np.random.Generator(np.random.Philox(child))) for n, child in zip(sizes, children)]


def _map_blocks(fn, blocks, threads):
    n_threads = resolve_threads(threads)
    if n_threads == 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(n_threads) as pool:
        return list(pool.map(fn, blocks))


def _energy_tolerance(model: QuadraticModel) -> float:
    coefs = itertools.chain(model.linear.values(), model.quadratic.values(), (model.offset,))
    return 0.0 if all(c.denominator == 1 for c in coefs) else 1e-9


def simulated_anneal(
    model: QuadraticModel,
    schedule: CoolingSchedule | None = None,
    reads: int = 100,
    seed: int = 0,
    threads: int | None = None,
) -> SampleSet:
    """Metropolis simulated annealing; one sweep visits every spin in index order."""
    schedule = schedule or CoolingSchedule()
    if reads < 1:
        raise ValueError("reads must be >= 1")
    h, Jsym, offset = _spin_arrays(model)
    n = model.num_vars
    nbrs = [np.flatnonzero(Jsym[i]) for i in range(n)]
    couplings = [Jsym[i, nb] for i, nb in enumerate(nbrs)]
    temps = schedule.temperatures()
    tol = _energy_tolerance(model)

    def run(block):
        k, rng = block
        s = rng.choice(np.array([-1.0, 1.0]), size=(k, n))
        field = h + s @ Jsym
        energy = offset + s @ h + 0.5 * np.einsum("ki,ki->k", s @ Jsym, s)
        for t in temps:
            u = rng.random((k, n))
            for i in range(n):
                si = s[:, i]
                delta = -2.0 * si * field[:, i]
                flip = (delta <= 0) | (u[:, i] < np.exp(-np.maximum(delta, 0) / t))
                if not flip.any():
                    continue
                ds = np.where(flip, -2.0 * si, 0.0)
                s[:, i] += ds
                energy += np.where(flip, delta, 0.0)
                if len(nbrs[i]):
                    field[:, nbrs[i]] += ds[:, None] * couplings[i]
        exact = model.energies(s)
        drift = float(np.max(np.abs(exact - energy))) if k else 0.0
        if drift > max(tol, 1e-9):
            raise RuntimeError(f"incremental energy drifted by {drift}")
        return s.astype(np.int8), exact, drift

    parts = _map_blocks(run, _block_rngs(seed, reads), threads)
    states = np.concatenate([p[0] for p in parts])
    energies = np.concatenate([p[1] for p in parts])
    meta = {
        "sampler": "simulated_annealing",
        "seed": seed,
        "reads": reads,
        "schedule": {"t_initial": schedule.t_initial, "t_final": schedule.t_final, "sweeps": schedule.sweeps},
        "model_hash": model_hash(model),
        "max_energy_drift": max(p[2] for p in parts),
    }
    return SampleSet.from_reads(states, energies, meta)


def steepest_descent(model: QuadraticModel, starts: int = 100, seed: int = 0, threads: int | None = None) -> SampleSet:
    """Greedy descent from random spins: flip the single spin with the largest
    energy decrease (lowest index on ties) until none decreases the energy."""
    h, Jsym, offset = _spin_arrays(model)
    n = model.num_vars

    def run(block):
        k, rng = block
        s = rng.choice(np.array([-1.0, 1.0]), size=(k, n))
        field = h + s @ Jsym
        active = np.arange(k)
        while len(active):
            delta = -2.0 * s[active] * field[active]
            best = np.argmin(delta, axis=1)
            gain = delta[np.arange(len(active)), best]
            improving = gain < -1e-12
            rows, cols = active[improving], best[improving]
            ds = -2.0 * s[rows, cols]
            s[rows, cols] += ds
            field[rows] += ds[:, None] * Jsym[cols]
            active = rows
        return s.astype(np.int8)

    states = np.concatenate(_map_blocks(run, _block_rngs(seed, starts), threads))
    meta = {"sampler": "steepest_descent", "seed": seed, "reads": starts, "model_hash": model_hash(model)}
    return SampleSet.from_reads(states, model.energies(states), meta)


@dataclass(frozen=True)
class SuccessStats:
    feasible_fraction: float
    optimal_fraction: float
    joint: float


def success_statistics(
    samples: SampleSet,
    ground_energy: float,
    emb_model: EmbeddedModel | None = None,
    energy_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    atol: float = 1e-9,
) -> SuccessStats:
    """Feasible fraction, optimal fraction among feasible reads, and their product.

    Logical energies come from ``energy_fn`` applied to (unembedded) logical
    spins, defaulting to the logical model's own energy.
    """
    if samples.num_reads == 0:
        raise ValueError("empty sample set")
    if emb_model is None:
        logical, ok = samples.states, np.ones(len(samples), dtype=bool)
        default = samples.energies
    else:
        logical, ok = unembed_many(samples.states, emb_model)
        default = None
    counts = samples.counts
    feasible = counts[ok].sum()
    feasible_fraction = feasible / samples.num_reads
    if feasible == 0:
        return SuccessStats(0.0, 0.0, 0.0)
    if energy_fn is not None:
        energies = np.asarray(energy_fn(logical[ok]))
    elif default is not None:
        energies = default[ok]
    else:
        energies = emb_model.source.energies(logical[ok])
    optimal = counts[ok][np.abs(energies - ground_energy) <= atol].sum()
    optimal_fraction = optimal / feasible
    return SuccessStats(float(feasible_fraction), float(optimal_fraction), float(feasible_fraction * optimal_fraction))


def grid_search_schedule(
    model: QuadraticModel,
    ground_energy: float,
    t_initials: Sequence[float],
    t_finals: Sequence[float],
    sweeps: int,
    reads: int = 1000,
    seed: int = 0,
    emb_model: EmbeddedModel | None = None,
    energy_fn=None,
) -> tuple[CoolingSchedule, float]:
    """Pick the ``(t_initial, t_final)`` pair with the highest joint success."""
    best, best_rate = None, -1.0
    for t0 in t_initials:
        for t1 in t_finals:
            if t1 > t0:
                continue
            sched = CoolingSchedule(t0, t1, sweeps)
            stats = success_statistics(
                simulated_anneal(model, sched, reads, seed), ground_energy, emb_model, energy_fn
            )
            if stats.joint > best_rate:
                best, best_rate = sched, stats.joint
    return best, best_rate
