"""Ramsey protocol driver and sample-set statistics.

The protocol raises ``N`` until a solver's best energy first becomes
positive. Solvers are adapters mapping a :class:`RamseyInstance` to an
:class:`Estimate`; the exhaustive oracle is the reference, and any sampler
``(model, seed) -> SampleSet`` can be wrapped with :class:`SamplerSolver`.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import brentq

from .anneal import CoolingSchedule, simulated_anneal
from .chimera import HardwareGraph
from .cost import RamseyInstance, ramsey_energies_many
from .embedding import (
    EmbeddedModel,
    EmbeddingError,
    embed_model,
    find_embedding,
    tune_lambda,
    unembed_many,
)
from .oracle import exhaustive_ground
from .quantum import AnnealSchedule, sample_anneal
from .qubo import QuadraticModel, Vartype, all_assignments, compile_instance, graph_codes_from_assignments, to_spin
from .samples import SampleSet

__all__ = [
    "PROTOCOL_MAX_VERTICES",
    "Estimate",
    "ProtocolResult",
    "OracleSolver",
    "SamplerSolver",
    "sa_sampler",
    "qa_sampler",
    "ramsey_protocol",
    "repetition_count",
    "EnergyHistogram",
    "histogram",
    "logical_energies",
    "BoltzmannFit",
    "boltzmann_fit",
    "equal_energy_dispersion",
    "noise_robustness",
    "results_record",
]

PROTOCOL_MAX_VERTICES = 8

Sampler = Callable[[QuadraticModel, int], SampleSet]


@dataclass
class Estimate:
    n_vertices: int
    e_min: int
    degeneracy: int
    success_probability: float
    feasible_fraction: float = 1.0
    reads: int = 0
    source: str = "oracle"


@dataclass
class ProtocolResult:
    m: int
    n: int
    value: int | None
    rows: list[Estimate]
    warnings: list[str] = field(default_factory=list)

    def table(self) -> str:
        lines = [f"R({self.m},{self.n}) protocol", "   N   E_min   D   P_success"]
        for r in self.rows:
            lines.append(f"{r.n_vertices:4d} {r.e_min:7d} {r.degeneracy:5d} {r.success_probability:10.4f}")
        lines.append(f"R = {self.value if self.value is not None else 'not reached'}")
        return "\n".join(lines)


# ---------------------------------------------------------------- solvers
class OracleSolver:
    """Exact minimum and degeneracy by exhaustive enumeration."""

    source = "oracle"

    def __init__(self, threads: int | None = None):
        self.threads = threads

    def solve(self, inst: RamseyInstance, seed: int = 0) -> Estimate:
        gt = exhaustive_ground(inst, threads=self.threads, keep=0)
        return Estimate(inst.n_vertices, gt.e_gs, gt.degeneracy, 1.0, 1.0, 0, self.source)


def sa_sampler(schedule: CoolingSchedule | None = None, reads: int = 1000, threads: int | None = None) -> Sampler:
    def run(model: QuadraticModel, seed: int) -> SampleSet:
        return simulated_anneal(model, schedule, reads=reads, seed=seed, threads=threads)

    return run


def qa_sampler(schedule: AnnealSchedule | None = None, reads: int = 1000, steps: int | None = None) -> Sampler:
    schedule = schedule or AnnealSchedule.linear(10.0)

    def run(model: QuadraticModel, seed: int) -> SampleSet:
        return sample_anneal(model, schedule, reads=reads, seed=seed, steps=steps)

    return run


class SamplerSolver:
    """Compile, optionally embed, sample, and score reads by their graph energy.

    The best logical energy over feasible reads is the estimate; the
    degeneracy estimate counts distinct graphs observed at that energy.
    """

    def __init__(
        self,
        sampler: Sampler,
        source: str = "sa",
        hardware: HardwareGraph | None = None,
        lam=None,
        embed_seed: int = 0,
        mu=2,
        fix_first: bool = False,
    ):
        self.sampler = sampler
        self.source = source
        self.hardware = hardware
        self.lam = lam
        self.embed_seed = embed_seed
        self.mu = mu
        self.fix_first = fix_first

    def _embedded(self, spin: QuadraticModel, seed: int) -> EmbeddedModel:
        emb = find_embedding(spin, self.hardware, seed=self.embed_seed)
        if emb is None:
            raise EmbeddingError(f"no embedding found for a {spin.num_vars}-variable model")
        if self.lam is None:
            lam = tune_lambda(spin, emb, self.hardware, lambda hw_model: self.sampler(hw_model, seed)).lam
        else:
            lam = Fraction(self.lam)
        return embed_model(spin, emb.with_lambda(lam), self.hardware)

    def solve(self, inst: RamseyInstance, seed: int = 0) -> Estimate:
        model = compile_instance(inst, mu=self.mu, fix_first=self.fix_first)
        spin = to_spin(model)
        emb_model = self._embedded(spin, seed) if self.hardware is not None else None
        samples = self.sampler(emb_model.model if emb_model else spin, seed)
        energies, ok, codes = logical_energies(samples, spin, inst, emb_model)
        counts = samples.counts
        total = samples.num_reads
        feasible = int(counts[ok].sum())
        if feasible == 0:
            return Estimate(inst.n_vertices, -1, 0, 0.0, 0.0, total, self.source)
        e = energies[ok]
        e_min = int(e.min())
        at_min = e == e_min
        degeneracy = len(np.unique(codes[ok][at_min]))
        success = float(counts[ok][at_min].sum() / total)
        return Estimate(inst.n_vertices, e_min, degeneracy, success, feasible / total, total, self.source)


def _as_solver(solver):
    if solver == "oracle":
        return OracleSolver()
    if hasattr(solver, "solve"):
        return solver
    if callable(solver):
        return SamplerSolver(solver)
    raise TypeError("solver must be 'oracle', an object with solve(), or a sampler callable")


def _merge_estimates(parts: list[Estimate]) -> Estimate:
    valid = [p for p in parts if p.feasible_fraction > 0]
    if not valid:
        return parts[0]
    best = min(p.e_min for p in valid)
    winners = [p for p in valid if p.e_min == best]
    reads = sum(p.reads for p in parts)
    success = sum(p.success_probability * p.reads for p in winners) / reads if reads else 1.0
    feasible = sum(p.feasible_fraction * p.reads for p in parts) / reads if reads else 1.0
    return Estimate(
        parts[0].n_vertices, best, max(p.degeneracy for p in winners), success, feasible, reads, parts[0].source
    )


def ramsey_protocol(
    m: int,
    n: int,
    solver="oracle",
    n_start: int | None = None,
    repetitions: int = 1,
    seed: int = 0,
    n_max: int = PROTOCOL_MAX_VERTICES,
) -> ProtocolResult:
    """Increment ``N`` until the estimated minimum energy first exceeds zero.

    ``N_start`` defaults to ``max(m, n) - 1`` (``4`` for ``R(3, 3)``). The
    value is ``None`` if the cap ``n_max`` is passed without a positive
    minimum. A start size whose minimum is not certified as zero is flagged
    as suspicious.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    solver = _as_solver(solver)
    if n_start is None:
        n_start = 4 if (m, n) == (3, 3) else max(m, n) - 1
    if not 2 <= n_start <= n_max:
        raise ValueError(f"N_start must lie in [2, {n_max}], got {n_start}")
    result = ProtocolResult(m, n, None, [])
    for N in range(n_start, n_max + 1):
        inst = RamseyInstance(N, m, n)
        parts = [solver.solve(inst, seed=seed + 1000 * N + r) for r in range(repetitions)]
        est = _merge_estimates(parts)
        result.rows.append(est)
        if N == n_start and est.e_min != 0:
            msg = f"solver did not certify E = 0 at N_start = {n_start} (E_min = {est.e_min})"
            result.warnings.append(msg)
            warnings.warn(msg, stacklevel=2)
        if est.e_min > 0:
            result.value = N
            break
    return result


def repetition_count(epsilon: float, delta: float) -> int:
    """Smallest ``k`` with ``1 - epsilon**k >= delta``."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("need 0 < epsilon < 1 and 0 < delta < 1")
    k = max(1, math.ceil(math.log(1 - delta) / math.log(epsilon)))
    # guard the closed form against rounding at exact powers
    while k > 1 and 1 - epsilon ** (k - 1) >= delta:
        k -= 1
    while 1 - epsilon**k < delta:
        k += 1
    return k


# ------------------------------------------------------------ histograms
@dataclass
class EnergyHistogram:
    bins: dict[float, int]
    total_reads: int
    feasible_reads: int

    def __post_init__(self):
        if sum(self.bins.values()) != self.feasible_reads or self.feasible_reads > self.total_reads:
            raise ValueError("histogram counts inconsistent with read totals")

    def probabilities(self) -> dict[float, float]:
        if not self.feasible_reads:
            return {}
        return {e: c / self.feasible_reads for e, c in self.bins.items()}

    def to_csv(self) -> str:
        rows = ["energy,count,relative_frequency"]
        for e, c in sorted(self.bins.items()):
            rows.append(f"{e!r},{c},{c / self.feasible_reads!r}")
        return "\n".join(rows) + "\n"

    def render(self, width: int = 40) -> str:
        if not self.bins:
            return "(no feasible reads)"
        top = max(self.bins.values())
        lines = []
        for e, c in sorted(self.bins.items()):
            bar = "#" * max(1, round(width * c / top))
            lines.append(f"{e:>10.4g} | {bar} {c}")
        lines.append(f"feasible {self.feasible_reads} of {self.total_reads} reads")
        return "\n".join(lines)


def _bins(energies: np.ndarray, counts: np.ndarray) -> dict[float, int]:
    out: dict[float, int] = {}
    for e, c in zip(np.round(energies, 9), counts):
        key = float(e) + 0.0
        out[key] = out.get(key, 0) + int(c)
    return out


def logical_energies(
    samples: SampleSet,
    model: QuadraticModel | None = None,
    inst: RamseyInstance | None = None,
    emb_model: EmbeddedModel | None = None,
):
    """Per-row logical energy, feasibility mask and graph code.

    Hardware rows are unembedded first; broken rows are marked infeasible.
    With ``inst`` the energy is ``h^N_{m,n}`` of the graph read off the
    ``a`` variables, otherwise the logical model energy (or the stored
    sample energy when there is no model either).
    """
    if emb_model is not None:
        logical, ok = unembed_many(samples.states, emb_model)
        model = emb_model.source
    else:
        logical, ok = samples.states, np.ones(len(samples), dtype=bool)
    codes = np.zeros(len(samples), dtype=np.uint64)
    if inst is not None:
        if model is None:
            raise ValueError("translating reads to graphs needs the logical model")
        codes = graph_codes_from_assignments(model, logical)
        energies = ramsey_energies_many(codes, inst).astype(float)
    elif emb_model is not None:
        energies = model.energies(logical)
    else:
        energies = samples.energies.astype(float)
    return energies, ok, codes


def histogram(
    samples: SampleSet,
    emb_model: EmbeddedModel | None = None,
    inst: RamseyInstance | None = None,
    model: QuadraticModel | None = None,
) -> tuple[EnergyHistogram, EnergyHistogram]:
    """``(logical, hardware)`` energy histograms.

    The hardware histogram covers every read at its stored energy (chain
    penalties included); the logical one covers only unbroken reads.
    """
    total = samples.num_reads
    hardware = EnergyHistogram(_bins(samples.energies, samples.counts), total, total)
    energies, ok, _ = logical_energies(samples, model, inst, emb_model)
    feasible = int(samples.counts[ok].sum())
    logical = EnergyHistogram(_bins(energies[ok], samples.counts[ok]), total, feasible)
    return logical, hardware


# -------------------------------------------------------------- thermal fit
@dataclass(frozen=True)
class BoltzmannFit:
    temperature: float
    beta: float
    log_likelihood: float
    infinite: bool = False


def _energy_counts(data, counts=None) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, SampleSet):
        return data.energies.astype(float), data.counts.astype(float)
    e = np.asarray(data, dtype=float)
    c = np.ones_like(e) if counts is None else np.asarray(counts, dtype=float)
    if e.shape != c.shape:
        raise ValueError("energies and counts differ in length")
    return e, c


def _log_likelihood(beta: float, e: np.ndarray, c: np.ndarray) -> float:
    shifted = -beta * (e - e.min())
    log_z = np.log(np.exp(shifted).sum()) - beta * e.min()
    return float(-beta * (c * e).sum() - c.sum() * log_z)


def boltzmann_fit(data, counts=None, beta_max: float = 1e6) -> BoltzmannFit:
    """Maximum-likelihood temperature of ``p(x) ~ exp(-E(x)/T)`` over observed configurations.

    ``data`` is a :class:`SampleSet` (one row per distinct configuration) or
    an energy array with matching ``counts``. The likelihood is stationary
    where the model mean energy equals the empirical mean; that root is
    bracketed in ``beta`` and refined with Brent's method. When the empirical
    mean is not below the uniform mean the fit sits at ``beta <= 0`` and an
    infinite temperature is reported.
    """
    e, c = _energy_counts(data, counts)
    keep = c > 0
    e, c = e[keep], c[keep]
    if len(np.unique(e)) < 2:
        raise ValueError("Boltzmann fit needs at least two distinct energy levels")
    target = float((c * e).sum() / c.sum())

    def mean_gap(beta: float) -> float:
        w = np.exp(-beta * (e - e.min()))
        return float((w * e).sum() / w.sum()) - target

    if mean_gap(0.0) <= 0:
        return BoltzmannFit(math.inf, 0.0, _log_likelihood(0.0, e, c), True)
    hi = 1.0
    while mean_gap(hi) > 0:
        hi *= 2
        if hi > beta_max:
            raise ValueError("empirical mean sits at the minimum energy; temperature is zero")
    beta = brentq(mean_gap, 0.0, hi, xtol=1e-14, rtol=1e-12)
    return BoltzmannFit(1.0 / beta, beta, _log_likelihood(beta, e, c))


def equal_energy_dispersion(data, counts=None, decimals: int = 9) -> dict[float, float]:
    """Max/min ratio of occupation among observed configurations sharing an energy.

    Equilibrium sampling gives ratios near 1; levels with a single observed
    configuration report exactly 1.
    """
    e, c = _energy_counts(data, counts)
    out: dict[float, float] = {}
    for level in np.unique(np.round(e, decimals)):
        group = c[np.round(e, decimals) == level]
        group = group[group > 0]
        if len(group):
            out[float(level)] = float(group.max() / group.min())
    return out


# ------------------------------------------------------------ noise study
NOISE_VAR_CAP = 20


def _argmin_set(energies: np.ndarray, atol: float) -> np.ndarray:
    return np.flatnonzero(energies <= energies.min() + atol)


def noise_robustness(
    model: QuadraticModel,
    sigma_h: float,
    sigma_j: float,
    trials: int = 100,
    seed: int = 0,
    distribution: str = "gaussian",
    atol: float = 1e-9,
) -> float:
    """Fraction of perturbed Ising models whose ground states stay nominal ground states.

    Every field gets an independent shift of scale ``sigma_h`` and every
    existing coupler one of scale ``sigma_j`` (Gaussian standard deviation,
    or the half-width for ``"uniform"``). A trial counts as unchanged when
    its exact argmin set is a subset of the nominal argmin set; a degenerate
    nominal ground space is generically split by any noise, so equality
    would fail trivially.
    """
    if model.num_vars > NOISE_VAR_CAP:
        raise ValueError(f"noise study enumerates at most {NOISE_VAR_CAP} variables")
    if distribution not in ("gaussian", "uniform"):
        raise ValueError("distribution must be 'gaussian' or 'uniform'")
    spin = model if model.domain is Vartype.SPIN else to_spin(model)
    h, J, offset = spin.arrays()
    pairs = np.array(sorted(spin.quadratic), dtype=np.int64).reshape(-1, 2)
    X = all_assignments(spin.num_vars, Vartype.SPIN).astype(float)
    XX = X[:, pairs[:, 0]] * X[:, pairs[:, 1]] if len(pairs) else np.zeros((len(X), 0))
    j_vals = J[pairs[:, 0], pairs[:, 1]] if len(pairs) else np.zeros(0)
    nominal = set(_argmin_set(offset + X @ h + XX @ j_vals, atol).tolist())
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    unchanged = 0
    for _ in range(trials):
        if distribution == "gaussian":
            dh = rng.normal(0.0, sigma_h, h.shape) if sigma_h else np.zeros_like(h)
            dj = rng.normal(0.0, sigma_j, j_vals.shape) if sigma_j else np.zeros_like(j_vals)
        else:
            dh = rng.uniform(-sigma_h, sigma_h, h.shape) if sigma_h else np.zeros_like(h)
            dj = rng.uniform(-sigma_j, sigma_j, j_vals.shape) if sigma_j else np.zeros_like(j_vals)
        energies = offset + X @ (h + dh) + XX @ (j_vals + dj)
        if set(_argmin_set(energies, atol).tolist()) <= nominal:
            unchanged += 1
    return unchanged / trials


# ---------------------------------------------------------------- results
def results_record(
    inst: RamseyInstance,
    e_gs,
    degeneracy: int,
    source: str,
    hist: EnergyHistogram | Mapping | None = None,
    feasible_fraction: float = 1.0,
    success_probability: float = 1.0,
    **extra,
) -> dict:
    bins = hist.bins if isinstance(hist, EnergyHistogram) else dict(hist or {})
    record = {
        "instance": {"m": inst.clique_order, "n": inst.independent_order, "N": inst.n_vertices},
        "e_gs": e_gs,
        "degeneracy": int(degeneracy),
        "source": source,
        "histogram": {_energy_key(e): int(c) for e, c in sorted(bins.items())},
        "feasible_fraction": float(feasible_fraction),
        "success_probability": float(success_probability),
    }
    record.update(extra)
    return record


def _energy_key(e) -> str:
    e = float(e)
    return str(int(e)) if e.is_integer() else repr(e)


def dumps_results(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True)
