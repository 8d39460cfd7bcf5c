"""Quadratic pseudo-Boolean and Ising models for the Ramsey cost functions.

Coefficients are kept as :class:`fractions.Fraction` so that every energy
identity below holds exactly; float arrays appear only in the vectorised
evaluators used by the samplers and oracles.

Variable layout of the compiled models: computational variables ``a_k``
(one per vertex pair, bit order of :mod:`ramsey_forge.graphs`) come first,
ancillas ``b_j`` follow in ascending ``j``. Labels are the strings
``"a<k>"`` / ``"b<j>"`` with the 1-based indices used in the cost formulas.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

from .cost import RamseyInstance
from .graphs import edge_index, num_edges

__all__ = [
    "Vartype",
    "QuadraticModel",
    "ModelBuilder",
    "PenaltyConfig",
    "penalty_and",
    "build_rm2_model",
    "build_rm2_subcritical_model",
    "build_r33_model",
    "r33_triangles",
    "f_ijk_identity_check",
    "fix_variable",
    "to_spin",
    "to_binary",
    "normalize_ranges",
    "compile_instance",
    "graph_code_from_assignment",
    "graph_codes_from_assignments",
    "chain_consistent_ancillas",
    "all_assignments",
]


class Vartype(str, Enum):
    BINARY = "binary"
    SPIN = "spin"

    @property
    def values(self) -> tuple[int, int]:
        return (0, 1) if self is Vartype.BINARY else (-1, 1)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational, np.integer)):
        return Fraction(int(x)) if isinstance(x, np.integer) else Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**12)


@dataclass(frozen=True)
class QuadraticModel:
    """Energy ``offset + sum_i linear[i] x_i + sum_{i<j} quadratic[i, j] x_i x_j``.

    ``fixed`` maps graph bit positions that were eliminated from the model to
    their value; ``n_vertices`` is set on models compiled from a Ramsey
    instance so that assignments can be decoded back into graphs.
    """

    num_vars: int
    domain: Vartype
    linear: Mapping[int, Fraction] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    offset: Fraction = Fraction(0)
    labels: Mapping[int, str] = field(default_factory=dict)
    fixed: Mapping[int, int] = field(default_factory=dict)
    n_vertices: int | None = None

    def __post_init__(self):
        for i in self.linear:
            if not 0 <= i < self.num_vars:
                raise ValueError(f"linear term on unknown variable {i}")
        for i, j in self.quadratic:
            if not (0 <= i < j < self.num_vars):
                raise ValueError(f"quadratic key {(i, j)} must satisfy 0 <= i < j < num_vars")

    # ----------------------------------------------------------------- energy
    def energy(self, sample: Iterable[int]) -> Fraction:
        """Exact energy of one assignment."""
        x = [int(v) for v in sample]
        if len(x) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} values, got {len(x)}")
        allowed = self.domain.values
        if any(v not in allowed for v in x):
            raise ValueError(f"values must be in {allowed} for a {self.domain.value} model")
        e = Fraction(self.offset)
        for i, c in self.linear.items():
            e += c * x[i]
        for (i, j), c in self.quadratic.items():
            e += c * x[i] * x[j]
        return e

    def arrays(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Float ``(h, J, offset)`` with ``J`` strictly upper triangular."""
        h = np.zeros(self.num_vars)
        J = np.zeros((self.num_vars, self.num_vars))
        for i, c in self.linear.items():
            h[i] = float(c)
        for (i, j), c in self.quadratic.items():
            J[i, j] = float(c)
        return h, J, float(self.offset)

    def energies(self, samples) -> np.ndarray:
        """Vectorised energies of a ``(k, num_vars)`` array of assignments."""
        s = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        h, J, off = self.arrays()
        return off + s @ h + np.einsum("ki,ki->k", s @ J, s)

    # -------------------------------------------------------------- structure
    def primal_edges(self) -> list[tuple[int, int]]:
        return sorted(k for k, c in self.quadratic.items() if c != 0)

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in range(self.num_vars)}
        for i, j in self.primal_edges():
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def max_abs(self) -> tuple[Fraction, Fraction]:
        """Largest ``|linear|`` and ``|quadratic|`` coefficient."""
        hmax = max((abs(c) for c in self.linear.values()), default=Fraction(0))
        jmax = max((abs(c) for c in self.quadratic.values()), default=Fraction(0))
        return hmax, jmax

    def scaled(self, factor) -> "QuadraticModel":
        f = _frac(factor)
        return QuadraticModel(
            self.num_vars,
            self.domain,
            {i: c * f for i, c in self.linear.items()},
            {k: c * f for k, c in self.quadratic.items()},
            self.offset * f,
            dict(self.labels),
            dict(self.fixed),
            self.n_vertices,
        )

    # --------------------------------------------------------------------- io
    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "domain": self.domain.value,
            "offset": _coef_out(self.offset),
            "linear": {str(i): _coef_out(c) for i, c in sorted(self.linear.items())},
            "quadratic": {f"{i},{j}": _coef_out(c) for (i, j), c in sorted(self.quadratic.items())},
            "labels": {str(i): lab for i, lab in sorted(self.labels.items())},
            "fixed": {str(i): v for i, v in sorted(self.fixed.items())},
            "n_vertices": self.n_vertices,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "QuadraticModel":
        quad = {}
        for key, c in data.get("quadratic", {}).items():
            i, j = (int(t) for t in key.split(","))
            quad[(min(i, j), max(i, j))] = _frac(c)
        return cls(
            int(data["num_vars"]),
            Vartype(data["domain"]),
            {int(i): _frac(c) for i, c in data.get("linear", {}).items()},
            quad,
            _frac(data.get("offset", 0)),
            {int(i): str(lab) for i, lab in data.get("labels", {}).items()},
            {int(i): int(v) for i, v in data.get("fixed", {}).items()},
            data.get("n_vertices"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "QuadraticModel":
        return cls.from_dict(json.loads(text))


def _coef_out(c: Fraction):
    return int(c) if c.denominator == 1 else str(c)


class ModelBuilder:
    """Accumulates terms; :meth:`build` drops zero coefficients."""

    def __init__(self, domain: Vartype = Vartype.BINARY):
        self.domain = domain
        self.linear: dict[int, Fraction] = {}
        self.quadratic: dict[tuple[int, int], Fraction] = {}
        self.offset = Fraction(0)
        self.labels: dict[int, str] = {}
        self.num_vars = 0

    def _touch(self, *vs: int) -> None:
        self.num_vars = max(self.num_vars, max(vs) + 1)

    def add_offset(self, c) -> None:
        self.offset += _frac(c)

    def add_linear(self, i: int, c) -> None:
        self._touch(i)
        self.linear[i] = self.linear.get(i, Fraction(0)) + _frac(c)

    def add_quadratic(self, i: int, j: int, c) -> None:
        if i == j:
            # x*x == x for binary, == 1 for spin
            if self.domain is Vartype.BINARY:
                self.add_linear(i, c)
            else:
                self.add_offset(c)
            return
        self._touch(i, j)
        key = (min(i, j), max(i, j))
        self.quadratic[key] = self.quadratic.get(key, Fraction(0)) + _frac(c)

    def add_model(self, other: QuadraticModel, weight=1) -> None:
        if other.domain is not self.domain:
            raise ValueError("cannot mix binary and spin terms")
        w = _frac(weight)
        self.add_offset(other.offset * w)
        for i, c in other.linear.items():
            self.add_linear(i, c * w)
        for (i, j), c in other.quadratic.items():
            self.add_quadratic(i, j, c * w)
        if other.num_vars:
            self._touch(other.num_vars - 1)

    def add_penalty_and(self, x: int, y: int, z: int, weight=1) -> None:
        """``weight * P(x, y; z)`` with ``P = xy - 2(x + y)z + 3z``."""
        w = _frac(weight)
        self.add_quadratic(x, y, w)
        self.add_quadratic(x, z, -2 * w)
        self.add_quadratic(y, z, -2 * w)
        self.add_linear(z, 3 * w)

    def label(self, i: int, name: str) -> None:
        self._touch(i)
        self.labels[i] = name

    def build(self, num_vars: int | None = None, **extra) -> QuadraticModel:
        n = self.num_vars if num_vars is None else num_vars
        return QuadraticModel(
            n,
            self.domain,
            {i: c for i, c in sorted(self.linear.items()) if c != 0},
            {k: c for k, c in sorted(self.quadratic.items()) if c != 0},
            self.offset,
            dict(sorted(self.labels.items())),
            **extra,
        )


@dataclass(frozen=True)
class PenaltyConfig:
    mu: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "mu", _frac(self.mu))
        if self.mu < 1:
            raise ValueError(f"penalty weight must be >= 1, got {self.mu}")


def penalty_and(a1: int, a2: int, b: int) -> QuadraticModel:
    """Penalty that vanishes iff ``b == a1 * a2`` (and is >= 1 otherwise)."""
    if len({a1, a2, b}) != 3:
        raise ValueError("penalty_and needs three distinct variables")
    builder = ModelBuilder()
    builder.add_penalty_and(a1, a2, b)
    return builder.build()


# ----------------------------------------------------------------- R(m, 2)
RM2_MIN_ORDER, RM2_MAX_ORDER = 3, 8


def _rm2_ancilla(j: int, L: int) -> int:
    """Variable index of ancilla ``b_j`` (``2 <= j <= L - 1``)."""
    return L + j - 2


def build_rm2_model(m: int, cfg: PenaltyConfig | None = None) -> QuadraticModel:
    """Quadratized ``h^m_{m,2}(a, b) = a_1 b_2 + mu P(a; b) + I^m_2(a)``.

    The single ``L``-fold product ``a_1 ... a_L`` (the one ``m``-clique
    candidate) is broken up by the chain ``b_{L-1} = a_{L-1} a_L`` and
    ``b_j = a_j b_{j+1}``, so that ``b_2 = a_2 ... a_L``.
    """
    if not RM2_MIN_ORDER <= m <= RM2_MAX_ORDER:
        raise ValueError(f"m must lie in [{RM2_MIN_ORDER}, {RM2_MAX_ORDER}], got {m}")
    cfg = cfg or PenaltyConfig()
    L = num_edges(m)
    b = lambda j: _rm2_ancilla(j, L)  # noqa: E731
    a = lambda k: k - 1  # noqa: E731

    builder = ModelBuilder()
    for k in range(1, L + 1):
        builder.label(a(k), f"a{k}")
    for j in range(2, L):
        builder.label(b(j), f"b{j}")

    builder.add_quadratic(a(1), b(2), 1)
    builder.add_penalty_and(a(L - 1), a(L), b(L - 1), cfg.mu)
    for j in range(2, L - 1):
        builder.add_penalty_and(a(j), b(j + 1), b(j), cfg.mu)
    # I_2: one term (1 - a_k) per absent pair
    builder.add_offset(L)
    for k in range(1, L + 1):
        builder.add_linear(a(k), -1)
    return builder.build(2 * L - 2, n_vertices=m)


def chain_consistent_ancillas(a_bits) -> np.ndarray:
    """Ancilla values ``b_2..b_{L-1}`` satisfying every chain constraint."""
    a = np.asarray(a_bits, dtype=np.int64)
    L = a.shape[-1]
    b = np.zeros(a.shape[:-1] + (L - 2,), dtype=np.int64)
    b[..., L - 3] = a[..., L - 2] * a[..., L - 1]  # b_{L-1}
    for j in range(L - 2, 1, -1):
        b[..., j - 2] = a[..., j - 1] * b[..., j - 1]
    return b


def build_rm2_subcritical_model(m: int, n_vertices: int) -> QuadraticModel:
    """``h^N_{m,2} = sum_k (1 - a_k)`` for ``N < m``: uncoupled variables."""
    if not 2 <= n_vertices < m:
        raise ValueError(f"subcritical model needs 2 <= N < m, got N={n_vertices}, m={m}")
    L = num_edges(n_vertices)
    builder = ModelBuilder()
    builder.add_offset(L)
    for k in range(1, L + 1):
        builder.add_linear(k - 1, -1)
        builder.label(k - 1, f"a{k}")
    return builder.build(L, n_vertices=n_vertices)


# ----------------------------------------------------------------- R(3, 3)
def r33_triangles(n_vertices: int) -> list[tuple[int, int, int]]:
    """1-based variable triples ``(i, j, k)`` of the ``f_{i,j,k}`` terms."""
    out = []
    for u, v, w in combinations(range(1, n_vertices + 1), 3):
        idx = sorted(edge_index(y, x, n_vertices) + 1 for x, y in ((u, v), (u, w), (v, w)))
        out.append(tuple(idx))
    return sorted(out)


def _add_f_ijk(builder: ModelBuilder, i: int, j: int, k: int) -> None:
    # a_i a_j a_k + (1-a_i)(1-a_j)(1-a_k) = 1 - a_i - a_j - a_k + a_i a_j + a_i a_k + a_j a_k
    builder.add_offset(1)
    for v in (i, j, k):
        builder.add_linear(v, -1)
    for x, y in ((i, j), (i, k), (j, k)):
        builder.add_quadratic(x, y, 1)


def build_r33_model(n_vertices: int, fix_first: bool = False) -> QuadraticModel:
    """Pairwise ``h^N_{3,3}`` as a sum of ``f_{i,j,k}`` over all vertex triples.

    With ``fix_first`` the variable ``a_1`` is pinned to 0 and removed, which
    is harmless because ``h_{3,3}`` is invariant under complementing all bits.
    """
    if n_vertices not in (4, 5, 6):
        raise ValueError(f"R(3,3) models are built for N in {{4, 5, 6}}, got {n_vertices}")
    L = num_edges(n_vertices)
    builder = ModelBuilder()
    for k in range(1, L + 1):
        builder.label(k - 1, f"a{k}")
    for i, j, k in r33_triangles(n_vertices):
        _add_f_ijk(builder, i - 1, j - 1, k - 1)
    model = builder.build(L, n_vertices=n_vertices)
    if fix_first:
        model = fix_variable(model, 0, 0)
    return model


def f_ijk_identity_check() -> bool:
    """Truth-table check of the pairwise rewrite of ``f_{i,j,k}``."""
    for ai, aj, ak in np.ndindex(2, 2, 2):
        lhs = ai * aj * ak + (1 - ai) * (1 - aj) * (1 - ak)
        rhs = -2 + (1 - ai) + (1 - aj) + (1 - ak) + ai * aj + ai * ak + aj * ak
        if lhs != rhs:
            return False
    return True


def fix_variable(model: QuadraticModel, var: int, value: int) -> QuadraticModel:
    """Substitute ``x_var = value`` and renumber the remaining variables."""
    if value not in model.domain.values:
        raise ValueError(f"{value} is not a {model.domain.value} value")
    remap = {i: (i if i < var else i - 1) for i in range(model.num_vars) if i != var}
    builder = ModelBuilder(model.domain)
    builder.add_offset(model.offset)
    for i, c in model.linear.items():
        if i == var:
            builder.add_offset(c * value)
        else:
            builder.add_linear(remap[i], c)
    for (i, j), c in model.quadratic.items():
        if var in (i, j):
            other = j if i == var else i
            builder.add_linear(remap[other], c * value)
        else:
            builder.add_quadratic(remap[i], remap[j], c)
    for i, lab in model.labels.items():
        if i != var:
            builder.labels[remap[i]] = lab
    fixed = dict(model.fixed)
    lab = model.labels.get(var, "")
    if lab.startswith("a"):
        fixed[int(lab[1:]) - 1] = value
    return builder.build(model.num_vars - 1, fixed=fixed, n_vertices=model.n_vertices)


# ------------------------------------------------------------- conversions
def to_spin(model: QuadraticModel) -> QuadraticModel:
    """Rewrite a binary model in spins via ``a = (s + 1) / 2``."""
    if model.domain is not Vartype.BINARY:
        raise ValueError("to_spin expects a binary model")
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    builder = ModelBuilder(Vartype.SPIN)
    builder.add_offset(model.offset)
    for i, c in model.linear.items():
        builder.add_linear(i, c * half)
        builder.add_offset(c * half)
    for (i, j), c in model.quadratic.items():
        builder.add_quadratic(i, j, c * quarter)
        builder.add_linear(i, c * quarter)
        builder.add_linear(j, c * quarter)
        builder.add_offset(c * quarter)
    builder.labels = dict(model.labels)
    return builder.build(model.num_vars, fixed=dict(model.fixed), n_vertices=model.n_vertices)


def to_binary(model: QuadraticModel) -> QuadraticModel:
    """Rewrite a spin model in binary variables via ``s = 2a - 1``."""
    if model.domain is not Vartype.SPIN:
        raise ValueError("to_binary expects a spin model")
    builder = ModelBuilder(Vartype.BINARY)
    builder.add_offset(model.offset)
    for i, c in model.linear.items():
        builder.add_linear(i, 2 * c)
        builder.add_offset(-c)
    for (i, j), c in model.quadratic.items():
        builder.add_quadratic(i, j, 4 * c)
        builder.add_linear(i, -2 * c)
        builder.add_linear(j, -2 * c)
        builder.add_offset(c)
    builder.labels = dict(model.labels)
    return builder.build(model.num_vars, fixed=dict(model.fixed), n_vertices=model.n_vertices)


def normalize_ranges(model: QuadraticModel, h_range=2, j_range=1) -> tuple[QuadraticModel, Fraction]:
    """Scale uniformly so that ``|h| <= h_range`` and ``|J| <= j_range``.

    Only shrinks; a model already inside the ranges comes back with scale 1.
    """
    if model.domain is not Vartype.SPIN:
        raise ValueError("normalize_ranges expects a spin model")
    hmax, jmax = model.max_abs()
    scale = Fraction(1)
    if jmax > j_range:
        scale = min(scale, _frac(j_range) / jmax)
    if hmax > h_range:
        scale = min(scale, _frac(h_range) / hmax)
    if scale == 1:
        return model, scale
    return model.scaled(scale), scale


# ---------------------------------------------------------------- dispatch
def compile_instance(inst: RamseyInstance, mu=2, fix_first: bool = False) -> QuadraticModel:
    """Binary model whose minimum over ancillas reproduces ``h^N_{m,n}``.

    Supported: ``n == 2`` with ``N <= m <= 8`` and ``(m, n) == (3, 3)`` with
    ``N`` in ``{4, 5, 6}``.
    """
    N, m, n = inst.n_vertices, inst.clique_order, inst.independent_order
    if n == 2 and N < m:
        return build_rm2_subcritical_model(m, N)
    if n == 2 and N == m and RM2_MIN_ORDER <= m <= RM2_MAX_ORDER:
        return build_rm2_model(m, PenaltyConfig(mu))
    if (m, n) == (3, 3) and N in (4, 5, 6):
        return build_r33_model(N, fix_first=fix_first)
    raise ValueError(
        f"unsupported instance (m={m}, n={n}, N={N}); supported: n=2 with N <= m <= 8, "
        "and m=n=3 with N in {4, 5, 6}"
    )


def graph_code_from_assignment(model: QuadraticModel, assignment) -> int:
    """Packed graph code from a model assignment (binary or spin).

    Reads the ``a<k>`` labelled variables plus the pinned ``fixed`` bits.
    """
    if model.n_vertices is None:
        raise ValueError("model carries no graph provenance")
    x = np.asarray(assignment)
    ones = x > 0
    code = 0
    for i, lab in model.labels.items():
        if lab.startswith("a") and ones[i]:
            code |= 1 << (int(lab[1:]) - 1)
    for pos, v in model.fixed.items():
        if v > 0:
            code |= 1 << pos
    return code


def graph_codes_from_assignments(model: QuadraticModel, assignments) -> np.ndarray:
    """Vectorised :func:`graph_code_from_assignment` for a 2-D array."""
    x = np.atleast_2d(np.asarray(assignments)) > 0
    codes = np.zeros(x.shape[0], dtype=np.uint64)
    for i, lab in model.labels.items():
        if lab.startswith("a"):
            codes |= x[:, i].astype(np.uint64) << np.uint64(int(lab[1:]) - 1)
    for pos, v in model.fixed.items():
        if v > 0:
            codes |= np.uint64(1 << pos)
    return codes


def all_assignments(num_vars: int, domain: Vartype = Vartype.BINARY) -> np.ndarray:
    """Every assignment as rows; row ``x`` has bit ``i`` of ``x`` in column ``i``."""
    idx = np.arange(1 << num_vars, dtype=np.int64)[:, None]
    bits = ((idx >> np.arange(num_vars)) & 1).astype(np.int8)
    return bits if domain is Vartype.BINARY else (2 * bits - 1).astype(np.int8)
