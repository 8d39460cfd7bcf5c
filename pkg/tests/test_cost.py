import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_forge.cost import (
    RamseyInstance,
    clique_counts_many,
    complement_symmetry_check,
    count_cliques,
    count_independent,
    independent_counts_many,
    ramsey_energies_many,
    ramsey_energy,
)
from ramsey_forge.graphs import GraphBits, adjacency_from_bits, complement, num_edges

CYCLE5 = GraphBits.from_edges(5, [(2, 1), (3, 2), (4, 3), (5, 4), (5, 1)])


def brute_cliques(g, k):
    adj = adjacency_from_bits(g)
    return sum(
        all(adj[a, b] for a, b in itertools.combinations(s, 2))
        for s in itertools.combinations(range(g.n_vertices), k)
    )


def test_instance_validation():
    with pytest.raises(ValueError):
        RamseyInstance(1, 3, 3)
    with pytest.raises(ValueError):
        RamseyInstance(5, 1, 3)
    assert RamseyInstance(6, 4, 2).swapped() == RamseyInstance(6, 2, 4)
    assert RamseyInstance(6, 4, 2).num_bits == 15


def test_clique_examples():
    assert count_cliques(GraphBits.complete(4), 3) == 4
    assert count_cliques(GraphBits.empty(5), 2) == 0
    assert count_cliques(CYCLE5, 3) == 0


def test_independent_examples():
    assert count_independent(GraphBits.empty(4), 3) == 4
    assert count_independent(GraphBits.complete(4), 2) == 0
    assert count_independent(CYCLE5, 3) == 0


def test_order_out_of_range():
    with pytest.raises(ValueError):
        count_cliques(GraphBits.empty(4), 5)
    with pytest.raises(ValueError):
        count_independent(GraphBits.empty(4), 1)


def test_energy_examples():
    assert ramsey_energy(CYCLE5, RamseyInstance(5, 3, 3)) == 0
    # an order above N contributes nothing: K_7 has no 8-clique and no missing edge
    assert ramsey_energy(GraphBits.complete(7), RamseyInstance(7, 8, 2)) == 0
    assert ramsey_energy(GraphBits.empty(4), RamseyInstance(4, 3, 3)) == 4


def test_every_six_vertex_graph_has_two_monochromatic_triangles():
    inst = RamseyInstance(6, 3, 3)
    energies = ramsey_energies_many(np.arange(1 << 15), inst)
    assert energies.min() == 2


@pytest.mark.parametrize("n", range(2, 6))
def test_counts_match_brute_force_exhaustively(n):
    for code in range(1 << num_edges(n)):
        g = GraphBits(n, code)
        for k in range(2, n + 1):
            assert count_cliques(g, k) == brute_cliques(g, k)
            assert count_independent(g, k) == count_cliques(complement(g), k)


@settings(max_examples=60, deadline=None)
@given(st.integers(6, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << num_edges(n)) - 1))))
def test_independent_is_clique_of_complement(args):
    n, code = args
    g = GraphBits(n, code)
    for k in (2, 3, 4):
        assert count_independent(g, k) == count_cliques(complement(g), k) == brute_cliques(complement(g), k)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, (1 << 21) - 1))
def test_complement_symmetry_random_seven(code):
    g = GraphBits(7, code)
    assert complement_symmetry_check(g, RamseyInstance(7, 4, 2))
    assert ramsey_energy(g, RamseyInstance(7, 4, 2)) == ramsey_energy(complement(g), RamseyInstance(7, 2, 4))


@pytest.mark.parametrize("n", (5, 6))
def test_complement_symmetry_r33(n):
    inst = RamseyInstance(n, 3, 3)
    rng = np.random.default_rng(n)
    for code in rng.integers(0, 1 << num_edges(n), 50):
        assert complement_symmetry_check(GraphBits(n, int(code)), inst)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, (1 << 15) - 1), st.integers(0, 14))
def test_monotone_in_edges(code, bit):
    g = GraphBits(6, code & ~(1 << bit))
    h = GraphBits(6, code | (1 << bit))
    for k in (2, 3, 4):
        assert count_cliques(h, k) >= count_cliques(g, k)
        assert count_independent(h, k) <= count_independent(g, k)


@pytest.mark.parametrize("n, m", [(5, 3), (6, 4), (6, 6), (7, 5)])
def test_vectorised_counts_agree(n, m):
    rng = np.random.default_rng(0)
    codes = rng.integers(0, 1 << num_edges(n), 200)
    many = clique_counts_many(codes, n, m)
    assert list(many) == [count_cliques(GraphBits(n, int(c)), m) for c in codes]


@pytest.mark.parametrize("n", [4, 5, 7])
def test_popcount_fast_path_matches_generic(n):
    codes = np.arange(1 << num_edges(n)) if n < 7 else np.random.default_rng(1).integers(0, 1 << 21, 5000)
    fast = independent_counts_many(codes, n, 2, fast=True)
    slow = independent_counts_many(codes, n, 2, fast=False)
    np.testing.assert_array_equal(fast, slow)
    inst = RamseyInstance(n, n, 2)
    np.testing.assert_array_equal(ramsey_energies_many(codes, inst, fast=True), ramsey_energies_many(codes, inst, fast=False))


def test_energy_is_nonnegative_integer():
    e = ramsey_energies_many(np.arange(1 << 10), RamseyInstance(5, 3, 3))
    assert e.dtype.kind == "i" and e.min() >= 0
    assert int(e.max()) == math.comb(5, 3)
