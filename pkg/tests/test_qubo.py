import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_forge.cost import RamseyInstance, ramsey_energies_many
from ramsey_forge.graphs import GraphBits, adjacency_from_bits
from ramsey_forge.qubo import (
    ModelBuilder,
    PenaltyConfig,
    QuadraticModel,
    Vartype,
    all_assignments,
    build_r33_model,
    build_rm2_model,
    build_rm2_subcritical_model,
    chain_consistent_ancillas,
    compile_instance,
    f_ijk_identity_check,
    fix_variable,
    graph_codes_from_assignments,
    normalize_ranges,
    penalty_and,
    to_binary,
    to_spin,
)


def brute_r33(n, code):
    adj = adjacency_from_bits(GraphBits(n, code))
    return sum(
        adj[a, b] == adj[a, c] == adj[b, c]
        for a, b, c in itertools.combinations(range(n), 3)
    )


def rm2_min_over_ancillas(model, L):
    e = model.energies(all_assignments(model.num_vars))
    return e.reshape(1 << (L - 2), 1 << L).min(axis=0)


def argmin_set(model):
    e = model.energies(all_assignments(model.num_vars, model.domain))
    return set(np.flatnonzero(np.isclose(e, e.min())))


# ------------------------------------------------------------- penalty
def test_penalty_truth_table():
    p = penalty_and(0, 1, 2)
    for a1, a2, b in itertools.product((0, 1), repeat=3):
        value = p.energy([a1, a2, b])
        assert value == a1 * a2 - 2 * (a1 + a2) * b + 3 * b
        if b == a1 * a2:
            assert value == 0
        else:
            assert value in (1, 3)
    assert p.energy([1, 1, 1]) == 0
    assert p.energy([0, 0, 1]) == 3


def test_penalty_duplicate_vars():
    with pytest.raises(ValueError):
        penalty_and(0, 0, 1)


def test_penalty_config_bounds():
    with pytest.raises(ValueError):
        PenaltyConfig(Fraction(1, 2))
    assert PenaltyConfig().mu == 2


# ------------------------------------------------------------- R(m, 2)
@pytest.mark.parametrize("m, total", [(3, 4), (4, 10), (5, 18), (8, 54)])
def test_rm2_variable_count(m, total):
    model = build_rm2_model(m)
    L = m * (m - 1) // 2
    assert model.num_vars == total == 2 * L - 2
    assert sum(lab.startswith("a") for lab in model.labels.values()) == L
    assert sum(lab.startswith("b") for lab in model.labels.values()) == L - 2


def test_rm2_range():
    for m in (2, 9):
        with pytest.raises(ValueError):
            build_rm2_model(m)


def test_rm2_all_ones_consistent_chain():
    model = build_rm2_model(4)
    a = np.ones(6, dtype=int)
    assert model.energy(np.concatenate([a, chain_consistent_ancillas(a)])) == 1


@pytest.mark.parametrize("mu", [1, 2, 3])
def test_rm2_quadratization_sound_m4(mu):
    model = build_rm2_model(4, PenaltyConfig(mu))
    L = 6
    codes = np.arange(1 << L)
    a = (codes[:, None] >> np.arange(L)) & 1
    # independent oracle: the single L-fold product plus the count of missing edges
    expected = a.prod(axis=1) + (L - a.sum(axis=1))
    np.testing.assert_array_equal(rm2_min_over_ancillas(model, L), expected)
    np.testing.assert_array_equal(expected, ramsey_energies_many(codes, RamseyInstance(4, 4, 2)))


def test_rm2_minimisers_satisfy_chain_constraints():
    model = build_rm2_model(4)
    L = 6
    e = model.energies(all_assignments(model.num_vars)).reshape(1 << (L - 2), 1 << L)
    for code in range(1 << L):
        a = (code >> np.arange(L)) & 1
        b = chain_consistent_ancillas(a)
        b_code = int(sum(int(v) << i for i, v in enumerate(b)))
        winners = np.flatnonzero(e[:, code] == e[:, code].min())
        assert list(winners) == [b_code]
        # any violating b costs at least as much as the consistent one
        assert np.all(e[:, code] >= e[b_code, code])


def test_rm2_sound_m5_random():
    model = build_rm2_model(5)
    L = 10
    rng = np.random.default_rng(5)
    b_all = ((np.arange(1 << (L - 2))[:, None] >> np.arange(L - 2)) & 1)
    for code in rng.integers(0, 1 << L, 200):
        a = (int(code) >> np.arange(L)) & 1
        rows = np.hstack([np.broadcast_to(a, (len(b_all), L)), b_all])
        assert model.energies(rows).min() == a.prod() + L - a.sum()


def test_subcritical_model():
    model = build_rm2_subcritical_model(8, 7)
    assert model.num_vars == 21 and not model.quadratic
    e = model.energies(np.ones((1, 21)))
    assert e[0] == 0
    small = build_rm2_subcritical_model(4, 3)
    energies = small.energies(all_assignments(3))
    assert energies.min() == 0 and (energies == 0).sum() == 1
    assert build_rm2_subcritical_model(5, 4).energy([0] * 6) == 6
    with pytest.raises(ValueError):
        build_rm2_subcritical_model(4, 4)


# ------------------------------------------------------------- R(3, 3)
@pytest.mark.parametrize("fix, nv, ne", [(False, 15, 60), (True, 14, 52)])
def test_r33_primal_graph_size(fix, nv, ne):
    model = build_r33_model(6, fix_first=fix)
    assert model.num_vars == nv
    assert len(model.primal_edges()) == ne


def test_f_ijk_identity():
    assert f_ijk_identity_check()


@pytest.mark.parametrize("n", [4, 5])
def test_r33_matches_brute_force(n):
    model = build_r33_model(n)
    L = model.num_vars
    e = model.energies(all_assignments(L))
    assert [int(x) for x in e] == [brute_r33(n, c) for c in range(1 << L)]


def test_r33_degeneracy_n5():
    e = build_r33_model(5).energies(all_assignments(10))
    assert e.min() == 0 and (e == 0).sum() == 12


def test_r33_fix_first_reproduces_full_optimum():
    full = build_r33_model(6)
    fixed = build_r33_model(6, fix_first=True)
    e_full = full.energies(all_assignments(15))
    e_fix = fixed.energies(all_assignments(14))
    full_opt = set(np.flatnonzero(e_full == e_full.min()))
    fixed_opt = graph_codes_from_assignments(fixed, all_assignments(14)[e_fix == e_fix.min()])
    mask = (1 << 15) - 1
    rebuilt = {int(c) for c in fixed_opt} | {int(c) ^ mask for c in fixed_opt}
    assert e_fix.min() == e_full.min() == 2
    assert rebuilt == full_opt and len(full_opt) == 1760


def test_r33_range():
    with pytest.raises(ValueError):
        build_r33_model(7)


def test_fix_variable_rejects_wrong_domain():
    with pytest.raises(ValueError):
        fix_variable(build_r33_model(4), 0, -1)


# ------------------------------------------------------------- conversions
def test_to_spin_single_variable():
    b = ModelBuilder()
    b.add_linear(0, 1)
    spin = to_spin(b.build())
    assert spin.offset == Fraction(1, 2) and spin.linear == {0: Fraction(1, 2)}
    with pytest.raises(ValueError):
        to_spin(spin)


def test_to_spin_penalty_fragment():
    spin = to_spin(penalty_and(0, 1, 2))
    for s in itertools.product((-1, 1), repeat=3):
        a1, a2, b = ((x + 1) // 2 for x in s)
        assert (spin.energy(s) == 0) == (b == a1 * a2)


SMALL_MODELS = [
    build_rm2_model(3),
    build_rm2_model(4),
    build_rm2_subcritical_model(5, 4),
    build_r33_model(4),
    build_r33_model(5),
    build_r33_model(4, fix_first=True),
]


@pytest.mark.parametrize("model", SMALL_MODELS, ids=lambda m: f"{m.num_vars}vars")
def test_to_spin_exact_exhaustive(model):
    spin = to_spin(model)
    xs = all_assignments(model.num_vars)
    for x in xs[:: max(1, len(xs) // 256)]:
        assert spin.energy(2 * x - 1) == model.energy(x)
    np.testing.assert_array_equal(spin.energies(2 * xs - 1), model.energies(xs))
    back = to_binary(spin)
    assert back.linear == model.linear and back.quadratic == model.quadratic and back.offset == model.offset


@pytest.mark.parametrize("model", SMALL_MODELS, ids=lambda m: f"{m.num_vars}vars")
def test_normalize_preserves_argmin(model):
    spin = to_spin(model)
    scaled, scale = normalize_ranges(spin)
    h, j = scaled.max_abs()
    assert h <= 2 and j <= 1 and 0 < scale <= 1
    assert argmin_set(scaled) == argmin_set(spin)


def test_normalize_examples():
    b = ModelBuilder(Vartype.SPIN)
    b.add_quadratic(0, 1, 2)
    b.add_linear(0, 1)
    scaled, scale = normalize_ranges(b.build())
    assert scale == Fraction(1, 2) and scaled.quadratic[(0, 1)] == 1
    inside = ModelBuilder(Vartype.SPIN)
    inside.add_linear(0, 1)
    model = inside.build()
    assert normalize_ranges(model) == (model, 1)
    assert normalize_ranges(ModelBuilder(Vartype.SPIN).build(2))[1] == 1


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 6).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.integers(-5, 5), min_size=n, max_size=n),
            st.lists(st.integers(-5, 5), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2),
        )
    )
)
def test_random_models_roundtrip(args):
    n, lin, quad = args
    b = ModelBuilder()
    for i, c in enumerate(lin):
        b.add_linear(i, c)
    for (i, j), c in zip(itertools.combinations(range(n), 2), quad):
        b.add_quadratic(i, j, c)
    model = b.build(n)
    xs = all_assignments(n)
    np.testing.assert_array_equal(to_spin(model).energies(2 * xs - 1), model.energies(xs))
    assert argmin_set(normalize_ranges(to_spin(model))[0]) == argmin_set(to_spin(model))
    assert QuadraticModel.loads(model.dumps()) == model


def test_model_json_format():
    model = build_rm2_model(3)
    data = json.loads(model.dumps())
    assert {"num_vars", "domain", "offset", "linear", "quadratic", "labels"} <= set(data)
    assert all("," in key for key in data["quadratic"])
    assert QuadraticModel.loads(model.dumps()) == model


def test_self_pairs_fold_and_are_rejected_in_models():
    b = ModelBuilder()
    b.add_quadratic(1, 1, 3)
    assert b.build().linear == {1: 3} and not b.build().quadratic
    s = ModelBuilder(Vartype.SPIN)
    s.add_quadratic(0, 0, 3)
    assert s.build(1).offset == 3
    with pytest.raises(ValueError):
        QuadraticModel(2, Vartype.BINARY, {}, {(1, 1): Fraction(1)})


# ------------------------------------------------------------- dispatch
@pytest.mark.parametrize(
    "inst, nvars",
    [(RamseyInstance(8, 8, 2), 54), (RamseyInstance(6, 3, 3), 15), (RamseyInstance(7, 8, 2), 21), (RamseyInstance(3, 4, 2), 3)],
)
def test_compile_instance(inst, nvars):
    assert compile_instance(inst).num_vars == nvars


def test_compile_fix_first_and_unsupported():
    assert compile_instance(RamseyInstance(6, 3, 3), fix_first=True).num_vars == 14
    for inst in (RamseyInstance(6, 4, 3), RamseyInstance(9, 9, 2), RamseyInstance(7, 3, 3)):
        with pytest.raises(ValueError):
            compile_instance(inst)


def test_graph_codes_include_fixed_bits():
    fixed = build_r33_model(4, fix_first=True)
    xs = all_assignments(5)
    codes = graph_codes_from_assignments(fixed, xs)
    assert sorted(int(c) for c in codes) == list(range(0, 64, 2))
    e = fixed.energies(xs)
    np.testing.assert_array_equal(e, ramsey_energies_many(codes, RamseyInstance(4, 3, 3)))
