import itertools
from functools import reduce

import numpy as np
import pytest

from ramsey_forge.cost import RamseyInstance, ramsey_energy
from ramsey_forge.graphs import GraphBits
from ramsey_forge.qubo import ModelBuilder, Vartype, build_r33_model, to_spin
from ramsey_forge.quantum import (
    MAX_QUBITS,
    AnnealSchedule,
    QuantumState,
    apply_driver,
    evolve,
    ground_probability,
    initial_state,
    instantaneous_spectrum,
    measure_energies,
    problem_diagonal,
    sample_anneal,
)

R33_4 = RamseyInstance(4, 3, 3)
SX = np.array([[0, 1], [1, 0]], dtype=float)


def single_spin(h):
    b = ModelBuilder(Vartype.SPIN)
    b.add_linear(0, h)
    return b.build(1)


def random_spin_model(n, seed):
    rng = np.random.default_rng(seed)
    b = ModelBuilder(Vartype.SPIN)
    for i in range(n):
        b.add_linear(i, round(float(rng.uniform(-2, 2)), 3))
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < 0.6:
            b.add_quadratic(i, j, round(float(rng.uniform(-1, 1)), 3))
    return b.build(n)


def dense_driver(L):
    # qubit k acts on bit k, which is the last kron factor for k = 0
    total = np.zeros((1 << L, 1 << L))
    for k in range(L):
        factors = [SX if q == k else np.eye(2) for q in reversed(range(L))]
        total -= reduce(np.kron, factors)
    return total


def test_initial_state():
    np.testing.assert_allclose(initial_state(1).amplitudes, [2 ** -0.5] * 2)
    np.testing.assert_allclose(initial_state(2).amplitudes, [0.5] * 4)
    with pytest.raises(ValueError):
        initial_state(MAX_QUBITS + 1)


def test_schedule_validation_and_text():
    AnnealSchedule.linear(5)
    for bad in [
        dict(s_grid=(0.0, 0.5), a_values=(1.0, 0.0), b_values=(0.0, 1.0)),
        dict(s_grid=(0.0, 1.0), a_values=(1.0, 0.1), b_values=(0.0, 1.0)),
        dict(s_grid=(0.0, 1.0), a_values=(1.0, 0.0), b_values=(0.2, 1.0)),
        dict(s_grid=(0.0, 0.5, 1.0), a_values=(1.0, 1.2, 0.0), b_values=(0.0, 0.5, 1.0)),
    ]:
        with pytest.raises(ValueError):
            AnnealSchedule(1.0, **bad)
    text = "s A B\n0 2 0\n0.5 0.5 0.25  # knee\n1 0 1\n"
    sched = AnnealSchedule.from_text(text, t_f=3)
    assert sched.a(0.25) == pytest.approx(1.25) and sched.b(0.75) == pytest.approx(0.625)
    assert AnnealSchedule.from_text(sched.to_text(), t_f=3) == sched
    with pytest.raises(ValueError):
        AnnealSchedule.from_text("s A B\n0 1\n1 0 1\n")


def test_driver_matches_dense_reference():
    rng = np.random.default_rng(0)
    for L in (1, 3, 5):
        psi = rng.normal(size=1 << L) + 1j * rng.normal(size=1 << L)
        np.testing.assert_allclose(apply_driver(psi, L), dense_driver(L) @ psi, atol=1e-12)


def test_diagonal_matches_energy():
    diag = problem_diagonal(RamseyInstance(6, 3, 3))
    rng = np.random.default_rng(1)
    for code in rng.integers(0, 1 << 15, 300):
        assert diag[code] == ramsey_energy(GraphBits(6, int(code)), RamseyInstance(6, 3, 3))
    np.testing.assert_array_equal(problem_diagonal(R33_4), problem_diagonal(build_r33_model(4)))
    np.testing.assert_array_equal(problem_diagonal(to_spin(build_r33_model(4))), problem_diagonal(R33_4))
    with pytest.raises(TypeError):
        problem_diagonal("x")


def test_uniform_state_energy_distribution():
    dist = measure_energies(initial_state(6), R33_4)
    assert dist[0.0] == pytest.approx(18 / 64, abs=1e-12)
    assert sum(dist.values()) == pytest.approx(1.0)


def test_basis_state_point_mass():
    amps = np.zeros(64, dtype=complex)
    amps[0b101101] = 1
    diag = problem_diagonal(R33_4)
    assert measure_energies(QuantumState(amps), R33_4) == {float(e): (1.0 if e == diag[0b101101] else 0.0) for e in np.unique(diag)}


def test_single_spin_slow_anneal():
    model = single_spin(1)
    state = evolve(model, AnnealSchedule.linear(50))
    # basis index 0 is s = -1
    assert state.probabilities()[0] >= 0.99


def test_r33_n4_slow_anneal():
    state = evolve(R33_4, AnnealSchedule.linear(100))
    assert ground_probability(state, R33_4) >= 0.99
    assert state.metadata["norm_drift"] <= 1e-8


def test_sudden_limit_is_uniform():
    state = evolve(R33_4, AnnealSchedule.linear(1e-6))
    np.testing.assert_allclose(state.probabilities(), 1 / 64, atol=0.01)
    assert evolve(R33_4, AnnealSchedule.linear(0)).norm() == pytest.approx(1)


def test_sparse_and_stride_drivers_agree(monkeypatch):
    import ramsey_forge.quantum as q

    model = random_spin_model(5, 3)
    sched = AnnealSchedule.linear(2)
    a = evolve(model, sched, steps=200).amplitudes
    monkeypatch.setattr(q, "_SPARSE_DRIVER_LIMIT", 0)
    b = evolve(model, sched, steps=200).amplitudes
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_rk4_convergence_order():
    model = random_spin_model(4, 5)
    sched = AnnealSchedule.linear(3)
    ref = evolve(model, sched, steps=4096).amplitudes
    err = [np.linalg.norm(evolve(model, sched, steps=n).amplitudes - ref) for n in (40, 80)]
    ratio = err[0] / err[1]
    assert 8 <= ratio <= 32


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("s", [0.2, 0.5, 0.9])
def test_spectrum_matches_dense_reference(seed, s):
    model = random_spin_model(6, seed)
    sched = AnnealSchedule.linear(1)
    H = (1 - s) * dense_driver(6) + s * np.diag(problem_diagonal(model))
    ref = np.linalg.eigvalsh(H)[:4]
    np.testing.assert_allclose(instantaneous_spectrum(model, sched, s, k=4), ref, atol=1e-9)


def test_sparse_spectrum_path():
    model = random_spin_model(11, 9)
    sched = AnnealSchedule.linear(1)
    H = 0.6 * dense_driver(11) + 0.4 * np.diag(problem_diagonal(model))
    ref = np.linalg.eigvalsh(H)[:3]
    import ramsey_forge.quantum as q

    assert 11 > q._DENSE_LIMIT
    np.testing.assert_allclose(instantaneous_spectrum(model, sched, 0.4, k=3), ref, atol=1e-9)


def test_spectrum_endpoints():
    sched = AnnealSchedule.linear(1)
    vals = instantaneous_spectrum(R33_4, sched, 0.0, k=2)
    np.testing.assert_allclose(vals, [-6, -4], atol=1e-12)
    final = instantaneous_spectrum(build_r33_model(6, fix_first=True), sched, 1.0, k=2)
    np.testing.assert_array_equal(final, [2, 2])
    with pytest.raises(ValueError):
        instantaneous_spectrum(RamseyInstance(6, 3, 3), sched, 0.5)


def test_sample_anneal_domains():
    model = to_spin(build_r33_model(4))
    s = sample_anneal(model, AnnealSchedule.linear(10), reads=500, seed=4)
    assert s.num_reads == 500 and set(np.unique(s.states)) <= {-1, 1}
    assert s.check_energies(model)
    assert s == sample_anneal(model, AnnealSchedule.linear(10), reads=500, seed=4)
    binary = sample_anneal(build_r33_model(4), AnnealSchedule.linear(10), reads=50, seed=4)
    assert set(np.unique(binary.states)) <= {0, 1}
    with pytest.raises(ValueError):
        sample_anneal(model, AnnealSchedule.linear(1), reads=0)
