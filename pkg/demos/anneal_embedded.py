"""
Simulated annealing on a Chimera embedding
==========================================

Compile the R(8,2) N=8 cost into an Ising model, embed it on the bundled
4x4 Chimera graph, raise the chain strength until most reads keep their
chains intact, then sample and look at the energy histogram.
"""

from ramsey_forge import (
    CoolingSchedule,
    RamseyInstance,
    boltzmann_fit,
    compile_instance,
    default_hardware,
    embed_model,
    find_embedding,
    histogram,
    simulated_anneal,
    success_statistics,
    to_spin,
    tune_lambda,
)

inst = RamseyInstance(8, 8, 2)
spin = to_spin(compile_instance(inst))
hw = default_hardware()
print(f"logical model: {spin.num_vars} variables, {len(spin.quadratic)} couplings")

# a few seconds of search; the result depends only on the seed
emb = find_embedding(spin, hw, seed=0)
lengths = sorted((len(c) for c in emb.chains.values()), reverse=True)
print(f"embedding: {emb.num_qubits} of {len(hw.usable)} usable qubits, longest chain {lengths[0]}")

schedule = CoolingSchedule(1.0, 0.02, 1000)
tuning = tune_lambda(spin, emb, hw, lambda m: simulated_anneal(m, schedule, 500, seed=1))
for lam, frac in tuning.trace:
    print(f"  lambda={lam:<4} feasible fraction {frac:.3f}")
print(f"chosen lambda {tuning.lam}")

em = embed_model(spin, emb.with_lambda(tuning.lam), hw)
samples = simulated_anneal(em.model, CoolingSchedule(0.5, 0.05, 1000), reads=5000, seed=3)
stats = success_statistics(samples, 1, emb_model=em)
print(f"feasible {stats.feasible_fraction:.3f}, optimal among feasible {stats.optimal_fraction:.3f}")

logical, hardware = histogram(samples, em, inst)
print(logical.render())

# effective temperature over the distinct hardware configurations seen
fit = boltzmann_fit(samples)
print(f"effective temperature (hardware units): {fit.temperature:.3f}")
