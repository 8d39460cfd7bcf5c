"""
Statevector annealing of R(3,3) at N=4
======================================

Six qubits, 18 zero-energy graphs. Longer anneals put more weight on
the ground subspace; the spectrum shows why the final gap vanishes.
"""

import numpy as np

from ramsey_forge import (
    AnnealSchedule,
    RamseyInstance,
    evolve,
    ground_probability,
    instantaneous_spectrum,
    measure_energies,
)

inst = RamseyInstance(4, 3, 3)

for t_f in (1, 10, 100):
    state = evolve(inst, AnnealSchedule.linear(t_f))
    dist = measure_energies(state, inst)
    print(f"t_f={t_f:<4} P(ground)={ground_probability(state, inst):.4f}  "
          f"P(E=1)={dist.get(1.0, 0):.4f}  steps={state.metadata['steps']}")

# lowest levels along the linear path
sched = AnnealSchedule.linear(1)
for s in np.linspace(0, 1, 6):
    vals = instantaneous_spectrum(inst, sched, s, k=3)
    print(f"s={s:.1f} " + " ".join(f"{v:8.4f}" for v in vals))
