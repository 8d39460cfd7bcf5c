"""
Exact ground states and the Ramsey protocol
===========================================

Enumerate every graph for the small instances, then let the protocol
walk N upward until the minimum energy turns positive.
"""

from ramsey_forge import RamseyInstance, exhaustive_ground, ramsey_protocol

# (m, n, N) cells: energy minimum and how many graphs reach it
cells = [(4, 2, 3), (4, 2, 4), (5, 2, 5), (6, 2, 6), (8, 2, 7), (8, 2, 8), (3, 3, 5), (3, 3, 6)]
print("  m  n  N   E_gs      D")
for m, n, N in cells:
    gt = exhaustive_ground(RamseyInstance(N, m, n), keep=0)
    print(f"{m:3d}{n:3d}{N:3d}{gt.e_gs:7d}{gt.degeneracy:7d}")

# the protocol stops at the first N whose minimum is positive
for m, n in [(3, 3), (6, 2)]:
    print()
    print(ramsey_protocol(m, n).table())
