"""
Passage of a rectangular well through threshold
===============================================

For a finite well the ground state sees the other Sturmian channels. Here the
single-channel result (with and without the diagonal M2 correction), the
coupled-channel result and the direct TDSE are compared at E-bar = 0 across
the rate regimes: near-universal at small v-bar, scooping by excited states
at moderate v-bar, and near-sudden at large v-bar.
"""

from threshold_passage.reflection import solve_coupled, solve_single_sturmian
from threshold_passage.tdse import evolve
from threshold_passage.trap import box_spec

print(" v-bar   single   single+M2   coupled(4)   TDSE")
for v in (0.05, 1.0, 10.0, 80.0, 200.0):
    spec = box_spec("rectangular", 0.0, v)
    a = solve_single_sturmian(spec, with_M2=False).P_stay[0, 0]
    b = solve_single_sturmian(spec, with_M2=True).P_stay[0, 0]
    c = solve_coupled(spec, 0, 4).probability(0, 0)
    _, res = evolve(spec)
    print(f"{v:6.2f}   {a:.4f}   {b:.4f}      {c:.4f}       {res.P_stay[0, 0]:.4f}")

# the total bound population exceeds P_00 once excited states enter the well
res = solve_coupled(box_spec("rectangular", 0.0, 10.0), 0, 3)
print("\nv-bar = 10: P_00 =", round(res.probability(0, 0), 4),
      " all bound =", round(float(res.P_total[0]), 4))

# slow passage: adiabatic retention below threshold, escape above
for e in (-4.0, 0.0, 4.0):
    p = solve_single_sturmian(box_spec("rectangular", e, 0.05)).P_stay[0, 0]
    print(f"E-bar = {e:+.0f}, v-bar = 0.05: P_00 = {p:.5f}")
