"""
Bound-state populations during the passage
==========================================

The direct solver records P_n(t) = |<phi_n(t)|psi(t)>|^2 for the adiabatic
even states. For a zero-range well with gamma = 1 the state is absent for
|t| < 1 and partly recaptured afterwards; for a rectangular well at v-bar = 10
excited states enter the deepening well and take up population.
Traces are written as CSV next to this script.
"""

import os

import numpy as np

from threshold_passage.tdse import evolve
from threshold_passage.trap import box_spec, zero_range_spec

here = os.path.dirname(os.path.abspath(__file__))

trace, res = evolve(zero_range_spec(1.0))
trace.write_csv(os.path.join(here, "trace_zero_range_gamma1.csv"))
gone = trace.times[~trace.exists[:, 0]]
print(f"zero range, gamma = 1: state absent on [{gone.min():.3f}, {gone.max():.3f}]")
print(f"final P_0 = {res.P_stay[0, 0]:.4f}")

trace, res = evolve(box_spec("rectangular", 0.0, 10.0))
trace.write_csv(os.path.join(here, "trace_rectangular_v10.csv"))
for n in range(1, 3):
    i = int(np.argmax((trace.times > 0) & trace.exists[:, n]))
    print(f"state {n} enters at tau = {trace.times[i]:.3f}")
print("final populations:", np.round(res.P_stay[0, :4], 4))
