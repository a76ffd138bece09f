"""
Universality near threshold
===========================

Close to the strength rho0 at which a state sits at zero energy, the
zero-energy log-derivative is linear, kappa = C (rho0 - rho), and the
Sturmian strength behaves as rho0 + i sqrt(2 omega) / C. The reduced equation
B'' + c sqrt(omega) B = 0 is scale free, so every state that touches the
threshold keeps 4 cos^2(2 pi / 5) in the slow limit. How slow is slow enough
depends on the well: the approach is gradual for the rectangle.
"""

from threshold_passage.reflection import solve_single_sturmian
from threshold_passage.tdse import evolve
from threshold_passage.threshold import (
    fit_threshold_pole,
    reduced_threshold_survival,
    threshold_strength,
    universal_constant,
)
from threshold_passage.trap import box_spec

print(f"universal value {universal_constant():.5f}\n")
for m in range(3):
    model = fit_threshold_pole("rectangular", m)
    print(f"state {m}: rho0 = {model.rho0:9.4f}   C = {model.slope:.5f}")

model = fit_threshold_pole("rectangular", 1)
print("\nreduced equation, state 1:", round(reduced_threshold_survival(model, 0.5).P_stay[0, 0], 6))

print("\n v-bar     P_00     P_11     P_22")
for v in (0.5, 1e-2, 1e-3):
    row = []
    for m in range(3):
        rho0 = threshold_strength("rectangular", m)
        row.append(solve_single_sturmian(box_spec("rectangular", rho0, v), m).probability(m, m))
    print(f"{v:7.0e}  " + "  ".join(f"{p:.4f}" for p in row))

# a different shape: the parabolic well, by direct integration
_, res = evolve(box_spec("parabolic", 0.0, 1e-3))
print(f"\nparabolic well, v-bar = 1e-3 (TDSE): {res.P_stay[0, 0]:.4f}")

# a state that turns just below threshold follows the E = 0 curve until the
# passage is slow enough to be adiabatic
print("\n v-bar   E=-0.015   E=0")
for v in (1.0, 1e-2, 1e-4, 1e-5):
    a = solve_single_sturmian(box_spec("rectangular", -0.015, v)).P_stay[0, 0]
    b = solve_single_sturmian(box_spec("rectangular", 0.0, v)).P_stay[0, 0]
    print(f"{v:6.0e}   {a:.4f}     {b:.4f}")
