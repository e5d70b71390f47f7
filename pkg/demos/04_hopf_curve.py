"""
Tracing the Hopf curve
======================

Find the zero level of Re(lambda+) in the eps2 direction for a few eps1 and
compare with the tangent lines of the quadratic model.
"""

import math

from rimmflow import hessian_model, trace_E2, zero_branch_directions
from rimmflow.hopf import curve_table, fitted_slope

samples = trace_E2(1.0, [0.0025, 0.005, 0.01, 0.02])
print(curve_table(samples))
print(f"fitted slope near the origin: {fitted_slope(samples):.5f}")

for variant in ("published", "rederived"):
    m = hessian_model(1.0, variant)
    print(f"{variant:>9} model: slope {m.e2_slope:.5f}, det {m.hessian_det:.4e}")

# Both zero branches through the origin, measured on small circles.
dirs = zero_branch_directions(1.0)
print("measured branch angles (deg):", ", ".join(f"{math.degrees(a):.3f}" for a in dirs.angles))
