"""
Steady states near the uniform film
===================================

Solve for the steady film profile with Newton's method on a Fourier-Galerkin
truncation and compare it with the third-order expansion in (eps1, eps2).
"""

import numpy as np

from rimmflow import Params, mean_mass, solve_steady, taylor_steady

# A moderate point: gravity and inertia both switched on.
p = Params(b=1.0, eps1=0.05, eps2=0.05)
s = solve_steady(p)
print(f"Newton converged in {s.newton_iters} steps, residual {s.residual_norm:.2e}")
print(f"min film height {s.min_height:.6f}, mean mass {mean_mass(s):.12f}")

# The expansion error should shrink like |eps|^3 as we approach the origin.
print("\n  eps      |H - Taylor|   ratio to previous")
prev = None
for eps in (0.08, 0.04, 0.02, 0.01):
    q = Params(1.0, eps, eps)
    err = (solve_steady(q).H - taylor_steady(q)).l2_norm()
    ratio = "" if prev is None else f"{prev / err:8.2f}"
    print(f"  {eps:<8g} {err:.3e}   {ratio}")
    prev = err

# The profile on a coarse grid, ready for plotting elsewhere.
theta = np.linspace(0, 2 * np.pi, 9)[:-1]
H = s.H.real_grid(8)
for t, h in zip(theta, H):
    print(f"theta={t:5.3f}  H={h:.6f}")
