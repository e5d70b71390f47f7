"""
The linearized spectrum and its critical pair
=============================================

Linearize about the steady state, compute all eigenvalues and pick out the
pair continuing from +-i at the uniform film.
"""

from rimmflow import Params, solve_steady, spectrum

# Uniform film: eigenvalues are known in closed form and the leading pair is +-i.
rep = spectrum(solve_steady(Params(1.0)))
print("uniform film, six eigenvalues nearest the axis:")
for w in rep.eigenvalues[:6]:
    print(f"   {w.real:+.6f} {w.imag:+.6f}i")

# Switch on gravity and inertia: the pair moves off the imaginary axis.
for eps in [(0.01, 0.02), (0.01, 0.10), (0.05, 0.0)]:
    rep = spectrum(solve_steady(Params(1.0, *eps)))
    lp = rep.lambda_plus
    print(f"eps={eps}: lambda+ = {lp.real:+.4e} {lp.imag:+.8f}i, "
          f"gap ok {rep.gap_ok}, conjugate pairing error {rep.conjugate_pairing_error():.1e}")
