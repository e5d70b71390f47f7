"""
Second-order expansion of the critical eigenvalue
=================================================

Compare the closed-form second derivatives of lambda+ with central finite
differences of the numerically computed eigenvalue.  Two coefficient sets are
shipped: ``published`` and ``rederived``.  They differ only in lambda_{0,2}.
"""

from rimmflow import lambda_coeffs
from rimmflow.verify import lambda_differences

for b in (0.5, 1.0, 2.0):
    num = lambda_differences(b)
    pub = lambda_coeffs(b, "published")
    red = lambda_coeffs(b, "rederived")
    print(f"b={b}")
    for name, key in (("l20", "l20"), ("l11", "l11"), ("l02", "l02")):
        n = num[key]
        print(f"   {name}: numeric {n:.6f}   published {getattr(pub, key):.6f}   "
              f"rederived {getattr(red, key):.6f}")
