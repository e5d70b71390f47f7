"""Closed-form second-order expansion of the critical eigenvalue.

Near ``eps = 0`` the critical eigenvalue expands as

    lambda+(eps) = i + l20 eps1^2 + l11 eps1 eps2 + l02 eps2^2 + O(|eps|^3)

(first-order terms vanish) and its real part ``r(eps)`` is a quadratic form
whose zero set is two lines crossing at the origin.  The first-quadrant line
is the Hopf curve ``eps2 = E2(eps1)``.

Two coefficient sets are provided:

``"published"``
    The literature values, ``l02 = (1 - 12ib)/(1 + 144b^2)`` and hence
    ``(1 + 144b^2) r = -9b eps1^2 - 3b eps1 eps2 + eps2^2``.
``"rederived"``
    The same expansion carried through with ``l02 = -i (psi01|e^{-2i theta})
    = (12b + i)/(1 + 144b^2)``.  Only ``l02`` differs.  This is the set the
    computed spectrum reproduces; it gives
    ``(1 + 144b^2) r = -9b eps1^2 - 3b eps1 eps2 + 12b eps2^2`` and a Hopf
    curve of slope exactly 1 for every ``b``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Literal, NamedTuple

import numpy as np

Variant = Literal["published", "rederived"]
VARIANTS = ("published", "rederived")


class LambdaCoeffs(NamedTuple):
    l20: complex
    l11: complex
    l02: complex


def _check(b: float, variant: str):
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown coefficient variant {variant!r}")


def psi10_inner(b: float) -> complex:
    """``(psi_{1,0} | e^{-2i theta}) = 1/(1 + 12ib)``; the ``psi_{0,1}`` value is its negative."""
    _check(b, "published")
    return (1 - 12j * b) / (1 + 144 * b * b)


def psi01_inner(b: float) -> complex:
    return -psi10_inner(b)


def lambda_coeffs(b: float, variant: Variant = "published") -> LambdaCoeffs:
    _check(b, variant)
    d = 1 + 144 * b * b
    l20 = (-18 * b + 1j * (72 * b * b - 1)) / (2 * d) - 1j / 3
    l11 = (-6 * b - 1j * (1 + 72 * b * b)) / (2 * d) - 1j / 2
    if variant == "published":
        l02 = (1 - 12j * b) / d
    else:
        l02 = -1j * psi01_inner(b)
    return LambdaCoeffs(l20, l11, l02)


def lambda_quadratic(b: float, eps, variant: Variant = "published") -> complex:
    e1, e2 = eps
    c = lambda_coeffs(b, variant)
    return 1j + c.l20 * e1 * e1 + c.l11 * e1 * e2 + c.l02 * e2 * e2


def r_coeffs(b: float, variant: Variant = "published") -> tuple[float, float, float]:
    """``(r20, r11, r02)``, the real parts of the eigenvalue coefficients."""
    c = lambda_coeffs(b, variant)
    return (c.l20.real, c.l11.real, c.l02.real)


def r_quadratic(b: float, eps, variant: Variant = "published") -> float:
    e1, e2 = eps
    r20, r11, r02 = r_coeffs(b, variant)
    return r20 * e1 * e1 + r11 * e1 * e2 + r02 * e2 * e2


def _slope(r20: float, r11: float, r02: float) -> float:
    # positive root x of r20 + r11 x + r02 x^2 = 0
    disc = r11 * r11 - 4 * r20 * r02
    return (-r11 + math.sqrt(disc)) / (2 * r02)


def e2_slope(b: float, variant: Variant = "published") -> float:
    """Slope of the first-quadrant zero line of ``r``.

    For the published coefficients this is ``(3b/2)(1 + sqrt(1 + 4/b))``.
    """
    _check(b, variant)
    if variant == "published":
        return 1.5 * b * (1 + math.sqrt(1 + 4 / b))
    return _slope(*r_coeffs(b, variant))


def e2_asymptotic(b: float, eps1: float, variant: Variant = "published") -> float:
    return e2_slope(b, variant) * eps1


@dataclass(frozen=True)
class QuadraticModel:
    b: float
    variant: str
    r20: float
    r11: float
    r02: float
    hessian_det: float
    tangent_minus: tuple[float, float]
    tangent_plus: tuple[float, float]
    e2_slope: float

    def hessian(self) -> np.ndarray:
        return np.array([[2 * self.r20, self.r11], [self.r11, 2 * self.r02]])

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def hessian_model(b: float, variant: Variant = "published") -> QuadraticModel:
    """Hessian of ``r`` at 0 and the tangents of the two zero branches.

    With ``s = sign(r11) sqrt(-det)``: ``tangent_minus = (-2 r02, r11 + s)``
    and ``tangent_plus = (r11 + s, -2 r20)``.
    """
    r20, r11, r02 = r_coeffs(b, variant)
    det = 4 * r20 * r02 - r11 * r11
    if not det < 0:
        raise ValueError(f"Hessian determinant {det:g} is not negative")
    # r11 = -3b/(1+144b^2) < 0 for b > 0, so sign(0) never arises
    assert r11 < 0
    k = r11 - math.sqrt(-det)
    return QuadraticModel(
        b=b,
        variant=variant,
        r20=r20,
        r11=r11,
        r02=r02,
        hessian_det=det,
        tangent_minus=(-2 * r02, k),
        tangent_plus=(k, -2 * r20),
        e2_slope=e2_slope(b, variant),
    )


def model_table(bs, variant: Variant = "published") -> str:
    """CSV of :class:`QuadraticModel` fields over a grid of ``b``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["b", "r20", "r11", "r02", "hessian_det", "tm1", "tm2", "tp1", "tp2", "e2_slope"])
    for b in bs:
        m = hessian_model(b, variant)
        w.writerow([repr(float(x)) for x in (b, m.r20, m.r11, m.r02, m.hessian_det,
                                              *m.tangent_minus, *m.tangent_plus, m.e2_slope)])
    return buf.getvalue()
