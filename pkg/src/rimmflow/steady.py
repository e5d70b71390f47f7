"""Steady states of the rimming-flow equation near the uniform film.

A steady state solves

    H - (eps1 cos/3) H^3 + H^3 B[H] + eps2 sin H^3 H' = 1,

i.e. the flux through the film equals one.  :func:`solve_steady` runs Newton
in coefficient space starting from ``H = 1``; :func:`taylor_steady` evaluates
the second-order expansion in ``eps`` for cross-checking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import LostPositivity, NoConvergence
from .spectral import (
    Params,
    SpectralField,
    apply_G_inv,
    coeffs_to_grid,
    grid_size,
    grid_to_coeffs,
    modes,
    multiplication_matrix,
    theta_grid,
)

DEFAULT_N = 32
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 25


def _grids(coeffs: np.ndarray, m: int):
    n = 1j * modes((len(coeffs) - 1) // 2)
    h = coeffs_to_grid(coeffs, m)
    h1 = coeffs_to_grid(n * coeffs, m)
    h3 = coeffs_to_grid(n ** 3 * coeffs, m)
    return h, h1, h3


def flux_grid(coeffs: np.ndarray, p: Params, m: int) -> np.ndarray:
    """Grid values of the flux ``f1(h) = h - (eps1 cos/3) h^3 + b h^3 (h' + h''') + eps2 sin h^3 h'``."""
    th = theta_grid(m)
    h, h1, h3 = _grids(coeffs, m)
    cube = h ** 3
    return (h - p.eps1 * np.cos(th) / 3.0 * cube
            + p.b * cube * (h1 + h3)
            + p.eps2 * np.sin(th) * cube * h1)


def residual(H: SpectralField, p: Params) -> SpectralField:
    """Steady-state residual ``f1(H) - 1``."""
    m = grid_size(H.n_max)
    r = grid_to_coeffs(flux_grid(H.coeffs, p, m), H.n_max)
    r[H.n_max] -= 1.0
    return SpectralField(r)


def linearization_coefficients(H: SpectralField, p: Params, m: int):
    """Grid coefficients ``(a0, a1, a3)`` with ``Df1(H) v = a0 v + a1 v' + a3 v'''``."""
    th = theta_grid(m)
    h, h1, h3 = _grids(H.coeffs, m)
    sq = h * h
    cube = sq * h
    s = np.sin(th)
    a0 = 1.0 - p.eps1 * np.cos(th) * sq + 3.0 * p.b * sq * (h1 + h3) + 3.0 * p.eps2 * s * sq * h1
    a1 = p.b * cube + p.eps2 * s * cube
    a3 = p.b * cube
    return a0, a1, a3


def jacobian(H: SpectralField, p: Params) -> np.ndarray:
    """Galerkin matrix of the Frechet derivative of :func:`residual` at ``H`` (modes ``-N..N``)."""
    m = grid_size(H.n_max)
    a0, a1, a3 = linearization_coefficients(H, p, m)
    d = 1j * modes(H.n_max)
    return (multiplication_matrix(a0, H.n_max)
            + multiplication_matrix(a1, H.n_max) * d[None, :]
            + multiplication_matrix(a3, H.n_max) * (d ** 3)[None, :])


@dataclass(frozen=True, eq=False)
class SteadyState:
    params: Params
    H: SpectralField
    residual_norm: float
    newton_iters: int
    min_height: float
    history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_max(self) -> int:
        return self.H.n_max

    def summary(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "n_max": self.n_max,
            "residual_norm": self.residual_norm,
            "iters": self.newton_iters,
            "mean_mass": mean_mass(self),
            "min_height": self.min_height,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary())


def _newton(H0: np.ndarray, p: Params, tol: float, max_iter: int):
    c = H0.copy()
    history = []
    for it in range(max_iter + 1):
        F = residual(SpectralField(c), p)
        rn = F.l2_norm()
        history.append(rn)
        if not np.isfinite(rn) or rn > 1e8:
            break
        if rn < tol:
            return c, it, history
        if it == max_iter:
            break
        J = jacobian(SpectralField(c), p)
        c = c - np.linalg.solve(J, F.coeffs)
    raise NoConvergence(
        f"Newton failed for {p} after {len(history) - 1} iterations "
        f"(last residual {history[-1]:.3e}); eps is likely outside the tractable neighborhood"
    )


def solve_steady(
    p: Params,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    n_max: int = DEFAULT_N,
) -> SteadyState:
    """Newton solve from ``H = 1``; falls back to 4-step continuation in ``eps``.

    Raises :class:`NoConvergence` or :class:`LostPositivity`.
    """
    one = np.zeros(2 * n_max + 1, dtype=complex)
    one[n_max] = 1.0
    try:
        c, iters, hist = _newton(one, p, tol, max_iter)
    except NoConvergence:
        c = one
        iters = 0
        hist = []
        for t in (0.25, 0.5, 0.75, 1.0):
            c, k, h = _newton(c, p.with_eps(t * p.eps1, t * p.eps2), tol, max_iter)
            iters += k
            hist.extend(h)
    H = SpectralField(c)
    if not H.is_real():
        raise NoConvergence(f"steady state lost conjugate symmetry ({H.imag_residue():.2e})")
    hmin = float(np.min(H.real_grid()))
    if hmin <= 0:
        raise LostPositivity(f"min height {hmin:.3e} <= 0 at {p}")
    return SteadyState(p, H, hist[-1], iters, hmin, tuple(hist))


def taylor_steady(p: Params, n_max: int = DEFAULT_N) -> SpectralField:
    """Second-order expansion ``1 + eps1 H10 + eps1^2 H20 + eps1 eps2 H11``."""
    e1, e2 = p.eps
    cos = SpectralField.from_modes({1: 0.5, -1: 0.5}, n_max)
    h20 = apply_G_inv(SpectralField.from_modes({0: 1.0, 2: 0.5, -2: 0.5}, n_max), p.b) * (1 / 6)
    h11 = apply_G_inv(SpectralField.from_modes({0: 1.0, 2: -0.5, -2: -0.5}, n_max), p.b) * (1 / 6)
    return SpectralField.constant(1.0, n_max) + cos * (e1 / 3) + h20 * e1 ** 2 + h11 * (e1 * e2)


def mean_mass(s: SteadyState) -> float:
    """``(H|1)``, the conserved mass of the hyperplane through ``H``."""
    return float(s.H.mean().real)


def steady_csv(s: SteadyState) -> list[list]:
    """Rows ``(theta, H)`` on the product grid."""
    m = grid_size(s.n_max)
    return [[float(t), float(v)] for t, v in zip(theta_grid(m), s.H.real_grid(m))]
