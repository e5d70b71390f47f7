"""Tracing the Hopf curve as the zero level of ``r(eps) = Re lambda+(eps)``."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import GapViolation, NoBracket, NoConvergence, NoCrossing
from .linear import SEED, spectrum_at
from .perturbation import Variant, e2_asymptotic
from .spectral import Params
from .steady import DEFAULT_N

ROOT_WIDTH = 1e-10
TOL_CRITICAL = 1e-9


def r_numeric(p: Params, n_max: int = DEFAULT_N, seed: complex = SEED) -> float:
    """Real part of the tracked critical eigenvalue at the steady state ``H(eps)``."""
    return spectrum_at(p, n_max, seed).lambda_plus.real


class Stability(enum.Enum):
    STABLE = "stable"
    CRITICAL = "critical"
    UNSTABLE = "unstable"


def classify(p: Params, tol_c: float = TOL_CRITICAL, n_max: int = DEFAULT_N) -> Stability:
    r = r_numeric(p, n_max)
    if r < -tol_c:
        return Stability.STABLE
    if r > tol_c:
        return Stability.UNSTABLE
    return Stability.CRITICAL


def find_root(f: Callable[[float], float], lo: float, hi: float,
              width: float = ROOT_WIDTH, f_lo: float | None = None, f_hi: float | None = None):
    """Brent root of ``f`` on ``[lo, hi]`` to absolute tolerance ``width``.

    Returns ``(x, f(x))``.
    """
    f_lo = f(lo) if f_lo is None else f_lo
    f_hi = f(hi) if f_hi is None else f_hi
    if f_lo == 0:
        return lo, 0.0
    if f_hi == 0:
        return hi, 0.0
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoBracket(f"no sign change on [{lo:g}, {hi:g}] ({f_lo:.3e}, {f_hi:.3e})")
    x = brentq(f, lo, hi, xtol=width)
    return x, f(x)


@dataclass(frozen=True)
class HopfCurveSample:
    eps1: float
    e2_numeric: float
    e2_asymptotic: float
    r_at_root: float
    gap_ok: bool


def trace_E2(
    b: float,
    eps1_grid: Sequence[float],
    tol: float = 1e-12,
    n_max: int = DEFAULT_N,
    variant: Variant = "published",
    width: float = ROOT_WIDTH,
) -> list[HopfCurveSample]:
    """Root of ``eps2 -> r(eps1, eps2)`` in ``[0, 3 E2_asym(eps1)]`` for each grid value.

    ``variant`` selects the asymptote used for the bracket and the
    ``e2_asymptotic`` column.  Raises :class:`NoBracket` when the bracket
    holds no sign change; samples found before the failure are attached to
    the exception as ``partial``.
    """
    if len(eps1_grid) == 0:
        raise ValueError("empty eps1 grid")
    out: list[HopfCurveSample] = []
    for e1 in eps1_grid:
        if not e1 > 0:
            raise ValueError(f"eps1 grid values must be positive, got {e1}")
        asym = e2_asymptotic(b, e1, variant)
        try:
            e2, r = find_root(lambda y: r_numeric(Params(b, e1, y), n_max), 0.0, 3.0 * asym, width)
            gap_ok = spectrum_at(Params(b, e1, e2), n_max).gap_ok
        except (NoBracket, GapViolation, NoConvergence) as exc:
            err = NoBracket(f"eps1={e1:g}: {exc}")
            err.partial = out
            raise err from exc
        if abs(r) > tol:
            err = NoBracket(f"eps1={e1:g}: root residual {r:.3e} above tolerance {tol:g}")
            err.partial = out
            raise err
        out.append(HopfCurveSample(float(e1), float(e2), float(asym), float(r), gap_ok))
    return out


def fitted_slope(samples: Sequence[HopfCurveSample], count: int = 2) -> float:
    """Slope of ``E2`` from a least-squares line through the ``count`` smallest-``eps1`` samples."""
    s = sorted(samples, key=lambda x: x.eps1)[:count]
    x = np.array([q.eps1 for q in s])
    y = np.array([q.e2_numeric for q in s])
    return float(np.polyfit(x, y, 1)[0])


def curve_csv(samples: Sequence[HopfCurveSample]) -> list[list]:
    return [[s.eps1, s.e2_numeric, s.e2_asymptotic, s.r_at_root, int(s.gap_ok)] for s in samples]


# -- paths ------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """A parameter path ``s -> (eps1(s), eps2(s))`` on ``[s_min, s_max]``."""

    func: Callable[[float], tuple[float, float]]
    s_min: float = 0.0
    s_max: float = 1.0
    s0_hint: float | None = None

    @classmethod
    def segment(cls, start, end, s0_hint: float | None = None) -> PathSpec:
        a = np.asarray(start, dtype=float)
        d = np.asarray(end, dtype=float) - a
        return cls(lambda s: tuple(a + s * d), 0.0, 1.0, s0_hint)

    @classmethod
    def from_samples(cls, points, s0_hint: float | None = None) -> PathSpec:
        """Piecewise-linear path through ``points``, parametrized on ``[0, 1]``."""
        pts = np.asarray(points, dtype=float)
        if len(pts) < 2:
            raise ValueError("need at least two path samples")
        steps = np.diff(pts, axis=0)
        if np.any(np.all(steps == 0, axis=1)):
            raise ValueError("path samples must be distinct")
        s = np.linspace(0.0, 1.0, len(pts))

        def func(t):
            return (float(np.interp(t, s, pts[:, 0])), float(np.interp(t, s, pts[:, 1])))

        return cls(func, 0.0, 1.0, s0_hint)

    def reversed(self) -> PathSpec:
        f, lo, hi = self.func, self.s_min, self.s_max
        hint = None if self.s0_hint is None else lo + hi - self.s0_hint
        return PathSpec(lambda s: f(lo + hi - s), lo, hi, hint)

    def __call__(self, s: float) -> tuple[float, float]:
        return self.func(s)


def _r_on_path(path: PathSpec, b: float, n_max: int):
    def g(s):
        e1, e2 = path(s)
        return r_numeric(Params(b, e1, e2), n_max)
    return g


def locate_crossing(path: PathSpec, b: float, s0: float | None = None, n_max: int = DEFAULT_N,
                    samples: int = 32, touch_tol: float = TOL_CRITICAL) -> float:
    """Coarse scan of ``r`` along the path, then bisection on the sign change nearest ``s0``.

    A path that touches the zero level without crossing it (``|r| <= touch_tol``
    at ``s0``) is accepted at ``s0``.
    """
    g = _r_on_path(path, b, n_max)
    hint = s0 if s0 is not None else path.s0_hint
    ss = np.linspace(path.s_min, path.s_max, samples)
    rs = np.array([g(s) for s in ss])
    flips = np.flatnonzero(np.sign(rs[:-1]) != np.sign(rs[1:]))
    if len(flips) == 0:
        if hint is not None and abs(g(hint)) <= touch_tol:
            return float(hint)
        raise NoCrossing("r keeps one sign along the path")
    if hint is None:
        k = flips[0]
    else:
        mids = 0.5 * (ss[flips] + ss[flips + 1])
        k = flips[np.argmin(np.abs(mids - hint))]
    s, _ = find_root(g, ss[k], ss[k + 1], ROOT_WIDTH * (path.s_max - path.s_min), rs[k], rs[k + 1])
    return float(s)


def transversality(path: PathSpec, b: float, s0: float | None = None, n_max: int = DEFAULT_N,
                   step: float | None = None) -> float:
    """``d/ds r(path(s))`` at the located crossing, by centered differences.

    Positive means ``r`` increases through zero along the path's orientation.
    """
    s_star = locate_crossing(path, b, s0, n_max)
    h = step if step is not None else 1e-4 * (path.s_max - path.s_min)
    g = _r_on_path(path, b, n_max)
    return (g(s_star + h) - g(s_star - h)) / (2 * h)


# -- local zero set at the origin ---------------------------------------------------


@dataclass(frozen=True)
class BranchDirections:
    """Directions (angles in ``[0, pi)``) of the zero lines of ``r`` through the origin."""

    angles: tuple[float, ...]
    radii: tuple[float, ...]
    raw: dict = field(repr=False, default_factory=dict)


def zero_branch_directions(b: float, radii: Sequence[float] = (0.02, 0.01, 0.005),
                           n_angles: int = 72, n_max: int = DEFAULT_N) -> BranchDirections:
    """Tangent directions of the zero set of ``r`` at ``eps = 0``.

    On each circle ``|eps| = rho`` the sign changes of ``r`` in the polar angle
    are located by bisection.  Opposite half-branches are averaged (which
    cancels the first-order bend) and the two smallest radii are Richardson
    extrapolated to ``rho -> 0``.
    """
    per_radius = {}
    for rho in radii:
        def g(phi, rho=rho):
            return r_numeric(Params(b, rho * math.cos(phi), rho * math.sin(phi)), n_max)

        phis = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
        vals = np.array([g(x) for x in phis])
        roots = []
        for k in range(n_angles):
            k2 = (k + 1) % n_angles
            if np.sign(vals[k]) != np.sign(vals[k2]):
                hi = phis[k2] if k2 else 2 * math.pi
                phi, _ = find_root(g, phis[k], hi, 1e-12, vals[k], vals[k2])
                roots.append(phi % (2 * math.pi))
        if len(roots) != 4:
            raise NoCrossing(f"expected 4 half-branches on radius {rho:g}, found {len(roots)}")
        per_radius[rho] = _pair_lines(roots)
    rs = sorted(radii)
    small, large = per_radius[rs[0]], per_radius[rs[1]]
    ratio = (rs[1] / rs[0]) ** 2
    # averaged half-branches deviate from the tangent by O(rho^2)
    angles = tuple(sorted((a_s + (a_s - _near(a_l, a_s)) / (ratio - 1)) % math.pi
                          for a_s, a_l in zip(small, _match(large, small))))
    return BranchDirections(angles, tuple(radii), per_radius)


def _wrap(d: float) -> float:
    """Angle difference folded into ``(-pi/2, pi/2]`` (lines are undirected)."""
    return (d + math.pi / 2) % math.pi - math.pi / 2


def _near(a: float, ref: float) -> float:
    return ref + _wrap(a - ref)


def _pair_lines(roots: list[float]) -> list[float]:
    """Average each half-branch with its antipodal partner; returns two line angles mod pi."""
    mod = sorted(x % math.pi for x in roots)
    # partners have nearly equal angle mod pi
    best = None
    for i in range(4):
        for j in range(i + 1, 4):
            rest = [k for k in range(4) if k not in (i, j)]
            cost = abs(_wrap(mod[i] - mod[j])) + abs(_wrap(mod[rest[0]] - mod[rest[1]]))
            if best is None or cost < best[0]:
                best = (cost, (i, j), tuple(rest))
    lines = []
    for i, j in (best[1], best[2]):
        lines.append((mod[i] + 0.5 * _wrap(mod[j] - mod[i])) % math.pi)
    return sorted(lines)


def _match(cands: list[float], refs: list[float]) -> list[float]:
    a, b = cands
    direct = abs(_wrap(a - refs[0])) + abs(_wrap(b - refs[1]))
    swapped = abs(_wrap(b - refs[0])) + abs(_wrap(a - refs[1]))
    return [a, b] if direct <= swapped else [b, a]


def direction_angle(v) -> float:
    """Angle of the undirected line spanned by ``v``, in ``[0, pi)``."""
    return math.atan2(v[1], v[0]) % math.pi


def angle_between_lines(a: float, c: float) -> float:
    return abs(_wrap(a - c))


def curve_table(samples: Sequence[HopfCurveSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps1", "E2_numeric", "E2_asymptotic", "residual", "gap_ok"])
    w.writerows(curve_csv(samples))
    return buf.getvalue()
