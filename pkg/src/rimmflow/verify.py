"""Acceptance checks shared by ``rimmflow verify`` and the test suite.

Each check returns a :class:`CheckResult`.  Expensive measurements (difference
quotients, traced curves, branch angles) are cached so that a check against
the published closed forms and its counterpart against the rederived forms
reuse one computation.
"""

from __future__ import annotations

import functools
import json
import math
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .errors import RimmflowError
from .evolve import Integrator, detect_cycle, evolve, fit_rate, from_half, perturbed_state, to_half
from .hopf import (
    Stability,
    angle_between_lines,
    classify,
    direction_angle,
    fitted_slope,
    r_numeric,
    trace_E2,
    zero_branch_directions,
)
from .linear import assemble_A, lambda_plus, omega, spectrum
from .perturbation import e2_slope, hessian_model, lambda_coeffs
from .spectral import Params, modes
from .steady import mean_mass, solve_steady, taylor_steady

BS = (0.5, 1.0, 2.0)
FD_STEP = 1e-3
TRACE_GRID = (0.0025, 0.005, 0.01, 0.02)


@dataclass
class CheckResult:
    id: str
    title: str
    passed: bool
    detail: str
    elapsed: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{self.id:<4} {mark}  {self.title}: {self.detail} [{self.elapsed:.1f}s]"


def _timed(cid: str, title: str):
    def wrap(fn: Callable[[], tuple[bool, str]]):
        @functools.wraps(fn)
        def run() -> CheckResult:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except RimmflowError as exc:
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return CheckResult(cid, title, bool(ok), detail, time.perf_counter() - t0)
        run.check_id = cid
        return run
    return wrap


def _rel(x: float, ref: float) -> float:
    return abs(x - ref) / abs(ref)


# -- cached measurements -------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def lambda_differences(b: float, h: float = FD_STEP) -> dict:
    """Centered first and second difference quotients of ``lambda+`` at ``eps = 0``."""
    lam = {}
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            lam[i, j] = lambda_plus(Params(b, i * h, j * h))
    return {
        "d10": (lam[1, 0] - lam[-1, 0]) / (2 * h),
        "d01": (lam[0, 1] - lam[0, -1]) / (2 * h),
        # lambda = i + l20 e1^2 + ..., so l20 is half the second derivative
        "l20": (lam[1, 0] - 2 * lam[0, 0] + lam[-1, 0]) / (2 * h * h),
        "l02": (lam[0, 1] - 2 * lam[0, 0] + lam[0, -1]) / (2 * h * h),
        "l11": (lam[1, 1] - lam[1, -1] - lam[-1, 1] + lam[-1, -1]) / (4 * h * h),
    }


def hessian_numeric(b: float, h: float = FD_STEP) -> np.ndarray:
    d = lambda_differences(b, h)
    return np.array([[2 * d["l20"].real, d["l11"].real], [d["l11"].real, 2 * d["l02"].real]])


@functools.lru_cache(maxsize=None)
def traced_curve(b: float = 1.0, grid: tuple = TRACE_GRID):
    return tuple(trace_E2(b, list(grid)))


@functools.lru_cache(maxsize=None)
def branch_angles(b: float) -> tuple[float, ...]:
    return zero_branch_directions(b).angles


@functools.lru_cache(maxsize=None)
def demo_run(eps1: float, eps2: float, amplitude: float, t_end: float, dt: float = 1e-3,
             b: float = 1.0):
    p = Params(b, eps1, eps2)
    s = solve_steady(p)
    return evolve(perturbed_state(s, amplitude, 0.3), p, t_end, dt, steady=s)


def _coeff_table(b: float, variant: str) -> tuple[float, str]:
    d = lambda_differences(b)
    ref = lambda_coeffs(b, variant)
    worst, parts = 0.0, []
    for name in ("l20", "l11", "l02"):
        z, zr = d[name], getattr(ref, name)
        e = max(_rel(z.real, zr.real), _rel(z.imag, zr.imag))
        worst = max(worst, e)
        parts.append(f"{name}={z.real:+.5f}{z.imag:+.5f}i (ref {zr.real:+.5f}{zr.imag:+.5f}i)")
    return worst, "; ".join(parts)


# -- acceptance checks ---------------------------------------------------------------


@_timed("A1", "unperturbed spectrum")
def check_a1():
    t0 = time.perf_counter()
    worst, lead = 0.0, 0.0
    for b in BS:
        s = solve_steady(Params(b))
        A = assemble_A(s)
        n = modes(s.n_max)
        n = n[n != 0]
        worst = max(worst, float(np.abs(A - np.diag(omega(n, b))).max()))
        rep = spectrum(s)
        lead = max(lead, abs(rep.lambda_plus - 1j), abs(rep.lambda_minus + 1j))
    el = time.perf_counter() - t0
    ok = worst <= 1e-12 and lead <= 1e-12 and el < 1.0
    return ok, f"max |A - diag(omega)| = {worst:.1e}, |lambda+- -+ i| = {lead:.1e}, {el:.2f}s"


@_timed("A2", "steady-state expansion")
def check_a2():
    ts = (0.08, 0.04, 0.02)
    errs, merrs = [], []
    for t in ts:
        p = Params(1.0, t, t)
        s = solve_steady(p)
        errs.append((s.H - taylor_steady(p, s.n_max)).l2_norm())
        merrs.append(abs(mean_mass(s) - (1 + t * t / 6 + t * t / 6)))
    norms = [math.hypot(t, t) for t in ts]
    ratios = [errs[i] / errs[i + 1] for i in range(len(ts) - 1)]
    scaled = [e / n ** 3 for e, n in zip(errs, norms)]
    mscaled = [e / n ** 3 for e, n in zip(merrs, norms)]
    ok = all(6 <= r <= 10 for r in ratios) and max(mscaled) <= mscaled[0] * (1 + 1e-9)
    return ok, (f"error ratios {', '.join(f'{r:.2f}' for r in ratios)}; "
                f"err/|eps|^3 {', '.join(f'{x:.3g}' for x in scaled)}; "
                f"mass remainder/|eps|^3 {', '.join(f'{x:.3g}' for x in mscaled)}")


def _a3(variant: str):
    worst, details, first = 0.0, [], 0.0
    for b in BS:
        w, txt = _coeff_table(b, variant)
        worst = max(worst, w)
        d = lambda_differences(b)
        first = max(first, abs(d["d10"]) / FD_STEP ** 2, abs(d["d01"]) / FD_STEP ** 2)
        details.append(f"b={b:g}: {txt}")
    ok = worst <= 0.01 and first <= 10.0
    return ok, f"worst rel err {worst:.2e}; first diff/step^2 <= {first:.2g}; " + " | ".join(details)


@_timed("A3", "eigenvalue coefficients (closed forms)")
def check_a3():
    return _a3("published")


def _a4(variant: str, b: float = 1.0):
    H = hessian_numeric(b)
    m = hessian_model(b, variant)
    ref = m.hessian()
    errs = [_rel(H[0, 0], ref[0, 0]), _rel(H[0, 1], ref[0, 1]), _rel(H[1, 1], ref[1, 1])]
    det = float(np.linalg.det(H))
    ref_det = float(np.linalg.det(ref))
    ok = max(errs) <= 0.01 and det < 0 and _rel(det, ref_det) <= 0.10
    return ok, (f"b={b:g} Hessian ({H[0,0]:.5g}, {H[0,1]:.5g}, {H[1,1]:.5g}) vs "
                f"({ref[0,0]:.5g}, {ref[0,1]:.5g}, {ref[1,1]:.5g}), rel errs "
                f"{', '.join(f'{e:.1e}' for e in errs)}; det {det:.5g} vs {ref_det:.5g}")


@_timed("A4", "quadratic form of the critical real part")
def check_a4():
    return _a4("published")


def _flips(curve) -> tuple[bool, str]:
    bad = []
    for s in curve:
        lo = classify(Params(1.0, s.eps1, s.e2_numeric - 1e-3))
        hi = classify(Params(1.0, s.eps1, s.e2_numeric + 1e-3))
        if not (lo is Stability.STABLE and hi is Stability.UNSTABLE):
            bad.append(s.eps1)
    return not bad, "all flip" if not bad else f"no flip at eps1={bad}"


def _a5(variant: str):
    curve = traced_curve()
    e2 = [s.e2_numeric for s in curve]
    increasing = all(x < y for x, y in zip(e2, e2[1:]))
    slope = fitted_slope(curve)
    ref = e2_slope(1.0, variant)
    flip_ok, flip_txt = _flips(curve)
    ok = increasing and _rel(slope, ref) <= 0.02 and flip_ok
    return ok, (f"E2 = {', '.join(f'{x:.6g}' for x in e2)} (increasing={increasing}); "
                f"slope {slope:.5f} vs {ref:.5f}; Stable->Unstable {flip_txt}")


@_timed("A5", "Hopf curve (closed-form slope)")
def check_a5():
    return _a5("published")


def _a6(variant: str):
    worst, parts = 0.0, []
    for b in BS:
        measured = branch_angles(b)
        m = hessian_model(b, variant)
        ref = sorted((direction_angle(m.tangent_minus), direction_angle(m.tangent_plus)))
        errs = [min(angle_between_lines(a, r) for a in measured) for r in ref]
        worst = max(worst, max(errs))
        parts.append(f"b={b:g}: measured {', '.join(f'{math.degrees(a):.3f}' for a in measured)} deg, "
                     f"predicted {', '.join(f'{math.degrees(a):.3f}' for a in ref)} deg")
    return math.degrees(worst) <= 2.0, f"worst {math.degrees(worst):.3f} deg; " + " | ".join(parts)


@_timed("A6", "branch tangents at the origin (closed forms)")
def check_a6():
    return _a6("published")


@_timed("A7", "mass conservation")
def check_a7():
    drifts = []
    for e2 in (0.02, 0.10):
        amp = 1e-3 if e2 == 0.02 else 1e-5
        tr = demo_run(0.01, e2, amp, 50.0)
        drifts.append(float(np.max(np.abs(tr.mass - tr.mass[0]))))
    return max(drifts) < 1e-10, f"max drift {drifts[0]:.1e} (eps2=0.02), {drifts[1]:.1e} (eps2=0.10)"


@_timed("A8", "decay at eps=(0.01, 0.02), b=1")
def check_a8():
    t0 = time.perf_counter()
    p = Params(1.0, 0.01, 0.02)
    r = r_numeric(p)
    tr = demo_run(0.01, 0.02, 1e-3, 40.0)
    el = time.perf_counter() - t0
    rate_ok = _rel(tr.measured_rate, r) <= 0.10
    ok = r < 0 and rate_ok and el < 20
    return ok, (f"r_numeric = {r:.4e} ({'stable' if r < 0 else 'not stable'}); "
                f"fitted rate {tr.measured_rate:.4e} (ratio {tr.measured_rate / r:.4f}); {el:.1f}s")


A9_DT = 2e-3


@_timed("A9", "growth and cycle beyond the Hopf curve")
def check_a9():
    t0 = time.perf_counter()
    e2 = trace_E2(1.0, [0.01])[0].e2_numeric + 0.01
    p = Params(1.0, 0.01, e2)
    s = solve_steady(p)
    lam = spectrum(s).lambda_plus
    tr = evolve(perturbed_state(s, 1e-5, 0.3), p, 400.0, A9_DT, steady=s)
    rate = fit_rate(tr.times, tr.dist, (10.0, 100.0))
    bounded = bool(np.all(np.isfinite(tr.dist)) and tr.dist.max() < 1.0)
    period_ref = 2 * math.pi / lam.imag
    cyc = detect_cycle(tr.times, tr.signal, (400.0 - 20 * period_ref, 400.0))
    el = time.perf_counter() - t0
    ok = (lam.real > 0 and _rel(rate, lam.real) <= 0.10 and bounded and cyc is not None
          and _rel(cyc.period, period_ref) <= 0.05 and cyc.jitter < 0.02 and el < 60)
    cyc_txt = "none" if cyc is None else f"period {cyc.period:.5f} jitter {cyc.jitter:.1e}"
    return ok, (f"eps2={e2:.6f}, r={lam.real:.4e}, fitted {rate:.4e}; bounded={bounded}; "
                f"{cyc_txt} vs 2pi/Im = {period_ref:.5f}; {el:.1f}s")


@_timed("A10", "linear propagator")
def check_a10(n_max: int = 8, amplitude: float = 1e-6, seed: int = 0):
    p = Params(1.0, 0.01, 0.02)
    s = solve_steady(p, n_max=n_max)
    A = assemble_A(s)
    rng = np.random.default_rng(seed)
    k = np.arange(1, n_max + 1)
    v = np.zeros(n_max + 1, dtype=complex)
    v[1:] = (rng.normal(size=n_max) + 1j * rng.normal(size=n_max)) * np.exp(-k)
    integ = Integrator(p, n_max, 1e-3, s.min_height ** 3)
    base = to_half(s.H)
    pert = base + amplitude * v
    for _ in range(1000):
        base = integ.step(base)
        pert = integ.step(pert)
    d = from_half((pert - base) / amplitude).coeffs
    vf = from_half(v).coeffs
    keep = modes(n_max) != 0
    ref = expm(A) @ vf[keep]
    err = float(np.linalg.norm(d[keep] - ref) / np.linalg.norm(ref))
    return err <= 1e-6, f"relative error {err:.2e} (N={n_max}, amplitude {amplitude:g}, t=1)"


# -- supplementary checks: rederived closed forms and a decaying run -----------------


@_timed("S3", "eigenvalue coefficients (rederived)")
def check_s3():
    return _a3("rederived")


@_timed("S4", "quadratic form (rederived)")
def check_s4():
    return _a4("rederived")


@_timed("S5", "Hopf curve slope (rederived)")
def check_s5():
    return _a5("rederived")


@_timed("S6", "branch tangents (rederived)")
def check_s6():
    return _a6("rederived")


@_timed("S8", "decay at a stable point, b=0.2, eps=(0.1, 0)")
def check_s8():
    p = Params(0.2, 0.1, 0.0)
    r = r_numeric(p)
    tr = demo_run(0.1, 0.0, 1e-3, 80.0, dt=2e-3, b=0.2)
    ok = r < 0 and _rel(tr.measured_rate, r) <= 0.10 and tr.cycle is None
    return ok, (f"r_numeric = {r:.4e}; fitted {tr.measured_rate:.4e} "
                f"(ratio {tr.measured_rate / r:.4f}); cycle={tr.cycle}")


# -- golden file ---------------------------------------------------------------------


def golden_values() -> dict:
    """Deterministic reference quantities stored in ``golden.json``."""
    out: dict = {"steady": {}, "lambda_plus": {}, "model": {}}
    for e1, e2 in ((0.05, 0.05), (0.01, 0.02)):
        s = solve_steady(Params(1.0, e1, e2))
        out["steady"][f"b1_{e1:g}_{e2:g}"] = {"mean_mass": mean_mass(s), "min_height": s.min_height}
    for e1, e2 in ((0.0, 0.0), (0.01, 0.02), (0.01, 0.1)):
        lam = lambda_plus(Params(1.0, e1, e2))
        out["lambda_plus"][f"b1_{e1:g}_{e2:g}"] = {"re": lam.real, "im": lam.imag}
    for variant in ("published", "rederived"):
        m = hessian_model(1.0, variant)
        out["model"][variant] = {"hessian_det": m.hessian_det, "e2_slope": m.e2_slope}
    return out


def default_golden_path():
    return resources.files("rimmflow").joinpath("golden.json")


def json_diff(actual, expected, path: str = "$", rtol: float = 1e-8, atol: float = 1e-14) -> str | None:
    """JSON path of the first mismatch, or None."""
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return path
        for key in sorted(set(expected) | set(actual)):
            if key not in expected or key not in actual:
                return f"{path}.{key}"
            d = json_diff(actual[key], expected[key], f"{path}.{key}", rtol, atol)
            if d:
                return d
        return None
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        return None if abs(actual - expected) <= atol + rtol * abs(expected) else path
    return None if actual == expected else path


def check_golden(path=None) -> CheckResult:
    t0 = time.perf_counter()
    src = default_golden_path() if path is None else path
    try:
        with open(src) as fh:
            expected = json.load(fh)
    except (OSError, ValueError) as exc:
        return CheckResult("G1", "golden values", False, f"cannot read {src}: {exc}",
                           time.perf_counter() - t0)
    diff = json_diff(golden_values(), expected)
    detail = "match" if diff is None else f"mismatch at {diff}"
    return CheckResult("G1", "golden values", diff is None, detail, time.perf_counter() - t0)


ACCEPTANCE = (check_a1, check_a2, check_a3, check_a4, check_a5, check_a6, check_a7, check_a8,
              check_a9, check_a10)
SUPPLEMENTARY = (check_s3, check_s4, check_s5, check_s6, check_s8)
QUICK = (check_a1, check_a2, check_a10, check_s3, check_s4)


def run_checks(quick: bool = False, golden=None, log: Callable[[str], None] | None = None) -> list[CheckResult]:
    checks = QUICK if quick else ACCEPTANCE + SUPPLEMENTARY
    results = []
    for check in checks:
        res = check()
        results.append(res)
        if log:
            log(res.line())
    res = check_golden(golden)
    results.append(res)
    if log:
        log(res.line())
    return results
