"""Time integration of the film equation on an invariant mass hyperplane.

Exponential time differencing: the constant-coefficient stiff part

    L v = -v' - b c* (v'' + v'''')

with ``c* = (min H)^3`` is integrated exactly in Fourier space and the
remainder ``N(h) = f(h) - L h`` is treated explicitly, either first order
(``"etd1"``) or with the Cox-Matthews second-order corrector (``"etdrk2"``).
Both keep every steady state of ``f`` a fixed point of the step.  The plain
integrating-factor Euler step (``"lawson"``) is kept for comparison; it moves
fixed points by ``O(dt)``.
``L`` and ``N`` vanish on mode 0, so the mean (the mass) is never written
and stays bitwise constant.

Internally a real field is carried as its nonnegative-mode coefficients
``c_0..c_N`` and transformed with real FFTs on the de-aliased grid.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUp
from .spectral import Params, SpectralField, grid_size, theta_grid
from .steady import SteadyState, solve_steady

OVERFLOW_GUARD = 1e6
SCHEMES = ("lawson", "etd1", "etdrk2")


class PositivityWarning(UserWarning):
    """Film height reached zero; the equation is no longer uniformly parabolic."""


def to_half(f: SpectralField) -> np.ndarray:
    """Coefficients ``c_0..c_N`` of a real field."""
    return np.array(f.coeffs[f.n_max:], dtype=complex)


def from_half(c: np.ndarray) -> SpectralField:
    full = np.concatenate([c[:0:-1].conj(), c])
    return SpectralField(full)


def l2_half(c: np.ndarray) -> float:
    """L2 norm of the real field with half-coefficients ``c``."""
    return float(np.sqrt(abs(c[0]) ** 2 + 2.0 * np.sum(np.abs(c[1:]) ** 2)))


def _phi(z: np.ndarray):
    """``phi1 = (e^z - 1)/z`` and ``phi2 = (e^z - 1 - z)/z^2``, series near 0."""
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    ez = np.exp(zs)
    p1 = np.where(small, 1 + z / 2 + z ** 2 / 6 + z ** 3 / 24 + z ** 4 / 120, (ez - 1) / zs)
    p2 = np.where(small, 0.5 + z / 6 + z ** 2 / 24 + z ** 3 / 120 + z ** 4 / 720,
                  (ez - 1 - zs) / zs ** 2)
    return p1, p2


class Integrator:
    """Exponential-integrator stepper for fixed parameters, truncation and time step."""

    def __init__(self, p: Params, n_max: int, dt: float, c_star: float, scheme: str = "etdrk2"):
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
        self.scheme = scheme
        self.p = p
        self.n_max = n_max
        self.dt = dt
        self.c_star = c_star
        self.m = grid_size(n_max)
        k = np.arange(n_max + 1, dtype=float)
        self.ik = 1j * k
        self.d13 = self.ik + self.ik ** 3
        self.L = -self.ik - p.b * c_star * (k ** 4 - k ** 2)
        z = self.L * dt
        self.E = np.exp(z)
        p1, p2 = _phi(z)
        self.P1 = dt * p1
        self.P2 = dt * p2
        th = theta_grid(self.m)
        self.cos3 = p.eps1 * np.cos(th) / 3.0
        self.sin2 = p.eps2 * np.sin(th)
        self._pad = np.zeros(self.m // 2 + 1, dtype=complex)
        self._pad3 = np.zeros((3, self.m // 2 + 1), dtype=complex)
        self._ops = np.stack([np.ones(n_max + 1), self.d13, self.ik])

    def _grid(self, c: np.ndarray) -> np.ndarray:
        pad = self._pad
        pad[: self.n_max + 1] = c
        return np.fft.irfft(pad, n=self.m, norm="forward")

    def flux(self, c: np.ndarray) -> np.ndarray:
        """Half-coefficients of the flux ``f1(h)``."""
        pad = self._pad3
        pad[:, : self.n_max + 1] = self._ops * c
        h, s, h1 = np.fft.irfft(pad, n=self.m, norm="forward")
        cube = h * h * h
        f1 = h + cube * (self.p.b * s + self.sin2 * h1 - self.cos3)
        return np.fft.rfft(f1, norm="forward")[: self.n_max + 1]

    def rhs(self, c: np.ndarray) -> np.ndarray:
        return -self.ik * self.flux(c)

    def remainder(self, c: np.ndarray) -> np.ndarray:
        nl = self.rhs(c) - self.L * c
        nl[0] = 0.0
        return nl

    def step(self, c: np.ndarray) -> np.ndarray:
        n0 = self.remainder(c)
        a = self.E * c + self.P1 * n0
        if self.scheme == "lawson":
            return self.E * (c + self.dt * n0)
        if self.scheme == "etd1":
            return a
        return a + self.P2 * (self.remainder(a) - n0)

    def min_height(self, c: np.ndarray) -> float:
        return float(self._grid(c).min())


def rhs(h: SpectralField, p: Params) -> SpectralField:
    """``f(h) = -d/dtheta f1(h)``, alias-free, for a real field ``h``."""
    integ = Integrator(p, h.n_max, 1.0, 0.0)
    return from_half(integ.rhs(to_half(h)))


def step(h: SpectralField, dt: float, p: Params, c_star: float | None = None,
         scheme: str = "etdrk2") -> SpectralField:
    """One time step.  ``c_star`` defaults to ``(min h)^3``."""
    if c_star is None:
        c_star = float(h.real_grid().min()) ** 3
    integ = Integrator(p, h.n_max, dt, c_star, scheme)
    c = to_half(h)
    out = integ.step(c)
    if not np.all(np.isfinite(out)) or np.abs(out).max() > OVERFLOW_GUARD:
        raise BlowUp("coefficient overflow", dt)
    if integ.min_height(out) <= 0:
        warnings.warn("film height reached zero", PositivityWarning, stacklevel=2)
    return from_half(out)


@dataclass(frozen=True)
class Cycle:
    period: float
    amplitude: float
    jitter: float
    crossings: int


@dataclass(eq=False)
class TrajectorySummary:
    times: np.ndarray
    mass: np.ndarray
    dist: np.ndarray
    signal: np.ndarray
    measured_rate: float
    cycle: Cycle | None
    final: SpectralField = field(repr=False)
    params: Params | None = None
    dt: float = 0.0

    def rows(self) -> list[list]:
        return [[float(t), float(m), float(d), float(s)]
                for t, m, d, s in zip(self.times, self.mass, self.dist, self.signal)]

    def summary(self) -> dict:
        return {
            "params": self.params.as_dict() if self.params else None,
            "dt": self.dt,
            "t_end": float(self.times[-1]),
            "samples": len(self.times),
            "mass_drift": float(np.max(np.abs(self.mass - self.mass[0]))),
            "dist_initial": float(self.dist[0]),
            "dist_final": float(self.dist[-1]),
            "measured_rate": self.measured_rate,
            "cycle": None if self.cycle is None else self.cycle.__dict__,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary())

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mass", "dist", "signal"])
        for row in self.rows():
            w.writerow([repr(x) for x in row])
        return buf.getvalue()


def fit_rate(times: np.ndarray, dist: np.ndarray, window: tuple[float, float] | None = None) -> float:
    """Least-squares slope of ``log dist`` over ``window`` (default: final half)."""
    t = np.asarray(times)
    d = np.asarray(dist)
    if window is None:
        window = (0.5 * (t[0] + t[-1]), t[-1])
    sel = (t >= window[0]) & (t <= window[1]) & (d > 0)
    if sel.sum() < 2:
        return float("nan")
    return float(np.polyfit(t[sel], np.log(d[sel]), 1)[0])


def detect_cycle(times, signal, window: tuple[float, float] | None = None,
                 jitter_tol: float = 0.05, amplitude_tol: float = 0.05) -> Cycle | None:
    """Period and amplitude of a sustained oscillation, or None.

    The signal mean over ``window`` is removed; the period is the mean
    spacing of upward zero crossings and the amplitude half the peak-to-peak
    range.  Returns None when fewer than three crossings exist, when the
    relative spread of crossing spacings exceeds ``jitter_tol``, or when the
    per-cycle amplitude drifts by more than ``amplitude_tol`` across the
    window (a decaying or still-growing transient is not a cycle).
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(signal, dtype=float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, s = t[sel], s[sel]
    if len(t) < 4:
        return None
    s = s - s.mean()
    up = np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0))
    if len(up) < 3:
        return None
    tc = t[up] - s[up] * (t[up + 1] - t[up]) / (s[up + 1] - s[up])
    gaps = np.diff(tc)
    period = float(gaps.mean())
    jitter = float(gaps.std() / period) if len(gaps) > 1 else 0.0
    if jitter > jitter_tol:
        return None
    amps = np.array([0.5 * np.ptp(s[up[i]:up[i + 1] + 1]) for i in range(len(up) - 1)])
    if amps[0] <= 0 or abs(amps[-1] / amps[0] - 1.0) > amplitude_tol:
        return None
    return Cycle(period, float(0.5 * np.ptp(s[up[0]:up[-1] + 1])), jitter, len(up))


def perturbed_state(s: SteadyState, amplitude: float, phase: float = 0.0) -> SpectralField:
    """``H + amplitude cos(theta - phase)``; the perturbation has zero mean."""
    n_max = s.n_max
    bump = SpectralField.from_modes(
        {1: 0.5 * amplitude * np.exp(-1j * phase), -1: 0.5 * amplitude * np.exp(1j * phase)}, n_max
    )
    return s.H + bump


def evolve(
    h0: SpectralField,
    p: Params,
    t_end: float,
    dt: float = 1e-3,
    steady: SteadyState | None = None,
    sample_dt: float = 0.05,
    t0: float = 0.0,
    fit_window: tuple[float, float] | None = None,
    cycle_window: tuple[float, float] | None = None,
    max_periods: int | None = None,
    scheme: str = "etdrk2",
) -> TrajectorySummary:
    """Integrate from ``h0`` at time ``t0`` to ``t_end`` and summarize.

    Diagnostics are recorded every ``sample_dt``: mass ``(h|1)``, distance
    ``||h - H||`` to the steady state and the critical-mode signal
    ``Re (h - H | e^{-i theta})``.  With ``max_periods`` the run stops once
    that many upward zero crossings of the signal have been seen.

    Raises :class:`BlowUp` carrying the failure time.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    if not h0.is_real():
        raise ValueError("initial state must be real-valued")
    n_max = h0.n_max
    if steady is None:
        steady = solve_steady(p, n_max=n_max)
    H = to_half(steady.H.resized(n_max))
    integ = Integrator(p, n_max, dt, steady.min_height ** 3, scheme)

    every = max(1, int(round(sample_dt / dt)))
    n_steps = int(round((t_end - t0) / dt))
    c = to_half(h0)

    times, mass, dist, sig = [], [], [], []
    crossings = 0

    def record(k, c):
        u = c - H
        times.append(t0 + k * dt)
        mass.append(c[0].real)
        dist.append(l2_half(u))
        sig.append(u[1].real)

    record(0, c)
    for k in range(1, n_steps + 1):
        c = integ.step(c)
        if k % every == 0 or k == n_steps:
            if not np.all(np.isfinite(c)) or np.abs(c).max() > OVERFLOW_GUARD:
                raise BlowUp(f"coefficient overflow at t={t0 + k * dt:.6g}", t0 + k * dt)
            if integ.min_height(c) <= 0:
                warnings.warn(f"film height reached zero at t={t0 + k * dt:.6g}", PositivityWarning,
                              stacklevel=2)
            record(k, c)
            if max_periods is not None and len(sig) > 1 and sig[-2] < 0 <= sig[-1]:
                crossings += 1
                if crossings >= max_periods:
                    break

    tt = np.array(times)
    dd = np.array(dist)
    ss = np.array(sig)
    rate = fit_rate(tt, dd, fit_window)
    if cycle_window is None:
        cycle_window = (0.5 * (tt[0] + tt[-1]), tt[-1])
    cyc = detect_cycle(tt, ss, cycle_window)
    return TrajectorySummary(tt, np.array(mass), dd, ss, rate, cyc, from_half(c), p, dt)
