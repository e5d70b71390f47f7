"""Truncated Fourier representation of 2pi-periodic functions.

A field is stored densely as complex coefficients ``c_n`` for ``n = -N..N``
with ``f(theta) = sum_n c_n exp(i n theta)``.  Under the inner product
``(f|g) = 1/2pi int f conj(g)`` the exponentials are orthonormal, so every
inner product and L2 norm is a plain coefficient sum.

Products are evaluated pseudospectrally on a zero-padded grid large enough
that the quartic nonlinearities of the film equation (with one extra
trigonometric factor) do not alias back into the retained band.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

REAL_TOL = 1e-12


def grid_size(n_max: int) -> int:
    """Number of collocation points used for products at truncation ``n_max``.

    Smallest power of two that is at least ``4N + 2`` and large enough
    (``> 5N + 1``) that products of four band-``N`` fields times
    ``cos``/``sin`` fold back only outside ``[-N, N]``.
    """
    need = max(4 * n_max + 2, 5 * n_max + 2)
    m = 1
    while m < need:
        m *= 2
    return m


def theta_grid(m: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(m) / m


def modes(n_max: int) -> np.ndarray:
    return np.arange(-n_max, n_max + 1)


def coeffs_to_grid(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Evaluate ``sum_n c_n e^{in theta_j}`` on ``m`` equispaced points."""
    n_max = (len(coeffs) - 1) // 2
    buf = np.zeros(m, dtype=complex)
    # coarse grids fold aliased modes onto one slot, so accumulate
    np.add.at(buf, modes(n_max) % m, coeffs)
    return np.fft.ifft(buf, norm="forward")


def grid_to_coeffs(values: np.ndarray, n_max: int) -> np.ndarray:
    """Project grid samples onto modes ``-n_max..n_max`` (exact for band-limited data)."""
    m = len(values)
    spec = np.fft.fft(values, norm="forward")
    return spec[modes(n_max) % m]


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable truncated Fourier series on the circle.

    ``coeffs[k]`` holds the coefficient of ``exp(i n theta)`` with
    ``n = k - n_max``.
    """

    coeffs: np.ndarray
    mean_zero: bool = False
    n_max: int = field(init=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) % 2 != 1:
            raise ValueError("coefficient array must be 1-D with odd length 2N+1")
        n_max = (len(c) - 1) // 2
        if self.mean_zero:
            c[n_max] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "n_max", n_max)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, n_max: int) -> SpectralField:
        return cls(np.zeros(2 * n_max + 1, dtype=complex))

    @classmethod
    def constant(cls, value: complex, n_max: int) -> SpectralField:
        return cls.from_modes({0: value}, n_max)

    @classmethod
    def from_modes(cls, amplitudes: Mapping[int, complex], n_max: int) -> SpectralField:
        c = np.zeros(2 * n_max + 1, dtype=complex)
        for n, a in amplitudes.items():
            if abs(n) > n_max:
                raise ValueError(f"mode {n} outside truncation N={n_max}")
            c[n + n_max] += a
        return cls(c)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], n_max: int) -> SpectralField:
        """Interpolate ``func`` on the product grid and keep modes ``|n| <= n_max``."""
        th = theta_grid(grid_size(n_max))
        return cls(grid_to_coeffs(np.asarray(func(th), dtype=complex), n_max))

    @classmethod
    def from_grid(cls, values: np.ndarray, n_max: int) -> SpectralField:
        return cls(grid_to_coeffs(np.asarray(values, dtype=complex), n_max))

    # -- access ---------------------------------------------------------------

    @property
    def modes(self) -> np.ndarray:
        return modes(self.n_max)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0j
        return complex(self.coeffs[n + self.n_max])

    def grid(self, m: int | None = None) -> np.ndarray:
        return coeffs_to_grid(self.coeffs, m or grid_size(self.n_max))

    def real_grid(self, m: int | None = None) -> np.ndarray:
        return self.grid(m).real

    def imag_residue(self) -> float:
        """``max_n |c_{-n} - conj(c_n)|``; zero for a real-valued field."""
        return float(np.max(np.abs(self.coeffs - self.coeffs[::-1].conj())))

    def is_real(self, tol: float = REAL_TOL) -> bool:
        return self.imag_residue() <= tol

    def resized(self, n_max: int) -> SpectralField:
        """Truncate or zero-extend to a new ``n_max``."""
        out = np.zeros(2 * n_max + 1, dtype=complex)
        k = min(n_max, self.n_max)
        out[n_max - k:n_max + k + 1] = self.coeffs[self.n_max - k:self.n_max + k + 1]
        return SpectralField(out, mean_zero=self.mean_zero)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def mean(self) -> complex:
        return complex(self.coeffs[self.n_max])

    # -- arithmetic -----------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, SpectralField):
            n = max(self.n_max, other.n_max)
            return SpectralField(op(self.resized(n).coeffs, other.resized(n).coeffs))
        return NotImplemented

    def __add__(self, other):
        if np.isscalar(other):
            return self + SpectralField.constant(other, self.n_max)
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            return self - SpectralField.constant(other, self.n_max)
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return SpectralField(-self.coeffs, mean_zero=self.mean_zero)

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            return product(self, other)
        if np.isscalar(other):
            return SpectralField(self.coeffs * other, mean_zero=self.mean_zero)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(n_max={self.n_max}, mean_zero={self.mean_zero})"

    # -- serialization --------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(field_record(self))

    @classmethod
    def from_json(cls, text: str) -> SpectralField:
        return field_from_record(json.loads(text))


def field_record(f: SpectralField) -> dict:
    """JSON-ready record ``{n_max, re, im}`` ordered ``n = -N..N``."""
    return {
        "n_max": f.n_max,
        "re": [float(x) for x in f.coeffs.real],
        "im": [float(x) for x in f.coeffs.imag],
    }


def field_from_record(rec: Mapping) -> SpectralField:
    re = np.asarray(rec["re"], dtype=float)
    im = np.asarray(rec["im"], dtype=float)
    if len(re) != 2 * int(rec["n_max"]) + 1 or len(im) != len(re):
        raise ValueError("field record length does not match n_max")
    return SpectralField(re + 1j * im)


def field_csv(f: SpectralField, name: str = "f") -> str:
    """Grid samples ``(theta, Re f)`` on the product grid, as CSV text."""
    m = grid_size(f.n_max)
    th = theta_grid(m)
    vals = f.grid(m)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if f.is_real():
        w.writerow(["theta", name])
        for t, v in zip(th, vals.real):
            w.writerow([repr(float(t)), repr(float(v))])
    else:
        w.writerow(["theta", f"{name}_re", f"{name}_im"])
        for t, v in zip(th, vals):
            w.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


# -- operations -----------------------------------------------------------------


def _common(f: SpectralField, g: SpectralField):
    n = max(f.n_max, g.n_max)
    return f.resized(n).coeffs, g.resized(n).coeffs


def inner(f: SpectralField, g: SpectralField) -> complex:
    """``(f|g) = 1/2pi int f conj(g) dtheta``; shorter field is zero-extended."""
    a, b = _common(f, g)
    return complex(np.sum(a * b.conj()))


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    return SpectralField((1j * f.modes) ** order * f.coeffs, mean_zero=f.mean_zero)


def b_symbol(n: np.ndarray, b: float) -> np.ndarray:
    """Fourier symbol of ``B = b(d/dtheta + d^3/dtheta^3)``."""
    n = np.asarray(n, dtype=float)
    return 1j * b * n * (1.0 - n * n)


def apply_B(f: SpectralField, b: float) -> SpectralField:
    return SpectralField(b_symbol(f.modes, b) * f.coeffs, mean_zero=f.mean_zero)


def apply_G_inv(f: SpectralField, b: float) -> SpectralField:
    """Inverse of ``G = B + I``.  The symbol ``1 + i x`` has modulus >= 1."""
    return SpectralField(f.coeffs / (1.0 + b_symbol(f.modes, b)), mean_zero=f.mean_zero)


def product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Alias-free pointwise product, truncated to the larger of the two bands."""
    a, b = _common(f, g)
    n_max = (len(a) - 1) // 2
    m = grid_size(n_max)
    return SpectralField(grid_to_coeffs(coeffs_to_grid(a, m) * coeffs_to_grid(b, m), n_max))


def sobolev_norm(f: SpectralField, s: int) -> float:
    """``(sum_n |c_n|^2 (n^{2s} + 1))^{1/2}``."""
    if s < 0:
        raise ValueError("Sobolev index must be nonnegative")
    n = f.modes.astype(float)
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * (n ** (2 * s) + 1.0))))


def project_mean_zero(f: SpectralField) -> SpectralField:
    return SpectralField(f.coeffs, mean_zero=True)


def multiplication_matrix(values: np.ndarray, n_max: int) -> np.ndarray:
    """Galerkin matrix of ``v -> P_N[a v]`` for grid samples ``a`` of a coefficient function.

    Entry ``[m, n]`` is the Fourier coefficient ``a_{m-n}``; exact when ``a``
    is band-limited to ``len(values) - 2N - 1``.
    """
    m = len(values)
    spec = np.fft.fft(values, norm="forward")
    idx = modes(n_max)
    return spec[(idx[:, None] - idx[None, :]) % m]


@dataclass(frozen=True)
class Params:
    """Equation parameters: surface tension ``b`` and the small pair ``(eps1, eps2)``."""

    b: float
    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b}")

    @property
    def eps(self) -> tuple[float, float]:
        return (self.eps1, self.eps2)

    def with_eps(self, eps1: float, eps2: float) -> Params:
        return Params(self.b, eps1, eps2)

    def as_dict(self) -> dict:
        return {"b": self.b, "eps1": self.eps1, "eps2": self.eps2}


def rescale_physical(beta: float, gamma: float, delta: float) -> Params:
    """Map physical ``(beta, gamma, delta)`` to ``(b, eps1, eps2) = (beta d^3/3, d^2, gamma d^3/3)``."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    d3 = delta ** 3
    return Params(b=beta * d3 / 3.0, eps1=delta ** 2, eps2=gamma * d3 / 3.0)
