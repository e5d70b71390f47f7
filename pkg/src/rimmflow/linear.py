"""Linearization at a steady state and its leading conjugate eigenpair.

On the mean-zero subspace the linearized generator is
``A v = -d/dtheta Q[v]`` where ``Q`` is the Frechet derivative of the flux at
``H``.  At ``eps = 0`` it is diagonal in ``exp(i n theta)`` with entries
``-b(n^4 - n^2) - i n``, so the pair ``+-i`` (modes ``n = -+1``) sits on the
imaginary axis and everything else has real part ``<= -12 b``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNormalization, GapViolation
from .spectral import Params, SpectralField, modes
from .steady import DEFAULT_N, SteadyState, jacobian, solve_steady

SEED = 1j


def assemble_Q(s: SteadyState) -> np.ndarray:
    """Matrix of ``Q_eps`` over modes ``-N..N`` (the flux linearization at ``H``)."""
    return jacobian(s.H, s.params)


def assemble_A(s: SteadyState) -> np.ndarray:
    """``2N x 2N`` matrix of ``-d/dtheta Q_eps`` on modes ``n != 0``."""
    Q = assemble_Q(s)
    n = modes(s.n_max)
    A = -(1j * n)[:, None] * Q
    keep = n != 0
    return A[np.ix_(keep, keep)]


def omega(n, b: float):
    """Unperturbed eigenvalues ``-b(n^4 - n^2) - i n``."""
    n = np.asarray(n, dtype=float)
    return -b * (n ** 4 - n ** 2) - 1j * n


def _sorted(w: np.ndarray) -> np.ndarray:
    return w[np.lexsort((-w.imag, -w.real))]


def real_form(A: np.ndarray) -> np.ndarray | None:
    """``A`` in the real coordinates ``c_{+-n} = x_n +- i y_n``, or None if ``A`` does not map real fields to real fields.

    ``A`` acts on modes ``-N..-1, 1..N``.
    """
    n_max = A.shape[0] // 2
    if A.shape[0] != 2 * n_max or A.shape[1] != A.shape[0]:
        return None
    if not np.allclose(A[::-1, ::-1], A.conj(), rtol=0, atol=1e-12 * np.abs(A).max()):
        return None
    k = np.arange(n_max)
    pos = n_max + k          # n = k + 1
    neg = n_max - 1 - k      # n = -(k + 1)
    T = np.zeros((2 * n_max, 2 * n_max), dtype=complex)
    T[pos, k] = 1.0
    T[neg, k] = 1.0
    T[pos, n_max + k] = 1j
    T[neg, n_max + k] = -1j
    Tinv = np.zeros_like(T).T
    Tinv[k, pos] = 0.5
    Tinv[k, neg] = 0.5
    Tinv[n_max + k, pos] = -0.5j
    Tinv[n_max + k, neg] = 0.5j
    return (Tinv @ A @ T).real


def full_spectrum(A: np.ndarray) -> np.ndarray:
    """All eigenvalues of ``A``, sorted by descending real part (ties: larger imaginary part first).

    Real-structured operators are solved in real coordinates so that the
    spectrum comes back as exact conjugate pairs.
    """
    Ar = real_form(A)
    return _sorted(np.linalg.eigvals(A if Ar is None else Ar))


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    params: Params
    n_max: int
    eigenvalues: np.ndarray
    lambda_plus: complex
    lambda_minus: complex
    gap_ok: bool
    delta5: float

    @property
    def r(self) -> float:
        return self.lambda_plus.real

    def conjugate_pairing_error(self) -> float:
        """Largest distance from an eigenvalue's conjugate to the spectrum."""
        w = self.eigenvalues
        return float(np.max(np.min(np.abs(w.conj()[:, None] - w[None, :]), axis=1)))

    def summary(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "n_max": self.n_max,
            "lambda_plus": [self.lambda_plus.real, self.lambda_plus.imag],
            "lambda_minus": [self.lambda_minus.real, self.lambda_minus.imag],
            "gap_ok": self.gap_ok,
            "delta5": self.delta5,
            "next_real_part": float(self.eigenvalues[2].real) if len(self.eigenvalues) > 2 else None,
            "conjugate_pairing_error": self.conjugate_pairing_error(),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary())


def _nearest(w: np.ndarray, target: complex) -> int:
    d = np.abs(w - target)
    best = np.flatnonzero(d == d.min())
    # tie: prefer larger imaginary part
    return int(best[np.argmax(w[best].imag)])


def leading_pair(
    eigenvalues: np.ndarray,
    params: Params,
    n_max: int,
    seed: complex = SEED,
    delta5: float | None = None,
    strict: bool = True,
) -> SpectrumReport:
    """Isolate the pair continuously connected to ``+-i``.

    ``seed`` is the previous parameter point's ``lambda_plus`` when tracking
    along a path.  With ``strict`` a missing gap raises :class:`GapViolation`;
    otherwise the report carries ``gap_ok = False``.
    """
    w = np.asarray(eigenvalues)
    if delta5 is None:
        delta5 = 6.0 * params.b
    ip = _nearest(w, seed)
    lam = complex(w[ip])
    rest = np.delete(w, ip)
    im = _nearest(rest, lam.conjugate())
    lam_m = complex(rest[im])
    others = np.delete(rest, im)
    gap_ok = bool(lam.imag > 0 and np.all(others.real < -delta5))
    if strict and not gap_ok:
        raise GapViolation(
            f"leading pair {lam:.6g} not separated by delta5={delta5:g} at {params}"
        )
    return SpectrumReport(params, n_max, _sorted(w), lam, lam_m, gap_ok, delta5)


def spectrum(
    s: SteadyState, seed: complex = SEED, delta5: float | None = None, strict: bool = True
) -> SpectrumReport:
    """Full spectrum of the linearization at ``s`` with the leading pair picked out.

    The leading pair is polished with :func:`refine_eigenpair`.
    """
    A = assemble_A(s)
    rep = leading_pair(full_spectrum(A), s.params, s.n_max, seed, delta5, strict)
    lam, _ = refine_eigenpair(A, rep.lambda_plus)
    return dataclasses.replace(rep, lambda_plus=lam, lambda_minus=lam.conjugate())


def spectrum_at(
    p: Params, n_max: int = DEFAULT_N, seed: complex = SEED, delta5: float | None = None
) -> SpectrumReport:
    return spectrum(solve_steady(p, n_max=n_max), seed=seed, delta5=delta5)


def lambda_plus(p: Params, n_max: int = DEFAULT_N, seed: complex = SEED) -> complex:
    return spectrum_at(p, n_max, seed).lambda_plus


def track_lambda_plus(points, b: float, n_max: int = DEFAULT_N, seed: complex = SEED) -> np.ndarray:
    """``lambda_plus`` along a sequence of ``(eps1, eps2)``, each seeded by its predecessor."""
    out = []
    for e1, e2 in points:
        seed = lambda_plus(Params(b, e1, e2), n_max, seed)
        out.append(seed)
    return np.array(out)


def refine_eigenpair(A: np.ndarray, lam: complex, psi: np.ndarray | None = None, iters: int = 6):
    """Polish a simple eigenvalue by Newton on ``(A - lam) psi = 0``, ``psi_{-1} = 1``.

    QR eigenvalues carry an absolute error ~ eps * ||A|| (about ``b N^4``);
    the bordered Newton step only sees the residual, which is small
    componentwise because the critical eigenvector decays quickly in ``n``.
    Without a starting vector ``psi`` it starts from ``exp(-i theta)``, which
    suits the critical pair.
    Returns ``(lam, psi)`` with ``psi`` over modes ``n != 0``.
    """
    size = A.shape[0]
    anchor = size // 2 - 1  # mode n = -1
    eye = np.eye(size)
    e = np.zeros(size, dtype=complex)
    e[anchor] = 1.0
    psi = e.copy() if psi is None else np.asarray(psi, dtype=complex) / psi[anchor]
    K = np.zeros((size + 1, size + 1), dtype=complex)
    K[size, anchor] = 1.0
    for _ in range(iters):
        r = A @ psi - lam * psi
        K[:size, :size] = A - lam * eye
        K[:size, size] = -psi
        d = np.linalg.solve(K, np.concatenate([-r, [0.0]]))
        psi = psi + d[:size]
        lam = lam + d[size]
        if abs(d[size]) <= 1e-16 * max(1.0, abs(lam)):
            break
    return complex(lam), psi


@dataclass(frozen=True, eq=False)
class EigenPair:
    lam: complex
    psi: SpectralField
    residual: float


def eigenvector_normalized(A: np.ndarray, lam: complex) -> EigenPair:
    """Eigenvector for the eigenvalue of ``A`` nearest ``lam``, scaled so its ``n = -1`` entry is 1.

    ``A`` acts on modes ``n != 0`` ordered ``-N..-1, 1..N``; the returned
    field has ``c_0 = 0``.
    """
    w, V = np.linalg.eig(A)
    k = int(np.argmin(np.abs(w - lam)))
    v = V[:, k]
    n_max = A.shape[0] // 2
    if abs(v[n_max - 1]) < 1e-8 * np.linalg.norm(v):
        raise DegenerateNormalization("eigenvector is orthogonal to exp(-i theta)")
    lam_k, v = refine_eigenpair(A, w[k], v)
    res = float(np.linalg.norm(A @ v - lam_k * v) / np.linalg.norm(v))
    full = np.concatenate([v[:n_max], [0.0], v[n_max:]])
    return EigenPair(lam_k, SpectralField(full, mean_zero=True), res)


def spectrum_csv(report: SpectrumReport) -> list[list]:
    return [[float(z.real), float(z.imag)] for z in report.eigenvalues]
