import importlib
import json

import numpy as np
import pytest

from rimmflow.errors import BlowUp
from rimmflow.evolve import (
    Integrator,
    PositivityWarning,
    detect_cycle,
    evolve,
    fit_rate,
    from_half,
    perturbed_state,
    rhs,
    step,
    to_half,
)
from rimmflow.hopf import r_numeric
from rimmflow.linear import assemble_A, eigenvector_normalized, spectrum
from rimmflow.spectral import Params, SpectralField, inner
from rimmflow.steady import flux_grid
from rimmflow.verify import demo_run

# the package namespace re-exports the evolve function under the module name
ev = importlib.import_module("rimmflow.evolve")


def random_real(n_max, seed, scale=0.05):
    rng = np.random.default_rng(seed)
    half = np.zeros(n_max + 1, dtype=complex)
    k = np.arange(1, n_max + 1)
    half[1:] = scale * (rng.normal(size=n_max) + 1j * rng.normal(size=n_max)) * np.exp(-0.5 * k)
    half[0] = 1.0
    return from_half(half)


class TestRhs:
    def test_vanishes_at_steady_state(self, steady):
        s = steady(1.0, 0.05, 0.05)
        assert rhs(s.H, s.params).l2_norm() < 1e-11

    def test_uniform_film(self):
        one = SpectralField.constant(1.0, 16)
        assert rhs(one, Params(2.0)).l2_norm() == 0

    @pytest.mark.parametrize("seed", range(4))
    def test_conserves_mass(self, seed):
        h = random_real(16, seed)
        assert abs(inner(rhs(h, Params(1.0, 0.1, 0.05)), SpectralField.constant(1.0, 16))) < 1e-15

    def test_flux_matches_complex_path(self):
        # oracle: the steady-state flux evaluated with full complex transforms
        h = random_real(16, 9)
        p = Params(0.7, 0.08, 0.03)
        integ = Integrator(p, 16, 1.0, 1.0)
        m = integ.m
        ref = np.fft.fft(flux_grid(h.coeffs, p, m), norm="forward")[:17]
        assert np.allclose(integ.flux(to_half(h)), ref, atol=1e-14)

    def test_flux_is_alias_free(self):
        # oracle: exact convolution of coefficient sequences, truncated to the band
        n = 6
        h = random_real(n, 2, scale=0.2)
        p = Params(1.0, 0.2, 0.0)
        c = h.coeffs
        cube = np.convolve(np.convolve(c, c), c)            # band 3n
        cos3 = np.array([0.5, 0.0, 0.5]) * p.eps1 / 3
        term = np.convolve(cube, cos3)                      # band 3n + 1
        mid = (len(term) - 1) // 2
        exact = -term[mid - n:mid + n + 1]
        exact[n] += 0.0
        exact = exact + c
        k = np.arange(-n, n + 1)
        s = (1j * k + (1j * k) ** 3) * c
        quart = np.convolve(cube, s)                        # band 4n
        mid = (len(quart) - 1) // 2
        exact = exact + p.b * quart[mid - n:mid + n + 1]
        got = Integrator(p, n, 1.0, 1.0).flux(to_half(h))
        assert np.allclose(got, exact[n:], atol=1e-15)


class TestStep:
    @pytest.mark.parametrize("scheme", ["etd1", "etdrk2"])
    def test_fixed_point(self, scheme, steady):
        s = steady(1.0, 0.05, 0.05)
        out = step(s.H, 1e-3, s.params, scheme=scheme)
        assert (out - s.H).l2_norm() < 1e-11

    def test_lawson_moves_fixed_points(self, steady):
        s = steady(1.0, 0.05, 0.05)
        out = step(s.H, 1e-3, s.params, scheme="lawson")
        assert (out - s.H).l2_norm() > 1e-9

    def test_mass_bitwise_constant(self, steady):
        s = steady(1.0, 0.01, 0.10)
        integ = Integrator(s.params, s.n_max, 1e-3, s.min_height ** 3)
        c = to_half(perturbed_state(s, 1e-2, 0.3))
        c0 = c[0]
        for _ in range(10_000):
            c = integ.step(c)
        assert c[0] == c0

    def test_linear_growth_factor(self, steady):
        s = steady(1.0, 0.01, 0.10)
        A = assemble_A(s)
        lam = spectrum(s).lambda_plus
        psi = eigenvector_normalized(A, lam).psi
        a, dt = 1e-6, 1e-3
        # real perturbation a Re(psi) = a (psi + conj psi)/2
        u0 = (psi + SpectralField(psi.coeffs[::-1].conj())) * (a / 2)
        expect = (psi * np.exp(lam * dt) + SpectralField((psi.coeffs * np.exp(lam * dt))[::-1].conj())) * (a / 2)
        out = step(s.H + u0, dt, s.params, c_star=s.min_height ** 3) - s.H
        err = (out - expect).l2_norm() / u0.l2_norm()
        assert err < dt ** 2 + 10 * a

    @pytest.mark.parametrize("scheme, order", [("etd1", 1), ("etdrk2", 2)])
    def test_convergence_order(self, scheme, order, steady):
        s = steady(1.0, 0.05, 0.05, 16)
        h0 = perturbed_state(s, 0.05, 0.0)

        def run(dt):
            integ = Integrator(s.params, 16, dt, s.min_height ** 3, scheme)
            c = to_half(h0)
            for _ in range(int(round(1 / dt))):
                c = integ.step(c)
            return c

        dts = [0.02, 0.01, 0.005]
        ref = run(dts[-1] / 16)
        errs = [np.linalg.norm(run(dt) - ref) for dt in dts]
        measured = np.log2(errs[1] / errs[2])
        assert measured == pytest.approx(order, abs=0.25)

    def test_positivity_warning(self):
        h = SpectralField.from_modes({0: 1.0, 1: 0.6, -1: 0.6}, 16)
        with pytest.warns(PositivityWarning):
            step(h, 1e-4, Params(1.0), c_star=0.1)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            Integrator(Params(1.0), 8, 0.0, 1.0)
        with pytest.raises(ValueError):
            Integrator(Params(1.0), 8, 1e-3, 1.0, scheme="rk4")


class TestEvolve:
    def test_rate_matches_critical_real_part(self):
        tr = demo_run(0.01, 0.02, 1e-3, 40.0)
        assert tr.measured_rate == pytest.approx(r_numeric(Params(1.0, 0.01, 0.02)), rel=0.1)

    @pytest.mark.xfail(strict=True, reason="r(0.01, 0.02) = +2.28e-5, so the perturbation grows")
    def test_published_stable_example_decays(self):
        assert demo_run(0.01, 0.02, 1e-3, 40.0).measured_rate < 0

    def test_decay_at_stable_point(self):
        tr = demo_run(0.1, 0.0, 1e-3, 80.0, dt=2e-3, b=0.2)
        r = r_numeric(Params(0.2, 0.1, 0.0))
        assert r < 0
        assert tr.measured_rate == pytest.approx(r, rel=0.1)
        assert tr.cycle is None
        assert tr.dist[-1] < tr.dist[len(tr.dist) // 4]

    def test_unstable_growth(self):
        p = Params(1.0, 0.01, 0.10)
        tr = demo_run(0.01, 0.10, 1e-5, 50.0)
        assert tr.measured_rate == pytest.approx(r_numeric(p), rel=0.1)
        assert tr.dist[-1] > tr.dist[len(tr.dist) // 4]

    @pytest.mark.parametrize("args", [(0.01, 0.02, 1e-3, 50.0), (0.01, 0.10, 1e-5, 50.0)])
    def test_mass_constant(self, args):
        tr = demo_run(*args)
        assert np.max(np.abs(tr.mass - tr.mass[0])) < 1e-10
        assert np.all(tr.dist >= 0)

    def test_restart_reproduces(self, steady):
        s = steady(1.0, 0.01, 0.02)
        h0 = perturbed_state(s, 1e-3, 0.3)
        full = evolve(h0, s.params, 4.0, 1e-3, steady=s)
        half = evolve(h0, s.params, 2.0, 1e-3, steady=s)
        rest = evolve(half.final, s.params, 4.0, 1e-3, steady=s, t0=2.0)
        k = len(half.times) - 1
        assert np.allclose(rest.times, full.times[k:])
        assert np.max(np.abs(rest.dist - full.dist[k:])) < 1e-9

    def test_stops_after_periods(self, steady):
        s = steady(1.0, 0.01, 0.10)
        tr = evolve(perturbed_state(s, 1e-5), s.params, 100.0, 1e-3, steady=s, max_periods=3)
        assert tr.times[-1] < 25

    def test_blowup_reports_time(self, steady, monkeypatch):
        monkeypatch.setattr(ev, "OVERFLOW_GUARD", 0.5)
        s = steady(1.0, 0.01, 0.02)
        with pytest.raises(BlowUp) as info:
            evolve(s.H, s.params, 1.0, 1e-3, steady=s)
        assert info.value.time == pytest.approx(0.05)

    def test_input_validation(self, steady):
        s = steady(1.0, 0.01, 0.02)
        with pytest.raises(ValueError):
            evolve(s.H, s.params, 1.0, 0.0, steady=s)
        with pytest.raises(ValueError):
            evolve(s.H, s.params, 0.0, 1e-3, steady=s)
        with pytest.raises(ValueError):
            evolve(s.H + SpectralField.from_modes({1: 1j}, s.n_max), s.params, 1.0, steady=s)

    def test_outputs(self):
        tr = demo_run(0.01, 0.02, 1e-3, 40.0)
        d = json.loads(tr.to_json())
        assert d["samples"] == len(tr.times) and d["mass_drift"] == 0.0
        assert tr.csv_text().splitlines()[0] == "t,mass,dist,signal"


class TestDetectCycle:
    def test_sine(self):
        t = np.arange(0, 100, 0.01)
        c = detect_cycle(t, np.sin(t))
        assert c.period == pytest.approx(2 * np.pi, abs=1e-6)
        assert c.amplitude == pytest.approx(1.0, abs=1e-3)

    def test_offset_sine(self):
        t = np.arange(0, 100, 0.05)
        assert detect_cycle(t, 3 + 0.5 * np.sin(2 * t + 1)).period == pytest.approx(np.pi, abs=1e-5)

    def test_decaying(self):
        t = np.arange(0, 60, 0.01)
        assert detect_cycle(t, np.exp(-0.05 * t) * np.sin(t)) is None

    def test_jitter(self):
        t = np.arange(0, 200, 0.01)
        assert detect_cycle(t, np.sin(t + 2 * np.sin(0.3 * t))) is None

    def test_too_short(self):
        t = np.arange(0, 8, 0.01)
        assert detect_cycle(t, np.sin(t)) is None

    def test_window(self):
        t = np.arange(0, 100, 0.01)
        s = np.where(t < 50, np.exp(-0.2 * t), 1.0) * np.sin(t)
        assert detect_cycle(t, s, (50, 100)).period == pytest.approx(2 * np.pi, abs=1e-5)
        assert detect_cycle(t, s, (0, 50)) is None


def test_fit_rate():
    t = np.linspace(0, 10, 101)
    assert fit_rate(t, 2 * np.exp(-0.3 * t)) == pytest.approx(-0.3)
    assert np.isnan(fit_rate(t[:1], t[:1] + 1))
