import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rimmflow.evolve import Integrator, detect_cycle, fit_rate, from_half, to_half
from rimmflow.spectral import (
    Params,
    SpectralField,
    apply_B,
    apply_G_inv,
    derivative,
    inner,
    product,
    rescale_physical,
)

N = 6
small = st.floats(-1.0, 1.0, allow_nan=False)
coeffs = st.lists(st.tuples(small, small), min_size=2 * N + 1, max_size=2 * N + 1)


def field(pairs):
    return SpectralField(np.array([complex(a, b) for a, b in pairs]))


def real_field(pairs, scale=0.1):
    half = np.array([complex(a, b) for a, b in pairs[: N + 1]]) * scale
    half[0] = 1.0
    return from_half(half)


@given(coeffs, coeffs)
def test_product_is_truncated_convolution(a, b):
    f, g = field(a), field(b)
    full = np.convolve(f.coeffs, g.coeffs)
    assert np.allclose(product(f, g).coeffs, full[N:3 * N + 1], atol=1e-12)


@given(coeffs, coeffs)
def test_product_commutes_and_obeys_leibniz(a, b):
    f, g = field(a), field(b)
    assert np.allclose(product(f, g).coeffs, product(g, f).coeffs, atol=1e-13)
    lhs = derivative(product(f, g))
    rhs = product(derivative(f), g) + product(f, derivative(g))
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-11)


@given(coeffs, coeffs, st.floats(0.05, 5.0))
def test_B_is_skew(a, b, beta):
    f, g = field(a), field(b)
    assert inner(apply_B(f, beta), g) == pytest.approx(-inner(f, apply_B(g, beta)), abs=1e-9)


@given(coeffs, st.floats(0.05, 5.0))
def test_G_inverse(a, beta):
    f = field(a)
    back = apply_B(apply_G_inv(f, beta), beta) + apply_G_inv(f, beta)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-12)


@given(st.floats(0.1, 10), st.floats(0, 10), st.floats(0.05, 2))
def test_rescaling_relations(beta, gamma, delta):
    p = rescale_physical(beta, gamma, delta)
    assert p.eps1 == pytest.approx(delta ** 2)
    assert p.b * gamma == pytest.approx(p.eps2 * beta)


@settings(max_examples=30, deadline=None)
@given(coeffs, st.floats(0.2, 2.0), st.floats(0, 0.1), st.floats(0, 0.1))
def test_flow_conserves_mass(a, b, e1, e2):
    h = real_field(a)
    integ = Integrator(Params(b, e1, e2), N, 1e-3, 0.5)
    c = to_half(h)
    assert abs(integ.rhs(c)[0]) == 0
    for _ in range(20):
        c = integ.step(c)
    assert c[0] == 1.0
    assert from_half(c).is_real()


@given(st.floats(-0.5, 0.5), st.floats(0.1, 10))
def test_fit_rate_recovers_exponent(rate, scale):
    t = np.linspace(0, 10, 201)
    assert fit_rate(t, scale * np.exp(rate * t)) == pytest.approx(rate, abs=1e-9)


@settings(deadline=None)
@given(st.floats(0.5, 5.0), st.floats(0, 2 * np.pi), st.floats(0.1, 3.0))
def test_detect_cycle_period(period, phase, amp):
    t = np.arange(0, 20 * period, period / 200)
    cyc = detect_cycle(t, amp * np.sin(2 * np.pi * t / period + phase))
    assert cyc.period == pytest.approx(period, rel=1e-5)
    assert cyc.amplitude == pytest.approx(amp, rel=1e-3)
