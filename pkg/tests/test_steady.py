import numpy as np
import pytest

from rimmflow.errors import NoConvergence
from rimmflow.spectral import Params, SpectralField
from rimmflow.steady import (
    jacobian,
    mean_mass,
    residual,
    solve_steady,
    steady_csv,
    taylor_steady,
)

N = 16


def one(n_max=N):
    return SpectralField.constant(1.0, n_max)


class TestResidual:
    @pytest.mark.parametrize("b", [0.5, 1.0, 3.0])
    def test_uniform_film_at_zero(self, b):
        assert residual(one(), Params(b)).l2_norm() == pytest.approx(0.0, abs=1e-15)

    def test_uniform_film_with_gravity(self):
        r = residual(one(), Params(1.0, 0.1, 0.0))
        expect = SpectralField.from_modes({1: -0.1 / 6, -1: -0.1 / 6}, N)
        assert np.allclose(r.coeffs, expect.coeffs, atol=1e-16)

    def test_converged_state(self, steady):
        s = steady(1.0, 0.05, 0.05)
        assert residual(s.H, s.params).l2_norm() < 1e-12


class TestJacobian:
    def test_symbol_at_uniform_film(self):
        J = jacobian(one(), Params(1.0))
        assert J[N + 2, N + 2] == pytest.approx(1 - 6j)
        assert J[N, N] == pytest.approx(1.0)
        assert np.allclose(J - np.diag(np.diag(J)), 0)

    def test_finite_difference_columns(self, steady):
        s = steady(1.0, 0.05, 0.05, N)
        p = s.params
        v = SpectralField.from_function(lambda t: np.cos(t + 0.4) + 0.3 * np.sin(3 * t), N)
        J = jacobian(s.H, p)
        base = residual(s.H, p).coeffs
        errs = []
        for tau in (1e-4, 1e-5):
            fd = (residual(s.H + v * tau, p).coeffs - base) / tau
            errs.append(np.linalg.norm(fd - J @ v.coeffs))
        assert errs[1] < errs[0] / 5  # O(tau)
        assert errs[1] < 1e-4 * np.linalg.norm(J @ v.coeffs)


class TestSolveSteady:
    def test_zero_eps(self):
        s = solve_steady(Params(1.0), n_max=N)
        assert s.newton_iters <= 1
        assert np.allclose(s.H.coeffs, one().coeffs)

    def test_converges_with_positive_height(self):
        s = solve_steady(Params(1.0, 0.3, 0.0), n_max=N)
        assert s.residual_norm < 1e-12
        assert s.min_height > 0
        # leading behaviour 1 + (eps1/3) cos(theta)
        assert s.min_height == pytest.approx(0.9, abs=0.02)

    def test_real_valued(self, steady):
        assert steady(1.0, 0.05, 0.05).H.is_real()

    @pytest.mark.parametrize("eps", [(9.0, 9.0), (1.0, 0.0)])
    def test_far_outside_neighbourhood(self, eps):
        with pytest.raises(NoConvergence):
            solve_steady(Params(1.0, *eps), n_max=N)

    def test_summary_json(self, steady):
        import json
        d = json.loads(steady(1.0, 0.05, 0.05).to_json())
        assert d["residual_norm"] < 1e-12 and d["params"]["eps1"] == 0.05

    def test_csv_rows(self, steady):
        rows = steady_csv(steady(1.0, 0.05, 0.05))
        assert len(rows) == 256 and rows[0][0] == 0.0

    @pytest.mark.parametrize("n_max", [16, 32])
    def test_truncation_converged(self, n_max, steady):
        a = steady(1.0, 0.05, 0.05, n_max).H
        b = steady(1.0, 0.05, 0.05, 64).H
        assert (a - b).l2_norm() < 1e-13


class TestTaylor:
    def test_zero(self):
        assert np.allclose(taylor_steady(Params(2.0), N).coeffs, one().coeffs)

    def test_first_order_mode(self):
        t = taylor_steady(Params(1.0, 0.2, 0.0), N)
        assert t[1] == pytest.approx(0.2 / 6)
        assert t[-1] == pytest.approx(0.2 / 6)

    def test_second_mode_coefficient(self):
        t = taylor_steady(Params(1.0, 0.3, 0.0), N)
        assert t[2] == pytest.approx(0.09 * (1 + 6j) / 444)

    def test_cubic_remainder(self, steady):
        errs = []
        for t in (0.04, 0.02, 0.01):
            s = steady(1.0, t, t)
            errs.append((s.H - taylor_steady(s.params, s.n_max)).l2_norm())
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all((ratios > 7) & (ratios < 9))


class TestMeanMass:
    def test_unit_at_zero(self, steady):
        assert mean_mass(steady(1.0)) == 1.0

    @pytest.mark.parametrize("eps", [(0.1, 0.0), (0.1, 0.1), (0.05, -0.03)])
    def test_expansion(self, eps, steady):
        e1, e2 = eps
        m = mean_mass(steady(1.0, e1, e2))
        assert abs(m - (1 + e1 * e1 / 6 + e1 * e2 / 6)) < 0.1 * np.hypot(e1, e2) ** 3

    def test_remainder_is_higher_order(self, steady):
        # the expansion is even in eps, so the remainder is quartic
        rem = [abs(mean_mass(steady(1.0, t, t)) - 1 - t * t / 3) for t in (0.04, 0.02)]
        assert rem[0] / rem[1] == pytest.approx(16, rel=0.05)
