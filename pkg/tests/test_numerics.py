"""Numerical kernel tests, cross-checked against scipy where it has an equivalent."""

import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from pbropt.errors import InvalidBracket, NonConvergence, StepUnderflow
from pbropt.growth import HanState, haldane_mu, han_ode_rhs, han_rhs
from pbropt.numerics import Bracket, Tolerance, find_root, integrate, integrate_ode, maximize_scalar
from pbropt.optimizer import compensation_roots
from pbropt.productivity import mean_growth_optical


class TestToleranceAndBracket:
    def test_tolerance_field_validation(self):
        with pytest.raises(ValueError):
            Tolerance(rel=0.0)
        with pytest.raises(ValueError):
            Tolerance(rel=1e-8, abs=-1.0)
        with pytest.raises(ValueError):
            Tolerance(rel=1e-8, abs=0.0, max_iter=0)

    def test_bracket_requires_increasing_endpoints(self):
        with pytest.raises(ValueError):
            Bracket(2.0, 2.0)
        with pytest.raises(ValueError):
            Bracket(3.0, 1.0)


class TestIntegrate:
    def test_constant_is_exact(self):
        assert integrate(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, rel=1e-13)

    def test_zero_width_interval(self):
        assert integrate(math.exp, 3.0, 3.0) == 0.0

    def test_exponential_against_antiderivative(self):
        expected = -math.expm1(-6.337)  # 1 - e^-6.337
        got = integrate(lambda x: math.exp(-x), 0.0, 6.337)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_orientation_antisymmetry(self):
        fwd = integrate(math.sin, 0.0, 2.0)
        rev = integrate(math.sin, 2.0, 0.0)
        assert fwd == -rev

    def test_linearity(self):
        f = math.exp
        g = math.cos
        a, b = 0.3, 1.7
        combined = integrate(lambda x: 2.0 * f(x) + 3.0 * g(x), a, b)
        split = 2.0 * integrate(f, a, b) + 3.0 * integrate(g, a, b)
        assert combined == pytest.approx(split, rel=2e-10)

    def test_additivity_over_subintervals(self):
        f = lambda x: x**3 - 2.0 * x + 0.5
        whole = integrate(f, -1.0, 2.0)
        parts = integrate(f, -1.0, 0.4) + integrate(f, 0.4, 2.0)
        assert whole == pytest.approx(parts, rel=1e-10, abs=1e-12)

    def test_growth_curve_matches_closed_form(self, haldane_r10):
        """The quadrature of mu(I_s e^-y) must reproduce the antiderivative route."""
        p = haldane_r10
        y_depth = 6.337
        direct = integrate(lambda y: haldane_mu(p, 2000.0 * math.exp(-y)), 0.0, y_depth)
        closed = mean_growth_optical(p, 2000.0, y_depth) * y_depth
        assert direct == pytest.approx(closed, rel=1e-8)

    def test_agrees_with_scipy_quad(self, haldane_r10):
        p = haldane_r10
        f = lambda y: haldane_mu(p, 2000.0 * math.exp(-y))
        ours = integrate(f, 0.0, 12.0)
        ref, _ = quad(f, 0.0, 12.0, epsabs=1e-13, epsrel=1e-12)
        assert ours == pytest.approx(ref, rel=1e-10)

    def test_nonconvergence_when_depth_capped(self):
        spiky = lambda x: 1.0 / math.sqrt(abs(x - 0.123456789) + 1e-14)
        with pytest.raises(NonConvergence):
            integrate(spiky, 0.0, 1.0, Tolerance(rel=1e-12, abs=0.0, max_iter=4))


class TestFindRoot:
    def test_linear(self):
        x = find_root(lambda x: x - 2.0, Bracket(0.0, 5.0))
        assert x == pytest.approx(2.0, abs=1e-10)

    def test_endpoint_root_returned_immediately(self):
        assert find_root(lambda x: x, Bracket(0.0, 1.0)) == 0.0

    def test_invalid_bracket(self):
        with pytest.raises(InvalidBracket):
            find_root(lambda x: x * x, Bracket(1.0, 2.0))

    def test_compensation_root_matches_quadratic_formula(self, haldane_r10):
        """mu(I) = R solved numerically must hit the rationalized quadratic root."""
        p = haldane_r10
        i_minus, _ = compensation_roots(p)
        x = find_root(
            lambda i: haldane_mu(p, i) - p.R,
            Bracket(1e-9, p.I_star),
            Tolerance(rel=1e-14, abs=0.0, max_iter=300),
        )
        assert x == pytest.approx(i_minus, rel=1e-10)

    def test_result_never_escapes_bracket(self, rng):
        for _ in range(50):
            r = rng.uniform(-5.0, 5.0)
            lo = r - rng.uniform(0.1, 3.0)
            hi = r + rng.uniform(0.1, 3.0)
            f = lambda x: (x - r) * (1.0 + 0.3 * math.sin(5.0 * x))
            x = find_root(f, Bracket(lo, hi))
            assert lo <= x <= hi, f"root {x} escaped [{lo}, {hi}]"
            assert x == pytest.approx(r, abs=1e-8)

    def test_agrees_with_brentq(self, haldane_r10):
        p = haldane_r10
        f = lambda i: haldane_mu(p, i) - p.R
        ours = find_root(f, Bracket(1e-6, p.I_star), Tolerance(rel=1e-14, abs=0.0, max_iter=300))
        ref = brentq(f, 1e-6, p.I_star, xtol=1e-12, rtol=1e-14)
        assert ours == pytest.approx(ref, rel=1e-10)


class TestMaximizeScalar:
    def test_parabola(self):
        x, fx = maximize_scalar(lambda x: -((x - 3.0) ** 2), Bracket(0.0, 10.0))
        assert x == pytest.approx(3.0, abs=1e-8)
        assert fx == pytest.approx(0.0, abs=1e-15)

    def test_plateau_returns_the_constant(self):
        x, fx = maximize_scalar(lambda x: 4.5, Bracket(-2.0, 7.0))
        assert -2.0 <= x <= 7.0
        assert fx == 4.5

    def test_boundary_maximum(self):
        x, fx = maximize_scalar(lambda x: -x, Bracket(1.0, 2.0))
        assert x == pytest.approx(1.0, rel=1e-9)

    def test_optical_productivity_argmax_matches_closed_form(self, haldane_r10):
        from pbropt.optimizer import y_opt
        from pbropt.productivity import optical_productivity

        p = haldane_r10
        expected = y_opt(p, 2000.0).Y_opt
        x, _ = maximize_scalar(
            lambda y: optical_productivity(p, 2000.0, y), Bracket(0.01, 20.0)
        )
        assert x == pytest.approx(expected, abs=1e-4)

    def test_nonconvergence_when_budget_tiny(self):
        with pytest.raises(NonConvergence):
            maximize_scalar(
                lambda x: -(x * x), Bracket(-1.0, 1.0), Tolerance(rel=1e-14, abs=0.0, max_iter=3)
            )


class TestIntegrateOde:
    def test_constant_solution(self):
        trace = integrate_ode(lambda t, y: [0.0], [7.0], (0.0, 10.0))
        assert np.all(trace.y == 7.0)
        assert trace.t[0] == 0.0 and trace.t[-1] == 10.0

    def test_exponential_decay(self):
        trace = integrate_ode(lambda t, y: [-y[0]], [1.0], (0.0, 1.0))
        assert trace.final[0] == pytest.approx(math.exp(-1.0), rel=1e-7)

    @pytest.mark.parametrize("lam", [-1.0, 0.0, 1.0])
    def test_linear_rates_within_requested_tolerance(self, lam):
        tol = Tolerance(rel=1e-8, abs=1e-12, max_iter=10**6)
        trace = integrate_ode(lambda t, y: [lam * y[0]], [2.0], (0.0, 2.0), tol)
        assert trace.final[0] == pytest.approx(2.0 * math.exp(2.0 * lam), rel=tol.rel)

    def test_time_ordering(self):
        trace = integrate_ode(lambda t, y: [math.cos(t) * y[0]], [1.0], (0.0, 5.0))
        assert np.all(np.diff(trace.t) > 0.0)

    def test_tightening_tolerance_converges(self):
        rhs = lambda t, y: [y[0] * math.sin(3.0 * t)]
        loose = integrate_ode(rhs, [1.0], (0.0, 4.0), Tolerance(rel=1e-6, abs=1e-9, max_iter=10**6))
        tight = integrate_ode(rhs, [1.0], (0.0, 4.0), Tolerance(rel=5e-7, abs=1e-9, max_iter=10**6))
        rel_change = abs(tight.final[0] - loose.final[0]) / abs(tight.final[0])
        assert rel_change < 1e-6

    def test_agrees_with_scipy_rk45(self):
        rhs = lambda t, y: [-0.7 * y[0] + math.sin(t)]
        ours = integrate_ode(rhs, [1.0], (0.0, 8.0), Tolerance(rel=1e-10, abs=1e-12, max_iter=10**6))
        ref = solve_ivp(rhs, (0.0, 8.0), [1.0], method="RK45", rtol=1e-10, atol=1e-12)
        assert ours.final[0] == pytest.approx(ref.y[0, -1], rel=1e-8)

    def test_step_underflow_at_blowup(self):
        # x' = x^2 from x(0)=1 blows up at t=1; the step must collapse there.
        with pytest.raises(StepUnderflow):
            integrate_ode(lambda t, y: [y[0] ** 2], [1.0], (0.0, 2.0))

    def test_han_fast_state_tracks_quasi_steady_value(self, han_r10):
        """After the sub-second transient the open state rides its nullcline
        while the inhibited state keeps evolving on the minutes scale."""
        p = han_r10
        I = 2000.0
        trace = integrate_ode(
            han_ode_rhs(p, I), [1.0, 0.0], (0.0, 100.0),
            Tolerance(rel=1e-9, abs=1e-12, max_iter=10**6),
        )
        denom = p.tau * p.sigma * I + 1.0
        after = trace.t > 0.5
        a = trace.y[after, 0]
        c = trace.y[after, 1]
        assert np.max(np.abs(a - (1.0 - c) / denom)) < 1e-4
        # C is genuinely slow: it is still far from equilibrium at t = 5 s.
        c5 = trace.y[np.searchsorted(trace.t, 5.0), 1]
        assert c5 < 0.5 * c[-1]

    def test_han_state_sum_conserved(self, han_r10):
        """dB is defined as -(dA + dC), so that pairing sums to zero exactly."""
        p = han_r10
        state = HanState(A=0.55, B=0.30, C=0.15)
        dA, dB, dC = han_rhs(p, state, 800.0)
        assert (dA + dC) + dB == 0.0
