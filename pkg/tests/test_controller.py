"""Closed-loop controller tests: law branches, thresholds, trajectory invariants."""

import numpy as np
import pytest

from pbropt.errors import ConfigError, RegimeWarning
from pbropt.controller import (
    ControlConfig,
    convergence_time,
    default_x_bar,
    dilution_law,
    phi,
    simulate_closed_loop,
    validate_config,
)
from pbropt.light import extinction
from pbropt.optimizer import optimal_X_for_h
from pbropt.productivity import mean_growth_optical, surface_productivity


@pytest.fixture(scope="module")
def loop(pset_r10):
    """Reference loop: h = 0.1 m, D_max = 10 mu_max, target at the Pi argmax."""
    p, m = pset_r10.haldane, pset_r10.extinction
    i_s = pset_r10.I_s
    h = 0.1
    x_star, _ = optimal_X_for_h(p, m, i_s, h)
    d_max = 10.0 * p.mu_max
    x_bar = default_x_bar(p, m, i_s, h, x_star, d_max)
    cfg = ControlConfig(X_star=x_star, D_max=d_max, X_bar=x_bar)
    return p, m, i_s, h, cfg


class TestPhi:
    def test_zero_biomass(self, loop):
        p, m, i_s, h, _ = loop
        assert phi(p, m, i_s, 0.0, h) == 0.0

    def test_proxy_times_depth_is_areal_productivity(self, loop):
        p, m, i_s, h, _ = loop
        for x in (10.0, 50.0, 400.0, 2000.0):
            assert phi(p, m, i_s, x, h) * h == pytest.approx(
                surface_productivity(p, m, x, h, i_s), rel=1e-13
            )

    def test_negative_in_respiration_dominated_column(self, loop):
        p, m, i_s, _, _ = loop
        # eps(50) * 3.0 = 60: well past the break-even optical depth
        assert phi(p, m, i_s, 50.0, 3.0) < 0.0


class TestDilutionLaw:
    def test_equilibrium_dilution_at_target(self, loop):
        p, m, i_s, h, cfg = loop
        expected = mean_growth_optical(p, i_s, extinction(m, cfg.X_star) * h) - p.R
        assert dilution_law(cfg, p, m, i_s, cfg.X_star, h) == pytest.approx(
            expected, rel=1e-13
        )

    def test_saturated_branch(self, loop):
        p, m, i_s, h, cfg = loop
        assert dilution_law(cfg, p, m, i_s, cfg.X_bar, h) == cfg.D_max
        assert dilution_law(cfg, p, m, i_s, 2.0 * cfg.X_bar, h) == cfg.D_max

    def test_just_below_threshold_uses_proxy_branch(self, loop):
        p, m, i_s, h, cfg = loop
        x = cfg.X_bar * (1.0 - 1e-9)
        expected = phi(p, m, i_s, x, h) / cfg.X_star
        assert dilution_law(cfg, p, m, i_s, x, h) == pytest.approx(expected, rel=1e-13)

    def test_negative_proxy_clamped_with_warning(self, loop):
        p, m, i_s, h, _ = loop
        cfg = ControlConfig(X_star=344.0, D_max=10.0 * p.mu_max, X_bar=3000.0)
        with pytest.warns(RegimeWarning):
            d = dilution_law(cfg, p, m, i_s, 2600.0, h)
        assert d == 0.0

    def test_config_feasibility_checks(self, loop):
        p, m, i_s, h, cfg = loop
        with pytest.raises(ConfigError):
            ControlConfig(X_star=300.0, D_max=20.0, X_bar=200.0)  # X_bar <= X_star
        with pytest.raises(ConfigError):
            validate_config(
                ControlConfig(X_star=300.0, D_max=0.5 * p.mu_max, X_bar=400.0), p
            )
        with pytest.raises(ConfigError):
            # (mu_max - R) * X_bar / X_star exceeds D_max
            validate_config(
                ControlConfig(X_star=10.0, D_max=2.0 * p.mu_max, X_bar=1000.0), p
            )


class TestDefaultXBar:
    def test_threshold_is_feasible_and_sound(self, loop):
        p, m, i_s, h, cfg = loop
        x_bar = cfg.X_bar
        assert x_bar > cfg.X_star
        assert (p.mu_max - p.R) * x_bar / cfg.X_star < cfg.D_max
        # the whole sub-threshold region keeps net growth positive
        assert mean_growth_optical(p, i_s, extinction(m, x_bar) * h) - p.R > 0.0

    def test_backs_off_from_net_growth_zero(self, loop):
        """The unconstrained candidate would stall the loop; the default must not."""
        p, m, i_s, h, cfg = loop
        naive = min(0.9 * cfg.D_max * cfg.X_star / (p.mu_max - p.R), 10.0 * cfg.X_star)
        assert mean_growth_optical(p, i_s, extinction(m, naive) * h) - p.R < 0.0
        assert cfg.X_bar < naive


class TestSimulateClosedLoop:
    def test_equilibrium_start_stays_flat(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, cfg.X_star, h, 10.0)
        assert np.max(np.abs(trace.X - cfg.X_star)) == 0.0

    def test_low_start_rises_monotonically_without_overshoot(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, 50.0, h, 30.0)
        assert np.all(np.diff(trace.X) >= -1e-9 * cfg.X_star)
        assert trace.X.max() <= cfg.X_star * (1.0 + 1e-6)
        assert abs(trace.X[-1] - cfg.X_star) / cfg.X_star < 1e-3

    def test_high_start_converges_through_saturation(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, 2500.0, h, 30.0)
        assert abs(trace.X[-1] - cfg.X_star) / cfg.X_star < 1e-3
        # saturated branch engaged at the start
        assert trace.D[0] == cfg.D_max

    def test_positive_invariance_of_subthreshold_region(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, 2500.0, h, 30.0)
        below = trace.X < cfg.X_bar
        first = int(np.argmax(below))
        assert below.any()
        assert not np.any(trace.X[first:] >= cfg.X_bar), "X re-crossed the threshold"

    def test_global_bounds(self, loop):
        p, m, i_s, h, cfg = loop
        for x0 in (2500.0, 50.0):
            trace = simulate_closed_loop(cfg, p, m, i_s, x0, h, 30.0)
            lo = min(cfg.X_star, x0)
            hi = max(x0, cfg.X_bar)
            assert trace.X.min() >= lo * (1.0 - 1e-9)
            assert trace.X.max() <= hi * (1.0 + 1e-9)
            assert np.all(trace.X > 0.0)
            assert np.all(np.diff(trace.t) > 0.0)

    def test_distance_to_target_never_grows(self, loop):
        p, m, i_s, h, cfg = loop
        for x0 in (2500.0, 50.0):
            trace = simulate_closed_loop(cfg, p, m, i_s, x0, h, 30.0)
            gap = np.abs(trace.X - cfg.X_star)
            assert np.all(np.diff(gap) <= 1e-8 * cfg.X_star)

    def test_steady_state_dilution_matches_net_growth(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, 50.0, h, 30.0)
        expected = mean_growth_optical(p, i_s, extinction(m, cfg.X_star) * h) - p.R
        assert trace.D[-1] == pytest.approx(expected, abs=1e-6)

    def test_stall_regime_warns_and_hangs_at_zero_production(self, loop):
        """An unsound threshold lets the loop stall where Phi = 0, not at X_star."""
        p, m, i_s, h, _ = loop
        cfg = ControlConfig(X_star=344.0, D_max=10.0 * p.mu_max, X_bar=3000.0)
        with pytest.warns(RegimeWarning):
            trace = simulate_closed_loop(cfg, p, m, i_s, 2600.0, h, 30.0)
        assert trace.X[-1] > 2400.0, "trajectory should hang near the Phi = 0 point"


class TestConvergenceTime:
    def test_zero_for_equilibrium_start(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, cfg.X_star, h, 2.0)
        assert convergence_time(trace, cfg.X_star) == 0.0

    def test_none_when_not_settled(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, 2500.0, h, 3.0)
        assert convergence_time(trace, cfg.X_star) is None

    def test_band_entry_time_is_consistent(self, loop):
        p, m, i_s, h, cfg = loop
        trace = simulate_closed_loop(cfg, p, m, i_s, 50.0, h, 30.0)
        t_c = convergence_time(trace, cfg.X_star)
        assert t_c is not None
        inside = np.abs(trace.X - cfg.X_star) / cfg.X_star <= 1e-3
        assert np.all(inside[trace.t >= t_c])
        before = trace.t < t_c
        assert not inside[before][-1] if before.any() else True
