"""Closed-loop dilution control of the biomass concentration.

The measured proxy Phi = (mu_bar(X, h) - R) * X (net volumetric production,
available on-line from oxygen sensing) feeds a saturating feedback law

    D = D_max                      if X >= X_bar
    D = Phi / X_star               if X <  X_bar

which drives dX/dt = (mu_bar - R - D) X to the target X_star: below the
saturation threshold the loop reads dX/dt = (Phi / X_star) (X_star - X), a
contraction toward X_star wherever Phi > 0.

X_bar must leave that contraction intact: besides the classic feasibility
constraint (mu_max - R) * X_bar / X_star < D_max, the sub-threshold region
must keep mu_bar above R (very turbid columns respire more than they grow,
Phi flips sign, and an uncapped threshold would let the loop stall at the
zero-production concentration instead of the target). The default threshold
therefore also backs off from the net-growth zero crossing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, RegimeWarning
from .growth import HaldaneParams
from .light import ExtinctionModel, extinction
from .numerics import Bracket, Tolerance, find_root, integrate_ode
from .productivity import mean_growth_optical

__all__ = [
    "ControlConfig",
    "SimTrace",
    "phi",
    "dilution_law",
    "default_x_bar",
    "simulate_closed_loop",
    "convergence_time",
]


@dataclass(frozen=True)
class ControlConfig:
    """Target concentration, saturation threshold and dilution ceiling."""

    X_star: float
    D_max: float
    X_bar: float

    def __post_init__(self) -> None:
        if not self.X_star > 0.0:
            raise ConfigError(f"X_star must be > 0, got {self.X_star}")
        if not self.D_max > 0.0:
            raise ConfigError(f"D_max must be > 0, got {self.D_max}")
        if not self.X_bar > self.X_star:
            raise ConfigError(
                f"X_bar must exceed X_star, got X_bar={self.X_bar}, X_star={self.X_star}"
            )


def validate_config(cfg: ControlConfig, p: HaldaneParams) -> None:
    """Check the growth-dependent feasibility constraints of the law."""
    if p.R >= p.mu_max:
        raise ConfigError(
            f"growth cannot exceed respiration: mu_max={p.mu_max}, R={p.R}"
        )
    if not cfg.D_max > p.mu_max:
        raise ConfigError(
            f"D_max must exceed mu_max, got D_max={cfg.D_max}, mu_max={p.mu_max}"
        )
    if not (p.mu_max - p.R) * cfg.X_bar / cfg.X_star < cfg.D_max:
        raise ConfigError(
            "saturation threshold too high: (mu_max - R) * X_bar / X_star = "
            f"{(p.mu_max - p.R) * cfg.X_bar / cfg.X_star:.6g} >= D_max = {cfg.D_max}"
        )


def _mu_bar_at(
    p: HaldaneParams, m: ExtinctionModel, I_s: float, X: float, h: float
) -> float:
    return mean_growth_optical(p, I_s, extinction(m, X) * h)


def phi(
    p: HaldaneParams, m: ExtinctionModel, I_s: float, X: float, h: float
) -> float:
    """Net volumetric production Phi = (mu_bar(X, h) - R) * X [g m^-3 d^-1].

    The on-line measured signal of the control loop; Phi * h = Pi.
    """
    if X < 0.0:
        raise DomainError(f"biomass concentration must be >= 0, got {X}")
    if X == 0.0:
        return 0.0
    return (_mu_bar_at(p, m, I_s, X, h) - p.R) * X


def dilution_law(
    cfg: ControlConfig,
    p: HaldaneParams,
    m: ExtinctionModel,
    I_s: float,
    X: float,
    h: float,
) -> float:
    """Dilution rate [1/d] commanded at state X.

    D_max at or above the threshold; Phi / X_star below it, clamped at zero
    (with a RegimeWarning) if the column is so turbid that Phi < 0, since a
    negative dilution is not physical.
    """
    validate_config(cfg, p)
    if not X > 0.0:
        raise DomainError(f"biomass concentration must be > 0, got {X}")
    if X >= cfg.X_bar:
        return cfg.D_max
    raw = phi(p, m, I_s, X, h) / cfg.X_star
    if raw < 0.0:
        warnings.warn(
            f"net growth negative at X={X:.6g} (mu_bar < R); dilution clamped to 0",
            RegimeWarning,
            stacklevel=2,
        )
        return 0.0
    return raw


def default_x_bar(
    p: HaldaneParams,
    m: ExtinctionModel,
    I_s: float,
    h: float,
    X_star: float,
    D_max: float,
) -> float:
    """Saturation threshold keeping the feedback loop sound.

    Starts from min(0.9 * D_max * X_star / (mu_max - R), 10 * X_star), which
    keeps the feasibility inequality strict, then backs off to 95% of the
    way to the net-growth zero crossing if that candidate would put part of
    the sub-threshold region into the respiration-dominated regime.
    """
    if p.R >= p.mu_max:
        raise ConfigError(
            f"growth cannot exceed respiration: mu_max={p.mu_max}, R={p.R}"
        )
    cand = min(0.9 * D_max * X_star / (p.mu_max - p.R), 10.0 * X_star)
    if not cand > X_star:
        raise ConfigError(
            f"no feasible threshold above X_star={X_star}: candidate {cand:.6g}"
        )
    if _mu_bar_at(p, m, I_s, cand, h) - p.R <= 0.0:
        if _mu_bar_at(p, m, I_s, X_star, h) - p.R <= 0.0:
            raise ConfigError(
                f"net growth already non-positive at X_star={X_star}; "
                "no sound threshold exists for this column"
            )
        x_zero = find_root(
            lambda x: _mu_bar_at(p, m, I_s, x, h) - p.R,
            Bracket(X_star, cand),
            Tolerance(rel=1e-12, abs=0.0, max_iter=200),
        )
        cand = X_star + 0.95 * (x_zero - X_star)
    return cand


@dataclass(frozen=True)
class SimTrace:
    """Closed-loop time series at the integrator's accepted steps."""

    t: np.ndarray
    X: np.ndarray
    D: np.ndarray
    mu_bar: np.ndarray
    Phi: np.ndarray
    Pi: np.ndarray


_SIM_TOL = Tolerance(rel=1e-8, abs=1e-9, max_iter=5_000_000)


def simulate_closed_loop(
    cfg: ControlConfig,
    p: HaldaneParams,
    m: ExtinctionModel,
    I_s: float,
    X0: float,
    h: float,
    t_end: float,
    tol: Tolerance = _SIM_TOL,
) -> SimTrace:
    """Integrate dX/dt = (mu_bar - R - D) X from X0 over [0, t_end] days."""
    validate_config(cfg, p)
    if not X0 > 0.0:
        raise DomainError(f"X0 must be > 0, got {X0}")
    if not t_end > 0.0:
        raise DomainError(f"t_end must be > 0, got {t_end}")

    warned = False

    def control(x: float) -> tuple[float, float, float]:
        """(mu_bar, D, Phi) at biomass x, with the sub-threshold clamp."""
        nonlocal warned
        mu_bar = _mu_bar_at(p, m, I_s, x, h)
        phi_x = (mu_bar - p.R) * x
        if x >= cfg.X_bar:
            return mu_bar, cfg.D_max, phi_x
        d = phi_x / cfg.X_star
        if d < 0.0:
            if not warned:
                warnings.warn(
                    f"net growth negative at X={x:.6g}; dilution clamped to 0",
                    RegimeWarning,
                    stacklevel=2,
                )
                warned = True
            d = 0.0
        return mu_bar, d, phi_x

    def rhs(t: float, y) -> list[float]:
        x = max(float(y[0]), 0.0)
        mu_bar, d, _ = control(x)
        return [(mu_bar - p.R - d) * x]

    trace = integrate_ode(rhs, [X0], (0.0, t_end), tol)
    xs = trace.y[:, 0]
    n = xs.size
    d_arr = np.empty(n)
    mu_arr = np.empty(n)
    phi_arr = np.empty(n)
    for i in range(n):
        mu_arr[i], d_arr[i], phi_arr[i] = control(float(xs[i]))
    return SimTrace(
        t=trace.t, X=xs, D=d_arr, mu_bar=mu_arr, Phi=phi_arr, Pi=phi_arr * h
    )


def convergence_time(
    trace: SimTrace, X_star: float, band: float = 1e-3
) -> float | None:
    """Earliest time after which |X - X_star| / X_star stays within band.

    None if the trace has not settled into the band by its end.
    """
    rel = np.abs(trace.X - X_star) / X_star
    inside = rel <= band
    if not inside[-1]:
        return None
    if bool(np.all(inside)):
        return float(trace.t[0])
    last_outside = int(np.nonzero(~inside)[0][-1])
    return float(trace.t[last_outside + 1])
