"""Optimal operating points for the productivity measures.

The optical depth productivity P(Y) has a closed-form maximizer: the depth
at which gross growth at the reactor bottom exactly balances respiration
(the compensation condition). Because mu(I) = R is a quadratic in I, the
bottom intensity is a root of that quadratic and Y_opt = ln(I_s / I_bottom)
comes out explicitly, with the branch picked by whether the surface is
above or below compensation.

Surface productivity Pi(X, h) inherits this optimum exactly only when the
extinction is linear in biomass with no background turbidity; otherwise the
depth direction and the concentration direction have different optima, and
the alternating sequence h_n = Y_opt / eps(X_{n-1}),
X_n = argmax_X Pi(X, h_n) climbs toward the turbidity-free ceiling
(s = 1), or grows without bound like X^(1-s) (s < 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import BracketMiss, DomainError, InfeasibleRespiration
from .growth import HaldaneParams, haldane_mu
from .light import ExtinctionModel, extinction
from .numerics import Bracket, Tolerance, maximize_scalar
from .productivity import optical_productivity, surface_productivity

__all__ = [
    "YOptResult",
    "XhOptimum",
    "SequenceStep",
    "SequenceTrace",
    "compensation_roots",
    "y_opt",
    "y_opt_scan",
    "optimal_depth_for_X",
    "compensation_concentration",
    "dPi_dX",
    "optimal_X_for_h",
    "alternate",
    "compensation_improvement_bound",
]

BRANCH_SURFACE_ABOVE_R = "surface_above_R"
BRANCH_SURFACE_AT_OR_BELOW_R = "surface_at_or_below_R"

# Default cap for the automatic concentration-bracket expansion. Standalone
# optimizations stay within physically meaningful biomass; the alternating
# sequence overrides this (its whole point is the asymptotic regime).
DEFAULT_X_CAP = 1e6


@dataclass(frozen=True)
class YOptResult:
    """Maximizer of the optical depth productivity.

    Y_opt: optimal optical depth [-]
    branch: which sign branch of the compensation quadratic applied
    I_bottom: light at the bottom of the optimal column; mu(I_bottom) = R
    """

    Y_opt: float
    branch: str
    I_bottom: float


def _compensation_quadratic(p: HaldaneParams) -> tuple[float, float, float, float]:
    """Coefficients of mu(I) = R as a*I^2 - negb*I + c = 0, plus discriminant."""
    a = p.R * p.mu_max / (p.theta * p.I_star**2)
    negb = p.mu_max - p.R + 2.0 * p.R * p.mu_max / (p.theta * p.I_star)
    c = p.R * p.mu_max / p.theta
    disc = (p.mu_max - p.R) * (p.mu_max - p.R + 4.0 * p.R * p.mu_max / (p.theta * p.I_star))
    return a, negb, c, disc


def compensation_roots(p: HaldaneParams) -> tuple[float, float]:
    """The two light intensities (I_minus, I_plus) where mu(I) = R.

    Both are positive when R < mu_max: I_minus below I_star (compensation by
    dim light), I_plus above it (compensation by photoinhibition). Evaluated
    in the cancellation-free rationalized forms.
    """
    if p.R >= p.mu_max:
        raise InfeasibleRespiration(
            f"no compensation point: R={p.R} >= mu_max={p.mu_max}"
        )
    a, negb, c, disc = _compensation_quadratic(p)
    root = math.sqrt(disc)
    return 2.0 * c / (negb + root), (negb + root) / (2.0 * a)


def y_opt(p: HaldaneParams, I_s: float) -> YOptResult:
    """Closed-form optical depth maximizing P, with its compensation branch.

    When the surface grows faster than it respires, the optimal bottom light
    is the dim-side compensation root; when the surface is at or below
    compensation (over-inhibited), it is the bright-side root, i.e. the
    column is only deep enough to bring the surface back to compensation.
    """
    if p.R >= p.mu_max:
        raise InfeasibleRespiration(
            f"no compensation point: R={p.R} >= mu_max={p.mu_max}"
        )
    if not I_s > 0.0:
        raise DomainError(f"surface light must be > 0, got {I_s}")
    i_minus, i_plus = compensation_roots(p)
    if haldane_mu(p, I_s) > p.R:
        branch, i_bottom = BRANCH_SURFACE_ABOVE_R, i_minus
    else:
        branch, i_bottom = BRANCH_SURFACE_AT_OR_BELOW_R, i_plus
    return YOptResult(Y_opt=math.log(I_s / i_bottom), branch=branch, I_bottom=i_bottom)


def y_opt_scan(
    p: HaldaneParams, I_s: float, y_max: float = 30.0, step: float = 1e-5
) -> tuple[float, float]:
    """Brute-force (argmax, max) of P on a uniform grid over [0, y_max].

    Vectorized cumulative-trapezoid scan, independent of the closed form;
    resolution is limited by the grid step.
    """
    n = int(round(y_max / step)) + 1
    y = np.linspace(0.0, y_max, n)
    I = I_s * np.exp(-y)
    ratio = I / p.I_star - 1.0
    mu = p.mu_max * I / (I + (p.mu_max / p.theta) * ratio * ratio)
    f = mu - p.R
    P = np.empty(n)
    P[0] = 0.0
    np.cumsum((f[1:] + f[:-1]) * (0.5 * (y_max / (n - 1))), out=P[1:])
    idx = int(np.argmax(P))
    return float(y[idx]), float(P[idx])


def optimal_depth_for_X(
    p: HaldaneParams, m: ExtinctionModel, I_s: float, X: float
) -> float:
    """Depth h* = Y_opt / eps(X) maximizing Pi(X, .) for a fixed biomass.

    At h* the net growth rate at the reactor bottom is zero.
    """
    eps = extinction(m, X)
    if not eps > 0.0:
        raise DomainError(f"extinction must be positive, got eps({X})={eps}")
    return y_opt(p, I_s).Y_opt / eps


def compensation_concentration(
    p: HaldaneParams, m: ExtinctionModel, I_s: float, h: float
) -> float:
    """Biomass X0 with eps(X0) * h = Y_opt, or 0.0 if even clear water is darker.

    X0 is where the bottom of a column of depth h sits exactly at
    compensation; for s = 1 with no background turbidity it is also the
    argmax of Pi(., h).
    """
    if not h > 0.0:
        raise DomainError(f"depth must be > 0, got {h}")
    target = y_opt(p, I_s).Y_opt / h - m.alpha1
    if target <= 0.0:
        return 0.0
    return (target / m.alpha0) ** (1.0 / m.s)


def dPi_dX(
    p: HaldaneParams, m: ExtinctionModel, I_s: float, X: float, h: float
) -> float:
    """Central finite-difference slope of Pi(., h) at X, step 1e-6 * X."""
    step = max(1e-6 * abs(X), 1e-9)
    lo = max(X - step, 0.0)
    hi = X + step
    return (
        surface_productivity(p, m, hi, h, I_s) - surface_productivity(p, m, lo, h, I_s)
    ) / (hi - lo)


class XhOptimum(NamedTuple):
    X: float
    Pi: float


_X_OPT_TOL = Tolerance(rel=1e-10, abs=1e-12, max_iter=400)


def optimal_X_for_h(
    p: HaldaneParams,
    m: ExtinctionModel,
    I_s: float,
    h: float,
    x_cap: float = DEFAULT_X_CAP,
    tol: Tolerance = _X_OPT_TOL,
) -> XhOptimum:
    """Concentration maximizing Pi(., h) for a fixed depth.

    The search bracket starts at the compensation concentration (a valid
    lower bound: above it, raising X still pays as long as the turbidity
    share of the extinction is nonzero) and expands geometrically until the
    productivity slope turns negative.

    Raises BracketMiss if Pi is still increasing when the expansion cap is
    reached.
    """
    if not h > 0.0:
        raise DomainError(f"depth must be > 0, got {h}")
    x_lo = compensation_concentration(p, m, I_s, h)
    x_hi = 4.0 * x_lo + 100.0
    while dPi_dX(p, m, I_s, x_hi, h) >= 0.0:
        if x_hi >= x_cap:
            raise BracketMiss(
                f"Pi(., h={h}) still increasing at X={x_hi:.6g} (cap {x_cap:.3g})"
            )
        x_hi = min(2.0 * x_hi, x_cap)

    x_hat, pi_hat = maximize_scalar(
        lambda x: surface_productivity(p, m, x, h, I_s), Bracket(x_lo, x_hi), tol
    )
    # The maximum can sit exactly on the compensation bound (no-turbidity,
    # linear-extinction case). Snapping there when it is not measurably worse
    # makes that fixed point exact instead of jittering at search tolerance.
    pi_lo = surface_productivity(p, m, x_lo, h, I_s)
    if pi_lo >= pi_hat - 4e-13 * max(1.0, abs(pi_hat)):
        return XhOptimum(X=x_lo, Pi=pi_lo)
    return XhOptimum(X=x_hat, Pi=pi_hat)


@dataclass(frozen=True)
class SequenceStep:
    """One alternating-optimization iterate."""

    n: int
    X: float
    h: float
    Y: float
    Pi: float
    bottom_net_growth: float


@dataclass(frozen=True)
class SequenceTrace:
    """Iterates of the alternating depth/concentration optimization."""

    X0: float
    steps: list[SequenceStep]
    converged: bool
    stop_reason: str  # fixed_point | depth_floor | n_max | x_overflow


# The alternating sequence intentionally leaves the physically plausible
# biomass range (its limits are asymptotic statements), so its bracket cap
# and stop guard sit close to the float64 ceiling instead of DEFAULT_X_CAP.
_SEQUENCE_X_CAP = 1e250
_SEQUENCE_X_STOP = 1e200


def alternate(
    p: HaldaneParams,
    m: ExtinctionModel,
    I_s: float,
    X0: float,
    n_max: int,
    h_min: Optional[float] = None,
) -> SequenceTrace:
    """Alternate optimal-depth and optimal-concentration steps from X0.

    Each iterate sets h_n = Y_opt / eps(X_{n-1}) (the depth optimum for the
    previous concentration, putting the bottom exactly at compensation) and
    then re-optimizes the concentration at that depth. Stops at n_max, at a
    depth floor h_min, at a fixed point (|X_n - X_{n-1}| below 1e-10
    relative, reachable only for s = 1 with zero turbidity), or when the
    iterates overflow the representable range.
    """
    if not X0 > 0.0:
        raise DomainError(f"X0 must be > 0, got {X0}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    y_res = y_opt(p, I_s)

    steps: list[SequenceStep] = []
    converged = False
    stop_reason = "n_max"
    x_prev = X0
    for n in range(1, n_max + 1):
        h_n = y_res.Y_opt / extinction(m, x_prev)
        if h_min is not None and h_n < h_min:
            stop_reason = "depth_floor"
            break
        x_n, pi_n = optimal_X_for_h(p, m, I_s, h_n, x_cap=_SEQUENCE_X_CAP)
        y_n = extinction(m, x_n) * h_n
        bottom_net = haldane_mu(p, I_s * math.exp(-y_n)) - p.R
        steps.append(
            SequenceStep(n=n, X=x_n, h=h_n, Y=y_n, Pi=pi_n, bottom_net_growth=bottom_net)
        )
        if abs(x_n - x_prev) <= 1e-10 * abs(x_n):
            converged = True
            stop_reason = "fixed_point"
            break
        x_prev = x_n
        if x_n > _SEQUENCE_X_STOP:
            stop_reason = "x_overflow"
            break
    return SequenceTrace(X0=X0, steps=steps, converged=converged, stop_reason=stop_reason)


def compensation_improvement_bound(
    p: HaldaneParams, m: ExtinctionModel, I_s: float
) -> float:
    """Upper end of the concentration interval that provably beats compensation.

    For s = 1 with background turbidity alpha1 > 0, any X in
    (X0, alpha1 * P(Y_opt) / (alpha0 * R * Y_opt)) yields a strictly higher
    Pi at the compensation depth of X0 than X0 itself does.
    """
    y_res = y_opt(p, I_s)
    p_opt = optical_productivity(p, I_s, y_res.Y_opt)
    return m.alpha1 * p_opt / (m.alpha0 * p.R * y_res.Y_opt)
