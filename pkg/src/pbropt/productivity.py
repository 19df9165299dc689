"""Depth-averaged growth and productivity measures.

The depth average of the Haldane growth rate over a Beer-Lambert light
profile depends on (X, h) only through the optical depth Y = eps(X) * h,
and it integrates in closed form: substituting I = I_s * exp(-y) turns the
average into the integral of N / (a I^2 + b I + c) between the bottom and
surface intensities, which is a two-log, rational or arctangent expression
depending on the sign of the discriminant b^2 - 4ac. The quadrature form is
kept alongside as an independent cross-check.

Productivity comes in two flavours: per unit optical depth,
P(Y) = (mu_bar(Y) - R) * Y [1/d], and per unit surface area,
Pi(X, h) = (mu_bar - R) * X * h [g m^-2 d^-1], related by
Pi = (X / eps(X)) * P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError
from .growth import SECONDS_PER_DAY, HaldaneParams, HanParams, haldane_mu
from .light import ExtinctionModel, LightColumn, extinction
from .numerics import Tolerance, integrate

__all__ = [
    "ProductivityPoint",
    "mean_growth_optical",
    "mean_growth_closed",
    "mean_growth_quadrature",
    "optical_productivity",
    "surface_productivity",
    "evaluate_point",
]

GrowthParams = Union[HanParams, HaldaneParams]

# Relative guard band on the discriminant: within it the double-root formula
# is used, since both exact branches lose precision as the roots merge.
_DISCRIMINANT_GUARD = 1e-12

# Below this optical depth the antiderivative difference is dominated by
# cancellation; a Simpson rule on the (tiny) interval is exact to O(Y^4).
_SMALL_Y = 1e-6


def _rational_coefficients(p: GrowthParams) -> tuple[float, float, float, float, float]:
    """(N, a, b, c, rate_factor) with mu(I) = N*I/(a*I^2 + b*I + c).

    rate_factor converts the resulting mean growth rate to per-day.
    """
    if isinstance(p, HanParams):
        return (
            p.k_r * p.k * p.sigma,
            p.k_d * p.tau * p.sigma**2,
            p.k_r * p.tau * p.sigma,
            p.k_r,
            SECONDS_PER_DAY,
        )
    return (
        p.mu_max,
        p.mu_max / (p.theta * p.I_star**2),
        1.0 - 2.0 * p.mu_max / (p.theta * p.I_star),
        p.mu_max / p.theta,
        1.0,
    )


def _mu_rational(N: float, a: float, b: float, c: float, I: float) -> float:
    return N * I / ((a * I + b) * I + c)


def _reciprocal_quadratic_integral(
    a: float, b: float, c: float, I_b: float, I_s: float
) -> float:
    """Integral of dI / (a I^2 + b I + c) from I_b to I_s, by discriminant sign."""
    disc = b * b - 4.0 * a * c
    if abs(disc) < _DISCRIMINANT_GUARD * b * b:
        d = -b / (2.0 * a)
        return (I_s - I_b) / (a * (I_s - d) * (I_b - d))
    if disc > 0.0:
        root = math.sqrt(disc)
        d1 = (-b + root) / (2.0 * a)
        d2 = (-b - root) / (2.0 * a)
        return (1.0 / root) * math.log(
            abs(((I_s - d1) * (I_b - d2)) / ((I_b - d1) * (I_s - d2)))
        )
    q = math.sqrt(4.0 * a * c - b * b)
    return (2.0 / q) * (math.atan((2.0 * a * I_s + b) / q) - math.atan((2.0 * a * I_b + b) / q))


def mean_growth_optical(p: GrowthParams, I_s: float, Y: float) -> float:
    """Mean growth rate [1/d] over a column of optical depth Y under surface light I_s.

    Evaluates the closed-form antiderivative between the bottom intensity
    I_s * exp(-Y) and I_s. At vanishing optical depth the whole column sees
    the surface light, so mu_bar -> mu(I_s).
    """
    if Y < 0.0:
        raise DomainError(f"optical depth must be >= 0, got {Y}")
    if I_s < 0.0:
        raise DomainError(f"surface light must be >= 0, got {I_s}")
    N, a, b, c, rate = _rational_coefficients(p)
    if I_s == 0.0:
        return 0.0
    if Y == 0.0:
        return rate * _mu_rational(N, a, b, c, I_s)
    if Y < _SMALL_Y:
        f0 = _mu_rational(N, a, b, c, I_s)
        fm = _mu_rational(N, a, b, c, I_s * math.exp(-0.5 * Y))
        f1 = _mu_rational(N, a, b, c, I_s * math.exp(-Y))
        return rate * (f0 + 4.0 * fm + f1) / 6.0
    I_b = I_s * math.exp(-Y)
    return rate * (N / Y) * _reciprocal_quadratic_integral(a, b, c, I_b, I_s)


def mean_growth_closed(p: GrowthParams, c: LightColumn, m: ExtinctionModel) -> float:
    """Closed-form mean growth rate [1/d] for a concrete column and extinction law."""
    return mean_growth_optical(p, c.I_s, extinction(m, c.X) * c.h)


_QUAD_TOL = Tolerance(rel=1e-10, abs=0.0, max_iter=50)


def mean_growth_quadrature(
    p: HaldaneParams,
    c: LightColumn,
    m: ExtinctionModel,
    tol: Tolerance = _QUAD_TOL,
) -> float:
    """Mean growth rate [1/d] by adaptive quadrature of mu(I(X, z)) over depth.

    Independent of the closed form (works in physical depth coordinates and
    never forms the antiderivative), which makes it the oracle of choice for
    validating mean_growth_closed.
    """
    eps = extinction(m, c.X)

    def integrand(z: float) -> float:
        return haldane_mu(p, c.I_s * math.exp(eps * z))

    return integrate(integrand, -c.h, 0.0, tol) / c.h


def optical_productivity(p: HaldaneParams, I_s: float, Y: float) -> float:
    """Optical depth productivity P(Y) = (mu_bar(Y) - R) * Y [1/d].

    Equivalently the integral of (mu(I_s e^-y) - R) over [0, Y]; P(0) = 0 and
    P goes negative once the respiration of the dark lower layers outweighs
    the growth of the lit ones.
    """
    if Y == 0.0:
        return 0.0
    return (mean_growth_optical(p, I_s, Y) - p.R) * Y


def surface_productivity(
    p: HaldaneParams, m: ExtinctionModel, X: float, h: float, I_s: float
) -> float:
    """Surface biomass productivity Pi = (mu_bar(X, h) - R) * X * h [g m^-2 d^-1].

    Negative values are meaningful (respiration-dominated columns) and are
    returned unclamped.
    """
    if X < 0.0:
        raise DomainError(f"biomass concentration must be >= 0, got {X}")
    if not h > 0.0:
        raise DomainError(f"depth must be > 0, got {h}")
    if X == 0.0:
        return 0.0
    y = extinction(m, X) * h
    return (mean_growth_optical(p, I_s, y) - p.R) * X * h


@dataclass(frozen=True)
class ProductivityPoint:
    """A jointly evaluated operating point; Pi = (X/eps(X)) * P by construction."""

    X: float
    h: float
    mu_bar: float
    P: float
    Pi: float


def evaluate_point(
    p: HaldaneParams, m: ExtinctionModel, I_s: float, X: float, h: float
) -> ProductivityPoint:
    """Evaluate mu_bar, P and Pi consistently at one (X, h) operating point."""
    y = extinction(m, X) * h
    mu_bar = mean_growth_optical(p, I_s, y)
    return ProductivityPoint(
        X=X,
        h=h,
        mu_bar=mu_bar,
        P=(mu_bar - p.R) * y,
        Pi=(mu_bar - p.R) * X * h,
    )
