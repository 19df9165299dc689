"""Light field along the reactor depth.

Beer-Lambert attenuation under a biomass-dependent extinction law
eps(X) = alpha0 * X^s + alpha1, the depth-averaged received light, and the
least-squares calibration of alpha0 for sublinear exponents against the
measured linear (s = 1) reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRange, DomainError

__all__ = [
    "ExtinctionModel",
    "LightColumn",
    "extinction",
    "intensity_at",
    "mean_light",
    "fit_alpha0",
]


@dataclass(frozen=True)
class ExtinctionModel:
    """Biomass-dependent light extinction eps(X) = alpha0 * X^s + alpha1.

    alpha0: specific extinction of the algae [m^2/g for s = 1,
            m^(3s-1) g^-s in general]
    alpha1: background turbidity from non-algal material [1/m]
    s: concentration exponent, 0 < s <= 1
    """

    alpha0: float
    alpha1: float
    s: float

    def __post_init__(self) -> None:
        if not self.alpha0 > 0.0:
            raise ValueError(f"alpha0 must be > 0, got {self.alpha0}")
        if self.alpha1 < 0.0:
            raise ValueError(f"alpha1 must be >= 0, got {self.alpha1}")
        if not 0.0 < self.s <= 1.0:
            raise ValueError(f"s must lie in (0, 1], got {self.s}")


@dataclass(frozen=True)
class LightColumn:
    """A vertically mixed column: surface light I_s, depth h, biomass X."""

    I_s: float
    h: float
    X: float

    def __post_init__(self) -> None:
        if self.I_s < 0.0:
            raise ValueError(f"I_s must be >= 0, got {self.I_s}")
        if not self.h > 0.0:
            raise ValueError(f"h must be > 0, got {self.h}")
        if self.X < 0.0:
            raise ValueError(f"X must be >= 0, got {self.X}")


def extinction(m: ExtinctionModel, X: float) -> float:
    """Extinction coefficient eps(X) = alpha0 * X^s + alpha1 [1/m]."""
    if X < 0.0:
        raise DomainError(f"biomass concentration must be >= 0, got {X}")
    if X == 0.0:
        return m.alpha1
    return m.alpha0 * X**m.s + m.alpha1


def intensity_at(c: LightColumn, m: ExtinctionModel, z: float) -> float:
    """Beer-Lambert intensity I_s * exp(eps(X) * z) at height z in [-h, 0]."""
    if z > 0.0 or z < -c.h:
        raise DomainError(f"z must lie in [-{c.h}, 0], got {z}")
    return c.I_s * math.exp(extinction(m, c.X) * z)


def mean_light(c: LightColumn, m: ExtinctionModel) -> float:
    """Depth-averaged light intensity (1/h) * integral of I over [-h, 0].

    Equals I_s * (1 - exp(-Y)) / Y with Y = eps(X) * h; decreasing in the
    extinction, and -> I_s in the transparent limit Y -> 0, where a series
    expansion replaces the 0/0 form.
    """
    y = extinction(m, c.X) * c.h
    if y < 1e-8:
        return c.I_s * (1.0 - y / 2.0 + y * y / 6.0)
    return c.I_s * -math.expm1(-y) / y


def fit_alpha0(
    target: ExtinctionModel,
    s_new: float,
    X_range: tuple[float, float] = (0.0, 1000.0),
    grid_n: int = 1001,
) -> float:
    """Calibrate alpha0 for exponent s_new against the linear reference.

    Minimizes the sum of squared residuals (alpha0_ref * X_i - a * X_i^s_new)^2
    over a uniform concentration grid, which has the closed form
    a = alpha0_ref * sum(X^(1+s)) / sum(X^(2s)). The reference model must be
    the measured linear case (s = 1); s_new = 1 returns its alpha0 unchanged.
    """
    if target.s != 1.0:
        raise DomainError(f"reference extinction model must have s = 1, got {target.s}")
    if not 0.0 < s_new <= 1.0:
        raise DomainError(f"s_new must lie in (0, 1], got {s_new}")
    lo, hi = X_range
    if lo == hi:
        raise DegenerateRange(f"X_range has zero width: {X_range}")
    if lo > hi:
        raise DegenerateRange(f"X_range must be increasing: {X_range}")
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, got {grid_n}")
    if s_new == 1.0:
        return target.alpha0
    x = np.linspace(lo, hi, grid_n)
    return target.alpha0 * float(np.sum(x ** (1.0 + s_new)) / np.sum(x ** (2.0 * s_new)))
