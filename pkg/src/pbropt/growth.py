"""Growth-rate models for light-limited, photoinhibited microalgae.

Two equivalent descriptions are provided: the Haldane curve mu(I) used by
the optimization layer, and the mechanistic three-state photosynthetic-unit
ODE system whose quasi-steady-state growth rate reduces exactly to that
Haldane curve. The identification map between the two parameter sets lives
here as well.

Unit policy: raw photosynthetic-unit parameters are per-second (as they are
measured); everything downstream works per-day. The conversion happens
exactly once, inside han_to_haldane, to keep factor-86400 slips out of the
rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

SECONDS_PER_DAY = 86400.0

__all__ = [
    "SECONDS_PER_DAY",
    "HanParams",
    "HaldaneParams",
    "HanState",
    "haldane_mu",
    "han_mu",
    "han_to_haldane",
    "han_rhs",
    "han_ode_rhs",
    "han_reduced_c_rhs",
]


@dataclass(frozen=True)
class HanParams:
    """Photosynthetic-unit parameters, all in raw per-second units.

    k_r: repair rate [1/s]
    k_d: damage ratio [-]
    tau: turnover time of the photosynthetic units [s]
    sigma: specific photon absorption [m^2/umol]
    k: yield factor [-]
    R: respiration rate [1/s] (carried alongside, not part of the state ODE)
    """

    k_r: float
    k_d: float
    tau: float
    sigma: float
    k: float
    R: float

    def __post_init__(self) -> None:
        for name in ("k_r", "k_d", "tau", "sigma", "k", "R"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"HanParams.{name} must be > 0")
        if not self.k_d < 1.0:
            raise ValueError(f"HanParams.k_d must be < 1, got {self.k_d}")


@dataclass(frozen=True)
class HaldaneParams:
    """Haldane growth-curve parameters in the canonical per-day system.

    theta: initial slope [1/d per umol.m^-2.s^-1]
    mu_max: maximum growth rate [1/d]
    I_star: light intensity at which mu attains mu_max [umol.m^-2.s^-1]
    R: respiration rate [1/d]

    mu_max > R is required by the optimizer and controller layers but is a
    property of the operating point, not of the parameter object, so it is
    checked at those entry points rather than here.
    """

    theta: float
    mu_max: float
    I_star: float
    R: float

    def __post_init__(self) -> None:
        for name in ("theta", "mu_max", "I_star", "R"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"HaldaneParams.{name} must be > 0")


@dataclass(frozen=True)
class HanState:
    """Relative frequencies of the open (A), excited (B) and inhibited (C) states."""

    A: float
    B: float
    C: float

    def __post_init__(self) -> None:
        for name in ("A", "B", "C"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"HanState.{name} must be >= 0")
        total = self.A + self.B + self.C
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"HanState frequencies must sum to 1, got {total!r}")


def haldane_mu(p: HaldaneParams, I: float) -> float:
    """Haldane growth rate [1/d] at light intensity I [umol.m^-2.s^-1].

    mu(I) = mu_max * I / (I + (mu_max/theta) * (I/I_star - 1)^2)

    mu(0) = 0, the maximum mu_max is attained exactly at I = I_star, and the
    quadratic penalty models photoinhibition above it.
    """
    if I < 0.0:
        raise DomainError(f"light intensity must be >= 0, got {I}")
    if I == 0.0:
        return 0.0
    ratio = I / p.I_star - 1.0
    return p.mu_max * I / (I + (p.mu_max / p.theta) * ratio * ratio)


def han_mu(p: HanParams, I: float) -> float:
    """Quasi-steady-state growth rate [1/s] of the three-state system.

    mu(I) = k*sigma*I / ((k_d/k_r)*tau*(sigma*I)^2 + tau*sigma*I + 1)
    """
    if I < 0.0:
        raise DomainError(f"light intensity must be >= 0, got {I}")
    sI = p.sigma * I
    return p.k * sI / ((p.k_d / p.k_r) * p.tau * sI * sI + p.tau * sI + 1.0)


def han_to_haldane(p: HanParams) -> HaldaneParams:
    """Identify the Haldane parameters equivalent to a Han parameter set.

    theta = k*sigma, I_star = sqrt(k_r/(k_d*tau*sigma^2)) and
    mu_max = k*sigma / (tau*sigma + 2*sqrt(k_d*tau*sigma^2/k_r)); the two
    rate-like quantities (theta, mu_max) and R convert from per-second to
    per-day here, I_star is a light intensity and passes through unchanged.
    """
    theta_per_s = p.k * p.sigma
    i_star = math.sqrt(p.k_r / (p.k_d * p.tau * p.sigma**2))
    mu_max_per_s = theta_per_s / (
        p.tau * p.sigma + 2.0 * math.sqrt(p.k_d * p.tau * p.sigma**2 / p.k_r)
    )
    return HaldaneParams(
        theta=theta_per_s * SECONDS_PER_DAY,
        mu_max=mu_max_per_s * SECONDS_PER_DAY,
        I_star=i_star,
        R=p.R * SECONDS_PER_DAY,
    )


def han_rhs(p: HanParams, state: HanState, I: float) -> tuple[float, float, float]:
    """Time derivatives (dA/dt, dB/dt, dC/dt) [1/s] of the state frequencies.

    Written in the two-equation form obtained by eliminating B = 1 - A - C;
    dB/dt = -(dA/dt + dC/dt) so the frequency sum is conserved exactly.
    """
    if I < 0.0:
        raise DomainError(f"light intensity must be >= 0, got {I}")
    sI = p.sigma * I
    dA = -(sI + 1.0 / p.tau) * state.A + (1.0 - state.C) / p.tau
    dC = -(p.k_r + p.k_d * sI) * state.C + p.k_d * sI * (1.0 - state.A)
    return dA, -(dA + dC), dC


def han_ode_rhs(p: HanParams, I: float):
    """rhs(t, y) closure over y = [A, C] for integrating the reduced system."""

    inv_tau = 1.0 / p.tau
    sI = p.sigma * I

    def rhs(t: float, y) -> list[float]:
        a, c = float(y[0]), float(y[1])
        return [
            -(sI + inv_tau) * a + (1.0 - c) * inv_tau,
            -(p.k_r + p.k_d * sI) * c + p.k_d * sI * (1.0 - a),
        ]

    return rhs


def han_reduced_c_rhs(p: HanParams, c: float, I: float) -> float:
    """Slow inhibition dynamics after the open state is slaved to its nullcline.

    With A = (1 - C)/(tau*sigma*I + 1) the inhibited-state equation becomes
    dC/dt = -(k_d*tau*(sigma*I)^2/(tau*sigma*I + 1) + k_r) * C
            + k_d*tau*(sigma*I)^2/(tau*sigma*I + 1).
    """
    sI = p.sigma * I
    beta = p.k_d * p.tau * sI * sI / (p.tau * sI + 1.0)
    return -(beta + p.k_r) * c + beta
