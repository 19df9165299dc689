"""Randomized-case generators shared between unit and acceptance tests."""

import numpy as np

from pbropt import ExtinctionModel, HanParams, LightColumn, extinction


def loguniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def make_han_params(rng: np.random.Generator, branch: str) -> HanParams:
    """HanParams whose growth-curve quadratic sits on the requested branch.

    The discriminant of a I^2 + b I + c with a = k_d tau sigma^2,
    b = k_r tau sigma, c = k_r has the sign of k_r tau - 4 k_d, so k_d is
    placed below, exactly at, or above k_r tau / 4. The "zero" placement is
    float-exact (division by 4 is lossless), which exercises the guarded
    double-root formula.
    """
    k_r = loguniform(rng, 1e-3, 2e-2)
    tau = loguniform(rng, 0.05, 1.0)
    sigma = loguniform(rng, 0.005, 0.2)
    k = loguniform(rng, 1e-6, 1e-4)
    quarter = k_r * tau / 4.0
    if branch == "positive":
        k_d = float(rng.uniform(0.05, 0.8)) * quarter
    elif branch == "zero":
        k_d = quarter
    elif branch == "negative":
        k_d = float(rng.uniform(1.3, 20.0)) * quarter
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return HanParams(k_r=k_r, k_d=k_d, tau=tau, sigma=sigma, k=k, R=loguniform(rng, 1e-8, 1e-5))


def make_column_and_model(
    rng: np.random.Generator, *, s: float | None = None
) -> tuple[LightColumn, ExtinctionModel]:
    """A random operating point with optical depth controlled into [0.05, 25]."""
    model = ExtinctionModel(
        alpha0=loguniform(rng, 0.05, 1.0),
        alpha1=float(rng.uniform(0.0, 20.0)),
        s=s if s is not None else float(rng.uniform(0.2, 1.0)),
    )
    x = float(rng.uniform(1.0, 500.0))
    y_target = loguniform(rng, 0.05, 25.0)
    h = y_target / extinction(model, x)
    i_s = float(rng.uniform(100.0, 3000.0))
    return LightColumn(I_s=i_s, h=h, X=x), model
