"""Optimal operating points and dilution control for light-limited microalgae photobioreactors."""

__version__ = "0.1.0"

from .controller import (
    ControlConfig,
    SimTrace,
    convergence_time,
    default_x_bar,
    dilution_law,
    phi,
    simulate_closed_loop,
)
from .growth import (
    SECONDS_PER_DAY,
    HaldaneParams,
    HanParams,
    HanState,
    haldane_mu,
    han_mu,
    han_rhs,
    han_to_haldane,
)
from .light import ExtinctionModel, LightColumn, extinction, fit_alpha0, intensity_at, mean_light
from .numerics import Bracket, OdeTrace, Tolerance, find_root, integrate, integrate_ode, maximize_scalar
from .optimizer import (
    SequenceTrace,
    YOptResult,
    alternate,
    compensation_concentration,
    optimal_X_for_h,
    optimal_depth_for_X,
    y_opt,
    y_opt_scan,
)
from .params import PRESET_NAMES, ParameterSet, load_params_file, preset
from .productivity import (
    ProductivityPoint,
    evaluate_point,
    mean_growth_closed,
    mean_growth_optical,
    mean_growth_quadrature,
    optical_productivity,
    surface_productivity,
)

__all__ = [
    "__version__",
    "SECONDS_PER_DAY",
    "Bracket",
    "ControlConfig",
    "ExtinctionModel",
    "HaldaneParams",
    "HanParams",
    "HanState",
    "LightColumn",
    "OdeTrace",
    "ParameterSet",
    "PRESET_NAMES",
    "ProductivityPoint",
    "SequenceTrace",
    "SimTrace",
    "Tolerance",
    "YOptResult",
    "alternate",
    "compensation_concentration",
    "convergence_time",
    "default_x_bar",
    "dilution_law",
    "evaluate_point",
    "extinction",
    "find_root",
    "fit_alpha0",
    "haldane_mu",
    "han_mu",
    "han_rhs",
    "han_to_haldane",
    "integrate",
    "integrate_ode",
    "intensity_at",
    "load_params_file",
    "maximize_scalar",
    "mean_growth_closed",
    "mean_growth_optical",
    "mean_growth_quadrature",
    "mean_light",
    "optical_productivity",
    "optimal_X_for_h",
    "optimal_depth_for_X",
    "phi",
    "preset",
    "simulate_closed_loop",
    "surface_productivity",
    "y_opt",
    "y_opt_scan",
]
