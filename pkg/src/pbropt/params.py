"""Parameter files and named presets.

Parameter files are flat TOML documents whose keys carry explicit unit
suffixes, e.g.::

    k_r_per_s = 6.8e-3
    k_d = 2.99e-4
    tau_s = 0.25
    sigma_m2_per_umol = 0.047
    k_yield = 8.7e-6
    R_per_s = 1.389e-6
    alpha0_m2_per_g = 0.2
    alpha1_per_m = 10.0
    s = 1.0
    I_s_umol_m2_s = 2000.0

alpha0_m2_per_g is always the measured linear-extinction (s = 1) reference;
for s < 1 the working alpha0 is calibrated against it by least squares over
the fit grid (overridable with the fit_* keys). Unknown keys are rejected.

The published photosynthetic-unit constants ship as presets in two variants
because the printed respiration rate is ten times too small to reproduce
the reported optimal optical depth: `table1-as-printed` keeps R = 1.389e-7
1/s, `table1-R-x10` uses 1.389e-6 1/s (the value consistent with
Y_opt = 6.337 at I_s = 2000).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ParameterFileError
from .growth import HaldaneParams, HanParams, han_to_haldane
from .light import ExtinctionModel, fit_alpha0

__all__ = [
    "ParameterSet",
    "PRESET_NAMES",
    "preset",
    "load_params_file",
]

_REQUIRED_KEYS = (
    "k_r_per_s",
    "k_d",
    "tau_s",
    "sigma_m2_per_umol",
    "k_yield",
    "R_per_s",
    "alpha0_m2_per_g",
    "alpha1_per_m",
    "s",
    "I_s_umol_m2_s",
)
_OPTIONAL_KEYS = ("fit_X_min_g_per_m3", "fit_X_max_g_per_m3", "fit_grid_n")


@dataclass(frozen=True)
class ParameterSet:
    """Everything a run needs: growth constants, extinction law, surface light."""

    name: str
    han: HanParams
    haldane: HaldaneParams
    extinction: ExtinctionModel
    alpha0_ref: float
    I_s: float


def _as_number(raw: Mapping[str, Any], key: str) -> float:
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParameterFileError(f"key {key!r} must be a number, got {value!r}")
    return float(value)


def _build(name: str, raw: Mapping[str, Any]) -> ParameterSet:
    unknown = sorted(set(raw) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS))
    if unknown:
        raise ParameterFileError(f"unknown parameter keys: {', '.join(unknown)}")
    missing = sorted(set(_REQUIRED_KEYS) - set(raw))
    if missing:
        raise ParameterFileError(f"missing parameter keys: {', '.join(missing)}")

    han = HanParams(
        k_r=_as_number(raw, "k_r_per_s"),
        k_d=_as_number(raw, "k_d"),
        tau=_as_number(raw, "tau_s"),
        sigma=_as_number(raw, "sigma_m2_per_umol"),
        k=_as_number(raw, "k_yield"),
        R=_as_number(raw, "R_per_s"),
    )
    alpha0_ref = _as_number(raw, "alpha0_m2_per_g")
    s = _as_number(raw, "s")
    reference = ExtinctionModel(alpha0=alpha0_ref, alpha1=0.0, s=1.0)
    if s == 1.0:
        alpha0 = alpha0_ref
    else:
        fit_lo = _as_number(raw, "fit_X_min_g_per_m3") if "fit_X_min_g_per_m3" in raw else 0.0
        fit_hi = _as_number(raw, "fit_X_max_g_per_m3") if "fit_X_max_g_per_m3" in raw else 1000.0
        grid_n = int(_as_number(raw, "fit_grid_n")) if "fit_grid_n" in raw else 1001
        alpha0 = fit_alpha0(reference, s, (fit_lo, fit_hi), grid_n)
    extinction = ExtinctionModel(alpha0=alpha0, alpha1=_as_number(raw, "alpha1_per_m"), s=s)
    return ParameterSet(
        name=name,
        han=han,
        haldane=han_to_haldane(han),
        extinction=extinction,
        alpha0_ref=alpha0_ref,
        I_s=_as_number(raw, "I_s_umol_m2_s"),
    )


_TABLE1_BASE: dict[str, float] = {
    "k_r_per_s": 6.8e-3,
    "k_d": 2.99e-4,
    "tau_s": 0.25,
    "sigma_m2_per_umol": 0.047,
    "k_yield": 8.7e-6,
    "alpha0_m2_per_g": 0.2,
    "alpha1_per_m": 10.0,
    "I_s_umol_m2_s": 2000.0,
}

_PRESETS: dict[str, dict[str, float]] = {
    "table1-as-printed": {**_TABLE1_BASE, "R_per_s": 1.389e-7, "s": 1.0},
    "table1-R-x10": {**_TABLE1_BASE, "R_per_s": 1.389e-6, "s": 1.0},
    # Chlorella pyrenoidosa extinction settings at the corrected respiration.
    "chlorella-s1": {**_TABLE1_BASE, "R_per_s": 1.389e-6, "s": 1.0},
    "chlorella-s0365": {**_TABLE1_BASE, "R_per_s": 1.389e-6, "s": 0.365},
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str) -> ParameterSet:
    """Build one of the bundled parameter sets by name."""
    try:
        raw = _PRESETS[name]
    except KeyError:
        raise ParameterFileError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}"
        ) from None
    return _build(name, raw)


def load_params_file(path: str | Path) -> ParameterSet:
    """Load a ParameterSet from a flat TOML parameter file."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParameterFileError(f"cannot parse {path}: {exc}") from exc
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ParameterFileError(
                f"parameter file must be flat, found table {key!r}"
            )
    return _build(path.stem, raw)
