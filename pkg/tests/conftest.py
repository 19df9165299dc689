"""Shared fixtures: published parameter sets and their derived objects."""

import numpy as np
import pytest

from pbropt import ExtinctionModel, preset


@pytest.fixture(scope="session")
def pset_r10():
    """Photosynthetic-unit constants with the corrected (x10) respiration."""
    return preset("table1-R-x10")


@pytest.fixture(scope="session")
def pset_printed():
    """Photosynthetic-unit constants exactly as published."""
    return preset("table1-as-printed")


@pytest.fixture(scope="session")
def pset_s0365():
    """Sublinear extinction variant (s = 0.365, alpha0 refit)."""
    return preset("chlorella-s0365")


@pytest.fixture(scope="session")
def haldane_r10(pset_r10):
    return pset_r10.haldane


@pytest.fixture(scope="session")
def han_r10(pset_r10):
    return pset_r10.han


@pytest.fixture(scope="session")
def chlorella(pset_r10):
    """Linear extinction with background turbidity (alpha0=0.2, alpha1=10)."""
    return pset_r10.extinction


@pytest.fixture(scope="session")
def clear_linear():
    """Linear extinction, zero background turbidity."""
    return ExtinctionModel(alpha0=0.2, alpha1=0.0, s=1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260811)
