"""Shared fixtures: small lattices and cached per-realization measures.

The expensive objects (eigendecompositions, measure families) are session
scoped so the module tests stay fast; anything that mutates state builds
its own throwaway copies.
"""

from __future__ import annotations

import numpy as np
import pytest

from effmed.effective_params import ContrastSet, realization_measures
from effmed.grid_ops import build_lattice
from effmed.microgeometry import (
    checkerboard_polycrystal,
    projection_field,
    two_component_field,
)

# the strongly complex contrast pair used throughout the plotted example
SIGMA1_FIG = 51.074 + 45.160j
SIGMA2_FIG = 3.070 + 0.0019j


@pytest.fixture(scope="session")
def lat2():
    return build_lattice(2, 8)


@pytest.fixture(scope="session")
def lat2_16():
    return build_lattice(2, 16)


@pytest.fixture(scope="session")
def lat3():
    return build_lattice(3, 4)


@pytest.fixture(scope="session")
def pf2(lat2):
    return projection_field(checkerboard_polycrystal(lat2, 4, seed=3))


@pytest.fixture(scope="session")
def pf2_16(lat2_16):
    return projection_field(checkerboard_polycrystal(lat2_16, 4, seed=12))


@pytest.fixture(scope="session")
def pf3(lat3):
    return projection_field(checkerboard_polycrystal(lat3, 2, seed=5))


@pytest.fixture(scope="session")
def chi2(lat2):
    return two_component_field(lat2, 0.4, seed=21)


@pytest.fixture(scope="session")
def cs_fig():
    return ContrastSet(SIGMA1_FIG, SIGMA2_FIG)


@pytest.fixture(scope="session")
def measures2(pf2, lat2):
    return realization_measures(pf2, lat2)


@pytest.fixture(scope="session")
def measures2_16(pf2_16, lat2_16):
    return realization_measures(pf2_16, lat2_16)


@pytest.fixture(scope="session")
def measures3(pf3, lat3):
    return realization_measures(pf3, lat3)


@pytest.fixture(scope="session")
def chi_measures(chi2, lat2):
    return realization_measures(chi2, lat2)


@pytest.fixture()
def rng():
    return np.random.default_rng(99)
