"""Effective transport tensors of random media via spectral measures.

The package computes the complex effective conductivity and resistivity
of uniaxial polycrystals and two-component composites on periodic
lattices.  The pipeline: generate a random microstructure
(microgeometry), assemble the self-adjoint operator whose spectral
measure encodes the geometry (grid_ops, spectral_engine), evaluate the
integral representation at a given material contrast through four
mutually checking routes (effective_params), cross-validate against a
direct cell-problem solver (homogenize_oracle), and place the result
inside moment-constrained bound regions (bounds).  ``effmed`` on the
command line drives ensembles of all of the above (cli, report).
"""

from __future__ import annotations

from .effective_params import (
    ContrastSet,
    EffectiveTensor,
    effective_tensor,
    herglotz_scan,
    realization_measures,
    stieltjes_eval,
)
from .errors import (
    AnalyticityError,
    ConfigurationError,
    ConsistencyError,
    DegenerateProjectionError,
    DomainError,
    EffmedError,
    PoleProximityError,
    SolverError,
    SpectrumError,
)
from .grid_ops import Lattice, build_lattice
from .homogenize_oracle import (
    effective_from_cell,
    sigma_from_indicator,
    sigma_from_projection,
    solve_cell,
)
from .microgeometry import (
    IndicatorField,
    OrientationField,
    ProjectionField,
    checkerboard_polycrystal,
    load_microstructure,
    projection_field,
    rotation_matrix,
    save_microstructure,
    two_component_field,
)
from .bounds import (
    BoundsRegion,
    contains,
    first_order_region,
    region_to_json,
    second_order_region,
    wiener_interval,
)
from .spectral_engine import (
    KINDS,
    SpectralMeasure,
    SymmetricOperator,
    assemble,
    eigendecompose,
    measure_from_json,
    measure_to_json,
    nu_measure,
    sobolev_M,
    spectral_measure,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticityError",
    "BoundsRegion",
    "ConfigurationError",
    "ConsistencyError",
    "ContrastSet",
    "DegenerateProjectionError",
    "DomainError",
    "EffectiveTensor",
    "EffmedError",
    "IndicatorField",
    "KINDS",
    "Lattice",
    "OrientationField",
    "PoleProximityError",
    "ProjectionField",
    "SolverError",
    "SpectralMeasure",
    "SpectrumError",
    "SymmetricOperator",
    "assemble",
    "build_lattice",
    "checkerboard_polycrystal",
    "contains",
    "effective_from_cell",
    "effective_tensor",
    "eigendecompose",
    "first_order_region",
    "herglotz_scan",
    "load_microstructure",
    "measure_from_json",
    "measure_to_json",
    "nu_measure",
    "projection_field",
    "realization_measures",
    "region_to_json",
    "rotation_matrix",
    "save_microstructure",
    "second_order_region",
    "sigma_from_indicator",
    "sigma_from_projection",
    "sobolev_M",
    "solve_cell",
    "spectral_measure",
    "stieltjes_eval",
    "two_component_field",
    "wiener_interval",
    "__version__",
]
