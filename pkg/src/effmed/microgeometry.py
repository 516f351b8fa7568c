"""Random microstructure generation: polycrystal textures and two-component
indicator fields on the periodic lattice.

A uniaxial polycrystal is described per site by a rank-one projection X1
onto the local crystal axis (X2 = I - X1 completes the identity).  Rather
than storing X1 directly, each site carries an orthonormal *frame* whose
row 0 is the crystal axis n, so X1 = n n^T exactly and the complementary
rows give a factorization of X2 used by the reduced spectral assembly.

Axis conventions (fixed by worked examples and ensemble statistics):

* 2D: axis n = (cos th, sin th); th = pi/4 gives X1 = [[1/2,1/2],[1/2,1/2]].
* 3D: frame is the composed rotation R = R1(th1) R2(th2) R3(th3) and the
  axis is its first row (c2*c3, -c2*s3, s2).  With i.i.d. uniform angles
  the mean axis masses are (1/4, 1/4, 1/2) — note this ensemble is *not*
  Haar-uniform on the sphere; it is the standard convention for this model.

Crystallites are axis-aligned equal cubic blocks ("checkerboard" grids),
one i.i.d. angle draw per block.  All generation is deterministic per seed
(numpy Generator seeded with the recorded value); ensembles derive member
seeds by the splitting rule seed -> (seed, realization_index).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid_ops import Lattice, build_lattice

__all__ = [
    "OrientationField",
    "ProjectionField",
    "IndicatorField",
    "rotation_matrix",
    "projection_field",
    "checkerboard_polycrystal",
    "two_component_field",
    "realization_rng",
    "save_microstructure",
    "load_microstructure",
]

Seed = "int | tuple[int, ...]"


def realization_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent generator for ensemble member ``index`` (splitting rule)."""
    return np.random.default_rng((base_seed, index))


# ---------------------------------------------------------------------------
# field containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrientationField:
    """Per-site crystal orientation angles.

    ``angles`` has shape (L,)*d for d=2 (single angle) and (L,)*d + (3,)
    for d=3 (th1, th2, th3), radians in [0, 2*pi).  Angles are constant on
    each crystallite block.
    """

    d: int
    L: int
    angles: np.ndarray
    crystallite_grid: int
    seed: object

    @property
    def lat(self) -> Lattice:
        return build_lattice(self.d, self.L)


@dataclass(frozen=True)
class ProjectionField:
    """Per-site orthonormal frame; row 0 is the crystal axis.

    X1 = axis (x) axis is the rank-one uniaxial projection; X2 = I - X1.
    Per site: X1 = X1^T, X1^2 = X1, rank 1, X1 + X2 = I, X1 X2 = 0 — all
    exact up to floating point because X1 is built as an outer product of
    a unit vector.
    """

    d: int
    L: int
    frame: np.ndarray  # shape (L,)*d + (d, d), orthonormal rows per site
    seed: object = None

    @property
    def lat(self) -> Lattice:
        return build_lattice(self.d, self.L)

    @property
    def axis(self) -> np.ndarray:
        return self.frame[..., 0, :]

    @property
    def X1(self) -> np.ndarray:
        n = self.axis
        return n[..., :, None] * n[..., None, :]

    @property
    def X2(self) -> np.ndarray:
        return np.eye(self.d) - self.X1


@dataclass(frozen=True)
class IndicatorField:
    """Two-component characteristic function chi1 (chi2 = 1 - chi1)."""

    d: int
    L: int
    chi1: np.ndarray  # shape (L,)*d, values in {0, 1}
    volume_fraction: float
    seed: object
    scheme: str = "site-iid"

    @property
    def lat(self) -> Lattice:
        return build_lattice(self.d, self.L)

    @property
    def empirical_fraction(self) -> float:
        return float(np.mean(self.chi1))


# ---------------------------------------------------------------------------
# rotations and projections
# ---------------------------------------------------------------------------

def rotation_matrix(angles) -> np.ndarray:
    """Rotation matrix from an angle tuple.

    A scalar (or 1-tuple) gives the 2D rotation [[c,-s],[s,c]]; a 3-tuple
    gives the composition R1(th1) R2(th2) R3(th3) of the basic rotations
    about the coordinate axes.  Orthogonal with determinant +1.
    """
    a = np.atleast_1d(np.asarray(angles, dtype=float))
    if a.shape == (1,):
        c, s = np.cos(a[0]), np.sin(a[0])
        return np.array([[c, -s], [s, c]])
    if a.shape == (3,):
        c1, s1 = np.cos(a[0]), np.sin(a[0])
        c2, s2 = np.cos(a[1]), np.sin(a[1])
        c3, s3 = np.cos(a[2]), np.sin(a[2])
        R1 = np.array([[1, 0, 0], [0, c1, -s1], [0, s1, c1]])
        R2 = np.array([[c2, 0, s2], [0, 1, 0], [-s2, 0, c2]])
        R3 = np.array([[c3, -s3, 0], [s3, c3, 0], [0, 0, 1]])
        return R1 @ R2 @ R3
    raise ConfigurationError(
        f"angle tuple must have 1 entry (2D) or 3 entries (3D), got shape {a.shape}"
    )


def _frames_2d(theta: np.ndarray) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    F = np.empty(theta.shape + (2, 2))
    F[..., 0, 0] = c
    F[..., 0, 1] = s
    F[..., 1, 0] = -s
    F[..., 1, 1] = c
    return F


def _frames_3d(angles: np.ndarray) -> np.ndarray:
    c1, s1 = np.cos(angles[..., 0]), np.sin(angles[..., 0])
    c2, s2 = np.cos(angles[..., 1]), np.sin(angles[..., 1])
    c3, s3 = np.cos(angles[..., 2]), np.sin(angles[..., 2])
    z = np.zeros_like(c1)
    o = np.ones_like(c1)
    R1 = np.stack(
        [o, z, z, z, c1, -s1, z, s1, c1], axis=-1
    ).reshape(c1.shape + (3, 3))
    R2 = np.stack(
        [c2, z, s2, z, o, z, -s2, z, c2], axis=-1
    ).reshape(c1.shape + (3, 3))
    R3 = np.stack(
        [c3, -s3, z, s3, c3, z, z, z, o], axis=-1
    ).reshape(c1.shape + (3, 3))
    return R1 @ R2 @ R3


def projection_field(of: OrientationField) -> ProjectionField:
    """Per-site uniaxial projections from an orientation field.

    2D: axis (cos th, sin th); 3D: axis = first row of the composed
    rotation.  The remaining frame rows span the transverse plane.
    """
    if of.d == 2:
        frame = _frames_2d(of.angles)
    else:
        frame = _frames_3d(of.angles)
    return ProjectionField(d=of.d, L=of.L, frame=frame, seed=of.seed)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _expand_blocks(block_values: np.ndarray, d: int, block: int) -> np.ndarray:
    out = block_values
    for ax in range(d):
        out = np.repeat(out, block, axis=ax)
    return out


def checkerboard_polycrystal(
    lat: Lattice,
    crystals_per_side: int,
    dist: str = "uniform",
    seed=0,
) -> OrientationField:
    """Equal-block crystallite texture with one i.i.d. angle draw per block.

    ``crystals_per_side`` must divide L.  ``dist`` currently supports only
    "uniform" (each angle component uniform on [0, 2*pi)); the hook exists
    so textured ensembles can be added without changing call sites.
    """
    nc = int(crystals_per_side)
    if nc < 1 or lat.L % nc != 0:
        raise ConfigurationError(
            f"crystallite grid {nc} does not divide lattice side {lat.L}"
        )
    if dist != "uniform":
        raise ConfigurationError(f"unknown angle distribution {dist!r}")
    rng = np.random.default_rng(seed)
    block = lat.L // nc
    if lat.d == 2:
        draws = rng.uniform(0.0, 2.0 * np.pi, size=(nc,) * lat.d)
    else:
        draws = rng.uniform(0.0, 2.0 * np.pi, size=(nc,) * lat.d + (3,))
    angles = _expand_blocks(draws, lat.d, block)
    return OrientationField(
        d=lat.d, L=lat.L, angles=angles, crystallite_grid=nc, seed=seed
    )


def two_component_field(
    lat: Lattice,
    p: float,
    seed=0,
    scheme: str = "site-iid",
    blocks_per_side: int | None = None,
) -> IndicatorField:
    """Random two-component indicator with target phase-1 fraction ``p``.

    scheme "site-iid" draws chi1 ~ Bernoulli(p) independently per site;
    scheme "block" draws per equal cubic block (``blocks_per_side`` must
    then divide L).  The realized fraction is exposed as
    ``IndicatorField.empirical_fraction``.
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"volume fraction must lie in [0,1], got {p}")
    rng = np.random.default_rng(seed)
    if scheme == "site-iid":
        chi1 = (rng.random(lat.shape) < p).astype(np.int8)
    elif scheme == "block":
        if blocks_per_side is None:
            raise ConfigurationError("scheme 'block' requires blocks_per_side")
        nb = int(blocks_per_side)
        if nb < 1 or lat.L % nb != 0:
            raise ConfigurationError(
                f"block grid {nb} does not divide lattice side {lat.L}"
            )
        draws = (rng.random((nb,) * lat.d) < p).astype(np.int8)
        chi1 = _expand_blocks(draws, lat.d, lat.L // nb)
    else:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    return IndicatorField(
        d=lat.d, L=lat.L, chi1=chi1, volume_fraction=float(p),
        seed=seed, scheme=scheme,
    )


# ---------------------------------------------------------------------------
# file format: one JSON header line, then a CSV payload (one row per site,
# C order).  Orientation columns: theta (2D) or theta1,theta2,theta3 (3D);
# indicator column: chi1.  Floats use 17 significant digits (round-trip).
# ---------------------------------------------------------------------------

def _seed_jsonable(seed):
    if isinstance(seed, (tuple, list)):
        return [int(s) for s in seed]
    return int(seed) if seed is not None else None


def save_microstructure(path, obj) -> None:
    """Write an OrientationField or IndicatorField to ``path``."""
    if isinstance(obj, OrientationField):
        header = {
            "kind": "orientation",
            "d": obj.d,
            "L": obj.L,
            "crystallites": obj.crystallite_grid,
            "seed": _seed_jsonable(obj.seed),
        }
        cols = ["theta"] if obj.d == 2 else ["theta1", "theta2", "theta3"]
        payload = obj.angles.reshape(obj.L**obj.d, len(cols))
        fmt = "%.17g"
    elif isinstance(obj, IndicatorField):
        header = {
            "kind": "indicator",
            "d": obj.d,
            "L": obj.L,
            "p": obj.volume_fraction,
            "seed": _seed_jsonable(obj.seed),
            "scheme": obj.scheme,
        }
        cols = ["chi1"]
        payload = obj.chi1.reshape(obj.L**obj.d, 1)
        fmt = "%d"
    else:
        raise ConfigurationError(f"cannot serialize {type(obj).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, payload, fmt=fmt, delimiter=",")


def load_microstructure(path):
    """Read a microstructure file written by ``save_microstructure``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        fh.readline()  # column names
        payload = np.loadtxt(fh, delimiter=",", ndmin=2)
    d, L = int(header["d"]), int(header["L"])
    seed = header.get("seed")
    if isinstance(seed, list):
        seed = tuple(seed)
    if header["kind"] == "orientation":
        shape = (L,) * d if d == 2 else (L,) * d + (3,)
        return OrientationField(
            d=d, L=L, angles=payload.reshape(shape),
            crystallite_grid=int(header["crystallites"]), seed=seed,
        )
    if header["kind"] == "indicator":
        return IndicatorField(
            d=d, L=L, chi1=payload.reshape((L,) * d).astype(np.int8),
            volume_fraction=float(header["p"]), seed=seed,
            scheme=header.get("scheme", "site-iid"),
        )
    raise ConfigurationError(f"unknown microstructure kind {header['kind']!r}")
