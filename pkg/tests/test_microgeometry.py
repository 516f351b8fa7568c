"""Microstructure generators: rotations, projections, ensembles, file I/O."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effmed.errors import ConfigurationError
from effmed.grid_ops import build_lattice
from effmed.microgeometry import (
    IndicatorField,
    OrientationField,
    checkerboard_polycrystal,
    load_microstructure,
    projection_field,
    rotation_matrix,
    save_microstructure,
    two_component_field,
)

angles = st.floats(min_value=-10.0, max_value=10.0,
                   allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# rotation matrices
# ---------------------------------------------------------------------------

def test_rotation_2d_quarter_turn():
    R = rotation_matrix((math.pi / 2,))
    assert np.allclose(R, [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)


def test_rotation_2d_zero_is_identity():
    assert np.allclose(rotation_matrix((0.0,)), np.eye(2), atol=1e-15)


def test_rotation_3d_single_axis_blocks():
    # with only the third angle active, the composition reduces to a plane
    # rotation in the first two coordinates
    th = 0.7
    R = rotation_matrix((0.0, 0.0, th))
    c, s = math.cos(th), math.sin(th)
    assert np.allclose(R, [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
                       atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(a1=angles, a2=angles, a3=angles)
def test_rotation_3d_orthonormal(a1, a2, a3):
    R = rotation_matrix((a1, a2, a3))
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(R) - 1.0) < 1e-12


def test_rotation_arity_checked():
    with pytest.raises(ConfigurationError):
        rotation_matrix((0.1, 0.2))


# ---------------------------------------------------------------------------
# projection fields
# ---------------------------------------------------------------------------

def test_projection_quarter_pi_axis():
    # a crystal axis at 45 degrees projects onto span{(1,1)/sqrt(2)}
    lat = build_lattice(2, 4)
    of = OrientationField(d=2, L=4,
                         angles=np.full((4, 4), math.pi / 4),
                         crystallite_grid=(4, 4), seed=0)
    pf = projection_field(of)
    want = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(pf.X1[0, 0], want, atol=1e-14)


@pytest.mark.parametrize("d,L,blocks", [(2, 8, 4), (3, 4, 2)])
def test_projection_invariants(d, L, blocks):
    lat = build_lattice(d, L)
    pf = projection_field(checkerboard_polycrystal(lat, blocks, seed=9))
    X1, X2 = pf.X1, pf.X2
    eye = np.eye(d)
    assert np.max(np.abs(X1 + X2 - eye)) < 1e-14
    assert np.max(np.abs(np.einsum("...ij,...jk->...ik", X1, X1) - X1)) < 1e-14
    assert np.max(np.abs(np.einsum("...ij,...jk->...ik", X1, X2))) < 1e-14
    assert np.max(np.abs(X1 - np.swapaxes(X1, -1, -2))) < 1e-14
    # rank-one with unit trace
    assert np.max(np.abs(np.trace(X1, axis1=-2, axis2=-1) - 1.0)) < 1e-14
    # axis is the +1 eigenvector
    ax = pf.axis
    assert np.max(np.abs(np.einsum("...ij,...j->...i", X1, ax) - ax)) < 1e-13


def test_crystallite_blocks_are_constant():
    lat = build_lattice(2, 8)
    of = checkerboard_polycrystal(lat, 2, seed=1)  # 2x2 blocks of size 4
    a = of.angles
    for bi in range(2):
        for bj in range(2):
            blk = a[4 * bi:4 * bi + 4, 4 * bj:4 * bj + 4]
            assert np.all(blk == blk[0, 0])
    # and the four blocks are generically distinct
    assert len({a[0, 0], a[0, 4], a[4, 0], a[4, 4]}) == 4


def test_generator_determinism_and_independence():
    lat = build_lattice(2, 8)
    a = checkerboard_polycrystal(lat, 4, seed=42).angles
    b = checkerboard_polycrystal(lat, 4, seed=42).angles
    c = checkerboard_polycrystal(lat, 4, seed=43).angles
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    # pair seeds address disjoint streams
    d1 = checkerboard_polycrystal(lat, 4, seed=(7, 0)).angles
    d2 = checkerboard_polycrystal(lat, 4, seed=(7, 1)).angles
    assert not np.array_equal(d1, d2)


def test_divisibility_enforced():
    lat = build_lattice(2, 8)
    with pytest.raises(ConfigurationError):
        checkerboard_polycrystal(lat, 3, seed=0)


def test_two_component_fraction_and_schemes():
    lat = build_lattice(2, 16)
    f = two_component_field(lat, 0.3, seed=5)
    assert isinstance(f, IndicatorField)
    assert set(np.unique(f.chi1)) <= {0, 1}
    assert abs(f.empirical_fraction - np.mean(f.chi1)) < 1e-15
    # block scheme produces constant blocks
    fb = two_component_field(lat, 0.5, seed=5, scheme="block",
                             blocks_per_side=4)
    blk = fb.chi1[:4, :4]
    assert np.all(blk == blk[0, 0])
    with pytest.raises(ConfigurationError):
        two_component_field(lat, 1.5, seed=0)


def test_ensemble_mean_fraction():
    lat = build_lattice(2, 16)
    fr = [two_component_field(lat, 0.35, seed=(3, i)).empirical_fraction
          for i in range(40)]
    assert abs(np.mean(fr) - 0.35) < 0.02


# ---------------------------------------------------------------------------
# file round-trips
# ---------------------------------------------------------------------------

def test_save_load_polycrystal(tmp_path):
    lat = build_lattice(2, 8)
    of = checkerboard_polycrystal(lat, 4, seed=77)
    p = tmp_path / "poly.txt"
    save_microstructure(p, of)
    back = load_microstructure(p)
    assert isinstance(back, OrientationField)
    assert back.d == of.d and back.L == of.L
    assert np.max(np.abs(back.angles - of.angles)) == 0.0  # 17g round-trips
    # writing again is byte-identical
    p2 = tmp_path / "poly2.txt"
    save_microstructure(p2, of)
    assert p.read_bytes() == p2.read_bytes()


def test_save_load_polycrystal_3d(tmp_path):
    lat = build_lattice(3, 4)
    of = checkerboard_polycrystal(lat, 2, seed=8)
    p = tmp_path / "poly3.txt"
    save_microstructure(p, of)
    back = load_microstructure(p)
    assert back.angles.shape == of.angles.shape
    assert np.max(np.abs(back.angles - of.angles)) == 0.0


def test_save_load_indicator(tmp_path):
    lat = build_lattice(2, 8)
    f = two_component_field(lat, 0.4, seed=2)
    p = tmp_path / "chi.txt"
    save_microstructure(p, f)
    back = load_microstructure(p)
    assert isinstance(back, IndicatorField)
    assert np.array_equal(back.chi1, f.chi1)
    assert back.volume_fraction == f.volume_fraction
