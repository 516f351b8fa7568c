"""Lattice operator tests: symbols, adjointness, projections, curl route."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effmed.errors import ConfigurationError
from effmed.grid_ops import (
    build_lattice,
    curl,
    curl_adjoint,
    divergence_adjoint,
    gamma_apply,
    gamma_dense,
    gamma_kernel,
    gradient,
    inner,
    inv_laplacian,
    pair,
    site_mean,
    upsilon_apply,
    upsilon_apply_curl,
    upsilon_dense,
)


# ---------------------------------------------------------------------------
# construction and Fourier symbols
# ---------------------------------------------------------------------------

def test_build_lattice_validates():
    with pytest.raises(ConfigurationError):
        build_lattice(4, 8)
    with pytest.raises(ConfigurationError):
        build_lattice(2, 1)


def test_laplacian_symbol_values_L4():
    # |g_i(k)|^2 = 2 - 2 cos(2 pi k_i / L); frozen values for L = 4:
    # k=(0,0) -> 0, (1,0) -> 2, (2,0) -> 4, (1,1) -> 4, (2,2) -> 8
    lat = build_lattice(2, 4)
    lap = lat.symbols.lap
    assert lap[0, 0] == 0.0
    assert np.isclose(lap[1, 0], 2.0, atol=1e-14)
    assert np.isclose(lap[2, 0], 4.0, atol=1e-14)
    assert np.isclose(lap[1, 1], 4.0, atol=1e-14)
    assert np.isclose(lap[2, 2], 8.0, atol=1e-14)


def test_symbol_matches_difference_operator(lat2):
    # the symbol of the forward difference is exp(2 pi i k/L) - 1
    rng = np.random.default_rng(0)
    f = rng.standard_normal(lat2.shape)
    gf = gradient(f, lat2)
    fh = np.fft.fftn(f)
    for i in range(2):
        want = np.fft.ifftn(fh * lat2.symbols.g[..., i]).real
        assert np.max(np.abs(gf[..., i] - want)) < 1e-12


# ---------------------------------------------------------------------------
# adjointness under the site-average inner product
# ---------------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.sampled_from([2, 3]))
def test_gradient_divergence_adjoint(seed, d):
    lat = build_lattice(d, 4 if d == 3 else 6)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape)
    v = rng.standard_normal(lat.vshape) + 1j * rng.standard_normal(lat.vshape)
    # <grad f, v> = <f, div_adj v> under the site-average inner product
    lhs = inner(gradient(f, lat), v, lat)
    rhs = inner(f, divergence_adjoint(v, lat), lat)
    assert abs(lhs - rhs) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.sampled_from([2, 3]))
def test_curl_adjointness(seed, d):
    lat = build_lattice(d, 4)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(lat.vshape)
    w = rng.standard_normal(lat.vshape if d == 3 else lat.shape)
    cv = curl(v, lat)
    lhs = np.mean(np.conj(cv) * w) if d == 2 else inner(cv, w, lat)
    rhs = inner(v, curl_adjoint(w, lat), lat)
    assert abs(lhs - rhs) < 1e-12


# ---------------------------------------------------------------------------
# projections: idempotency, orthogonality, decomposition
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("d,L", [(2, 8), (3, 4)])
def test_projection_identities(d, L):
    lat = build_lattice(d, L)
    rng = np.random.default_rng(17)
    for _ in range(10):
        v = rng.standard_normal(lat.vshape)
        gv = gamma_apply(v, lat)
        uv = upsilon_apply(v, lat)
        mean = site_mean(v, lat)
        # Gamma + Upsilon + mean reconstructs the field
        recon = gv + uv + mean[(None,) * d + (slice(None),)]
        assert np.max(np.abs(recon - v)) < 1e-12
        # idempotency and mutual annihilation
        assert np.max(np.abs(gamma_apply(gv, lat) - gv)) < 1e-12
        assert np.max(np.abs(upsilon_apply(uv, lat) - uv)) < 1e-12
        assert np.max(np.abs(gamma_apply(uv, lat))) < 1e-12
        assert np.max(np.abs(upsilon_apply(gv, lat))) < 1e-12
        # both projections kill constants
        assert np.max(np.abs(gamma_apply(np.ones(lat.vshape), lat))) < 1e-12
        assert np.max(np.abs(upsilon_apply(np.ones(lat.vshape), lat))) < 1e-12


@pytest.mark.parametrize("d,L", [(2, 6), (3, 4)])
def test_gamma_self_adjoint(d, L):
    lat = build_lattice(d, L)
    rng = np.random.default_rng(4)
    a = rng.standard_normal(lat.vshape) + 1j * rng.standard_normal(lat.vshape)
    b = rng.standard_normal(lat.vshape) + 1j * rng.standard_normal(lat.vshape)
    assert abs(inner(gamma_apply(a, lat), b, lat)
               - inner(a, gamma_apply(b, lat), lat)) < 1e-12


def test_gamma_reproduces_gradients(lat2):
    # range characterization: Gamma fixes gradient fields entirely
    rng = np.random.default_rng(8)
    f = rng.standard_normal(lat2.shape)
    gf = gradient(f, lat2)
    assert np.max(np.abs(gamma_apply(gf, lat2) - gf)) < 1e-12
    # and Upsilon annihilates them
    assert np.max(np.abs(upsilon_apply(gf, lat2))) < 1e-13


@pytest.mark.parametrize("d,L", [(2, 8), (3, 4), (3, 6)])
def test_upsilon_curl_route(d, L):
    # the curl-based construction reproduces I - Gamma - mean exactly
    lat = build_lattice(d, L)
    rng = np.random.default_rng(23)
    for _ in range(5):
        v = rng.standard_normal(lat.vshape)
        assert np.max(np.abs(upsilon_apply_curl(v, lat)
                             - upsilon_apply(v, lat))) < 1e-12


def test_inv_laplacian_inverts(lat2):
    # div_adj(grad(.)) has Fourier symbol |g|^2, so the multiplier 1/lap is
    # its pseudo-inverse on mean-zero scalars
    rng = np.random.default_rng(3)
    f = rng.standard_normal(lat2.shape)
    f -= f.mean()
    u = inv_laplacian(f, lat2)
    assert np.max(np.abs(
        divergence_adjoint(gradient(u, lat2), lat2) - f)) < 1e-12


# ---------------------------------------------------------------------------
# dense assemblies agree with the FFT route
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("d,L", [(2, 4), (3, 3)])
def test_dense_matches_fft(d, L):
    lat = build_lattice(d, L)
    G = gamma_dense(lat)
    U = upsilon_dense(lat)
    rng = np.random.default_rng(11)
    v = rng.standard_normal(lat.vshape)
    vec = v.reshape(-1)  # site-major (site, component) flattening
    assert np.max(np.abs(G @ vec - gamma_apply(v, lat).reshape(-1))) < 1e-12
    assert np.max(np.abs(U @ vec - upsilon_apply(v, lat).reshape(-1))) < 1e-12
    # projector algebra at the matrix level
    assert np.max(np.abs(G @ G - G)) < 1e-12
    assert np.max(np.abs(U @ U - U)) < 1e-12
    assert np.max(np.abs(G @ U)) < 1e-12
    assert np.max(np.abs(G - G.T)) < 1e-13


def test_gamma_kernel_row_sums(lat2):
    # sum over all lattice translations of the kernel equals the zero-mode
    # weight, which Gamma annihilates
    K = gamma_kernel(lat2)
    sums = K.sum(axis=-1)
    assert np.max(np.abs(sums)) < 1e-12


def test_pair_vs_inner(lat2):
    rng = np.random.default_rng(2)
    a = rng.standard_normal(lat2.vshape) + 1j * rng.standard_normal(lat2.vshape)
    b = rng.standard_normal(lat2.vshape)
    # bilinear pairing = Hermitian inner product with the right conjugated
    assert abs(pair(a, b, lat2) - inner(a, np.conj(b), lat2)) < 1e-14
