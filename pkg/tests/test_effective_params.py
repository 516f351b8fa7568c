"""Effective tensors: Stieltjes evaluation, route checks, sweep output."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from effmed.effective_params import (
    SWEEP_COLUMNS,
    ContrastSet,
    effective_tensor,
    herglotz_scan,
    realization_measures,
    stieltjes_eval,
    sweep_rows,
    write_sweep_csv,
)
from effmed.errors import (
    AnalyticityError,
    ConfigurationError,
    ConsistencyError,
    PoleProximityError,
)
from effmed.microgeometry import OrientationField, projection_field
from effmed.spectral_engine import SpectralMeasure


def _atomic_measure(atoms):
    atoms = np.asarray(atoms, dtype=float)
    moments = tuple(float(np.sum(atoms[:, 1] * atoms[:, 0] ** n))
                    for n in range(6))
    return SpectralMeasure(kind="x1_gamma_x1", j=0, k=0, d=2, L=4, seed=0,
                           atoms=atoms, mass=float(np.sum(atoms[:, 1])),
                           moments=moments)


# ---------------------------------------------------------------------------
# Stieltjes evaluation
# ---------------------------------------------------------------------------

def test_stieltjes_single_atom_closed_form():
    # one atom of weight 1/2 at 1/4, evaluated at s = 2:
    #   F(2) = (1/2) / (2 - 1/4) = 2/7
    m = _atomic_measure([[0.25, 0.5]])
    assert abs(stieltjes_eval(m, 2.0) - 2.0 / 7.0) < 1e-15
    val = stieltjes_eval(m, 1.5 + 2.0j)
    want = 0.5 / (1.5 + 2.0j - 0.25)
    assert abs(val - want) < 1e-15


def test_stieltjes_pole_guard():
    m = _atomic_measure([[0.25, 0.5]])
    for s in (0.5, 1.0 + 1e-12, -1e-12, 0.3 + 1e-10j):
        with pytest.raises(PoleProximityError):
            stieltjes_eval(m, s)
    # just outside the guard band is fine
    assert np.isfinite(stieltjes_eval(m, -0.1))


# ---------------------------------------------------------------------------
# contrast bookkeeping
# ---------------------------------------------------------------------------

def test_contrast_variables():
    cs = ContrastSet(4.0, 1.0)
    assert cs.h == 4.0
    assert abs(cs.s - (-1.0 / 3.0)) < 1e-15
    assert abs(cs.t - (4.0 / 3.0)) < 1e-15
    assert abs(cs.s + cs.t - 1.0) < 1e-15


def test_contrast_guards():
    with pytest.raises(ConfigurationError):
        ContrastSet(1.0, 0.0)
    with pytest.raises(ConfigurationError):
        ContrastSet(2.0, 2.0).s  # h = 1 leaves s undefined
    with pytest.raises(ConfigurationError):
        ContrastSet(0.0, 1.0).z
    with pytest.raises(AnalyticityError):
        ContrastSet(-2.0, 1.0).require_admissible()
    with pytest.raises(AnalyticityError):
        ContrastSet(0.0, 1.0).require_admissible()
    # positive real and complex contrasts are admissible
    ContrastSet(4.0, 1.0).require_admissible()
    ContrastSet(1.0 + 2.0j, 1.0).require_admissible()


# ---------------------------------------------------------------------------
# effective tensors
# ---------------------------------------------------------------------------

def test_homogeneous_contrast_bypass(measures2):
    et = effective_tensor(measures2, ContrastSet(2.0, 2.0))
    assert np.max(np.abs(et.sigma_star - 2.0 * np.eye(2))) < 1e-15
    assert np.max(np.abs(et.rho_star - np.eye(2) / 2.0)) < 1e-15


def test_single_crystal_diagonal(lat2, cs_fig):
    # a uniform axis along e1 makes the medium homogeneous with tensor
    # diag(sigma1, sigma2); all four routes must reproduce it exactly
    of = OrientationField(d=2, L=lat2.L, angles=np.zeros(lat2.shape),
                          crystallite_grid=(lat2.L, lat2.L), seed=0)
    ms = realization_measures(projection_field(of), lat2)
    et = effective_tensor(ms, cs_fig)
    want = np.diag([cs_fig.sigma1, cs_fig.sigma2])
    scale = abs(cs_fig.sigma1)
    assert np.max(np.abs(et.sigma_star - want)) < 1e-10 * scale
    want_rho = np.diag([1.0 / cs_fig.sigma1, 1.0 / cs_fig.sigma2])
    assert np.max(np.abs(et.rho_star - want_rho)) < 1e-10


def test_symmetry_and_reciprocity(measures2, cs_fig):
    et = effective_tensor(measures2, cs_fig)
    assert abs(et.sigma_star[0, 1] - et.sigma_star[1, 0]) < 1e-12
    recip = et.rho_star @ et.sigma_star - np.eye(2)
    assert np.max(np.abs(recip)) < 1e-12
    # four routes stored and pairwise consistent
    assert set(et.by_route) == {"mu", "alpha", "eta", "kappa"}
    assert np.max(np.abs(et.by_route["mu"] - et.by_route["alpha"])) < 1e-10


def test_scaling_covariance_and_conjugation(measures2, cs_fig):
    base = effective_tensor(measures2, cs_fig)
    c = 2.3 - 0.7j
    scaled = effective_tensor(
        measures2, ContrastSet(c * cs_fig.sigma1, c * cs_fig.sigma2))
    assert np.max(np.abs(scaled.sigma_star - c * base.sigma_star)) \
        < 1e-12 * np.max(np.abs(base.sigma_star))
    conj = effective_tensor(
        measures2,
        ContrastSet(np.conj(cs_fig.sigma1), np.conj(cs_fig.sigma2)))
    assert np.max(np.abs(conj.sigma_star - np.conj(base.sigma_star))) \
        < 1e-12 * np.max(np.abs(base.sigma_star))


def test_tampered_measures_fail_identity(measures2, cs_fig):
    mu00 = measures2["alpha"][(0, 0)]
    bad = dataclasses.replace(
        mu00, atoms=mu00.atoms * np.array([1.0, 1.01]))
    measures = {fam: dict(ms) for fam, ms in measures2.items()}
    measures["alpha"][(0, 0)] = bad
    with pytest.raises(ConsistencyError):
        effective_tensor(measures, cs_fig)


def test_indicator_field_tensors(lat2, chi2, cs_fig):
    ms = realization_measures(chi2, lat2)
    et = effective_tensor(ms, cs_fig)
    recip = et.rho_star @ et.sigma_star - np.eye(2)
    assert np.max(np.abs(recip)) < 1e-10


# ---------------------------------------------------------------------------
# Herglotz scan
# ---------------------------------------------------------------------------

def test_herglotz_scan_clean(measures2):
    re = np.linspace(-3.0, 4.0, 5)
    im = np.logspace(-2.0, 0.0, 4)
    grid = (re[:, None] + 1j * im[None, :]).ravel()
    scan = herglotz_scan(measures2, grid)
    assert scan["ok"]
    assert scan["grid_size"] == grid.size
    assert scan["min_im"] > 0.0
    assert scan["violations"] == []


def test_herglotz_scan_rejects_lower_half(measures2):
    with pytest.raises(ConfigurationError):
        herglotz_scan(measures2, [2.0 - 1.0j])


# ---------------------------------------------------------------------------
# sweep rows / CSV
# ---------------------------------------------------------------------------

def test_sweep_rows_format(measures2, cs_fig):
    et = effective_tensor(measures2, cs_fig)
    rows = sweep_rows(et, (7, 3), 4)
    ncols = len(SWEEP_COLUMNS.split(","))
    assert len(rows) == 2 * 2 * 2  # routes x j x k
    routes = set()
    for r in rows:
        f = r.split(",")
        assert len(f) == ncols
        assert f[0] == "7/3"  # tuple seeds rendered base/index
        assert f[1] == "2"
        routes.add(f[10])
    assert routes == {"mu-eta", "alpha-kappa"}
    # %.17g re-parses to the exact binary float
    first = rows[0].split(",")
    assert float(first[11]) == et.by_route["mu"][0, 0].real
    assert float(first[12]) == et.by_route["mu"][0, 0].imag


def test_write_sweep_csv(tmp_path, measures2, cs_fig):
    et = effective_tensor(measures2, cs_fig)
    rows = sweep_rows(et, 5, 4)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(path, rows, comments=["alpha", "beta"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# alpha"
    assert lines[1] == "# beta"
    assert lines[2] == SWEEP_COLUMNS
    assert lines[3:] == rows
