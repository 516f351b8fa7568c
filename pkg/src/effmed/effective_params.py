"""Effective tensors from spectral measures via Stieltjes representations.

With contrast variables h = sigma1/sigma2, s = 1/(1-h), t = 1-s, the four
normalized tensor functions are rational in the spectral data:

    m(h)  = sigma*/sigma2 = I - F(s),   F from the mu measures   (X1 Gamma X1)
    w(z)  = sigma*/sigma1 = I - G(t),   G from the alpha measures (X2 Gamma X2)
    mt(h) = sigma1 rho*   = I - E(s),   E from the eta measures  (X2 Upsilon X2)
    wt(z) = sigma2 rho*   = I - H(t),   H from the kappa measures (X1 Upsilon X1)

(two-component media use the chi-sandwich measures in the same slots).
Each effective tensor is therefore computable twice from independent
operator routes, and sigma* and rho* are computed from *different*
projections entirely — their product being the identity is a stringent
whole-pipeline check, enforced here rather than assumed.

Material properties enter only through s and t; all microgeometry lives
in the measures.  Evaluation refuses contrasts on the branch cut
h in (-inf, 0] and spectral variables within 1e-9 of the spectrum [0,1]
rather than regularizing, because silently smoothed values would poison
the bound-containment checks downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    AnalyticityError,
    ConfigurationError,
    ConsistencyError,
    PoleProximityError,
)
from .grid_ops import Lattice
from .microgeometry import IndicatorField, ProjectionField
from .spectral_engine import SpectralMeasure, assemble, spectral_measure

__all__ = [
    "ContrastSet",
    "EffectiveTensor",
    "ROUTE_KINDS",
    "stieltjes_eval",
    "realization_measures",
    "effective_tensor",
    "herglotz_scan",
    "sweep_rows",
    "write_sweep_csv",
    "SWEEP_COLUMNS",
]

ROUTE_AGREE_TOL = 1e-8
IDENTITY_TOL = 1e-10
RECIPROCITY_TOL = 1e-8
POLE_GUARD = 1e-9

# measure role -> operator kind, per material family
ROUTE_KINDS = {
    "x": {
        "mu": "x1_gamma_x1",
        "alpha": "x2_gamma_x2",
        "eta": "x2_upsilon_x2",
        "kappa": "x1_upsilon_x1",
    },
    "chi": {
        "mu": "chi1_gamma_chi1",
        "alpha": "chi2_gamma_chi2",
        "eta": "chi2_upsilon_chi2",
        "kappa": "chi1_upsilon_chi1",
    },
}


@dataclass(frozen=True)
class ContrastSet:
    """Complex component conductivities and the derived contrast variables."""

    sigma1: complex
    sigma2: complex

    def __post_init__(self):
        if self.sigma2 == 0:
            raise ConfigurationError("sigma2 must be nonzero (h undefined)")

    @property
    def h(self) -> complex:
        return self.sigma1 / self.sigma2

    @property
    def z(self) -> complex:
        if self.sigma1 == 0:
            raise ConfigurationError("sigma1 is zero: z = 1/h undefined")
        return self.sigma2 / self.sigma1

    @property
    def s(self) -> complex:
        if self.h == 1:
            raise ConfigurationError("h = 1: s = 1/(1-h) undefined")
        return 1.0 / (1.0 - self.h)

    @property
    def t(self) -> complex:
        return 1.0 - self.s

    def require_admissible(self) -> None:
        """Reject contrasts on the branch cut h in (-inf, 0]."""
        h = complex(self.h)
        if h.imag == 0.0 and h.real <= 0.0:
            raise AnalyticityError(
                f"contrast h = {h} lies on (-inf, 0]; the Stieltjes "
                "representations are not analytic there"
            )


@dataclass(frozen=True)
class EffectiveTensor:
    """sigma* and rho* with the per-route values that produced them.

    ``sigma_star`` is the mu-route value and ``rho_star`` the eta-route
    value; ``by_route`` retains all four for inspection.  Construction
    fails if the independent routes disagree beyond tolerance.
    """

    sigma_star: np.ndarray
    rho_star: np.ndarray
    contrast: ContrastSet
    route: dict = dc_field(default_factory=lambda: {"sigma": "mu", "rho": "eta"})
    by_route: dict = dc_field(default_factory=dict)
    meta: dict = dc_field(default_factory=dict)


def _dist_to_unit_interval(s: complex) -> float:
    x = complex(s)
    dx = max(0.0, -x.real, x.real - 1.0)
    return float(np.hypot(dx, x.imag))


def stieltjes_eval(m: SpectralMeasure, s: complex) -> complex:
    """F(s) = sum_i w_i / (s - lambda_i), guarded away from [0, 1].

    The representation holds only off the spectrum; points within 1e-9 of
    the interval are rejected (PoleProximityError) instead of smoothed.
    """
    if _dist_to_unit_interval(s) < POLE_GUARD:
        raise PoleProximityError(
            f"spectral variable s = {s} is within {POLE_GUARD} of [0,1]"
        )
    return complex(np.sum(m.weights / (complex(s) - m.lambdas)))


def realization_measures(field, lat: Lattice, pairs=None) -> dict:
    """All four measure families of one realization.

    Returns {"mu"|"alpha"|"eta"|"kappa": {(j,k): SpectralMeasure}} using
    the uniaxial sandwiches for a ProjectionField and the indicator
    sandwiches for an IndicatorField.  Four assemblies and
    eigendecompositions total; extraction per (j,k) pair is then cheap.
    """
    family = "x" if isinstance(field, ProjectionField) else "chi"
    if pairs is None:
        pairs = [(j, k) for j in range(lat.d) for k in range(j, lat.d)]
    out = {}
    for role, kind in ROUTE_KINDS[family].items():
        op = assemble(kind, field, lat)
        ms = {}
        for j, k in pairs:
            ms[(j, k)] = spectral_measure(op, j, k)
            if j != k:
                ms[(k, j)] = ms[(j, k)]
        out[role] = ms
        op._eig = None  # release eigenvectors; measures retain the atoms
    return out


def _tensor_from_measures(ms: dict, svar: complex, d: int) -> np.ndarray:
    out = np.zeros((d, d), dtype=complex)
    for j in range(d):
        for k in range(d):
            key = (j, k) if (j, k) in ms else (k, j)
            if key not in ms:
                raise ConfigurationError(f"measure pair {(j, k)} missing")
            out[j, k] = (1.0 if j == k else 0.0) - stieltjes_eval(ms[key], svar)
    return out


def effective_tensor(measures: dict, cs: ContrastSet,
                     route_tol: float = ROUTE_AGREE_TOL,
                     identity_tol: float = IDENTITY_TOL,
                     reciprocity_tol: float = RECIPROCITY_TOL) -> EffectiveTensor:
    """Evaluate sigma* and rho* through all four routes and cross-check.

    Checks performed (failures raise ConsistencyError naming the
    realization): mu- vs alpha-route sigma* agreement; eta- vs kappa-route
    rho* agreement (both to route_tol relative, via the identities
    m = h w and mt = h wt, enforced to identity_tol in normalized form);
    and reciprocity rho* sigma* = I to reciprocity_tol.
    """
    sample = next(iter(measures["mu"].values()))
    d = sample.d
    ident = f"d={sample.d} L={sample.L} seed={sample.seed}"
    base_meta = {"realization": ident, "d": sample.d, "L": sample.L,
                 "seed": sample.seed}
    h = cs.h
    if h == 1:
        # homogeneous contrast: the physical answer is exact and s is undefined
        sig = cs.sigma2 * np.eye(d, dtype=complex)
        rho = np.eye(d, dtype=complex) / cs.sigma2
        return EffectiveTensor(
            sigma_star=sig, rho_star=rho, contrast=cs,
            by_route={"mu": sig, "alpha": sig, "eta": rho, "kappa": rho},
            meta={**base_meta, "h=1": True},
        )
    cs.require_admissible()
    s, t = cs.s, cs.t
    m = _tensor_from_measures(measures["mu"], s, d)      # sigma*/sigma2
    w = _tensor_from_measures(measures["alpha"], t, d)   # sigma*/sigma1
    mt = _tensor_from_measures(measures["eta"], s, d)    # sigma1 rho*
    wt = _tensor_from_measures(measures["kappa"], t, d)  # sigma2 rho*

    scale_m = max(np.max(np.abs(m)), 1e-300)
    if np.max(np.abs(m - h * w)) > identity_tol * max(1.0, scale_m):
        raise ConsistencyError(
            f"m(h) != h w(z) beyond tolerance on realization {ident}: "
            f"max deviation {np.max(np.abs(m - h * w)):.3e}"
        )
    scale_mt = max(np.max(np.abs(mt)), 1e-300)
    if np.max(np.abs(mt - h * wt)) > identity_tol * max(1.0, scale_mt):
        raise ConsistencyError(
            f"mt(h) != h wt(z) beyond tolerance on realization {ident}: "
            f"max deviation {np.max(np.abs(mt - h * wt)):.3e}"
        )

    sig_mu = cs.sigma2 * m
    sig_al = cs.sigma1 * w
    rho_eta = mt / cs.sigma1
    rho_ka = wt / cs.sigma2
    if np.max(np.abs(sig_mu - sig_al)) > route_tol * np.max(np.abs(sig_mu)):
        raise ConsistencyError(
            f"sigma* route disagreement on realization {ident}: "
            f"{np.max(np.abs(sig_mu - sig_al)):.3e}"
        )
    if np.max(np.abs(rho_eta - rho_ka)) > route_tol * np.max(np.abs(rho_eta)):
        raise ConsistencyError(
            f"rho* route disagreement on realization {ident}: "
            f"{np.max(np.abs(rho_eta - rho_ka)):.3e}"
        )
    recip = rho_eta @ sig_mu - np.eye(d)
    if np.max(np.abs(recip)) > reciprocity_tol:
        raise ConsistencyError(
            f"reciprocity rho* sigma* != I on realization {ident}: "
            f"max deviation {np.max(np.abs(recip)):.3e}"
        )
    return EffectiveTensor(
        sigma_star=sig_mu, rho_star=rho_eta, contrast=cs,
        by_route={"mu": sig_mu, "alpha": sig_al, "eta": rho_eta,
                  "kappa": rho_ka},
        meta=base_meta,
    )


def herglotz_scan(measures: dict, h_grid) -> dict:
    """Sign audit of Im m_kk(h) over an upper-half-plane grid of h.

    m is Herglotz: Im h > 0 must give Im m_kk(h) > 0 for the diagonal
    (positive-measure) components.  Report-only: returns the violation
    list and the minimum imaginary part seen, never raises on signs.
    """
    sample = next(iter(measures["mu"].values()))
    d = sample.d
    violations = []
    min_im = np.inf
    h_grid = np.asarray(h_grid, dtype=complex).ravel()
    for h in h_grid:
        if h.imag <= 0:
            raise ConfigurationError(f"scan grid must lie in Im h > 0, got {h}")
        s = 1.0 / (1.0 - h)
        for k in range(d):
            val = 1.0 - stieltjes_eval(measures["mu"][(k, k)], s)
            min_im = min(min_im, val.imag)
            if val.imag <= 0:
                violations.append({"h": h, "k": k, "m_kk": val})
    return {
        "grid_size": int(h_grid.size),
        "violations": violations,
        "min_im": float(min_im),
        "ok": not violations,
    }


# ---------------------------------------------------------------------------
# sweep output
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "seed,d,L,crystallites,re_sigma1,im_sigma1,re_sigma2,im_sigma2,"
    "j,k,route,re_sigma_star,im_sigma_star,re_rho_star,im_rho_star"
)


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def sweep_rows(et: EffectiveTensor, seed, crystallites: int) -> list[str]:
    """CSV rows for one realization/contrast: one row per component pair
    and route pairing ("mu-eta" uses the s-variable measures for both
    tensors, "alpha-kappa" the t-variable ones)."""
    cs = et.contrast
    d = et.sigma_star.shape[0]
    if isinstance(seed, (tuple, list)):
        seed = "/".join(str(int(x)) for x in seed)
    rows = []
    for route, sig, rho in (
        ("mu-eta", et.by_route["mu"], et.by_route["eta"]),
        ("alpha-kappa", et.by_route["alpha"], et.by_route["kappa"]),
    ):
        for j in range(d):
            for k in range(d):
                rows.append(",".join([
                    str(seed), str(d), str(et.meta.get("L", "")),
                    str(crystallites),
                    _f17(cs.sigma1.real), _f17(cs.sigma1.imag),
                    _f17(cs.sigma2.real), _f17(cs.sigma2.imag),
                    str(j), str(k), route,
                    _f17(sig[j, k].real), _f17(sig[j, k].imag),
                    _f17(rho[j, k].real), _f17(rho[j, k].imag),
                ]))
    return rows


def write_sweep_csv(path, rows: list[str], comments: list[str] | None = None) -> None:
    """Write sweep rows with the canonical header; ``comments`` become
    leading '#' lines (the CLI puts the timestamp there, keeping the data
    payload byte-deterministic)."""
    with open(path, "w", encoding="utf-8") as fh:
        for c in comments or []:
            fh.write(f"# {c}\n")
        fh.write(SWEEP_COLUMNS + "\n")
        for r in rows:
            fh.write(r + "\n")
