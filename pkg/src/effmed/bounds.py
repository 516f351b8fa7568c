"""Forward bounds on diagonal effective values in the complex plane.

Knowing only the measure mass mu0 (first order), or the mass and first
moment (second order), the possible values of a diagonal sigma*_kk fill a
compact convex region.  Both orders exploit the two reciprocal
representations sigma* = sigma2 (1 - F(s)) and sigma* = sigma1 / (1 - E(s)):
the conductivity-side measure has mass mu0 and the resistivity-side
measure mass eta0 = 1 - mu0, and each representation contributes one
constraint whose intersection is the bound.

First order: the two constraint sets are disks.  Each boundary arc

    sigma2 (1 - mu0/(s - lam)),   lam  in [0, eta0]
    sigma1 / (1 - eta0/(s - lam~)), lam~ in [0, mu0]

is extended to its full circle (the Moebius image of the real lam line,
which also passes through sigma2 / sigma1 at lam = infinity); membership
is the intersection of the two disks, the correct side of each circle
identified by a known interior point, the midpoint of the two lens
vertices (the arithmetic and harmonic Wiener values, where the arcs
meet).  For real contrast the lens collapses to the Wiener interval.

Second order: the admissible measures with prescribed (mass, first
moment) form a convex set whose extreme points are one- and two-atom
"principal" measures; sweeping the free atom position traces a closed
loop of transform values, and because the transform is *linear* in the
measure, the value set is exactly the convex hull of that loop.
Membership of a value v is therefore tested in the measure planes —
1 - v/sigma2 against the F-hull and 1 - sigma1/v against the E-hull —
where convexity is rigorous; hulls are never intersected in the
sigma*-plane, where the Moebius map would not preserve convexity.

The resistivity-side first moment defaults to the closure
eta1 = mu0 eta0 - mu1 (exact when the mean projection is isotropic, i.e.
off-diagonal masses vanish); callers holding the measured eta1 of a
specific realization should pass it for exact per-realization regions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .effective_params import ContrastSet
from .errors import ConfigurationError

__all__ = [
    "BoundsRegion",
    "first_order_region",
    "second_order_region",
    "contains",
    "wiener_interval",
    "region_to_json",
]

VERTEX_TOL = 1e-10


@dataclass
class BoundsRegion:
    """Bound region for one diagonal component.

    ``order`` counts the moments known beyond the mass (0 or 1).  ``kind``
    selects the geometry payload: "point", "interval" (real contrast),
    "lens" (first order, two disks), or "hulls" (second order, one convex
    hull per measure plane).  ``arcs`` always carries sigma*-plane
    boundary samples for export and plotting; ``vertices`` the arc
    junction points.  For "lens" regions the vertices are the corners of
    the intersection (arithmetic and harmonic means); for "hulls" regions
    they are the junction values of the two extremal conductivity-route
    families, which sit on that route's boundary but may be cut off by
    the resistivity-route constraint.
    """

    order: int
    mu0: float
    mu1: float | None
    contrast: ContrastSet
    kind: str
    arcs: list = dc_field(default_factory=list)        # sigma*-plane samples
    vertices: list = dc_field(default_factory=list)    # sigma*-plane joints
    interval: tuple | None = None                      # real case (lo, hi)
    geometry: dict = dc_field(default_factory=dict)
    meta: dict = dc_field(default_factory=dict)


def _is_real_contrast(cs: ContrastSet) -> bool:
    h = complex(cs.h)
    return h.imag == 0.0


def wiener_interval(mu0: float, cs: ContrastSet) -> tuple[float, float]:
    """Harmonic/arithmetic-mean interval for real positive contrast."""
    s1, s2 = complex(cs.sigma1), complex(cs.sigma2)
    eta0 = 1.0 - mu0
    arith = mu0 * s1.real + eta0 * s2.real
    harm = 1.0 / (mu0 / s1.real + eta0 / s2.real)
    return (min(harm, arith), max(harm, arith))


def _circle_through(p1: complex, p2: complex, p3: complex):
    """Center and radius of the circle through three points."""
    A = np.array([
        [2 * (p2.real - p1.real), 2 * (p2.imag - p1.imag)],
        [2 * (p3.real - p1.real), 2 * (p3.imag - p1.imag)],
    ])
    rhs = np.array([
        abs(p2) ** 2 - abs(p1) ** 2,
        abs(p3) ** 2 - abs(p1) ** 2,
    ])
    det = np.linalg.det(A)
    if abs(det) < 1e-14 * max(1.0, abs(p1), abs(p2), abs(p3)) ** 2:
        raise ConfigurationError("circle through collinear points")
    cx, cy = np.linalg.solve(A, rhs)
    c = complex(cx, cy)
    return c, abs(p1 - c)


def _point_region(order, mu0, mu1, cs, p: complex) -> BoundsRegion:
    return BoundsRegion(
        order=order, mu0=mu0, mu1=mu1, contrast=cs, kind="point",
        arcs=[[p]], vertices=[p], geometry={"point": p},
    )


def first_order_region(mu0: float, cs: ContrastSet,
                       nsamples: int = 256) -> BoundsRegion:
    """Mass-only bound: lens between the two reciprocal-route arcs.

    Complex contrast gives the two-disk lens; real contrast the Wiener
    interval; mu0 in {0, 1} and h = 1 degenerate to a point.
    """
    if not 0.0 <= mu0 <= 1.0:
        raise ConfigurationError(f"mass {mu0} outside [0, 1]")
    s1, s2 = complex(cs.sigma1), complex(cs.sigma2)
    if cs.h == 1:
        return _point_region(0, mu0, None, cs, s2)
    cs.require_admissible()
    if mu0 == 0.0:
        return _point_region(0, mu0, None, cs, s2)
    if mu0 == 1.0:
        return _point_region(0, mu0, None, cs, s1)
    eta0 = 1.0 - mu0
    if _is_real_contrast(cs):
        lo, hi = wiener_interval(mu0, cs)
        return BoundsRegion(
            order=0, mu0=mu0, mu1=None, contrast=cs, kind="interval",
            arcs=[[complex(lo), complex(hi)]],
            vertices=[complex(lo), complex(hi)], interval=(lo, hi),
        )
    s = cs.s

    def arc_A(lam):
        return s2 * (1.0 - mu0 / (s - lam))

    def arc_B(lam):
        return s1 / (1.0 - eta0 / (s - lam))

    tA = np.linspace(0.0, eta0, nsamples)
    tB = np.linspace(0.0, mu0, nsamples)
    A_pts = arc_A(tA)
    B_pts = arc_B(tB)
    v_arith = mu0 * s1 + eta0 * s2
    v_harm = s1 * s2 / (mu0 * s2 + eta0 * s1)
    # the arcs must join at the Wiener vertices
    for got, want in [(A_pts[0], v_arith), (B_pts[-1], v_arith),
                      (A_pts[-1], v_harm), (B_pts[0], v_harm)]:
        if abs(got - want) > VERTEX_TOL * max(1.0, abs(want)):
            raise ConfigurationError(
                f"arc endpoint {got} does not meet vertex {want}"
            )
    cA, rA = _circle_through(arc_A(0.0), arc_A(eta0 / 2), arc_A(eta0))
    cB, rB = _circle_through(arc_B(0.0), arc_B(mu0 / 2), arc_B(mu0))
    mid = 0.5 * (v_arith + v_harm)
    sideA = 1.0 if abs(mid - cA) <= rA else -1.0
    sideB = 1.0 if abs(mid - cB) <= rB else -1.0
    return BoundsRegion(
        order=0, mu0=mu0, mu1=None, contrast=cs, kind="lens",
        arcs=[list(A_pts), list(B_pts)],
        vertices=[v_arith, v_harm],
        geometry={"circles": [(cA, rA, sideA), (cB, rB, sideB)]},
    )


# ---------------------------------------------------------------------------
# second order: principal two-atom measures
# ---------------------------------------------------------------------------

def _principal_transforms(m0: float, m1: float, svar: complex,
                          bgrid_lo: np.ndarray, bgrid_hi: np.ndarray):
    """Transform values of the extreme measures with moments (m0, m1).

    Lower family: atom at 0 plus a free atom at b in [m1/m0, 1]; upper
    family: free atom at b in [0, m1/m0] plus an atom at 1.  The two
    families meet at the single-atom measure (b = m1/m0) and at the
    {0,1}-atom measure, closing the loop.
    """
    # lower principal: masses (m0 - m1/b) at 0, (m1/b) at b
    lo = (m0 - m1 / bgrid_lo) / svar + (m1 / bgrid_lo) / (svar - bgrid_lo)
    # upper principal: masses (m0 - c) at b, c at 1 with c = (m1 - m0 b)/(1 - b)
    c = (m1 - m0 * bgrid_hi) / (1.0 - bgrid_hi)
    a = m0 - c
    hi = a / (svar - bgrid_hi) + c / (svar - 1.0)
    return lo, hi


def _loop_values(m0: float, m1: float, svar: complex, n: int) -> np.ndarray:
    """Closed loop of transform values, adaptively refined where it turns."""
    if m1 == 0.0:  # measure forced to a single atom at 0
        return np.array([m0 / svar])
    if m1 == m0:   # forced to a single atom at 1
        return np.array([m0 / (svar - 1.0)])
    bstar = m1 / m0
    blo = np.linspace(bstar, 1.0, n // 2)
    bhi = np.linspace(0.0, bstar, n // 2)

    def values(blo, bhi):
        lo, hi = _principal_transforms(m0, m1, svar, blo, bhi)
        return np.concatenate((lo, hi[::-1]))  # contiguous closed circuit

    for _ in range(2):  # refinement passes near high turning angles
        pts = values(blo, bhi)
        seg = np.diff(pts)
        turn = np.abs(np.angle(seg[1:] / np.where(seg[:-1] == 0, 1, seg[:-1])))
        if turn.size == 0 or np.max(turn) < 0.05:
            break
        blo = np.unique(np.concatenate((blo, 0.5 * (blo[1:] + blo[:-1]))))
        bhi = np.unique(np.concatenate((bhi, 0.5 * (bhi[1:] + bhi[:-1]))))
    return values(blo, bhi)


def _real_extrema(m0: float, m1: float, svar: float) -> tuple[float, float]:
    """Range of the transform over the principal families for real svar."""
    from scipy.optimize import minimize_scalar

    if m1 in (0.0,) or m1 == m0:
        v = float(np.real(_loop_values(m0, m1, svar, 4)[0]))
        return v, v
    bstar = m1 / m0
    vals = []
    funcs = [
        (lambda b: (m0 - m1 / b) / svar + (m1 / b) / (svar - b),
         bstar, 1.0),
        (lambda b: (m0 - (m1 - m0 * b) / (1.0 - b)) / (svar - b)
         + ((m1 - m0 * b) / (1.0 - b)) / (svar - 1.0),
         1e-12, bstar),
    ]
    for f, lo, hi in funcs:
        grid = np.linspace(lo, hi, 512)
        vals.extend(f(b) for b in grid)
        for sign in (+1.0, -1.0):
            r = minimize_scalar(lambda b: sign * f(b), bounds=(lo, hi),
                                method="bounded",
                                options={"xatol": 1e-14})
            vals.append(f(float(r.x)))
    vals = np.asarray(vals, dtype=float)
    return float(vals.min()), float(vals.max())


def second_order_region(mu0: float, mu1: float, cs: ContrastSet,
                        eta1: float | None = None,
                        samples: int = 2048) -> BoundsRegion:
    """Mass + first-moment bound region.

    The conductivity-route loop uses (mu0, mu1); the resistivity-route
    loop uses (eta0, eta1) with eta1 defaulting to the isotropic closure
    mu0 eta0 - mu1.  Hulls are stored in the measure planes (where the
    value sets are exactly convex); arcs/vertices are exported in the
    sigma*-plane.
    """
    if not 0.0 <= mu1 <= mu0 <= 1.0:
        raise ConfigurationError(
            f"moments (mu0={mu0}, mu1={mu1}) are not realizable by a "
            "measure on [0,1]"
        )
    eta0 = 1.0 - mu0
    if eta1 is None:
        eta1 = mu0 * eta0 - mu1
    if not 0.0 <= eta1 <= eta0:
        raise ConfigurationError(
            f"resistivity-side moments (eta0={eta0}, eta1={eta1}) are not "
            "realizable; pass the measured eta1 of the realization"
        )
    s1, s2 = complex(cs.sigma1), complex(cs.sigma2)
    if cs.h == 1:
        return _point_region(2, mu0, mu1, cs, s2)
    cs.require_admissible()
    if mu0 in (0.0, 1.0):
        return _point_region(2, mu0, mu1, cs, s2 if mu0 == 0.0 else s1)
    if _is_real_contrast(cs):
        svar = cs.s.real
        Fmin, Fmax = _real_extrema(mu0, mu1, svar)
        Emin, Emax = _real_extrema(eta0, eta1, svar)
        candidates_m = sorted([s2.real * (1 - Fmin), s2.real * (1 - Fmax)])
        mt = sorted([1 - Emin, 1 - Emax])
        candidates_r = sorted([s1.real / mt[1], s1.real / mt[0]])
        lo = max(candidates_m[0], candidates_r[0])
        hi = min(candidates_m[1], candidates_r[1])
        if lo > hi + 1e-12 * max(1.0, abs(hi)):
            raise ConfigurationError(
                "route intervals do not intersect; moments are inconsistent"
            )
        hi = max(lo, hi)
        return BoundsRegion(
            order=2, mu0=mu0, mu1=mu1, contrast=cs, kind="interval",
            arcs=[[complex(lo), complex(hi)]],
            vertices=[complex(lo), complex(hi)], interval=(lo, hi),
            meta={"eta1": eta1},
        )
    svar = cs.s
    F_loop = _loop_values(mu0, mu1, svar, samples)
    E_loop = _loop_values(eta0, eta1, svar, samples)
    geometry = {"F_loop": F_loop, "E_loop": E_loop}
    for name, loop in (("F", F_loop), ("E", E_loop)):
        pts = np.column_stack((loop.real, loop.imag))
        try:
            geometry[f"{name}_hull"] = ConvexHull(pts)
        except QhullError:
            geometry[f"{name}_hull"] = None  # degenerate loop (near-segment)
    sig_arc_F = s2 * (1.0 - F_loop)
    mt_loop = 1.0 - E_loop
    sig_arc_E = s1 / mt_loop
    # junction measures: single atom at m1/m0, and atoms at {0, 1}
    jF1 = mu0 / (svar - mu1 / mu0)
    jF2 = (mu0 - mu1) / svar + mu1 / (svar - 1.0)
    vertices = [s2 * (1.0 - jF1), s2 * (1.0 - jF2)]
    return BoundsRegion(
        order=2, mu0=mu0, mu1=mu1, contrast=cs, kind="hulls",
        arcs=[list(sig_arc_F), list(sig_arc_E)],
        vertices=vertices, geometry=geometry, meta={"eta1": eta1},
    )


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def _hull_margin(hull, p: complex) -> float:
    """Signed distance of p to a ConvexHull (positive inside)."""
    eq = hull.equations
    return float(-np.max(eq[:, 0] * p.real + eq[:, 1] * p.imag + eq[:, 2]))


def contains(region: BoundsRegion, value: complex,
             tol: float = 1e-9) -> tuple[bool, float]:
    """Membership with a signed margin (sigma*-plane units, positive inside).

    Boundary points within +-tol are classified inside.  For "hulls"
    regions the margins are computed in the measure planes and rescaled
    by the local derivative of the map back to the sigma*-plane.
    """
    v = complex(value)
    if region.kind == "point":
        return (abs(v - region.geometry["point"]) <= tol,
                -abs(v - region.geometry["point"]))
    if region.kind == "interval":
        lo, hi = region.interval
        margin = min(v.real - lo, hi - v.real)
        if abs(v.imag) > tol:
            margin = min(margin, -abs(v.imag))
        return margin >= -tol, float(margin)
    if region.kind == "lens":
        margins = [side * (r - abs(v - c))
                   for (c, r, side) in region.geometry["circles"]]
        margin = float(min(margins))
        return margin >= -tol, margin
    if region.kind == "hulls":
        s1, s2 = complex(region.contrast.sigma1), complex(region.contrast.sigma2)
        # conductivity route: F = 1 - v/sigma2, local scale |dv/dF| = |sigma2|
        if v == 0:
            return False, -np.inf
        Fv = 1.0 - v / s2
        # resistivity route: E = 1 - sigma1/v, |dv/dE| = |v|^2/|sigma1|
        Ev = 1.0 - s1 / v
        margins = []
        for name, pt, scale in (("F", Fv, abs(s2)),
                                ("E", Ev, abs(v) ** 2 / abs(s1))):
            hull = region.geometry.get(f"{name}_hull")
            if hull is not None:
                margins.append(_hull_margin(hull, pt) * scale)
            else:
                # degenerate loop (segment or point): the constraint set has
                # no interior, so the margin is minus the distance to it
                loop = np.asarray(region.geometry[f"{name}_loop"])
                margins.append(-float(np.min(np.abs(loop - pt))) * scale)
        margin = float(min(margins))
        return margin >= -tol, margin
    raise ConfigurationError(f"unknown region kind {region.kind!r}")


def region_boundary_points(region: BoundsRegion, n: int = 1000) -> np.ndarray:
    """~n sigma*-plane points on the region boundary (for nesting tests).

    For "hulls" regions the boundary of the intersection consists of the
    pieces of each route's loop lying inside the other route's set; points
    are filtered accordingly.
    """
    if region.kind in ("point", "interval"):
        pts = np.concatenate([np.asarray(a) for a in region.arcs])
        return pts
    if region.kind == "lens":
        pts = np.concatenate([np.asarray(a) for a in region.arcs])
        step = max(1, pts.size // n)
        return pts[::step]
    pts = np.concatenate([np.asarray(a) for a in region.arcs])
    keep = []
    for p in pts:
        ok, margin = contains(region, p, tol=1e-7 * max(1.0, abs(p)))
        if ok:
            keep.append(p)
    out = np.asarray(keep if keep else pts)
    step = max(1, out.size // n)
    return out[::step]


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def _cpair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def region_to_json(region: BoundsRegion) -> str:
    obj = {
        "order": region.order,
        "mu0": region.mu0,
        "mu1": region.mu1,
        "sigma1": _cpair(region.contrast.sigma1),
        "sigma2": _cpair(region.contrast.sigma2),
        "kind": region.kind,
        "arcs": [[_cpair(p) for p in arc] for arc in region.arcs],
        "vertices": [_cpair(p) for p in region.vertices],
    }
    if region.interval is not None:
        obj["interval"] = [float(region.interval[0]), float(region.interval[1])]
    if "eta1" in region.meta:
        obj["eta1"] = float(region.meta["eta1"])
    return json.dumps(obj)
