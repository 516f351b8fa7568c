"""Command-line front end: config handling, ensembles, and data export.

Configuration precedence (lowest to highest): built-in defaults, JSON
config file (``--config``), individual command-line flags.  The config
file carries ``"version": 1``; unknown keys are rejected.  Complex values
are written as ``[re, im]`` pairs in JSON and accepted as Python complex
literals (e.g. ``51.07+45.16j``) on the command line.

Every output embeds the resolved configuration and a sha256 content hash
of its data payload.  Reruns with the same config and seeds are
byte-identical except for the single timestamp header line.  Outputs are
written atomically (temp file + rename) per realization.

Exit codes: 0 success; 2 configuration error; 3 domain error (contrast
outside the analyticity domain, pole proximity, degenerate projection);
4 numerical-consistency failure (route disagreement, spectrum outside
[0, 1], solver breakdown).

``EFFMED_NUM_THREADS`` caps the BLAS thread count (propagated to OpenMP/
OpenBLAS/MKL before numpy loads); ``--workers`` dispatches ensemble
members to a process pool.
"""

from __future__ import annotations

import os

# Propagate the thread budget before numpy initializes its BLAS.
_nt = os.environ.get("EFFMED_NUM_THREADS")
if _nt:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _nt)

import argparse
import dataclasses
import hashlib
import json
import sys
import tempfile
from datetime import datetime, timezone
from multiprocessing import get_context

import numpy as np

from . import bounds as bounds_mod
from . import effective_params as ep
from . import grid_ops as go
from . import microgeometry as mg
from . import report
from . import spectral_engine as se
from .errors import (
    ConfigurationError,
    ConsistencyError,
    DomainError,
    EffmedError,
    SolverError,
)

CONFIG_VERSION = 1

__all__ = ["RunConfig", "load_config", "main"]


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class RunConfig:
    """Resolved run parameters; every field has a documented default.

    seeds accepts either a plain list of integers or, in the config file,
    {"count": n, "base": b}, which expands to the pair seeds (b, 0) ...
    (b, n-1) fed to the per-realization generator.
    """

    d: int = 2
    L: int = 16
    crystallites_per_side: int = 4
    material_kind: str = "polycrystal"     # or "two_component"
    p: float = 0.5                         # phase-1 fraction (two_component)
    angle_distribution: str = "uniform"
    seeds: list = dataclasses.field(default_factory=lambda: [0])
    sigma1: complex = 51.074 + 45.160j
    sigma2: complex = 3.070 + 0.0019j
    contrast_grid: list | None = None      # list of [sigma1, sigma2] pairs
    output_dir: str = "effmed-out"
    tolerances: dict = dataclasses.field(default_factory=dict)
    workers: int = 1

    TOLERANCE_KEYS = ("route_agree", "identity", "reciprocity", "membership")

    def tol(self, key: str, default: float) -> float:
        return float(self.tolerances.get(key, default))

    def validate(self) -> "RunConfig":
        if self.d not in (2, 3):
            raise ConfigurationError(f"d must be 2 or 3, got {self.d}")
        if self.L < 2:
            raise ConfigurationError(f"L must be >= 2, got {self.L}")
        if self.material_kind not in ("polycrystal", "two_component"):
            raise ConfigurationError(
                f"material_kind {self.material_kind!r} not recognized"
            )
        if self.material_kind == "polycrystal":
            nc = self.crystallites_per_side
            if nc < 1 or self.L % nc != 0:
                raise ConfigurationError(
                    f"crystallites_per_side {nc} must divide L={self.L}"
                )
        if not 0.0 <= self.p <= 1.0:
            raise ConfigurationError(f"p={self.p} outside [0, 1]")
        if self.angle_distribution != "uniform":
            raise ConfigurationError(
                f"angle_distribution {self.angle_distribution!r} not supported"
            )
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        for key in self.tolerances:
            if key not in self.TOLERANCE_KEYS:
                raise ConfigurationError(
                    f"unknown tolerance key {key!r}; valid: "
                    f"{', '.join(self.TOLERANCE_KEYS)}"
                )
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if self.contrast_grid is not None:
            for entry in self.contrast_grid:
                if len(entry) != 2:
                    raise ConfigurationError(
                        "contrast_grid entries must be [sigma1, sigma2] pairs"
                    )
        return self

    def resolved_dict(self) -> dict:
        out = {"version": CONFIG_VERSION}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, complex):
                v = [v.real, v.imag]
            elif f.name == "contrast_grid" and v is not None:
                v = [[_cpair(complex(a)), _cpair(complex(b))] for a, b in v]
            elif f.name == "seeds":
                v = [list(s) if isinstance(s, tuple) else s for s in v]
            out[f.name] = v
        return out


def _cpair(z: complex) -> list:
    return [z.real, z.imag]


def _parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float, complex)):
        return complex(value)
    try:
        return complex(str(value).replace(" ", ""))
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse complex value {value!r}") from exc


def _parse_seeds(value) -> list:
    if isinstance(value, dict):
        extra = set(value) - {"count", "base"}
        if extra:
            raise ConfigurationError(f"unknown seed spec keys {sorted(extra)}")
        count = int(value.get("count", 1))
        base = int(value.get("base", 0))
        if count < 1:
            raise ConfigurationError("seed count must be >= 1")
        return [(base, i) for i in range(count)]
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            if isinstance(v, (list, tuple)):
                if len(v) != 2:
                    raise ConfigurationError(f"seed pair {v} must have 2 parts")
                out.append((int(v[0]), int(v[1])))
            else:
                out.append(int(v))
        return out
    return [int(value)]


def load_config(path) -> dict:
    """Read and schema-check a JSON config file; returns raw key/values."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config file must hold a JSON object")
    version = raw.pop("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigurationError(
            f"config version {version} not supported (expected {CONFIG_VERSION})"
        )
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    return raw


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults <- config file <- flags, in increasing precedence."""
    values: dict = {}
    if args.config:
        values.update(load_config(args.config))
    flag_map = {
        "d": args.d, "L": args.L,
        "crystallites_per_side": args.crystallites,
        "material_kind": args.material, "p": args.p,
        "angle_distribution": args.angle_distribution,
        "sigma1": args.sigma1, "sigma2": args.sigma2,
        "output_dir": args.output_dir, "workers": args.workers,
    }
    for key, val in flag_map.items():
        if val is not None:
            values[key] = val
    if args.seeds is not None:
        values["seeds"] = [s for s in args.seeds.split(",") if s]
    elif args.seed_count is not None:
        values["seeds"] = {"count": args.seed_count,
                           "base": args.seed_base or 0}
    if args.contrast_grid is not None:
        try:
            values["contrast_grid"] = json.loads(args.contrast_grid)
        except json.JSONDecodeError:
            entries = []
            for part in args.contrast_grid.split(";"):
                pair = part.split(",")
                if len(pair) != 2:
                    raise ConfigurationError(
                        "contrast grid entries are 'sigma1,sigma2' "
                        "separated by ';'"
                    )
                entries.append(pair)
            values["contrast_grid"] = entries
    for tol_kv in args.tol or []:
        if "=" not in tol_kv:
            raise ConfigurationError(f"--tol expects KEY=VALUE, got {tol_kv!r}")
        key, _, val = tol_kv.partition("=")
        values.setdefault("tolerances", {})
        if isinstance(values["tolerances"], dict):
            values["tolerances"] = dict(values["tolerances"])
        values["tolerances"][key] = float(val)

    cfg = RunConfig()
    for key, val in values.items():
        if key in ("sigma1", "sigma2"):
            val = _parse_complex(val)
        elif key == "seeds":
            val = _parse_seeds(val)
        elif key == "contrast_grid" and val is not None:
            val = [(_parse_complex(a), _parse_complex(b)) for a, b in val]
        elif key in ("d", "L", "crystallites_per_side", "workers"):
            val = int(val)
        elif key == "p":
            val = float(val)
        elif key == "tolerances":
            val = {k: float(v) for k, v in val.items()}
        setattr(cfg, key, val)
    return cfg.validate()


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _atomic_write(path, text: str) -> None:
    path = str(path)
    parent = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-effmed-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _seed_str(seed) -> str:
    if isinstance(seed, tuple):
        return "/".join(str(p) for p in seed)
    return str(seed)


def _seed_file_tag(seed) -> str:
    return _seed_str(seed).replace("/", "-")


def write_csv(path, header: str, rows: list[str], cfg: RunConfig) -> None:
    """Delimited output: # timestamp / # config / # hash, header, rows.

    The hash covers the header and data rows only, so reruns match it
    bit-for-bit; the timestamp line is the single permitted difference.
    """
    data = "\n".join([header] + list(rows)) + "\n"
    digest = hashlib.sha256(data.encode()).hexdigest()
    text = (
        f"# timestamp: {_timestamp()}\n"
        f"# config: {json.dumps(cfg.resolved_dict(), sort_keys=True)}\n"
        f"# content-sha256: {digest}\n"
    ) + data
    _atomic_write(path, text)
    print(f"wrote {path}")


def write_json(path, payload: dict, cfg: RunConfig,
               top_level: bool = False) -> None:
    """JSON output embedding the resolved config and a payload hash.

    Serialized with sorted keys and indent so the timestamp occupies its
    own line; the hash is over the canonical payload dump.  With
    ``top_level`` the payload's own keys stay at the top of the object
    (used by region files whose schema is fixed), otherwise the payload
    sits under a "payload" key.
    """
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    body = dict(payload) if top_level else {"payload": payload}
    body["config"] = cfg.resolved_dict()
    body["content_sha256"] = hashlib.sha256(canonical.encode()).hexdigest()
    body["timestamp"] = _timestamp()
    _atomic_write(path, json.dumps(body, sort_keys=True, indent=2) + "\n")
    print(f"wrote {path}")


def _ensure_outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir


def _write_resolved_config(cfg: RunConfig) -> None:
    write_json(os.path.join(cfg.output_dir, "config_resolved.json"),
               {"resolved": cfg.resolved_dict()}, cfg)


# ---------------------------------------------------------------------------
# realization pipeline
# ---------------------------------------------------------------------------

def _make_field(cfg: RunConfig, seed):
    """Microstructure for one seed: projections or indicators."""
    lat = go.build_lattice(cfg.d, cfg.L)
    if cfg.material_kind == "polycrystal":
        of = mg.checkerboard_polycrystal(
            lat, cfg.crystallites_per_side,
            dist=cfg.angle_distribution, seed=seed,
        )
        return lat, of, mg.projection_field(of)
    chi = mg.two_component_field(lat, cfg.p, seed=seed)
    return lat, chi, chi


def _field_kinds(cfg: RunConfig) -> tuple[str, ...]:
    if cfg.material_kind == "polycrystal":
        return tuple(k for k in se.KINDS if k.startswith("x"))
    return tuple(k for k in se.KINDS if k.startswith("chi"))


def _measures_job(payload):
    """Worker-pool task: measures (+ optional tensor inputs) for one seed."""
    cfg_values, seed = payload
    cfg = RunConfig(**cfg_values)
    lat, _, field = _make_field(cfg, seed)
    return ep.realization_measures(field, lat)


def _pool_map(cfg: RunConfig, func, payloads: list):
    if cfg.workers <= 1 or len(payloads) <= 1:
        return [func(p) for p in payloads]
    ctx = get_context("spawn")
    with ctx.Pool(processes=min(cfg.workers, len(payloads))) as pool:
        return pool.map(func, payloads)


def _cfg_values(cfg: RunConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}


def _ensemble_measures(cfg: RunConfig) -> list:
    payloads = [(_cfg_values(cfg), seed) for seed in cfg.seeds]
    return _pool_map(cfg, _measures_job, payloads)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(cfg: RunConfig) -> int:
    outdir = _ensure_outdir(cfg)
    _write_resolved_config(cfg)
    for seed in cfg.seeds:
        _, raw, _ = _make_field(cfg, seed)
        name = (f"micro_{cfg.material_kind}_d{cfg.d}_L{cfg.L}"
                f"_seed{_seed_file_tag(seed)}.txt")
        path = os.path.join(outdir, name)
        mg.save_microstructure(path, raw)
        print(f"wrote {path}")
    return 0


def cmd_spectrum(cfg: RunConfig, kinds: list[str], pairs: list) -> int:
    outdir = _ensure_outdir(cfg)
    _write_resolved_config(cfg)
    valid = _field_kinds(cfg)
    for kind in kinds:
        if kind not in valid:
            raise ConfigurationError(
                f"kind {kind!r} needs material_kind "
                f"{'two_component' if kind.startswith('chi') else 'polycrystal'}"
            )
    summary_rows = []
    mass_acc: dict = {}
    for seed in cfg.seeds:
        lat, _, field = _make_field(cfg, seed)
        for kind in kinds:
            op = se.assemble(kind, field, lat)
            figure_measures = []
            for (j, k) in pairs:
                m = se.spectral_measure(op, j, k)
                name = (f"measure_{kind}_j{j}k{k}"
                        f"_seed{_seed_file_tag(seed)}.json")
                _atomic_write(os.path.join(outdir, name),
                              se.measure_to_json(m) + "\n")
                print(f"wrote {os.path.join(outdir, name)}")
                summary_rows.append(
                    f"{_seed_str(seed)},{kind},{j},{k},"
                    f"{m.mass:.17g},{m.moments[1]:.17g},{len(m.atoms)}"
                )
                mass_acc.setdefault((kind, j, k), []).append(m.mass)
                if j == k:
                    figure_measures.append(m)
            if figure_measures:
                fig = os.path.join(
                    outdir, f"spectrum_{kind}_seed{_seed_file_tag(seed)}.png")
                report.render_spectrum_figure(figure_measures, fig)
                print(f"wrote {fig}")
            op._eig = None
    write_csv(os.path.join(outdir, "spectrum_summary.csv"),
              "seed,kind,j,k,mass,moment1,n_atoms", summary_rows, cfg)
    for (kind, j, k), masses in sorted(mass_acc.items()):
        print(f"mean mass {kind}[{j},{k}] over {len(masses)} seeds: "
              f"{np.mean(masses):.6f}")
    return 0


def _contrasts(cfg: RunConfig) -> list[ep.ContrastSet]:
    if cfg.contrast_grid:
        return [ep.ContrastSet(a, b) for a, b in cfg.contrast_grid]
    return [ep.ContrastSet(cfg.sigma1, cfg.sigma2)]


def cmd_effective(cfg: RunConfig) -> int:
    outdir = _ensure_outdir(cfg)
    _write_resolved_config(cfg)
    contrasts = _contrasts(cfg)
    for cs in contrasts:
        cs.require_admissible()
    measures = _ensemble_measures(cfg)
    rows, trajectories = [], []
    route_tol = cfg.tol("route_agree", ep.ROUTE_AGREE_TOL)
    id_tol = cfg.tol("identity", ep.IDENTITY_TOL)
    rec_tol = cfg.tol("reciprocity", ep.RECIPROCITY_TOL)
    for seed, meas in zip(cfg.seeds, measures):
        traj = []
        for cs in contrasts:
            et = ep.effective_tensor(meas, cs, route_tol=route_tol,
                                     identity_tol=id_tol,
                                     reciprocity_tol=rec_tol)
            rows.extend(ep.sweep_rows(et, seed, cfg.crystallites_per_side))
            traj.append(et.sigma_star[0, 0])
        trajectories.append(traj)
    write_csv(os.path.join(outdir, "effective.csv"),
              ep.SWEEP_COLUMNS, rows, cfg)
    fig = os.path.join(outdir, "effective.png")
    labels = ([f"seed {_seed_str(s)}" for s in cfg.seeds]
              if len(cfg.seeds) <= 8 else None)
    report.render_sweep_figure(trajectories, fig, labels=labels)
    print(f"wrote {fig}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.contrast_grid:
        raise ConfigurationError("sweep requires contrast_grid in the config")
    return cmd_effective(cfg)


def cmd_bounds(cfg: RunConfig) -> int:
    outdir = _ensure_outdir(cfg)
    _write_resolved_config(cfg)
    cs = ep.ContrastSet(cfg.sigma1, cfg.sigma2)
    cs.require_admissible()
    mem_tol = cfg.tol("membership", 1e-9)
    measures = _ensemble_measures(cfg)
    rows = []
    fig_regions, fig_values = [], []
    for seed, meas in zip(cfg.seeds, measures):
        et = ep.effective_tensor(meas, cs)
        for j in range(cfg.d):
            mu = meas["mu"][(j, j)]
            eta = meas["eta"][(j, j)]
            mu0, mu1 = mu.moments[0], mu.moments[1]
            eta1 = eta.moments[1]
            r1 = bounds_mod.first_order_region(mu0, cs)
            r2 = bounds_mod.second_order_region(mu0, mu1, cs, eta1=eta1)
            v = et.sigma_star[j, j]
            for reg in (r1, r2):
                inside, margin = bounds_mod.contains(reg, v, tol=mem_tol)
                rows.append(
                    f"{_seed_str(seed)},{j},{reg.order},{mu0:.17g},"
                    f"{'' if reg.mu1 is None else format(reg.mu1, '.17g')},"
                    f"{v.real:.17g},{v.imag:.17g},{int(inside)},{margin:.17g}"
                )
                name = (f"region_order{reg.order}_j{j}"
                        f"_seed{_seed_file_tag(seed)}.json")
                obj = json.loads(bounds_mod.region_to_json(reg))
                write_json(os.path.join(outdir, name), obj, cfg,
                           top_level=True)
            if seed == cfg.seeds[0] and j == 0:
                fig_regions = [r1, r2]
            if j == 0:
                fig_values.append(v)
    write_csv(os.path.join(outdir, "membership.csv"),
              "seed,j,order,mu0,mu1,re_sigma_star,im_sigma_star,inside,margin",
              rows, cfg)
    fig = os.path.join(outdir, "bounds.png")
    report.render_bounds_figure(fig_regions, fig_values, fig,
                                labels=["first order", "second order"])
    print(f"wrote {fig}")
    if any(row.rsplit(",", 2)[1] == "0" for row in rows):
        raise ConsistencyError("computed sigma* left the bound region")
    return 0


# ---------------------------------------------------------------------------
# verify: invariant suite
# ---------------------------------------------------------------------------

def _verify_groups(cfg: RunConfig):
    """Yield (group name, callable) pairs; callables return (ok, detail)."""

    def operators():
        worst = 0.0
        for d, L in ((2, 8), (3, 4)):
            lat = go.build_lattice(d, L)
            rng = np.random.default_rng(7)
            for _ in range(25):
                v = rng.standard_normal((*lat.vshape,))
                gv = go.gamma_apply(v, lat)
                uv = go.upsilon_apply(v, lat)
                mean = go.site_mean(v, lat)
                recon = gv + uv + mean[(None,) * d + (slice(None),)]
                worst = max(worst, float(np.max(np.abs(recon - v))))
                worst = max(worst, float(np.max(np.abs(
                    go.gamma_apply(gv, lat) - gv))))
                worst = max(worst, float(np.max(np.abs(
                    go.upsilon_apply_curl(v, lat) - uv))))
        return worst < 1e-12, f"max decomposition residual {worst:.3e}"

    def masses():
        worst = 0.0
        for seed in cfg.seeds[:2]:
            lat, _, pf = _make_field(cfg, seed)
            kinds = _field_kinds(cfg)
            op = se.assemble(kinds[0], pf, lat)
            for j in range(cfg.d):
                m = se.spectral_measure(op, j, j)
                if cfg.material_kind == "polycrystal":
                    avg = float(np.mean(pf.X1[..., j, j]))
                else:
                    avg = float(np.mean(pf.chi1))
                worst = max(worst, abs(m.mass - avg))
        return worst < 1e-10, f"max |mass - <X>| = {worst:.3e}"

    def support():
        lat, _, field = _make_field(cfg, cfg.seeds[0])
        lo, hi = 0.0, 1.0
        for kind in _field_kinds(cfg):
            op = se.assemble(kind, field, lat)
            eig = se.eigendecompose(op)
            lo = min(lo, float(eig.values.min()))
            hi = max(hi, float(eig.values.max()))
            op._eig = None
        return (lo >= -1e-10 and hi <= 1 + 1e-10), \
            f"spectrum within [{lo:.3e}, {hi:.3e}]"

    def routes():
        meas = _ensemble_measures(dataclasses.replace(cfg, seeds=cfg.seeds[:1]))[0]
        cs = ep.ContrastSet(cfg.sigma1, cfg.sigma2)
        et = ep.effective_tensor(meas, cs)  # raises on disagreement
        recip = float(np.max(np.abs(
            et.rho_star @ et.sigma_star - np.eye(cfg.d))))
        return recip < 1e-8, f"reciprocity residual {recip:.3e}"

    def relation():
        meas = _ensemble_measures(dataclasses.replace(cfg, seeds=cfg.seeds[:1]))[0]
        worst = 0.0
        for j in range(cfg.d):
            worst = max(worst, se.measure_relation_residual(
                meas["mu"][(j, j)], meas["alpha"][(j, j)]))
        return worst < 1e-7, f"max relation residual {worst:.3e}"

    def sobolev():
        if cfg.material_kind != "polycrystal":
            return True, "skipped (projection fields only)"
        small = dataclasses.replace(cfg, L=8,
                                    crystallites_per_side=_fit_blocks(8, cfg))
        lat, _, pf = _make_field(small, cfg.seeds[0])
        sob = se.sobolev_M(pf, lat)
        op = se.assemble("x1_gamma_x1", pf, lat)
        worst = 0.0
        for j in range(cfg.d):
            nu = se.nu_measure(sob, j)
            mu = se.spectral_measure(op, j, j)
            for n in range(11):
                worst = max(worst, abs(se.moment(nu, n) - se.moment(mu, n)))
        return worst < 1e-8, f"max |nu_n - mu_n| = {worst:.3e}"

    def oracle():
        small = dataclasses.replace(cfg, seeds=cfg.seeds[:1])
        lat, _, field = _make_field(small, cfg.seeds[0])
        meas = ep.realization_measures(field, lat)
        from . import homogenize_oracle as ho
        worst = 0.0
        for cs in (ep.ContrastSet(cfg.sigma1, cfg.sigma2),
                   ep.ContrastSet(10.0, 1.0)):
            et = ep.effective_tensor(meas, cs)
            if cfg.material_kind == "polycrystal":
                sig = ho.sigma_from_projection(field, cs.sigma1, cs.sigma2)
            else:
                sig = ho.sigma_from_indicator(field, cs.sigma1, cs.sigma2)
            cell = ho.effective_from_cell(sig, lat)
            dev = float(np.max(np.abs(cell.sigma_star - et.sigma_star)))
            worst = max(worst, dev / max(1.0, float(np.max(np.abs(et.sigma_star)))))
        return worst < 1e-8, f"max relative solver deviation {worst:.3e}"

    def bound_membership():
        meas = _ensemble_measures(dataclasses.replace(cfg, seeds=cfg.seeds[:1]))[0]
        cs = ep.ContrastSet(cfg.sigma1, cfg.sigma2)
        if cs.h.imag == 0:
            return True, "skipped (real contrast handled by interval tests)"
        et = ep.effective_tensor(meas, cs)
        worst = np.inf
        for j in range(cfg.d):
            mu = meas["mu"][(j, j)]
            r1 = bounds_mod.first_order_region(mu.moments[0], cs)
            r2 = bounds_mod.second_order_region(
                mu.moments[0], mu.moments[1], cs,
                eta1=meas["eta"][(j, j)].moments[1])
            for reg in (r1, r2):
                _, margin = bounds_mod.contains(reg, et.sigma_star[j, j])
                worst = min(worst, margin)
        return worst > -1e-9, f"min membership margin {worst:.3e}"

    def herglotz():
        meas = _ensemble_measures(dataclasses.replace(cfg, seeds=cfg.seeds[:1]))[0]
        re = np.linspace(-4.0, 4.0, 9)
        im = np.logspace(-2, 1, 8)
        grid = (re[:, None] + 1j * im[None, :]).ravel()
        scan = ep.herglotz_scan(meas, grid)
        return scan["ok"], (
            f"{len(scan['violations'])} violations on "
            f"{scan['grid_size']} points"
        )

    yield "operator identities", operators
    yield "measure masses", masses
    yield "spectrum support", support
    yield "route agreement + reciprocity", routes
    yield "measure relation", relation
    yield "sobolev moments", sobolev
    yield "solver cross-validation", oracle
    yield "bound membership", bound_membership
    yield "herglotz property", herglotz


def _fit_blocks(L: int, cfg: RunConfig) -> int:
    nc = min(cfg.crystallites_per_side, L)
    while L % nc:
        nc -= 1
    return nc


def cmd_verify(cfg: RunConfig) -> int:
    outdir = _ensure_outdir(cfg)
    lines, ok_all = [], True
    for name, fn in _verify_groups(cfg):
        try:
            ok, detail = fn()
        except EffmedError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        lines.append(line)
        print(line)
    _atomic_write(os.path.join(outdir, "verify_report.txt"),
                  "\n".join(lines) + "\n")
    print(f"wrote {os.path.join(outdir, 'verify_report.txt')}")
    if not ok_all:
        raise ConsistencyError("one or more invariant groups failed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing / dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (version 1)")
    common.add_argument("--d", type=int, choices=(2, 3))
    common.add_argument("--L", type=int)
    common.add_argument("--crystallites", type=int,
                        help="crystallites per side (must divide L)")
    common.add_argument("--material",
                        choices=("polycrystal", "two_component"))
    common.add_argument("--p", type=float, help="phase-1 volume fraction")
    common.add_argument("--angle-distribution", dest="angle_distribution",
                        choices=("uniform",))
    common.add_argument("--seeds", help="comma-separated seed list")
    common.add_argument("--seed-count", type=int,
                        help="number of seeds (with --seed-base)")
    common.add_argument("--seed-base", type=int)
    common.add_argument("--sigma1", help="complex, e.g. 51.07+45.16j")
    common.add_argument("--sigma2")
    common.add_argument("--contrast-grid",
                        help="JSON list of [sigma1, sigma2] pairs, or "
                             "'s1,s2;s1,s2' complex literals")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--tol", action="append", metavar="KEY=VALUE",
                        help="tolerance override "
                             "(route_agree, identity, reciprocity, membership)")
    common.add_argument("--workers", type=int,
                        help="process pool size for ensemble members")

    ap = argparse.ArgumentParser(
        prog="effmed",
        description="Effective transport tensors of uniaxial polycrystals "
                    "and two-component media via spectral measures.",
        epilog="Configuration precedence: defaults < --config file < flags. "
               "Exit codes: 0 ok, 2 config error, 3 domain error, "
               "4 numerical-consistency failure.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common],
                   help="write microstructure files per seed")
    sp = sub.add_parser("spectrum", parents=[common],
                        help="write spectral-measure JSON files")
    sp.add_argument("--kind", action="append", choices=se.KINDS,
                    help="operator kind (repeatable); default depends on "
                         "material")
    sp.add_argument("--pairs", default=None,
                    help="tensor pairs like '0,0;0,1;1,1' (default: diagonal)")
    sub.add_parser("effective", parents=[common],
                   help="effective tensors for the configured contrast(s)")
    sub.add_parser("bounds", parents=[common],
                   help="bound regions + membership of computed sigma*")
    sub.add_parser("verify", parents=[common],
                   help="run the invariant suite (nonzero exit on failure)")
    sub.add_parser("sweep", parents=[common],
                   help="effective tensors over contrast_grid")
    return ap


def _parse_pairs(cfg: RunConfig, spec: str | None) -> list:
    if spec is None:
        return [(j, j) for j in range(cfg.d)]
    pairs = []
    for part in spec.split(";"):
        if not part:
            continue
        bits = part.split(",")
        if len(bits) != 2:
            raise ConfigurationError(f"bad pair {part!r}; expected 'j,k'")
        j, k = int(bits[0]), int(bits[1])
        if not (0 <= j < cfg.d and 0 <= k < cfg.d):
            raise ConfigurationError(f"pair ({j},{k}) outside 0..{cfg.d - 1}")
        pairs.append((j, k))
    return pairs


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "spectrum":
            kinds = args.kind or [_field_kinds(cfg)[0]]
            return cmd_spectrum(cfg, kinds, _parse_pairs(cfg, args.pairs))
        if args.command == "effective":
            return cmd_effective(cfg)
        if args.command == "bounds":
            return cmd_bounds(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConsistencyError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
