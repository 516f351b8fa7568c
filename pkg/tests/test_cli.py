"""Command-line interface: exit codes, determinism, artifacts, config."""

from __future__ import annotations

import json
import os
import re
from pathlib import Path

import pytest

from effmed.cli import main

FAST = ["--d", "2", "--L", "8", "--crystallites", "4", "--seeds", "0,1"]
CONTRAST = ["--sigma1", "3.0+1.0j", "--sigma2", "1.0"]


def _run(tmp_path, *argv):
    return main([*argv, "--output-dir", str(tmp_path)])


def _strip_timestamps(text: str) -> str:
    return re.sub(r"^# timestamp.*$", "", text, flags=re.MULTILINE)


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_exit_ok(tmp_path):
    assert _run(tmp_path / "g", "generate", *FAST) == 0


def test_exit_config_error(tmp_path):
    # malformed tolerance override
    rc = _run(tmp_path, "effective", *FAST, *CONTRAST, "--tol", "nonsense")
    assert rc == 2
    rc = _run(tmp_path, "effective", *FAST, *CONTRAST,
              "--tol", "no_such_key=1e-9")
    assert rc == 2


def test_exit_domain_error(tmp_path):
    # negative real contrast ratio is outside the analyticity domain
    rc = _run(tmp_path, "effective", *FAST, "--sigma1", " -2.0",
              "--sigma2", "1.0")
    assert rc == 3


def test_exit_config_error_bad_config_file(tmp_path):
    bad = tmp_path / "cfg.json"
    bad.write_text(json.dumps({"version": 99, "d": 2}))
    rc = _run(tmp_path, "effective", "--config", str(bad), *CONTRAST)
    assert rc == 2
    bad.write_text(json.dumps({"version": 1, "unknown_key": 5}))
    rc = _run(tmp_path, "effective", "--config", str(bad), *CONTRAST)
    assert rc == 2


def test_argparse_rejects_unknown_choices(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--kind", "not_a_kind",
              "--output-dir", str(tmp_path)])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def test_generate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(a, "generate", *FAST) == 0
    assert _run(b, "generate", *FAST) == 0
    fa = sorted(p.name for p in a.glob("micro_*.txt"))
    fb = sorted(p.name for p in b.glob("micro_*.txt"))
    assert fa == fb and len(fa) == 2
    for name in fa:
        assert (a / name).read_bytes() == (b / name).read_bytes()


# ---------------------------------------------------------------------------
# effective / sweep outputs
# ---------------------------------------------------------------------------

def test_effective_artifacts_and_determinism(tmp_path):
    out = tmp_path / "run"
    assert _run(out, "effective", *FAST, *CONTRAST) == 0
    csv_path = out / "effective.csv"
    png_path = out / "effective.png"
    assert csv_path.exists()
    assert png_path.exists() and png_path.stat().st_size > 1000
    first = csv_path.read_text()
    assert first.startswith("#")
    assert "content-sha256" in first
    # rerun into the same directory: identical up to the timestamp comment
    assert _run(out, "effective", *FAST, *CONTRAST) == 0
    second = csv_path.read_text()
    assert _strip_timestamps(first) == _strip_timestamps(second)
    # no leftover temp files from atomic writes
    assert not [p for p in out.iterdir() if p.name.startswith("tmp")]


def test_sweep_requires_grid(tmp_path):
    rc = _run(tmp_path, "sweep", *FAST)
    assert rc == 2


def test_sweep_with_grid(tmp_path):
    rc = _run(tmp_path, "sweep", *FAST, "--seeds", "0",
              "--contrast-grid", "4.0,1.0;2.0+1.0j,1.0")
    assert rc == 0
    text = (tmp_path / "effective.csv").read_text()
    rows = [l for l in text.splitlines() if l and not l.startswith("#")]
    # header + 2 contrasts x 1 seed x 2 routes x 4 components
    assert len(rows) == 1 + 2 * 8


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def test_spectrum_artifacts(tmp_path):
    rc = _run(tmp_path, "spectrum", *FAST, "--seeds", "0")
    assert rc == 0
    js = sorted(tmp_path.glob("measure_*.json"))
    assert js
    doc = json.loads(js[0].read_text())
    assert {"kind", "atoms", "mass"} <= set(doc)
    assert (tmp_path / "spectrum_summary.csv").exists()
    pngs = list(tmp_path.glob("spectrum_*.png"))
    assert pngs and all(p.stat().st_size > 1000 for p in pngs)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def test_bounds_artifacts_and_schema(tmp_path):
    rc = _run(tmp_path, "bounds", *FAST, "--seeds", "0", *CONTRAST)
    assert rc == 0
    regions = sorted(tmp_path.glob("region_order*.json"))
    assert regions
    doc = json.loads(regions[0].read_text())
    for key in ("order", "mu0", "sigma1", "sigma2", "kind", "arcs",
                "vertices"):
        assert key in doc, key
    mem = (tmp_path / "membership.csv").read_text()
    header = [l for l in mem.splitlines() if not l.startswith("#")][0]
    assert header.split(",")[:4] == ["seed", "j", "order", "mu0"]
    datarows = [l for l in mem.splitlines()
                if l and not l.startswith("#")][1:]
    assert all(r.split(",")[7] == "1" for r in datarows)  # all inside
    assert (tmp_path / "bounds.png").stat().st_size > 1000


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_passes_small_config(tmp_path):
    rc = _run(tmp_path, "verify", "--d", "2", "--L", "8",
              "--crystallites", "4", "--seeds", "0", *CONTRAST)
    assert rc == 0
    report = (tmp_path / "verify_report.txt").read_text()
    assert "FAIL" not in report
    assert report.count("PASS") >= 8


def test_verify_two_component(tmp_path):
    rc = _run(tmp_path, "verify", "--d", "2", "--L", "8",
              "--material", "two_component", "--p", "0.4",
              "--seeds", "3", *CONTRAST)
    assert rc == 0


# ---------------------------------------------------------------------------
# config file handling
# ---------------------------------------------------------------------------

def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "version": 1, "d": 2, "L": 8, "crystallites_per_side": 4,
        "seeds": [5], "sigma1": [4.0, 0.0], "sigma2": [1.0, 0.0],
    }))
    out = tmp_path / "o1"
    assert main(["generate", "--config", str(cfg),
                 "--output-dir", str(out)]) == 0
    assert list(out.glob("micro_*seed5*.txt"))
    # flags override the file
    out2 = tmp_path / "o2"
    assert main(["generate", "--config", str(cfg), "--seeds", "7",
                 "--output-dir", str(out2)]) == 0
    assert list(out2.glob("micro_*seed7*.txt"))
    assert not list(out2.glob("micro_*seed5*.txt"))


def test_seed_spec_count_base(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "version": 1, "d": 2, "L": 8, "crystallites_per_side": 4,
        "seeds": {"count": 3, "base": 11},
        "sigma1": [4.0, 0.0], "sigma2": [1.0, 0.0],
    }))
    out = tmp_path / "o"
    assert main(["generate", "--config", str(cfg),
                 "--output-dir", str(out)]) == 0
    names = sorted(p.name for p in out.glob("micro_*.txt"))
    assert len(names) == 3
    assert all("seed11-" in n for n in names)  # derived streams base/index


def test_embedded_config_comment(tmp_path):
    assert _run(tmp_path, "effective", *FAST, *CONTRAST) == 0
    text = (tmp_path / "effective.csv").read_text()
    cfg_lines = [l for l in text.splitlines() if l.startswith("# config")]
    assert cfg_lines
    assert "sigma1" in cfg_lines[0]
