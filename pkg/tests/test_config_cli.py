import json
import os
import subprocess
import sys

import pytest

from srb_response import (
    CircleLeaf,
    SlopedSegment,
    StableSegment,
    TrigPolyScalar,
    TrigPolyVectorField,
    save_field,
    save_scalar,
)
from srb_response.cli import main
from srb_response.config import (
    apply_overrides,
    build_curve,
    build_family,
    build_window,
    config_hash,
    parse_config,
    parse_config_text,
    serialize_config,
)
from srb_response.errors import ConfigError


@pytest.fixture()
def workspace(tmp_path):
    """Config + field files in a temp dir; returns paths keyed by name."""
    field = tmp_path / "X.coeffs"
    save_field(TrigPolyVectorField(TrigPolyScalar.sin_mode(1, 0), TrigPolyScalar.zero()), field)
    smooth = tmp_path / "smooth.coeffs"
    save_scalar(TrigPolyScalar.constant(1.0) + TrigPolyScalar.cos_mode(1, 0, 0.5), smooth)

    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    base = """
[curve]
kind = stable_segment
center_x = 0.12
center_y = 0.57
half_length = 0.15

[perturbation]
field_file = X.coeffs

[run]
out_dir = {out}
"""
    cfg = write("base.cfg", base.format(out=tmp_path / "out"))
    return {"dir": tmp_path, "cfg": cfg, "write": write, "out": str(tmp_path / "out")}


def test_defaults_and_roundtrip(workspace):
    cfg = parse_config(workspace["cfg"])
    assert cfg.support_fraction == 0.9
    assert cfg.routes == ("series", "spectral")
    assert cfg.tol == 1e-9 and cfg.tol_quad == 1e-10
    assert cfg.eps_schedule == (0.02, 0.01, 0.005)
    again = parse_config_text(serialize_config(cfg), base_dir=cfg.base_dir)
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)


def test_parse_rejects_bad_configs(workspace):
    write = workspace["write"]
    bad = [
        "[curve]\nkind = pentagon\ncenter_x = 0\ncenter_y = 0\n",
        "[curve]\nkind = stable_segment\ncenter_x = 0.1\ncenter_y = 0.1\n",  # no half_length/field
        "[curve]\nkind = stable_segment\ncenter_x = oops\ncenter_y = 0\nhalf_length = 0.1\n",
        "[curve]\nkind = sloped_segment\ncenter_x = 0\ncenter_y = 0\nhalf_length = 0.1\nalpha = inf\n",
        "[curve]\nkind = stable_segment\ncenter_x = 0\ncenter_y = 0\nhalf_length = 0.9\n",
    ]
    for i, text in enumerate(bad):
        text += "\n[perturbation]\nfield_file = X.coeffs\n"
        with pytest.raises(ConfigError):
            parse_config(write(f"bad{i}.cfg", text))
    with pytest.raises(ConfigError):
        parse_config(str(workspace["dir"] / "missing.cfg"))
    good = open(workspace["cfg"]).read()
    with pytest.raises(ConfigError):
        parse_config(write("extra.cfg", good + "\n[window]\nsupport_fraction = 0.9\nbogus = 1\n"))
    with pytest.raises(ConfigError):
        parse_config(write("eps.cfg", good + "\n[oracle]\neps_schedule = 0.01,0.02\n"))
    with pytest.raises(ConfigError):
        parse_config(write("route.cfg", good + "\n[response]\nroutes = magic\n"))


def test_overrides(workspace):
    cfg = parse_config(workspace["cfg"])
    cfg2 = apply_overrides(cfg, seed=7, out="elsewhere", routes="series", tol=1e-6)
    assert cfg2.rng_seed == 7 and cfg2.out_dir == "elsewhere"
    assert cfg2.routes == ("series",) and cfg2.tol == 1e-6
    with pytest.raises(ConfigError):
        apply_overrides(cfg, routes="nope")


def test_builders(workspace):
    write = workspace["write"]
    cfg = parse_config(workspace["cfg"])
    assert isinstance(build_curve(cfg), StableSegment)
    fam = build_family(cfg)
    assert fam.validity_radius > 0

    text = open(workspace["cfg"]).read().replace(
        "kind = stable_segment", "kind = sloped_segment"
    ).replace("half_length = 0.15", "half_length = 0.15\nalpha = 0.4")
    assert isinstance(build_curve(parse_config(write("sloped.cfg", text))), SlopedSegment)

    text = open(workspace["cfg"]).read().replace(
        "kind = stable_segment", "kind = circle"
    ).replace("half_length = 0.15", "radius = 0.15\ncap_eps = 0.05")
    assert isinstance(build_curve(parse_config(write("circle.cfg", text))), CircleLeaf)

    text = open(workspace["cfg"]).read() + "\n[window]\nsmooth_factor_file = smooth.coeffs\n"
    win = build_window(parse_config(write("smooth.cfg", text)))
    assert win.smooth_factor is not None


def _run(argv):
    return main(argv)


def test_cli_admissible(workspace, capsys):
    code = _run(["admissible", "--config", workspace["cfg"]])
    assert code == 0
    out = capsys.readouterr().out
    assert "admissible:  yes" in out
    csv_path = os.path.join(workspace["out"], "admissibility.csv")
    assert os.path.exists(csv_path)
    meta = json.load(open(csv_path + ".meta.json"))
    assert meta["tool"] == "srb-response" and "config_hash" in meta and "rng_algorithm" in meta
    header = open(csv_path).readline().strip().split(",")
    assert header == ["kind", "slope_bound", "min_iterate"]


def test_cli_exit_codes(workspace):
    write = workspace["write"]
    good = open(workspace["cfg"]).read()

    circle_bad = good.replace("kind = stable_segment", "kind = circle").replace(
        "half_length = 0.15", "radius = 0.30\ncap_eps = 0.05"
    )
    assert _run(["admissible", "--config", write("c1.cfg", circle_bad)]) == 3

    eps_bad = good.replace("kind = stable_segment", "kind = circle").replace(
        "half_length = 0.15", "radius = 0.20\ncap_eps = 0.25"
    )
    assert _run(["respond", "--config", write("c2.cfg", eps_bad)]) == 3

    assert _run(["admissible", "--config", str(workspace["dir"] / "nope.cfg")]) == 2
    assert _run(["admissible", "--config", write("c3.cfg", good.replace("stable_segment", "hexagon"))]) == 2

    kmax = good + "\n[response]\nk_max = 1\n"
    assert _run(["respond", "--config", write("c4.cfg", kmax)]) == 4


def test_cli_respond_artifacts(workspace, capsys):
    code = _run(["respond", "--config", workspace["cfg"]])
    assert code == 0
    out = capsys.readouterr().out
    assert "route-agreement" in out and "PASS" in out
    for name in ["terms_series.csv", "terms_spectral.csv", "comparison.csv",
                 "decay.svg", "decay.txt", "report.txt"]:
        assert os.path.exists(os.path.join(workspace["out"], name)), name
    header = open(os.path.join(workspace["out"], "terms_series.csv")).readline().strip()
    assert header == "k,term,partial_sum,tail_bound_at_k"
    code = _run(["report", "--out", workspace["out"]])
    assert code == 0


def test_cli_report_requires_artifacts(tmp_path):
    assert _run(["report", "--out", str(tmp_path)]) == 2


def test_cli_respond_oracle_dominated(workspace, capsys):
    """An undersampled oracle is flagged as FAIL in the report but exits 0."""
    text = open(workspace["cfg"]).read() + (
        "\n[response]\nroutes = series,oracle\n"
        "\n[oracle]\nn_iterates = 10000\nn_seeds = 4\nt_step = 0.001\n"
    )
    path = workspace["write"]("tiny.cfg", text)
    code = _run(["respond", "--config", path])
    assert code == 0
    out = capsys.readouterr().out
    assert "stat_error dominates" in out
    assert "FAIL" in out


def test_cli_validate_skip_on_loose_tolerance(workspace, capsys):
    text = open(workspace["cfg"]).read() + "\n[response]\ntol_quad = 1e-2\ntol = 1e-6\n"
    path = workspace["write"]("loose.cfg", text)
    code = _run(["validate", "--config", path])
    out = capsys.readouterr().out
    assert "skipped-due-to-tolerance" in out
    assert code == 0


def test_cli_oracle_small(workspace, capsys):
    text = open(workspace["cfg"]).read() + (
        "\n[oracle]\nn_iterates = 10000\nn_seeds = 2\ngrid_n = 64\n"
        "samples_per_cell = 8\nulam_replicates = 2\nt_step = 0.02\n"
        "eps_schedule = 0.04,0.02\nmollify_eps = 0.04\n"
    )
    path = workspace["write"]("oracle.cfg", text)
    code = _run(["oracle", "--config", path])
    assert code == 0
    for name in ["estimates.csv", "density.svg", "density.txt", "report_oracle.txt"]:
        assert os.path.exists(os.path.join(workspace["out"], name)), name
    rows = open(os.path.join(workspace["out"], "estimates.csv")).read()
    assert "birkhoff" in rows and "ulam" in rows and "fd_response" in rows


def test_cli_respond_constant_field(workspace, capsys):
    """Constant X: both routes report exactly zero and the run passes."""
    field = workspace["dir"] / "Xconst.coeffs"
    save_field(TrigPolyVectorField.constant(0.4, -0.3), field)
    text = open(workspace["cfg"]).read().replace("field_file = X.coeffs",
                                                 "field_file = Xconst.coeffs")
    path = workspace["write"]("const.cfg", text)
    assert _run(["respond", "--config", path]) == 0
    out = capsys.readouterr().out
    assert "total = +0.000000000000e+00" in out
    assert "overall: PASS" in out


def test_bundled_default_config_validates():
    """The shipped default configuration passes every deterministic invariant."""
    from srb_response.validation import run_validation

    root = os.path.join(os.path.dirname(__file__), os.pardir)
    cfg = parse_config(os.path.join(root, "configs", "stable_segment.cfg"))
    checks = run_validation(cfg)
    failures = [(n, d) for n, status, d in checks if status == "FAIL"]
    assert not failures, failures


def test_cli_module_entrypoint(workspace):
    proc = subprocess.run(
        [sys.executable, "-m", "srb_response.cli", "admissible", "--config", workspace["cfg"]],
        capture_output=True,
        text=True,
        cwd=workspace["dir"],
    )
    assert proc.returncode == 0
    assert "admissible" in proc.stdout
