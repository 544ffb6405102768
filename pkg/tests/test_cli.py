import json
import math

import pytest

from vexs.cli import main


def run_cli(*argv):
    return main(list(argv))


def write_cfg(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_constants_prints_value(capsys):
    assert run_cli("constants", "--n", "2", "--p", "2") == 0
    out = capsys.readouterr().out
    assert "1.5707963267" in out


def test_constants_writes_csv(tmp_path, capsys):
    assert run_cli("constants", "--n", "1,2,3", "--p", "1,2",
                   "--out", str(tmp_path)) == 0
    body = (tmp_path / "constants.csv").read_text().splitlines()
    assert body[0] == "n,p,K_closed,K_quad,rel_diff"
    assert len(body) == 7


def test_lemma41_unit_preset_passes(tmp_path, capsys):
    assert run_cli("lemma41", "--preset", "unit-distance",
                   "--out", str(tmp_path)) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "0.333333" in out
    payload = json.loads((tmp_path / "unit-distance.lemma41.json").read_text())
    assert payload["schema"] == "vexs/1"
    assert payload["pass"] is True


def test_missing_config_exits_2(capsys):
    assert run_cli("sweep", "--config", "/nonexistent/x.json") == 2


def test_config_required_exits_2(capsys):
    assert run_cli("sweep") == 2


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "bad.json", {
        "name": "x",
        "field": {"family": "tent"},
        "exponent": {"family": "constant", "value": 2.0},
        "kind": "nguyen-unit",
        "grid": [0.2, 0.1, 0.05],
        "rel_tolerance": 1e-3,
    })
    assert run_cli("sweep", "--config", cfg) == 2
    assert "rel_tolerance" in capsys.readouterr().err


def test_unknown_field_key_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "bad2.json", {
        "name": "x",
        "field": {"family": "tent", "sigma": 1.0},
        "exponent": {"family": "constant", "value": 2.0},
        "kind": "nguyen-unit",
        "grid": [0.2, 0.1, 0.05],
    })
    assert run_cli("sweep", "--config", cfg) == 2


def test_divergent_norm_exits_3(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "div.json", {
        "name": "divergent",
        "field": {"family": "power-tail"},
        "exponent": {"family": "constant", "value": 2.0},
    })
    assert run_cli("norm", "--config", cfg) == 3
    assert "norm" in capsys.readouterr().err


def test_sweep_writes_report_and_plot_data(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "sweep.json", {
        "name": "tent_small",
        "field": {"family": "tent"},
        "exponent": {"family": "constant", "value": 2.0},
        "kind": "nguyen-unit",
        "grid": [0.2, 0.1, 0.05],
        "quad": {"rel_tol": 1e-5, "outer_x_tolerance": 1e-6},
    })
    out = tmp_path / "out"
    assert run_cli("sweep", "--config", cfg, "--out", str(out)) == 0
    report = json.loads((out / "tent_small.report.json").read_text())
    assert report["schema"] == "vexs/1"
    assert report["target"] == pytest.approx(2.0, rel=1e-5)
    plot = (out / "tent_small.plot.dat").read_text().splitlines()
    assert plot[0].startswith("# target = ")
    assert len(plot) == 4  # annotation + three grid points
    assert len(plot[1].split()) == 2


def test_norm_report(tmp_path):
    cfg = write_cfg(tmp_path, "norm.json", {
        "name": "g",
        "field": {"family": "gaussian"},
        "exponent": {"family": "constant", "value": 2.0},
    })
    out = tmp_path / "out"
    assert run_cli("norm", "--config", cfg, "--out", str(out), "--quiet") == 0
    payload = json.loads((out / "g.norm.json").read_text())
    assert payload["norm"] == pytest.approx((math.pi / 2) ** 0.25, rel=1e-8)
    assert payload["bracket_iterations"] <= 60


def test_counterexample_csv(tmp_path, capsys):
    assert run_cli("counterexample", "--r-values", "10,100",
                   "--out", str(tmp_path)) == 0
    rows = (tmp_path / "counterexample.csv").read_text().splitlines()
    assert rows[0] == "R,modular_u,modular_Mu,growth_exponent_fit"
    assert len(rows) == 3


def test_diagnose_exponent(tmp_path):
    cfg = write_cfg(tmp_path, "diag.json", {
        "name": "iq",
        "exponent": {"family": "inverse-quadratic", "a": 2.0, "b": 1.0},
        "n_pairs": 200,
        "range": [-10.0, 10.0],
    })
    out = tmp_path / "out"
    assert run_cli("diagnose-exponent", "--config", cfg, "--out", str(out),
                   "--quiet") == 0
    payload = json.loads((out / "iq.diagnose.json").read_text())
    assert payload["satisfied"] is True
    assert payload["c_holder_estimate"] > 0.0


def test_rerun_byte_identical_outputs(tmp_path):
    """Determinism: re-running a scenario produces byte-identical files."""
    cfg = write_cfg(tmp_path, "sweep.json", {
        "name": "tent_small",
        "field": {"family": "tent"},
        "exponent": {"family": "constant", "value": 2.0},
        "kind": "nguyen-unit",
        "grid": [0.2, 0.1, 0.05],
        "quad": {"rel_tol": 1e-5, "outer_x_tolerance": 1e-6},
    })
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert run_cli("sweep", "--config", cfg, "--out", str(out),
                       "--quiet") == 0
        outs.append((out / "tent_small.report.json").read_bytes()
                    + (out / "tent_small.plot.dat").read_bytes())
    assert outs[0] == outs[1]


def test_modular_cli_roundtrip(tmp_path):
    cfg = write_cfg(tmp_path, "mod.json", {
        "name": "t",
        "field": {"family": "sampled-table", "xs": [0.0, 1.0],
                  "us": [2.0, 2.0]},
        "exponent": {"family": "constant", "value": 2.0},
        "lambda": 2.0,
    })
    out = tmp_path / "out"
    assert run_cli("modular", "--config", cfg, "--out", str(out),
                   "--quiet") == 0
    payload = json.loads((out / "t.modular.json").read_text())
    assert payload["value"] == pytest.approx(1.0, rel=1e-9)
