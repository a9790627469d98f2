import csv
import io
import json
import math

import pytest

from qcausal import __version__
from qcausal.cli import parse_angle, parse_grid, run
from qcausal.errors import ConfigError


def _run(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


@pytest.mark.parametrize("text,value", [
    ("pi/4", math.pi / 4), ("3*pi/8", 3 * math.pi / 8), ("-pi/2", -math.pi / 2),
    ("pi", math.pi), ("0.25", 0.25), (0.5, 0.5), ("2pi", 2 * math.pi),
])
def test_parse_angle(text, value):
    assert parse_angle(text, "$") == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize("bad", ["pi/x", "quarter", None, True, [1]])
def test_parse_angle_rejects(bad):
    with pytest.raises(ConfigError) as exc:
        parse_angle(bad, "$.a")
    assert exc.value.path == "$.a"


def test_parse_grid_step_excludes_stop():
    g = parse_grid({"start": 0, "stop": "pi", "step": "pi/36"}, "$")
    assert len(g) == 36 and g[0] == 0.0 and g[-1] < math.pi


@pytest.mark.parametrize("command,config,code", [
    ("epr", "phi_plus", 0), ("epr", "product", 0),
    ("chsh", "phi_plus", 0), ("chsh", "product", 0),
    ("consistency", "fig4", 0), ("consistency", "noncommuting", 1),
    ("consistency", "anticommuting", 0),
    ("intervene", "phi_plus", 0), ("intervene", "product", 0),
    ("net", "phi_plus", 0),
])
def test_bundled_exit_codes(command, config, code):
    assert _run(command, "--config", config)[0] == code


def test_epr_csv_grid():
    code, out = _run("epr", "--config", "phi_plus", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 36
    assert max(float(r["pi_gap"]) for r in rows) <= 1e-12
    first = rows[0]
    assert float(first["P_par_par"]) + float(first["P_perp_perp"]) == 1.0
    assert first["cond"] == "1"


def test_chsh_json_report():
    code, out = _run("chsh", "--config", "phi_plus", "--format", "json")
    doc = json.loads(out)
    table = dict(doc["tables"]["chsh"]["rows"])
    assert table["lhv_bound"] == 2.0
    assert table["quantum_max"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert doc["provenance"]["tool_version"] == __version__
    assert doc["provenance"]["seed"] == 0
    assert len(doc["provenance"]["config_sha256"]) == 64


def test_chsh_product_bound():
    doc = json.loads(_run("chsh", "--config", "product", "--format", "json")[1])
    assert dict(doc["tables"]["chsh"]["rows"])["quantum_max"] <= 2 + 1e-6


def test_intervene_text():
    out = _run("intervene", "--config", "phi_plus")[1]
    assert "(Same): P(Y|X=par)=1, P(Y|do X=par)=0.5 -> NOT CAUSAL-STABLE" in out
    assert "Lambda is a common cause" in out


def test_consistency_flags():
    out = _run("consistency", "--config", "anticommuting")[1]
    assert "anticommuting pairs: A/B" in out
    doc = json.loads(_run("consistency", "--config", "noncommuting", "--format", "json")[1])
    (viol,) = doc["tables"]["violations"]["rows"]
    assert viol[:2] == ["A", "B"] and viol[5] is False


def test_seed_override_changes_provenance():
    doc = json.loads(_run("chsh", "--config", "phi_plus", "--seed", "7", "--format", "json")[1])
    assert doc["provenance"]["seed"] == 7


def test_out_dir(tmp_path):
    code, _ = _run("epr", "--config", "phi_plus", "--out", str(tmp_path))
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["epr_epr.csv", "report.json", "report.txt"]


def test_malformed_angle_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"preparation": {"state": "phi_plus"},
                               "analysis": {"epr": {"a_grid": [0, "pi/x"]}}}))
    assert _run("epr", "--config", str(cfg))[0] == 2
    assert "$.analysis.epr.a_grid[1]" in capsys.readouterr().err


def test_invalid_json_reports_line(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n  "preparation": ,\n}')
    assert _run("epr", "--config", str(cfg))[0] == 2
    assert "line 2" in capsys.readouterr().err


def test_bad_state_and_missing_config(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"preparation": {"state": {"matrix": [[1, 0], [0, 1]]}}}))
    assert _run("epr", "--config", str(cfg))[0] == 2
    assert "$.preparation.state" in capsys.readouterr().err
    assert _run("epr", "--config", str(tmp_path / "nope.json"))[0] == 2


def test_nonpositive_tol():
    assert _run("epr", "--config", "phi_plus", "--tol", "0")[0] == 2
