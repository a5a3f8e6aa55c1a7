from __future__ import annotations

import json

import pytest

from resspec.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_residual_g2(capsys):
    code, out = _run(capsys, "residual", "G2")
    d = json.loads(out)
    assert code == 0 and len(d["rows"]) == 5 and d["schema_version"] == 1


def test_unknown_type(capsys):
    code, out = _run(capsys, "roots", "Zx")
    d = json.loads(out)
    assert code == 2 and d["error"] == "unknown Cartan type"


def test_bad_orbit_table(capsys, tmp_path):
    code, out = _run(capsys, "orbits", "A2", "--orbit-table", str(tmp_path / "missing.json"))
    assert code == 3 and "error" in json.loads(out)


def test_roots_and_measures(capsys):
    code, out = _run(capsys, "roots", "B2")
    d = json.loads(out)
    assert code == 0 and d["weyl_order"] == 8 and d["n_roots"] == 8
    code, out = _run(capsys, "measures", "A2")
    assert code == 0 and len(json.loads(out)["rows"]) == 3


@pytest.mark.parametrize("fmt", ["csv", "text"])
def test_report_formats(capsys, fmt):
    code, out = _run(capsys, "report", "G2", "--format", fmt)
    assert code == 0
    if fmt == "csv":
        assert out.count("\n") == 3


def test_y_masses_and_star(capsys):
    code, out = _run(capsys, "y-masses", "B2")
    assert code == 0 and json.loads(out)["status"] == "PASS"
    code, out = _run(capsys, "star-check", "A2", "--samples", "3", "--elements", "2")
    assert code == 0 and json.loads(out)["status"] == "PASS"


def test_verify_deterministic(capsys):
    outs = []
    for _ in range(2):
        code, out = _run(capsys, "verify", "A1", "--pairs", "1", "--tol", "1e-9")
        assert code == 0
        d = json.loads(out)
        d.pop("timestamp")
        outs.append(d)
    assert outs[0] == outs[1] and outs[0]["status"] == "PASS"
