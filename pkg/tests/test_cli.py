import json
import subprocess
import sys
from pathlib import Path

import pytest

from schifferlab.cli import dumps, parse_killing, run

DOMAINS = Path(__file__).resolve().parent.parent / "domains"
FIELDS = Path(__file__).resolve().parent.parent / "fields"


def cli(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_tau_ellipse(capsys):
    code, out, _ = cli(capsys, "tau", "--domain", DOMAINS / "ellipse.json")
    assert code == 0
    assert json.loads(out)["count"] == 4


def test_tau_probe(capsys):
    code, out, _ = cli(capsys, "tau", "--domain", DOMAINS / "ellipse.json", "--probe", 1.9, 0)
    assert code == 0 and json.loads(out)["count"] == 2


def test_tau_circle_is_degenerate(capsys):
    code, out, _ = cli(capsys, "tau", "--domain", DOMAINS / "circle.json")
    assert code == 3
    assert json.loads(out)["degenerate"] is True


def test_invalid_inputs(capsys, tmp_path):
    code, _, err = cli(capsys, "tau", "--domain", tmp_path / "missing.json")
    assert code == 2 and "cannot load domain" in err and "usage" in err
    code, _, err = cli(capsys, "tau", "--domain", DOMAINS / "ellipse.json", "--probe", 5, 0)
    assert code == 2
    code, _, err = cli(capsys, "eigs", "--domain", DOMAINS / "circle.json", "--kmin", 3, "--kmax", 1,
                       "--step", 0.01, "--order", 8)
    assert code == 2
    code, _, err = cli(capsys, "frobnicate")
    assert code == 2 and "usage" in err
    code, _, err = cli(capsys, "nodal", "--field", FIELDS / "j0.json", "--bbox", 0, 0, 1, 1,
                       "--killing", "spin:1,2")
    assert code == 2


def test_sturm(capsys):
    code, out, _ = cli(capsys, "sturm", "--mlow", 4, "--trials", 1000, "--seed", 7)
    assert code == 0 and json.loads(out)["pass"] is True


def test_certify(capsys):
    expected = {"ellipse": (0, "theorem_applies"), "polar_cos6": (0, "hypothesis_fails"),
                "polar_cos3": (0, "hypothesis_fails"), "circle": (3, "degenerate")}
    for name, (code_ref, conclusion) in expected.items():
        code, out, _ = cli(capsys, "certify", "--domain", DOMAINS / f"{name}.json")
        assert code == code_ref
        assert json.loads(out)["conclusion"] == conclusion


def test_eigs_outputs_and_determinism(capsys, tmp_path):
    args = ["eigs", "--domain", DOMAINS / "circle.json", "--kmin", 1.5, "--kmax", 4.0,
            "--step", 0.01, "--order", 10]
    assert cli(capsys, *args, "--out", tmp_path / "a")[0] == 0
    assert cli(capsys, *args, "--out", tmp_path / "b")[0] == 0
    for name in ("sigma_curve.csv", "eigenvalues.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "sigma_curve.csv").read_text().splitlines()[0]
    assert header == "k,sigma_min"
    eig = json.loads((tmp_path / "a" / "eigenvalues.json").read_text())
    assert len(eig["eigenvalues"]) == 3
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config"]["order"] == 10 and manifest["version"]
    assert manifest["wall_clock_seconds"] > 0
    assert set(manifest["files"]) == {"sigma_curve.csv", "eigenvalues.json"}


def test_schiffer_single_k_and_scan(capsys, tmp_path):
    code, out, _ = cli(capsys, "schiffer", "--domain", DOMAINS / "circle.json", "--k",
                       "3.8317059702075125", "--order", 8)
    rep = json.loads(out)
    assert code == 0 and rep["accepted"] and rep["defect"] < 1e-8
    code, out, _ = cli(capsys, "schiffer", "--domain", DOMAINS / "circle.json", "--kmin", 3.0,
                       "--kmax", 4.5, "--step", 0.01, "--order", 8, "--out", tmp_path)
    rep = json.loads(out)
    assert code == 0 and rep["accepted"]
    assert (tmp_path / "defect_curve.csv").read_text().startswith("k,defect\n")
    code, _, err = cli(capsys, "schiffer", "--domain", DOMAINS / "circle.json", "--order", 8)
    assert code == 2


def test_verify(capsys):
    code, out, _ = cli(capsys, "verify", "--domain", DOMAINS / "circle.json", "--k",
                       "3.8317059702075125", "--order", 10)
    rep = json.loads(out)
    assert code == 0 and rep["all_pass"]
    assert len(rep["rotational_trace_harmonics"]["cos"]) == 4
    code, out, _ = cli(capsys, "verify", "--domain", DOMAINS / "circle.json", "--k", 2.0,
                       "--order", 10)
    assert code == 1 and "precondition" in json.loads(out)


def test_nodal(capsys, tmp_path):
    code, out, _ = cli(capsys, "nodal", "--field", FIELDS / "j0.json", "--bbox", -6, -6, 6, 6,
                       "--cells", 256, "--killing", "rot:1,0", "--out", tmp_path)
    rep = json.loads(out)
    assert code == 0
    assert [v["degree"] for v in rep["vertices"]] == [4, 4]
    assert (tmp_path / "nodal.svg").exists() and (tmp_path / "nodal_edges.csv").exists()
    assert (tmp_path / "manifest.json").exists()


def test_parse_killing():
    assert str(parse_killing("rot:1.5,-2")) == "rot:1.5,-2"
    assert str(parse_killing("const:0,1")) == "const:0,1"


def test_dumps_uses_17_digits():
    text = dumps({"a": 0.1, "b": [1.0, 2], "c": float("nan"), "d": True})
    data = json.loads(text)
    assert "0.10000000000000001" in text
    assert data == {"a": 0.1, "b": [1.0, 2], "c": None, "d": True}


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "schifferlab", "tau", "--domain",
                           str(DOMAINS / "polar_cos6.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count"] == 12
