import io
import json

import pytest

from vizsos import cli
from vizsos.certsearch import Certificate, load_fixture


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def cert5_file(tmp_path):
    p = tmp_path / "cert_d5.json"
    p.write_text(load_fixture("cert_d5.json").dumps())
    return p


def test_find_cert_json_d5():
    code, out, _ = run("find-cert", "--d", "5", "--fix", "F_1_1=6", "--fix", "F_2_2=3", "--json")
    assert code == 0
    o = json.loads(out)
    assert o["F"] == [["6", "-4", "59/40"], ["-4", "3", "-5/4"], ["59/40", "-5/4", "3/5"]]
    assert Certificate.loads(out).dumps() == out


def test_find_cert_writes_file(tmp_path):
    target = tmp_path / "c.json"
    code, out, _ = run("find-cert", "--d", "4", "--out", str(target))
    assert code == 0 and "F =" in out
    assert Certificate.loads(target.read_text()).F[0, 0] == 3


def test_verify_with_brute(cert5_file):
    code, out, _ = run("verify", "--file", str(cert5_file), "--brute", "3", "3", "--brute", "4", "2")
    assert code == 0
    assert "PASS  brute (3,3) anchor x_33" in out
    assert "PASS  brute (4,2) anchor x_11" in out
    assert out.rstrip().endswith("OK")


def test_verify_json_round_trip(cert5_file):
    code, out, _ = run("verify", "--file", str(cert5_file), "--json")
    assert code == 0
    assert json.dumps(json.loads(out), sort_keys=True) + "\n" == out


def test_verify_tampered(cert5_file):
    o = json.loads(cert5_file.read_text())
    o["F"][2][2] = "2/3"
    cert5_file.write_text(json.dumps(o))
    code, out, _ = run("verify", "--file", str(cert5_file))
    assert code == 1
    assert "FAIL  equation k=5" in out


def test_verify_garbage(tmp_path):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    code, out, _ = run("verify", "--file", str(p))
    assert code == 1 and "FAIL  parse" in out


def test_gb_oracle():
    code, out, _ = run("gb", "--ng", "2", "--nh", "2", "--oracle")
    assert code == 0
    assert "IDENTICAL" in out
    assert "# 10 elements" in out


def test_gb_json():
    code, out, _ = run("gb", "--ng", "2", "--nh", "2", "--json")
    assert code == 0 and json.loads(out)["size"] == 10


def test_generators():
    code, out, _ = run("generators", "--ng", "2", "--nh", "2")
    assert code == 0 and "# 12 generators" in out


def test_sdp_pipeline():
    code, out, _ = run("sdp-pipeline", "--ng", "2", "--nh", "2", "--ell", "1", "--json")
    assert code == 0
    o = json.loads(out)
    assert o["result"] == "LikelyInfeasible" and o["label"] == "numerical evidence"


def test_structure_check():
    code, out, _ = run("structure-check", "--from", "4", "--to", "6")
    assert code == 0 and "F_3_3 = d / C(d, d/2)" in out


def test_brute_check_file(cert5_file):
    code, out, _ = run("brute-check", "--file", str(cert5_file))
    assert code == 0 and "(2,4)" in out


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["find-cert"],
    ["find-cert", "--d", "5", "--fix", "F_1_1"],
    ["find-cert", "--d", "5", "--fix", "G_1_1=2"],
    ["find-cert", "--d", "5", "--margin", "0.7"],
    ["find-cert", "--d", "2"],
    ["gb", "--ng", "4", "--nh", "4", "--oracle"],
    ["sdp-pipeline", "--ng", "4", "--nh", "3", "--ell", "1"],
    ["verify", "--file", "/nonexistent/cert.json"],
])
def test_usage_errors(argv):
    code, _, err = run(*argv)
    assert code == 2
    assert "usage error" in err


def test_no_solution_exit_code():
    code, _, err = run("find-cert", "--d", "6", "--fix", "F_1_1=4")
    assert code == 3 and "no certificate" in err


def test_help_exits_zero():
    assert run("--help")[0] == 0
