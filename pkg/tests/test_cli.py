import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hypersum.cli import emit_report, exit_code_for, run
from hypersum.theorems import REGISTRY, IdentityId, ParamBinding, inject_fault
from hypersum.verifier import REPORT_FIELDS, VerificationReport, verify

F = Fraction


def call(*argv, registry=REGISTRY):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), registry, out, err)
    return code, out.getvalue(), err.getvalue()


def test_list():
    code, out, _ = call("list")
    assert code == 0
    for ident in IdentityId:
        assert ident.value in out
    assert "d = 5/4 -> ram_1_14" in out


def test_show_symbolic_d():
    code, out, _ = call("show", "ext_ram_2_1", "--terms", "3")
    assert code == 0
    lines = [l.split(": ", 1)[1] for l in out.splitlines() if l.strip().startswith("n=")]
    assert lines == ["1", "1/18 * (d+1)/d", "5/312 * (d+2)/d"]
    assert F(1, 18) == F(1, 2) * F(1, 9) and F(5, 312) == F(3, 8) * F(5, 117)


def test_show_numeric():
    code, out, _ = call("show", "ext_ram_2_1", "--terms", "3", "--d", "5/4")
    assert code == 0 and "n=1: 1/10" in out
    code, _, err = call("show", "gauss_1_6", "--a", "1/2")
    assert code == 2 and "missing parameter" in err


def test_verify_text():
    code, out, _ = call("verify", "gauss_1_6", "--a", "1/2", "--b", "1/4", "--c", "5/4", "--digits", "20")
    assert code == 0
    header = out.splitlines()[0].split()
    assert header[:3] == ["identity", "params", "status"]
    assert "verified" in out and "1.3110287771460599052" in out


def test_verify_invalid_d_exit_2():
    code, _, err = call("verify", "ext_ram_2_1", "--d", "0")
    assert code == 2 and "d != 0, -1, -2, ..." in err


@pytest.mark.parametrize("argv", [
    ["verify", "watson"],
    ["verify", "gauss_1_6", "--a", "1/0"],
    ["verify", "ext_ram_2_1", "--d", "1", "--digits", "4"],
    ["verify", "ext_ram_2_1", "--d", "1", "--digits", "1001"],
    ["sweep", "gauss_1_6", "--d-grid", "1,2"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv):
    assert call(*argv)[0] == 2


def test_env_digits(monkeypatch):
    monkeypatch.setenv("HYPERSUM_DIGITS", "12")
    code, out, _ = call("verify", "ram_1_14", "--json")
    assert code == 0 and json.loads(out)["reports"][0]["requested_digits"] == 12
    monkeypatch.setenv("HYPERSUM_DIGITS", "2")
    assert call("gamma", "1/2")[0] == 2


def test_json_schema_and_roundtrip():
    code, out, _ = call("sweep", "ext_ram_2_1", "--d-grid", "1/2,1,5/4", "--digits", "20", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1
    assert [list(r) for r in doc["reports"]] == [list(REPORT_FIELDS)] * 3
    reports = [VerificationReport.from_dict(r) for r in doc["reports"]]
    assert [r.params for r in reports] == [{"d": "1/2"}, {"d": "1"}, {"d": "5/4"}]
    assert all(r.wall_ms == 0 for r in reports)


def test_csv_rows(tmp_path):
    path = tmp_path / "sweep.csv"
    code, out, _ = call("sweep", "ext_ram_2_1", "--d-grid", "1/2,1,5/4,2,10", "--digits", "20", "--csv", str(path))
    assert code == 0 and out == ""
    rows = list(csv.reader(path.open()))
    assert rows[0] == list(REPORT_FIELDS) and len(rows) == 6
    assert {r[-1] for r in rows[1:]} == {"verified"}


def test_timing_flag():
    _, out, _ = call("verify", "ram_1_12", "--digits", "20", "--json", "--timing")
    assert json.loads(out)["reports"][0]["wall_ms"] >= 0


def test_unwritable_path():
    code, _, err = call("verify", "ram_1_14", "--json", "/nonexistent/dir/out.json")
    assert code == 2 and "cannot write" in err


def test_sweep_reports_invalid_point():
    code, out, _ = call("sweep", "ext_ram_2_1", "--d-grid", "1,0", "--digits", "20", "--json")
    statuses = [r["status"] for r in json.loads(out)["reports"]]
    assert statuses == ["verified", "invalid_params"] and code == 2


def test_fault_injection_exit_1():
    bad = inject_fault(REGISTRY, IdentityId.GAUSS_1_6, params=ParamBinding(a=F(1, 3), b=F(1, 3), c=F(2)))
    code, out, _ = call("suite", "--digits", "20", "--json", registry=bad)
    statuses = [r["status"] for r in json.loads(out)["reports"]]
    assert code == 1 and statuses.count("mismatch") == 1


def test_exit_code_precedence():
    ok = verify(IdentityId.RAM_1_14, ParamBinding(), 10)
    bad = verify(IdentityId.EXT_RAM_2_1, ParamBinding(d=F(0)), 10)
    assert exit_code_for([ok]) == 0
    assert exit_code_for([ok, bad]) == 2
    worse = verify(IdentityId.RAM_1_14, ParamBinding(), 20, inject_fault(REGISTRY, IdentityId.RAM_1_14))
    assert exit_code_for([ok, bad, worse]) == 1
    with pytest.raises(ValueError):
        emit_report([], "json")


def test_sum_and_gamma():
    code, out, _ = call("sum", "--num", "1/2,1/4", "--den", "5/4", "--digits", "25")
    assert code == 0 and "1.311028777146059905232420" in out and "richardson" in out
    code, out, _ = call("sum", "--num", "1/2,1/4", "--den", "5/4", "--digits", "20", "--method", "direct")
    assert code == 1 and "warning" in out
    code, out, _ = call("sum", "--num", "1,1", "--den", "1")
    assert code == 2
    code, out, _ = call("gamma", "1/2", "--digits", "20")
    assert code == 0 and out.strip() == "1.7724538509055160273"
    assert call("gamma", "-3")[0] == 2


def test_console_script_and_module():
    for cmd in (["hypersum"], [sys.executable, "-m", "hypersum"]):
        proc = subprocess.run(cmd + ["gamma", "5", "--digits", "10"], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.strip() == "24.00000000"


def test_suite_json_deterministic(tmp_path):
    paths = [tmp_path / f"run{i}.json" for i in range(2)]
    for p in paths:
        assert call("suite", "--digits", "20", "--json", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
