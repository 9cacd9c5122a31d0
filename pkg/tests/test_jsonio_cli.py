import json
import subprocess
import sys
from pathlib import Path

import pytest

from elladic.cli import dispatch
from elladic.errors import ValidationError
from elladic.jsonio import InputSet, digest, dumps, load_chain, load_group, load_map

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = dispatch([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_factval(capsys):
    code, out, err = run(capsys, "padic", "factval", "--ell", "3", "--a", "10")
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["v"] == 4
    assert doc["manifest"]["command"] == ["padic", "factval", "--ell", "3", "--a", "10"]


def test_log_value(capsys):
    code, out, _ = run(capsys, "padic", "log", "--ell", "3", "--x", "4", "--precision", "4")
    assert code == 0
    assert json.loads(out)["value"] == "w:1 u:16 mod l^4"


def test_interpolating_the_identity_returns_it(capsys):
    path = DATA / "id.json"
    code, out, _ = run(capsys, "flow", "interpolate", "--psi", path, "--t", "7")
    assert code == 0
    doc = json.loads(out)
    source = json.loads(path.read_text())
    assert doc["components"] == source["components"]
    assert doc["manifest"]["inputs"][str(path)] == digest(path.read_bytes())


def test_boundary_of_the_commutator_cycle(capsys):
    code, out, _ = run(capsys, "chains", "boundary", "--group", DATA / "z3xz3.json",
                       "--chain", DATA / "z3xz3_cycle.json")
    assert code == 0
    assert json.loads(out)["chain"]["terms"] == []


def test_mathematical_failure_exits_4(capsys):
    code, out, err = run(capsys, "chains", "solve", "--group", DATA / "z3xz3.json",
                         "--chain", DATA / "z3xz3_cycle.json")
    assert code == 4 and out == ""
    assert json.loads(err)["error"] == "NotABoundary"


def test_unknown_flag_exits_2(capsys):
    code, out, err = run(capsys, "padic", "factval", "--ell", "3", "--a", "10", "--bogus")
    assert code == 2 and out == ""
    doc = json.loads(err)
    assert doc["error"] == "UsageError" and "--bogus" in doc["message"]


def test_missing_file_exits_2(capsys):
    code, _, err = run(capsys, "flow", "interpolate", "--psi", DATA / "nope.json", "--t", "1")
    assert code == 2
    assert json.loads(err)["error"] == "ValidationError"


def test_inline_json_is_accepted(capsys):
    inline = (DATA / "id.json").read_text()
    code, out, _ = run(capsys, "flow", "interpolate", "--psi", inline, "--t", "2")
    assert code == 0
    assert list(json.loads(out)["manifest"]["inputs"]) == ["inline:0"]


def test_spent_budget_exits_3(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "padic", "--budget", "0")
    assert code == 3
    assert out.startswith("INCOMPLETE")


def test_output_is_deterministic(capsys, tmp_path):
    argv = ["chains", "boundary", "--group", DATA / "s3.json", "--chain", DATA / "s3_chain.json"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0
    target = tmp_path / "out.json"
    assert dispatch([str(a) for a in argv] + ["--out", str(target)]) == 0
    written, printed = json.loads(target.read_text()), json.loads(first[1])
    assert written.pop("manifest")["command"][-2] == "--out"
    printed.pop("manifest")
    assert written == printed


def test_record_time_adds_wall_time(capsys):
    code, out, _ = run(capsys, "padic", "factval", "--ell", "3", "--a", "10", "--record-time")
    assert code == 0 and "wall_time_s" in json.loads(out)["manifest"]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "elladic.cli", "padic", "digits", "--ell", "3", "--a", "10"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "manifest" in json.loads(proc.stdout)


def test_dumps_is_canonical():
    assert dumps({"b": 1, "a": [1, 2]}) == dumps({"a": [1, 2], "b": 1})
    assert dumps({}).endswith("\n")


def test_input_set_records_digests(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"a": 1}')
    inputs = InputSet()
    assert inputs.load(str(p)) == {"a": 1}
    assert inputs.digests[str(p)] == digest(b'{"a": 1}')
    p.write_text("{broken")
    with pytest.raises(ValidationError):
        inputs.load(str(p))


def test_loaders_round_trip():
    G = load_group(json.loads((DATA / "z3xz3.json").read_text()))
    z = load_chain(json.loads((DATA / "z3xz3_cycle.json").read_text()), G)
    assert load_chain(z.to_json(), G) == z
    psi = load_map(json.loads((DATA / "id.json").read_text()))
    assert load_map(psi.to_json()).to_json() == psi.to_json()
