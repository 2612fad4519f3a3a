import json
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

from vfuzz.cli import main

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"
I_VF = str(PROGRAMS / "I.vf")
IO_VF = str(PROGRAMS / "IOmegaHalf.vf")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dist_identity_versus_half_divergent(capsys):
    code, out, _ = run(capsys, "dist", I_VF, IO_VF, "--type", "unit -o unit", "--monad", "dist",
                       "--quantale", "unit", "--relator", "auto", "--mode", "sim",
                       "--budget", "8", "--iters", "4", "--probe-depth", "2", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["value"] == "1/2" and data["stabilized"] is True
    assert data["iterations"] == 4 and data["trace"][-1] == "1/2"


def test_check_prints_the_type(capsys):
    code, out, _ = run(capsys, "check", I_VF)
    assert code == 0 and out.strip() == "unit -o unit"


def test_check_reports_sensitivities(capsys, tmp_path):
    p = tmp_path / "open.vf"
    p.write_text("case! x of !y -> op+(return y, return y)\n")
    code, out, _ = run(capsys, "check", str(p), "--var", "x:!_2 nat", "--json")
    assert code == 0
    assert json.loads(out) == {"type": "nat", "sensitivities": {"x": "1/2"}}


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", IO_VF, "--budget", "8", "--json")
    data = json.loads(out)
    assert code == 0 and data["mass"] == "1/2" and data["stabilized"] is True
    assert data["support"] == [["\\x:unit. return x", "1/2"]]


def test_eval_state(capsys, tmp_path):
    p = tmp_path / "s.vf"
    p.write_text("get[a](set1[b](return 0), return 1)\n")
    code, out, _ = run(capsys, "eval", str(p), "--monad", "state", "--locations", "a,b", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["states"]["a=0,b=0"]["support"] == [["0", "a=0,b=1", "1"]]
    assert data["states"]["a=1,b=0"]["support"] == [["1", "a=1,b=0", "1"]]


def test_verify_is_deterministic(capsys, monkeypatch):
    monkeypatch.delenv("VFUZZ_SEED", raising=False)
    a = run(capsys, "verify", "--suite", "quantale", "--seed", "42", "--json")
    b = run(capsys, "verify", "--suite", "quantale", "--seed", "42", "--json")
    assert a == b and a[0] == 0
    assert json.loads(a[1])["ok"] is True
    monkeypatch.setenv("VFUZZ_SEED", "7")
    c = run(capsys, "verify", "--suite", "quantale", "--seed", "42", "--json")
    assert json.loads(c[1])["seed"] == 7


def test_pretty_verify_report(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "transport", "--seed", "1")
    assert code == 0
    assert out.splitlines()[0].startswith("PASS transport/")
    assert out.rstrip().endswith("seed 1: ok")


def _rationals(obj):
    if isinstance(obj, str):
        yield obj
    elif isinstance(obj, list):
        for x in obj:
            yield from _rationals(x)
    elif isinstance(obj, dict):
        for x in obj.values():
            yield from _rationals(x)


def test_json_rationals_round_trip(capsys):
    _, out, _ = run(capsys, "dist", I_VF, IO_VF, "--type", "unit -o unit", "--json")
    for s in _rationals(json.loads(out)):
        if s not in ("unit",):
            assert s == "inf" or str(F(s)) == s


@pytest.mark.parametrize("argv,code,err", [
    (["dist", I_VF, IO_VF, "--type", "unit -o unit", "--quantale", "lawvere"], 2, "usage"),
    (["dist", I_VF, IO_VF, "--type", "unit -o"], 2, "usage"),
    (["dist", I_VF, IO_VF, "--type", "nat"], 1, "ill-typed"),
    (["eval", "/nonexistent.vf"], 2, "io"),
    (["check", I_VF, "--var", "x"], 2, "usage"),
    (["verify", "--suite", "nope"], 2, "usage"),
    (["dist", I_VF, IO_VF, "--type", "unit -o unit", "--iters", "0"], 2, "usage"),
])
def test_errors(capsys, argv, code, err):
    got, _, stderr = run(capsys, *argv, "--json")
    assert got == code
    assert json.loads(stderr)["error"]["code"] == err


def test_parse_error_exit_code(capsys, tmp_path):
    p = tmp_path / "bad.vf"
    p.write_text("return (\n")
    code, _, err = run(capsys, "check", str(p))
    assert code == 1 and "[parse]" in err


def test_argparse_usage_errors(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["dist", I_VF]) == 2
    capsys.readouterr()


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "vfuzz", "check", I_VF, "--json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["type"] == "unit -o unit"
