import json
import subprocess
import sys
from importlib import resources

import pytest

from noether2.cli import main
from noether2.dsl import corpus_names

CORPUS = resources.files("noether2") / "corpus"


def corpus(name):
    return str(CORPUS / f"{name}.n2")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_verifies(capsys, name):
    code, out, _ = run(capsys, "verify", corpus(name), "--format", "json")
    doc = json.loads(out)
    assert code == 0, doc.get("first_mismatch")
    assert doc["status"] == "ok" and all(g["match"] for g in doc["goldens"])


@pytest.mark.parametrize("command", ["el", "relation", "claw", "verify"])
def test_each_stage_runs(capsys, command):
    code, out, _ = run(capsys, command, corpus("wave"))
    assert code == 0 and "status: ok" in out


def test_stages_are_cumulative(capsys):
    docs = {}
    for command in ("el", "relation", "claw"):
        _, out, _ = run(capsys, command, corpus("wave"), "--format", "json")
        docs[command] = json.loads(out)
    assert "relations" not in docs["el"]
    assert "residuals" in docs["relation"] and "conservation_law" not in docs["relation"]
    assert "conservation_law" in docs["claw"]


def test_seeded_json_is_byte_identical():
    argv = [sys.executable, "-m", "noether2.cli", "verify", corpus("mkg_discrete"), "--format", "json", "--seed", "7",
            "--trials", "25"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b
    assert json.loads(a)["seed"] == 7


def test_timing_only_on_request(capsys):
    _, out, _ = run(capsys, "el", corpus("wave"), "--format", "json")
    assert "timing_seconds" not in json.loads(out)
    _, out, _ = run(capsys, "el", corpus("wave"), "--format", "json", "--timing")
    assert json.loads(out)["timing_seconds"] >= 0


def test_usage_errors_exit_2(capsys, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["bogus", corpus("wave")])
    assert info.value.code == 2
    assert main(["el", str(tmp_path / "missing.n2")]) == 2
    bad = tmp_path / "bad.n2"
    bad.write_text("vars: x\nfields: u\nlagrangian: u_{\n")
    assert main(["el", str(bad)]) == 2
    assert "line 3, column" in capsys.readouterr().err
    assert main(["el", corpus("wave"), "--trials", "0"]) == 2


def test_golden_mismatch_exits_1(capsys, tmp_path):
    text = (CORPUS / "wave.n2").read_text()
    broken = tmp_path / "wave_bad.n2"
    broken.write_text(text.replace("expect residual g1: 0", "expect residual g1: u_x"))
    code, out, _ = run(capsys, "verify", str(broken), "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["status"] == "fail"
    assert "residual g1" in doc["first_mismatch"]
    bad = [g for g in doc["goldens"] if not g["match"]]
    assert bad[0]["expected"] == "u_x" and bad[0]["actual"] == "0"


def test_perturbed_multiplier_exits_1(capsys, tmp_path):
    text = (CORPUS / "lattice_kdv.n2").read_text()
    broken = tmp_path / "kdv_bad.n2"
    lines = [line + " + u[1,0]^2" if line.startswith("multiplier 1:") else line for line in text.splitlines()]
    broken.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "verify", str(broken), "--format", "json")
    doc = json.loads(out)
    assert code == 1
    (res,) = doc["residuals"]
    assert res["verdict"]["status"] == "Nonzero" and res["verdict"]["counterexample"]


def test_strict_golden_mode(capsys, tmp_path):
    # a flux that differs by a divergence-free term passes by default, fails strictly
    text = (CORPUS / "wave.n2").read_text()
    alt = tmp_path / "wave_alt.n2"
    lines = []
    for line in text.splitlines():
        if line.startswith("expect flux x:"):
            line += " + u_t"
        elif line.startswith("expect flux t:"):
            line += " - u_x"
        lines.append(line)
    alt.write_text("\n".join(lines) + "\n")
    assert run(capsys, "claw", str(alt))[0] == 0
    assert run(capsys, "claw", str(alt), "--expect-strict")[0] == 1
    assert run(capsys, "claw", corpus("wave"), "--expect-strict")[0] == 0


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "noether2.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "--expect-strict" in out.stdout
