import json
import subprocess
import sys

import pytest

from conftest import chart_III3
from okubo.canonical import ExponentChart
from okubo.cli import UsageError, parse_type, run


def call(argv, capsys):
    code = run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def chart_file(tmp_path):
    p = tmp_path / "chart.json"
    p.write_text(json.dumps(chart_III3().to_dict()))
    return str(p)


def test_parse_type():
    assert parse_type("II*4") == ("II*", 2)
    assert parse_type("III*7") == ("III*", 3)
    assert parse_type("IV*6") == ("IV*", None)
    assert parse_type("II*", 3) == ("II*", 3)
    for bad in ("II*5", "III*4", "V", "II*"):
        with pytest.raises(UsageError):
            parse_type(bad)


def test_canonical_from_chart(chart_file, capsys):
    code, obj = call(["canonical", "--chart", chart_file, "--points=-0.4,1.3,2.5"], capsys)
    assert code == 0
    assert obj["violations"] == [] and obj["multiplicities"] == [2, 1]
    assert obj["system"]["points"][0] == [-0.4, 0.0]


def test_connection_variants(chart_file, capsys):
    _, cor = call(["connection", "--chart", chart_file], capsys)
    _, lit = call(["connection", "--chart", chart_file, "--literal"], capsys)
    assert set(cor["table"]["provenance"].values()) == {"corrected"}
    assert set(lit["table"]["provenance"].values()) == {"literal"}
    assert lit["corrections"] == {} and cor["corrections"]


def test_monodromy_with_oracle(capsys):
    code, obj = call(["monodromy", "--type", "III*5", "--seed", "3", "--oracle"], capsys)
    assert code == 0
    assert obj["rigidity"] == 2 and obj["oracle_mismatch"] < 1e-6


def test_verify_is_deterministic(capsys):
    argv = ["verify", "--type", "II*4", "--samples", "2", "--seed", "7"]
    code, a = call(argv, capsys)
    run(argv)
    b = capsys.readouterr().out
    assert code == 0 and a["ok"]
    assert json.dumps(a, sort_keys=True, indent=1) + "\n" == b


def test_tiny_tolerance_fails(monkeypatch, capsys):
    monkeypatch.setenv("OKUBO_TOL", "1e-30")
    code, obj = call(["verify", "--type", "III*3", "--samples", "1"], capsys)
    assert code == 1 and not obj["ok"]


def test_katz_chain(tmp_path, capsys):
    c = chart_III3()
    chain = {"chart": c.to_dict(), "steps": [{"k": 1, "c": [0.2, 0.1], "rho": [c.rho[1].real, c.rho[1].imag]}]}
    p = tmp_path / "chain.json"
    p.write_text(json.dumps(chain))
    code, obj = call(["katz", "--chain", str(p)], capsys)
    assert code == 0
    assert obj["system"]["partition"] == [2, 1, 1]
    assert obj["block_maps"][0]["new_index"] == 1


def test_integer_exponent_chart_fails(tmp_path, capsys):
    c = chart_III3()
    bad = ExponentChart("III*", 1, (1.0 + 0j,), c.beta, c.gamma, (c.rho[0], 0)).close_fuchs()
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad.to_dict()))
    code, obj = call(["canonical", "--chart", str(p)], capsys)
    assert code == 1 and obj["violations"]
    code, obj = call(["monodromy", "--chart", str(p)], capsys)
    assert code == 1 and obj["kind"] == "IncompleteTable"


def test_usage_errors(capsys):
    assert run(["frobnicate"]) == 2
    assert run(["canonical", "--type", "II*4", "--bogus"]) == 2
    assert run(["canonical", "--type", "II*4", "--points", "0,1"]) == 2
    assert run(["canonical", "--chart", "/nonexistent.json"]) == 2


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "okubo.cli", "canonical", "--type", "IV"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["system"]["partition"] == [4, 2]
