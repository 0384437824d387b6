"""Tests for the batch runner, JSON output, and the interactive loop."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from spinel import SpecVerdict
from spinel.cli import main

GOOD = """\
type Nat
type B
type Pair 2
assume z : Nat
assume suc : Nat -> Nat
assume pair : forall X. forall Y. X -> Y -> Pair X Y

check pair (\\x. x) z : Pair (Nat -> Nat) Nat
synth suc (suc z)
"""

BAD = GOOD + "\ncheck suc z : B\n"


@pytest.fixture
def good_file(tmp_path):
    path = tmp_path / "good.spn"
    path.write_text(GOOD)
    return str(path)


@pytest.fixture
def bad_file(tmp_path):
    path = tmp_path / "bad.spn"
    path.write_text(BAD)
    return str(path)


def run_lines(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out.splitlines(), captured.err


# ------------------------------------------------------------ batch runs


def test_run_reports_every_goal(good_file, capsys):
    code, out, err = run_lines(capsys, "run", good_file)
    assert code == 0
    assert err == ""
    assert "[1] check pair (\\x. x) z : Pair (Nat -> Nat) Nat" in out
    assert "[2] synth suc (suc z)" in out
    assert "    type: Pair (Nat -> Nat) Nat" in out
    assert "    type: Nat" in out


def test_run_elab_prints_the_annotated_term(good_file, capsys):
    code, out, _ = run_lines(capsys, "run", good_file, "--elab")
    assert code == 0
    assert "    elaboration: pair [Nat -> Nat] [Nat] (\\x : Nat. x) z" in out


def test_run_trace_prints_the_rule_trace(good_file, capsys):
    code, out, _ = run_lines(capsys, "run", good_file, "--trace")
    assert code == 0
    traces = [line for line in out if line.startswith("    trace:")]
    assert len(traces) == 2
    assert "app-check" in traces[0]
    assert "peel" in traces[0]
    assert "app-synth" in traces[1]


def test_run_json_emits_one_record_per_goal(good_file, capsys):
    code, out, _ = run_lines(capsys, "run", good_file, "--json", "--elab")
    assert code == 0
    records = [json.loads(line) for line in out]
    assert [r["goal"] for r in records] == [1, 2]
    assert records[0]["mode"] == "check"
    assert records[0]["expected"] == "Pair (Nat -> Nat) Nat"
    assert records[0]["status"] == "ok"
    assert records[0]["elaboration"] == "pair [Nat -> Nat] [Nat] (\\x : Nat. x) z"
    assert records[1]["mode"] == "synth"
    assert records[1]["type"] == "Nat"
    assert "expected" not in records[1]


def test_run_failing_goal_exits_one(bad_file, capsys):
    code, out, _ = run_lines(capsys, "run", bad_file)
    assert code == 1
    assert any("error: type mismatch" in line for line in out)
    assert any("expected type: B" in line for line in out)
    assert any("synthesized type: Nat" in line for line in out)


def test_run_failing_goal_json_diagnostic(bad_file, capsys):
    code, out, _ = run_lines(capsys, "run", bad_file, "--json")
    assert code == 1
    last = json.loads(out[-1])
    assert last["status"] == "error"
    diag = last["diagnostic"]
    assert diag["kind"] == "type-mismatch"
    assert diag["message"] == "type mismatch"
    assert diag["expected"] == "B"
    assert diag["synthesized"] == "Nat"
    assert diag["span"]["line"] == 11


def test_run_keeps_going_after_a_failure(bad_file, tmp_path, capsys):
    path = tmp_path / "more.spn"
    path.write_text(BAD + "synth z\n")
    code, out, _ = run_lines(capsys, "run", str(path), "--json")
    assert code == 1
    statuses = [json.loads(line)["status"] for line in out]
    assert statuses == ["ok", "ok", "error", "ok"]


def test_run_parse_error_exits_two(tmp_path, capsys):
    path = tmp_path / "broken.spn"
    path.write_text("check \\x. : Nat\n")
    code, out, err = run_lines(capsys, "run", str(path))
    assert code == 2
    assert "parse error:" in err


def test_run_parse_error_json(tmp_path, capsys):
    path = tmp_path / "broken.spn"
    path.write_text("type Nat\ncheck : Nat\n")
    code, out, _ = run_lines(capsys, "run", str(path), "--json")
    assert code == 2
    record = json.loads(out[0])
    assert record["status"] == "parse-error"
    assert record["line"] == 2


def test_run_missing_file_exits_two(tmp_path, capsys):
    code, _, err = run_lines(capsys, "run", str(tmp_path / "nope.spn"))
    assert code == 2
    assert "error:" in err


def test_spec_verify_accepts_solved_spines(good_file, capsys):
    code, out, _ = run_lines(capsys, "run", good_file, "--spec-verify")
    assert code == 0
    spec_lines = [line.strip() for line in out if "spec:" in line]
    assert spec_lines[0].startswith("spec: accepted (")
    assert "PHead" in spec_lines[0]


def test_spec_verify_json_payload(good_file, capsys):
    code, out, _ = run_lines(capsys, "run", good_file, "--json", "--spec-verify")
    assert code == 0
    records = [json.loads(line) for line in out]
    assert records[0]["spec"]["accepted"] is True
    assert records[0]["spec"]["trace"][0] == "PHead"
    assert records[1]["spec"]["accepted"] is True


def test_spec_verify_skips_non_spines(tmp_path, capsys):
    path = tmp_path / "atom.spn"
    path.write_text("type Nat\nassume z : Nat\nsynth z\n")
    code, out, _ = run_lines(capsys, "run", str(path), "--json", "--spec-verify")
    assert code == 0
    assert json.loads(out[0])["spec"] == {"skipped": True}


def test_spec_verify_rejection_exits_three(good_file, capsys, monkeypatch):
    import spinel.cli as cli

    monkeypatch.setattr(
        cli, "verify_spec", lambda *a: SpecVerdict(False, ("PHead",), "forced")
    )
    code, out, _ = run_lines(capsys, "run", good_file, "--spec-verify")
    assert code == 3
    assert any("spec: rejected: forced" in line for line in out)


def test_color_env_switch(bad_file, capsys, monkeypatch):
    monkeypatch.setenv("SPINEL_COLOR", "always")
    _, out, _ = run_lines(capsys, "run", bad_file)
    assert any("\x1b[31m" in line for line in out)
    monkeypatch.setenv("SPINEL_COLOR", "never")
    _, out, _ = run_lines(capsys, "run", bad_file)
    assert not any("\x1b[" in line for line in out)


# ------------------------------------------------------------ interactive


def feed_repl(monkeypatch, capsys, lines):
    feed = iter(lines)

    def fake_input(_=""):
        try:
            return next(feed)
        except StopIteration:
            raise EOFError from None

    monkeypatch.setattr("builtins.input", fake_input)
    monkeypatch.setenv("SPINEL_COLOR", "never")
    code = main(["repl"])
    return code, capsys.readouterr().out


def test_repl_session(monkeypatch, capsys):
    code, out = feed_repl(
        monkeypatch,
        capsys,
        [
            ":type Nat",
            ":assume z : Nat",
            ":assume f : forall X. X -> X",
            ":synth f z",
            ":check f z : Nat",
            ":quit",
        ],
    )
    assert code == 0
    assert "type: Nat" in out
    assert "elaboration: f [Nat] z" in out
    assert "ok: Nat" in out


def test_repl_reports_errors_and_keeps_going(monkeypatch, capsys):
    code, out = feed_repl(
        monkeypatch,
        capsys,
        [
            ":type Nat",
            ":type Nat",
            ":assume z : Nat",
            ":check z : Undeclared",
            ":frobnicate",
            "",
            ":help",
            ":q",
        ],
    )
    assert code == 0
    assert "parse error:" in out
    assert "unknown command ':frobnicate'" in out
    assert ":assume name : T" in out


def test_repl_diagnoses_bad_goals(monkeypatch, capsys):
    code, out = feed_repl(
        monkeypatch,
        capsys,
        [":type Nat", ":type B", ":assume z : Nat", ":check z : B", ":q"],
    )
    assert code == 0
    assert "error: type mismatch" in out


def test_repl_exits_on_end_of_input(monkeypatch, capsys):
    code, out = feed_repl(monkeypatch, capsys, [])
    assert code == 0


# ------------------------------------------------------------ entry point


def test_console_script_smoke(good_file):
    proc = subprocess.run(
        ["spinel", "run", good_file, "--json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert all(json.loads(line)["status"] == "ok" for line in proc.stdout.splitlines())
