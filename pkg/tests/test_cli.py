import json
import pathlib

import pytest

from extent.cli import main
from extent.interpret import Uninterpretable, interpret_program
from extent.presheaf import get_base

CORPUS = pathlib.Path(__file__).parent / "corpus"
A01 = str(CORPUS / "accept" / "a01_endpoint_extension.stt")


def test_check_accepts(capsys):
    assert main(["check", A01]) == 0
    out = capsys.readouterr().out
    assert "REJECT" not in out and out.count(": ok:") == 7


def test_check_trace_names_rules(capsys):
    assert main(["check", A01, "--trace"]) == 0
    out = capsys.readouterr().out
    for rule in ("Ext-Form", "Ext-Intro", "Ext-Elim", "Ext-Comp"):
        assert rule in out


def test_check_rejects_with_kind(capsys):
    path = CORPUS / "reject" / "r01_boundary_endpoint.stt"
    assert main(["check", str(path)]) == 1
    assert "REJECT BoundaryMismatch" in capsys.readouterr().out


def test_check_reports_syntax_errors(tmp_path, capsys):
    bad = tmp_path / "bad.stt"
    bad.write_text("type Bool := base {tt ff}\nterm x : Bool := (\n")
    assert main(["check", str(bad)]) == 1
    assert "syntax error" in capsys.readouterr().out


# --- interpret ----------------------------------------------------------------


def test_interpret_endpoint_on_terminal(capsys):
    # maps {0, 1} -> Bool sending 0 to tt
    assert main(["interpret", A01, "--base", "terminal", "--bound", "3"]) == 0
    assert "[0]:2" in capsys.readouterr().out


def test_interpret_accepts_greek_base_names(capsys):
    assert main(["interpret", A01, "--base", "δ2", "--bound", "3"]) == 0
    # a constant family over a connected shape: the fixed endpoint decides everything
    assert "[0]:1 [1]:1 [2]:1" in capsys.readouterr().out


def test_interpret_triangle_counts():
    text = "type Three := base {a b c}\ntype Tri := <{s t} s <= t | Three>\n"
    (tri,) = interpret_program(text, get_base("terminal"), 3)
    assert tri.stage_sizes == (27,)
    (tri,) = interpret_program(text, get_base("delta1"), 3)
    assert tri.stage_sizes == (3, 3)


def test_interpret_named_point_is_the_term():
    text = ("type Bool := base {tt ff}\n"
            "type Free := <{t} TOP | Bool>\n"
            "term flip : Free := \\t^{t|TOP}. ff\n")
    free, flip = interpret_program(text, get_base("terminal"), 2)
    assert free.stage_sizes == (4,)
    assert flip.point and 0 <= flip.point[0] < 4


def test_interpret_respects_bound(tmp_path, capsys):
    text = "type Four := base {a b c d}\ntype F := <{t} TOP | Four>\n"
    with pytest.raises(Uninterpretable):
        interpret_program(text, get_base("terminal"), 3)
    f = tmp_path / "four.stt"
    f.write_text(text)
    assert main(["interpret", str(f), "--base", "terminal", "--bound", "3"]) == 1
    assert "cannot interpret" in capsys.readouterr().out


def test_interpret_refuses_rejected_programs():
    with pytest.raises(Uninterpretable):
        interpret_program("type Bool := base {tt ff}\nterm x : Bool := y\n", get_base("terminal"), 3)


# --- stability and oracle-diff --------------------------------------------------


def test_stability_command_writes_identical_reports(tmp_path, capsys):
    one, two = tmp_path / "one.json", tmp_path / "two.json"
    args = ["stability", "--base", "δ1", "--bound", "3", "--n", "6", "--seed", "42"]
    assert main(args + ["--report", str(one)]) == 0
    assert main(args + ["--report", str(two)]) == 0
    assert one.read_bytes() == two.read_bytes()
    body = json.loads(one.read_text())
    assert body["summary"]["instances"] == 6 and body["summary"]["violations"] == 0
    assert "ext_stable" in capsys.readouterr().out


def test_stability_respects_carrier_cap_env(monkeypatch, tmp_path):
    monkeypatch.setenv("EXTENT_CARRIER_CAP", "128")
    out = tmp_path / "r.json"
    assert main(["stability", "--base", "terminal", "--n", "3", "--report", str(out)]) == 0
    assert json.loads(out.read_text())["configs"][0]["carrier_cap"] == 128


def test_oracle_diff_agrees(capsys):
    assert main(["oracle-diff", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert "oracle" in out and "\n  ! " not in out


def test_oracle_diff_other_base(capsys):
    assert main(["oracle-diff", "--seed", "2", "--base", "arrow"]) == 0


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
