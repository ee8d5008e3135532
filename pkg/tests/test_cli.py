"""End-to-end checks of the batch interface, driven through main()."""

import json

import pytest

from quinalg.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- the four advertised invocations -----------------------------------------


def test_normalize_trace_example(capsys):
    code, out, err = run_cli(capsys, "normalize", "--system", "d", "(d@d)@e", "--trace")
    assert code == 0
    assert out == (
        "(d @ d) @ e\n"
        "  -> d @ (e + d)   [app-d at root]\n"
        "  -> d @ d   [e-plus at R]\n"
    )


def test_eq_example(capsys):
    code, out, err = run_cli(capsys, "eq", "--system", "d", "(d+d)@e", "e")
    assert code == 0
    assert out == "equal\n"


def test_loop_example(capsys):
    code, out, err = run_cli(capsys, "loop", "--system", "full", "(d@(d+u0))@e")
    assert code == 0
    assert out == (
        "(d @ (d + u0)) @ e\n"
        "  -> (d + u0) @ (e + d + u0)   [app-d at root]\n"
        "  -> u0 @ (d @ (e + d + u0))   [app-plus at root]\n"
        "  -> u0 @ (d @ (d + u0))   [e-plus at RR]\n"
        "  -> (d @ (d + u0)) @ e   [u0 at root]\n"
        "cycle of length 4\n"
    )


def test_quines_example(capsys):
    code, out, err = run_cli(capsys, "quines", "--system", "w", "--max-size", "12")
    assert code == 0
    assert out == "e\n"


# --- normalize ------------------------------------------------------------------


def test_normalize_plain(capsys):
    code, out, err = run_cli(capsys, "normalize", "--system", "dw", "d @ d")
    assert (code, out) == (0, "w @ d + d\n")


def test_normalize_structured(capsys):
    code, out, err = run_cli(
        capsys, "normalize", "--system", "d", "(d@d)@e", "--format", "structured"
    )
    assert code == 0
    assert json.loads(out) == {
        "input": "(d @ d) @ e",
        "normal_form": "d @ d",
        "steps": 2,
    }


def test_normalize_fuel_exhaustion_is_unknown(capsys):
    code, out, err = run_cli(
        capsys, "normalize", "--system", "full", "(d@(d+u0))@e", "--fuel", "10"
    )
    assert code == 3
    assert out.startswith("fuel exhausted after 10 steps")


def test_normalize_parse_error(capsys):
    code, out, err = run_cli(capsys, "normalize", "--system", "d", "d @")
    assert code == 2
    assert "unexpected end of input" in err


# --- decision verbs ----------------------------------------------------------------


def test_eq_not_equal(capsys):
    code, out, err = run_cli(capsys, "eq", "--system", "d", "d", "e")
    assert (code, out) == (1, "not equal\n")


def test_nf_yes_and_no(capsys):
    assert run_cli(capsys, "nf", "--system", "d", "d @ d")[:2] == (0, "yes\n")
    assert run_cli(capsys, "nf", "--system", "d", "d @ e")[:2] == (1, "no\n")


def test_enum_nf(capsys):
    code, out, err = run_cli(capsys, "enum-nf", "--system", "d", "--max-size", "3")
    assert (code, out) == (0, "d\ne\nd + d\nd @ d\n")


def test_twins(capsys):
    code, out, err = run_cli(capsys, "twins", "--system", "dw", "--max-size", "11")
    assert code == 0
    assert out.splitlines() == [
        "w @ (w @ d) + w @ (w @ w) + w @ d + w @ w  <->  w @ d + w @ w + d + w",
        "w @ w + w @ (w @ d) + d  <->  w @ w + w @ (w @ d) + w + w @ d",
        "w @ (w @ w) + w @ (w @ d) + w @ w + w @ d  <->  w @ w + w @ d + w + d",
    ]


def test_cycles(capsys):
    code, out, err = run_cli(capsys, "cycles", "--system", "d", "--max-size", "6")
    assert (code, out) == (0, "e -> e\nd @ d -> d @ d\n")


# --- graphs ---------------------------------------------------------------------------


def test_graph_text(capsys):
    code, out, err = run_cli(capsys, "graph", "--system", "d", "--max-size", "3")
    assert (code, out) == (0, "d -> e\ne -> e\nd + d -> e\nd @ d -> d @ d\n")


def test_graph_marks_boundary_nodes(capsys):
    code, out, err = run_cli(capsys, "graph", "--system", "d", "--max-size", "5")
    assert code == 0
    assert "d @ (d + d) -> (successor exceeds size bound)" in out.splitlines()


def test_graph_dot(capsys):
    code, out, err = run_cli(
        capsys, "graph", "--system", "d", "--max-size", "3", "--format", "dot"
    )
    assert code == 0
    assert out.startswith('digraph "SYS-D expression map" {\n')
    assert '  "d @ d" -> "d @ d";' in out.splitlines()


def test_graph_structured(capsys):
    code, out, err = run_cli(
        capsys, "graph", "--system", "d", "--max-size", "3", "--format", "structured"
    )
    assert code == 0
    assert json.loads(out)["nodes"] == ["d", "e", "d + d", "d @ d"]


# --- analysis verbs ----------------------------------------------------------------


def test_critical_pairs(capsys):
    code, out, err = run_cli(capsys, "critical-pairs", "--system", "d")
    assert code == 0
    assert out.splitlines()[-1] == "total: 11"


def test_confluence(capsys):
    code, out, err = run_cli(capsys, "confluence", "--system", "d")
    assert code == 0
    assert out.splitlines() == [
        "critical pairs: 11",
        "joinable: 11",
        "locally confluent: yes",
    ]


def test_termination_certificate(capsys):
    code, out, err = run_cli(
        capsys, "termination", "--system", "d", "--precedence", "app > [+,e,d]"
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "precedence: @ > [+,d,e]"
    assert lines[-1] == "certified"
    assert all(l.endswith("decreases") for l in lines[1:-1])


def test_find_precedence_success_and_failure(capsys):
    code, out, err = run_cli(capsys, "find-precedence", "--system", "dw")
    assert (code, out) == (0, "[@,d,e] > [+,w]\ncertified\n")
    code, out, err = run_cli(capsys, "find-precedence", "--system", "full")
    assert (code, out) == (1, "no certificate found\n")


# --- the machine -----------------------------------------------------------------------


def test_interpret(capsys):
    code, out, err = run_cli(capsys, "interpret", "d @ d")
    assert (code, out) == (0, '"d";d\n')


def test_apply_quine(capsys):
    code, out, err = run_cli(capsys, "apply", '"d";d', "")
    assert (code, out) == (0, '"d";d\n')


def test_apply_stuck(capsys):
    code, out, err = run_cli(capsys, "apply", '"x"', "")
    assert (code, out) == (1, "stuck\n")


def test_apply_malformed(capsys):
    code, out, err = run_cli(capsys, "apply", "not a program", "")
    assert code == 2
    assert err


def test_interpret_rejects_extended_constants(capsys):
    code, out, err = run_cli(capsys, "interpret", "u0")
    assert code == 2
    assert "no machine interpretation" in err


def test_check_model(capsys):
    code, out, err = run_cli(capsys, "check-model", "--system", "d", "--max-size", "3")
    assert code == 0
    assert out.splitlines() == ["rule instances: 2131", "consistency checks: 10", "ok"]


def test_check_model_rejects_full(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check-model", "--system", "full", "--max-size", "3"])
    assert exc.value.code == 2


# --- misc --------------------------------------------------------------------------------


def test_yang_count(capsys):
    code, out, err = run_cli(capsys, "yang", "--count", "4")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert lines[0] == "d @ (d + d)"
    assert lines[1] == "d @ (d @ (d + d))"


def test_custom_rules_file(tmp_path, capsys):
    rules = tmp_path / "collapse.rules"
    rules.write_text("# a toy system\ncollapse: x @ y -> e\n")
    code, out, err = run_cli(capsys, "normalize", "--rules", str(rules), "d @ d")
    assert (code, out) == (0, "e\n")


def test_missing_rules_file(capsys):
    code, out, err = run_cli(capsys, "normalize", "--rules", "/nonexistent.rules", "d")
    assert code == 2
    assert err
