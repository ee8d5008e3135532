import json

import pytest

from quinalg.terms import App, E, parse_term, print_term, shared_size, size
from quinalg.rewriting import SYS_D, SYS_FULL, is_normal_form, normalize
from quinalg.exprgraph import build_graph, export_graph, expresses, yang_sequence


def test_expresses_basics():
    assert expresses(SYS_D, parse_term("d")) == E
    assert print_term(expresses(SYS_D, parse_term("d @ d"))) == "d @ d"


def test_expresses_reports_fuel_exhaustion_as_none():
    looping = parse_term("d @ (d + u0)")
    assert expresses(SYS_FULL, looping, fuel=50) is None


def test_graph_d3_structure():
    g = build_graph(SYS_D, 3)
    assert [print_term(t) for t in g.nodes] == ["d", "e", "d + d", "d @ d"]
    assert {print_term(a): print_term(b) for a, b in g.edges.items()} == {
        "d": "e",
        "e": "e",
        "d + d": "e",
        "d @ d": "d @ d",
    }
    assert g.boundary == ()
    assert g.undecided == ()


def test_graph_boundary_nodes():
    # the successor of d @ (d + d) has size 7, outside a size-5 graph
    g = build_graph(SYS_D, 5)
    assert parse_term("d @ (d + d)") in g.boundary
    assert parse_term("d @ (d + d)") not in g.edges


def test_graph_dot_export():
    assert export_graph(build_graph(SYS_D, 3), "dot") == "\n".join([
        'digraph "SYS-D expression map" {',
        '  "d";',
        '  "e";',
        '  "d + d";',
        '  "d @ d";',
        '  "d" -> "e";',
        '  "e" -> "e";',
        '  "d + d" -> "e";',
        '  "d @ d" -> "d @ d";',
        "}",
    ])


def test_graph_structured_export():
    data = json.loads(export_graph(build_graph(SYS_D, 5), "structured"))
    assert data["system"] == "SYS-D"
    assert data["max_size"] == 5
    assert ["d", "e"] in data["edges"]
    assert "d @ (d + d)" in data["boundary"]
    assert data["undecided"] == []


def test_graph_export_rejects_unknown_format():
    with pytest.raises(ValueError):
        export_graph(build_graph(SYS_D, 3), "yaml")


# --- the growing self-reproducers -------------------------------------------


def test_yang_sequence_sizes():
    seq = yang_sequence(7)
    assert [size(t) for t in seq] == [5, 7, 13, 33, 153, 1749, 89195]


def test_yang_sequence_entries_are_distinct_normal_forms():
    seq = yang_sequence(7)
    assert len(set(seq)) == 7
    quine = parse_term("d @ d")
    for t in seq:
        assert is_normal_form(SYS_D, t)
        assert t != quine


def test_yang_sequence_agrees_with_the_engine():
    seq = yang_sequence(7)
    assert print_term(seq[0]) == "d @ (d + d)"
    for prev, succ in zip(seq, seq[1:]):
        assert normalize(SYS_D, App(prev, E)).nf == succ


def test_yang_sequence_shares_structure():
    # the eighth entry has fifty million tree nodes but only ~37k distinct
    # subterms, so the memoized count finishes instantly
    big = yang_sequence(8)[-1]
    memo = {}
    assert shared_size(big, memo) == 51059893
    assert len(memo) < 40000


def test_yang_sequence_degenerate_lengths():
    assert yang_sequence(0) == []
    assert [print_term(t) for t in yang_sequence(1)] == ["d @ (d + d)"]


def test_yang_sequence_fuel_bound():
    with pytest.raises(RuntimeError):
        yang_sequence(8, fuel=100)
