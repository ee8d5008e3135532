"""The package-level acceptance gate.

Thirteen end-to-end checks, one test each, covering: the three worked
derivations, the census results for all three terminating fragments, the
twin classification, the grammar/engine agreement, the termination and
confluence certificates, the loop detector, the structural lemmas about
normal forms, the growing self-reproducer family, and the register-machine
semantics.  Every expected value here was computed independently before
being frozen.
"""

import timeit

import random

from quinalg.terms import (
    App,
    E,
    Plus,
    Term,
    d_count,
    enumerate_terms,
    occurs_e,
    parse_term,
    print_term,
    size,
)
from quinalg.rewriting import (
    SYS_D,
    SYS_DW,
    SYS_FULL,
    SYS_W,
    is_normal_form,
    normalize,
    normalize_random,
    render_trace,
    Trace,
)
from quinalg.analysis import (
    check_local_confluence,
    check_termination,
    find_loop,
    parse_precedence,
    search_precedence,
)
from quinalg.normalforms import (
    classify_twins_dw,
    enumerate_normal_forms,
    find_cycles,
    find_quines,
    nf_grammar_member,
)
from quinalg.exprgraph import expresses, yang_sequence
from quinalg.machine import check_equations, interp_term, kleene_apply
from quinalg.rewriting import RewriteSystem


GOLDEN_TRACES = (
    (
        "(d@d)@e",
        "(d @ d) @ e\n"
        "  -> d @ (e + d)   [app-d at root]\n"
        "  -> d @ d   [e-plus at R]",
    ),
    (
        "(d@(d+d))@e",
        "(d @ (d + d)) @ e\n"
        "  -> (d + d) @ (e + d + d)   [app-d at root]\n"
        "  -> d @ (d @ (e + d + d))   [app-plus at root]\n"
        "  -> d @ (d @ (d + d))   [e-plus at RR]",
    ),
    (
        "(d+d)@e",
        "(d + d) @ e\n"
        "  -> d @ (d @ e)   [app-plus at root]\n"
        "  -> d @ e   [d-e at R]\n"
        "  -> e   [d-e at root]",
    ),
)


def test_golden_traces():
    """The three worked derivations, byte for byte, each under a millisecond."""
    for text, expected in GOLDEN_TRACES:
        t = parse_term(text)
        outcome = normalize(SYS_D, t)
        assert render_trace(outcome.trace) == expected, text
        best = min(timeit.repeat(lambda: normalize(SYS_D, t), number=1, repeat=5))
        assert best < 0.001, f"{text}: {best * 1000:.3f} ms"


def test_quine_uniqueness():
    """Among all size-<=15 normal forms, exactly e and d @ d reproduce themselves."""
    results = find_quines(SYS_D, 15)
    assert all(r.verified for r in results)
    assert [print_term(r.term) for r in results] == ["e", "d @ d"]


def test_no_long_cycles():
    """No expression cycle of length >= 2 exists among size-<=12 normal forms."""
    cycles = find_cycles(SYS_D, 12, max_len=6)
    long = [c for c in cycles if len(c) >= 2]
    assert long == [], [tuple(print_term(m) for m in c.members) for c in long]
    assert sorted(print_term(c.members[0]) for c in cycles) == ["d @ d", "e"]


def test_twin_seeds_and_three_cycle():
    """The printed twin pair arises from its two seeds, and the 3-cycle has
    exactly three distinct members."""
    t = normalize(SYS_DW, parse_term("w@(d@(d+w))")).nf
    u = normalize(SYS_DW, parse_term("d@(d+w)")).nf
    assert print_term(t) == "w @ (w @ d) + w @ (w @ w) + w @ d + w @ w"
    assert print_term(u) == "w @ d + w @ w + d + w"
    assert expresses(SYS_DW, t) == u
    assert expresses(SYS_DW, u) == t

    start = normalize(SYS_DW, parse_term("(d+w+w)@(d+w+w)")).nf
    chain = [start]
    while True:
        nxt = expresses(SYS_DW, chain[-1])
        if nxt in chain:
            assert nxt == chain[0]
            break
        chain.append(nxt)
    assert len(chain) == 3
    assert len(set(chain)) == 3


def test_twin_classification():
    """Every fixed point and 2-cycle among size-<=13 normal forms matches one
    of the four known shapes, with zero counterexamples."""
    cycles = find_cycles(SYS_DW, 13, max_len=2)
    short = [c for c in cycles if len(c) <= 2]
    report = classify_twins_dw(short)
    unmatched = [
        " <-> ".join(print_term(m) for m in c.members)
        for c in report.counterexamples
    ]
    assert report.all_classified, (
        f"{len(unmatched)} cycle(s) match none of the four shapes: "
        + "; ".join(unmatched)
    )


def test_w_fragment_has_only_the_trivial_quine():
    results = find_quines(SYS_W, 12)
    assert all(r.verified for r in results)
    assert [print_term(r.term) for r in results] == ["e"]


def test_grammar_agrees_with_engine():
    """Grammar membership equals engine irreducibility, with no tolerance."""
    for fragment, system, bound in (("d", SYS_D, 10), ("dw", SYS_DW, 9)):
        for t in enumerate_terms(fragment, bound):
            grammar = nf_grammar_member(fragment, t) is not None
            engine = is_normal_form(system, t)
            assert grammar == engine, f"{fragment}: {print_term(t)}"


def test_termination_certificates():
    report = check_termination(SYS_D, parse_precedence("app > [+,e,d]"))
    assert report.certified

    extended = RewriteSystem(
        "d+u1", SYS_D.rules + (SYS_FULL.rule("u1"),), "full"
    )
    report = check_termination(
        extended, parse_precedence("app > e > [+,d]; u1 > [+,d]")
    )
    assert report.certified

    found = search_precedence(SYS_DW)
    assert found is not None
    assert check_termination(SYS_DW, found).certified

    assert search_precedence(SYS_FULL) is None


def test_loop_detection():
    """The non-terminating start term lies on a cycle of exactly four steps."""
    start = parse_term("(d@(d+u0))@e")
    search = find_loop(SYS_FULL, start)
    assert search.witness is not None
    assert len(search.witness) == 4
    assert render_trace(Trace(search.witness.start, search.witness.steps)) == (
        "(d @ (d + u0)) @ e\n"
        "  -> (d + u0) @ (e + d + u0)   [app-d at root]\n"
        "  -> u0 @ (d @ (e + d + u0))   [app-plus at root]\n"
        "  -> u0 @ (d @ (d + u0))   [e-plus at RR]\n"
        "  -> (d @ (d + u0)) @ e   [u0 at root]"
    )


def test_local_confluence_and_strategy_independence():
    """All critical pairs join within fuel 1000, and twenty random-order
    normalizations agree with the deterministic one on every small term."""
    for system, expected_pairs in ((SYS_D, 11), (SYS_DW, 15)):
        report = check_local_confluence(system, fuel=1000)
        assert report.pairs == expected_pairs
        assert report.locally_confluent

    for fragment, system in (("d", SYS_D), ("dw", SYS_DW)):
        pool = list(enumerate_terms(fragment, 8))
        reference = [normalize(system, t, keep_trace=False).nf for t in pool]
        for seed in range(20):
            rng = random.Random(seed)
            for t, expected in zip(pool, reference):
                got = normalize_random(system, t, rng).nf
                assert got == expected, f"seed {seed}: {print_term(t)}"


def _summands(t: Term) -> list[Term]:
    out: list[Term] = []
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Plus):
            stack.append(s.right)
            stack.append(s.left)
        else:
            out.append(s)
    return out


def test_dcount_lemma_and_normal_form_shapes():
    """Four structural facts, swept over all small terms:

    * normalizing an e-free term never lowers its d-count;
    * a normal form other than e never contains e;
    * for normal t != e and normal u, nf(t @ u) is e or an application;
    * and nf(t @ u) = e only for u = e;
    * a sum normalizes to e only if every summand does.
    """
    for t in enumerate_terms("d", 10):
        nf = normalize(SYS_D, t, keep_trace=False).nf
        if not occurs_e(t):
            assert d_count(nf) >= d_count(t), print_term(t)
        assert nf == E or not occurs_e(nf), print_term(t)
        if isinstance(t, Plus) and nf == E:
            for s in _summands(t):
                assert normalize(SYS_D, s, keep_trace=False).nf == E, print_term(t)

    normals = [t for t in enumerate_terms("d", 8) if is_normal_form(SYS_D, t)]
    for t in normals:
        if t == E:
            continue
        for u in normals:
            if size(t) + size(u) + 1 > 10:
                continue
            nf = normalize(SYS_D, App(t, u), keep_trace=False).nf
            assert nf == E or nf_grammar_member("d", nf) == "application", (
                f"{print_term(t)} @ {print_term(u)}"
            )
            if nf == E:
                assert u == E, f"{print_term(t)} @ {print_term(u)}"


def test_yang_sequence_first_eight():
    seq = yang_sequence(8)
    assert len(set(seq)) == 8
    quine = parse_term("d @ d")
    for t in seq:
        assert is_normal_form(SYS_D, t)
        assert t != quine


def test_machine_model():
    """The register machine validates every law, never gets stuck, and runs
    the quine back to itself."""
    report_d = check_equations("d", 4)
    assert (report_d.rule_instances, report_d.consistency_checks) == (2131, 10)
    assert report_d.ok, report_d.violations

    report_dw = check_equations("dw", 4)
    assert (report_dw.rule_instances, report_dw.consistency_checks) == (19489, 21)
    assert report_dw.ok, report_dw.violations

    # interpreting every small term exercises program application at each
    # application node; totality means no term ever raises
    for t in enumerate_terms("dw", 4):
        interp_term(t)

    quine = interp_term(parse_term("d @ d"))
    assert kleene_apply(quine, ()) == quine
