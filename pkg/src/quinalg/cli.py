"""Command-line front end: every analysis as a batch verb.

Output conventions: results go to standard output, diagnostics to standard
error; identical invocations produce byte-identical output.  Exit codes:
0 success (or affirmative answer), 1 negative answer, 2 usage error,
3 fuel exhausted / inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .terms import ParseError, parse_term, print_term, shared_size
from .rewriting import (
    Answer,
    DEFAULT_FUEL,
    FuelExhausted,
    RewriteSystem,
    SYSTEMS,
    Trace,
    equal,
    format_position,
    is_normal_form,
    normalize,
    parse_rules_file,
    render_trace,
)
from .analysis import (
    check_local_confluence,
    check_termination,
    critical_pairs,
    find_loop,
    parse_precedence,
    search_precedence,
)
from .normalforms import enumerate_normal_forms, find_cycles, find_quines, twin_pairs
from .exprgraph import build_graph, export_graph, yang_sequence
from .machine import MalformedProgram, check_equations, decode, encode, interp_term, kleene_apply

OK, NO, USAGE, UNKNOWN = 0, 1, 2, 3

#: Refuse to print single terms bigger than this many nodes (they exist:
#: the expression sequence reaches tens of millions of nodes by index 7).
PRINT_CAP = 100_000


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return USAGE


def _load_system(args: argparse.Namespace) -> RewriteSystem:
    rules_file: Optional[str] = getattr(args, "rules", None)
    if rules_file:
        with open(rules_file, "r", encoding="utf-8") as handle:
            return parse_rules_file(handle.read(), name=rules_file)
    return SYSTEMS[args.system]


def _emit(args: argparse.Namespace, text_lines: list[str], document: dict) -> None:
    if getattr(args, "format", "text") == "structured":
        print(json.dumps(document, indent=2))
    else:
        for line in text_lines:
            print(line)


def _term_repr(t) -> str:
    n = shared_size(t)
    if n > PRINT_CAP:
        return f"(term with {n} nodes elided)"
    return print_term(t)


# --------------------------------------------------------------------------
# verb implementations


def cmd_normalize(args: argparse.Namespace) -> int:
    system = _load_system(args)
    term = parse_term(args.term)
    outcome = normalize(system, term, args.fuel)
    if isinstance(outcome, FuelExhausted):
        _emit(
            args,
            [f"fuel exhausted after {outcome.steps_used} steps; last term: {_term_repr(outcome.last)}"],
            {"input": args.term, "exhausted": True, "steps": outcome.steps_used,
             "last": _term_repr(outcome.last)},
        )
        return UNKNOWN
    trace = outcome.trace
    assert trace is not None
    if args.format == "structured":
        doc = {
            "input": print_term(term),
            "normal_form": print_term(outcome.nf),
            "steps": [
                {"position": format_position(s.position), "rule": s.rule_id,
                 "result": print_term(s.result)}
                for s in trace.steps
            ] if args.trace else len(trace.steps),
        }
        print(json.dumps(doc, indent=2))
    elif args.trace:
        print(render_trace(trace))
    else:
        print(print_term(outcome.nf))
    return OK


def cmd_eq(args: argparse.Namespace) -> int:
    system = _load_system(args)
    left = parse_term(args.left)
    right = parse_term(args.right)
    answer = equal(system, left, right, args.fuel)
    word = {"yes": "equal", "no": "not equal", "unknown": "unknown"}[answer.value]
    _emit(args, [word], {"left": args.left, "right": args.right, "answer": word})
    return {Answer.YES: OK, Answer.NO: NO, Answer.UNKNOWN: UNKNOWN}[answer]


def cmd_nf(args: argparse.Namespace) -> int:
    system = _load_system(args)
    term = parse_term(args.term)
    result = is_normal_form(system, term)
    _emit(args, ["yes" if result else "no"],
          {"term": args.term, "normal_form": result})
    return OK if result else NO


def cmd_enum_nf(args: argparse.Namespace) -> int:
    nfs = enumerate_normal_forms(args.system, args.max_size)
    printed = [print_term(t) for t in nfs]
    _emit(args, printed,
          {"system": args.system, "max_size": args.max_size, "normal_forms": printed})
    return OK


def cmd_quines(args: argparse.Namespace) -> int:
    system = SYSTEMS[args.system]
    results = find_quines(system, args.max_size, args.fuel)
    lines = [print_term(r.term) for r in results]
    unverified = [r for r in results if not r.verified]
    _emit(args, lines, {
        "system": args.system, "max_size": args.max_size,
        "quines": [{"term": print_term(r.term), "verified": r.verified} for r in results],
    })
    if unverified:
        print(f"warning: {len(unverified)} candidate(s) ran out of fuel", file=sys.stderr)
        return UNKNOWN
    return OK


def cmd_twins(args: argparse.Namespace) -> int:
    system = SYSTEMS[args.system]
    pairs = twin_pairs(find_cycles(system, args.max_size, max_len=2, fuel=args.fuel))
    lines = [f"{print_term(p.first)}  <->  {print_term(p.second)}" for p in pairs]
    _emit(args, lines, {
        "system": args.system, "max_size": args.max_size,
        "twins": [[print_term(p.first), print_term(p.second)] for p in pairs],
    })
    return OK


def cmd_cycles(args: argparse.Namespace) -> int:
    system = SYSTEMS[args.system]
    cycles = find_cycles(system, args.max_size, args.max_len, args.fuel)
    lines = []
    for c in cycles:
        members = [print_term(t) for t in c.members]
        lines.append(" -> ".join(members + [members[0]]))
    _emit(args, lines, {
        "system": args.system, "max_size": args.max_size, "max_len": args.max_len,
        "cycles": [[print_term(t) for t in c.members] for c in cycles],
    })
    return OK


def cmd_graph(args: argparse.Namespace) -> int:
    system = SYSTEMS[args.system]
    graph = build_graph(system, args.max_size, args.fuel)
    if args.format in ("dot", "structured"):
        print(export_graph(graph, args.format))
    else:
        for node in graph.nodes:
            if node in graph.edges:
                print(f"{print_term(node)} -> {print_term(graph.edges[node])}")
        for node in graph.boundary:
            print(f"{print_term(node)} -> (successor exceeds size bound)")
        for node in graph.undecided:
            print(f"{print_term(node)} -> (fuel exhausted)")
    return UNKNOWN if graph.undecided else OK


def cmd_yang(args: argparse.Namespace) -> int:
    try:
        if args.fuel is None:
            seq = yang_sequence(args.count)
        else:
            seq = yang_sequence(args.count, args.fuel)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return UNKNOWN
    if args.format == "structured":
        doc = {"count": args.count, "sequence": []}
        for p in seq:
            n = shared_size(p)
            doc["sequence"].append(
                {"size": n, "term": print_term(p) if n <= PRINT_CAP else None}
            )
        print(json.dumps(doc, indent=2))
    else:
        for p in seq:
            print(_term_repr(p))
    return OK


def cmd_critical_pairs(args: argparse.Namespace) -> int:
    system = _load_system(args)
    pairs = critical_pairs(system)
    lines = [str(p) for p in pairs]
    lines.append(f"total: {len(pairs)}")
    _emit(args, lines, {
        "system": system.name,
        "pairs": [
            {"outer": p.outer_id, "inner": p.inner_id,
             "position": format_position(p.position), "peak": print_term(p.peak),
             "left": print_term(p.left_result), "right": print_term(p.right_result)}
            for p in pairs
        ],
    })
    return OK


def cmd_confluence(args: argparse.Namespace) -> int:
    system = _load_system(args)
    report = check_local_confluence(system, args.fuel)
    lines = [f"critical pairs: {report.pairs}", f"joinable: {report.joinable}"]
    for p in report.non_joinable:
        lines.append(f"NOT joinable: {p}")
    for p in report.unresolved:
        lines.append(f"unresolved (fuel): {p}")
    verdict = "yes" if report.locally_confluent else ("unknown" if report.unresolved else "no")
    lines.append(f"locally confluent: {verdict}")
    _emit(args, lines, {
        "system": system.name, "pairs": report.pairs, "joinable": report.joinable,
        "non_joinable": [str(p) for p in report.non_joinable],
        "unresolved": [str(p) for p in report.unresolved],
        "locally_confluent": verdict,
    })
    if report.non_joinable:
        return NO
    if report.unresolved:
        return UNKNOWN
    return OK


def cmd_termination(args: argparse.Namespace) -> int:
    system = _load_system(args)
    try:
        prec = parse_precedence(args.precedence)
    except ValueError as exc:
        return _fail(str(exc))
    report = check_termination(system, prec)
    lines = [f"precedence: {prec}"]
    for rule_id, ok in report.per_rule:
        lines.append(f"{rule_id}: {'decreases' if ok else 'does NOT decrease'}")
    lines.append("certified" if report.certified else "not certified")
    _emit(args, lines, {
        "system": system.name, "precedence": str(prec),
        "rules": {rule_id: ok for rule_id, ok in report.per_rule},
        "certified": report.certified,
    })
    return OK if report.certified else NO


def cmd_find_precedence(args: argparse.Namespace) -> int:
    system = _load_system(args)
    prec = search_precedence(system)
    if prec is None:
        _emit(args, ["no certificate found"], {"system": system.name, "precedence": None})
        return NO
    _emit(args, [str(prec), "certified"],
          {"system": system.name, "precedence": str(prec), "certified": True})
    return OK


def cmd_loop(args: argparse.Namespace) -> int:
    system = _load_system(args)
    term = parse_term(args.term)
    search = find_loop(system, term, args.max_states)
    if search.witness is not None:
        w = search.witness
        lines = [render_trace(Trace(w.start, w.steps)), f"cycle of length {len(w)}"]
        _emit(args, lines, {
            "start": print_term(w.start),
            "steps": [
                {"position": format_position(s.position), "rule": s.rule_id,
                 "result": print_term(s.result)}
                for s in w.steps
            ],
        })
        return OK
    if search.exhausted:
        _emit(args, [f"no loop reachable ({search.states} states, exhaustive)"],
              {"start": args.term, "loop": None, "exhaustive": True,
               "states": search.states})
        return NO
    _emit(args, [f"search truncated at {search.states} states; no loop found"],
          {"start": args.term, "loop": None, "exhaustive": False,
           "states": search.states})
    return UNKNOWN


def cmd_interpret(args: argparse.Namespace) -> int:
    term = parse_term(args.term)
    try:
        program = interp_term(term)
    except ValueError as exc:
        return _fail(str(exc))
    _emit(args, [encode(program)], {"term": args.term, "program": encode(program)})
    return OK


def cmd_apply(args: argparse.Namespace) -> int:
    try:
        left = decode(args.program)
        right = decode(args.argument)
    except MalformedProgram as exc:
        return _fail(str(exc))
    try:
        result = kleene_apply(left, right)
    except MalformedProgram:
        _emit(args, ["stuck"], {"program": args.program, "argument": args.argument,
                                "result": None, "stuck": True})
        return NO
    _emit(args, [encode(result)], {"program": args.program, "argument": args.argument,
                                   "result": encode(result), "stuck": False})
    return OK


def cmd_check_model(args: argparse.Namespace) -> int:
    try:
        report = check_equations(args.system, args.max_size, args.fuel)
    except ValueError as exc:
        return _fail(str(exc))
    lines = [
        f"rule instances: {report.rule_instances}",
        f"consistency checks: {report.consistency_checks}",
    ]
    lines += [f"VIOLATION: {v}" for v in report.violations]
    lines.append("ok" if report.ok else f"{len(report.violations)} violation(s)")
    _emit(args, lines, {
        "fragment": report.fragment,
        "rule_instances": report.rule_instances,
        "consistency_checks": report.consistency_checks,
        "violations": list(report.violations),
        "ok": report.ok,
    })
    return OK if report.ok else NO


# --------------------------------------------------------------------------
# argument wiring


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quinalg",
        description="Workbench for a small equational calculus of self-reproducing programs.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser, *, fmt=("text", "structured"), system=True,
               fuel=True, rules=False, max_size=None) -> None:
        if system:
            p.add_argument("--system", choices=sorted(SYSTEMS), default="d",
                           help="rule system to use (default: d)")
        if fuel:
            p.add_argument("--fuel", type=int, default=DEFAULT_FUEL,
                           help=f"rewrite step budget (default: {DEFAULT_FUEL})")
        if rules:
            p.add_argument("--rules", metavar="FILE",
                           help="load rules from FILE instead of --system")
        if max_size is not None:
            p.add_argument("--max-size", type=int, default=max_size,
                           help=f"term size bound (default: {max_size})")
        p.add_argument("--format", choices=fmt, default="text",
                       help="output format (default: text)")

    p = sub.add_parser("normalize", help="rewrite a term to normal form")
    p.add_argument("term")
    p.add_argument("--trace", action="store_true", help="print every step")
    common(p, rules=True)
    p.set_defaults(run=cmd_normalize)

    p = sub.add_parser("eq", help="decide equality by comparing normal forms")
    p.add_argument("left")
    p.add_argument("right")
    common(p, rules=True)
    p.set_defaults(run=cmd_eq)

    p = sub.add_parser("nf", help="is the term a normal form?")
    p.add_argument("term")
    common(p, fuel=False, rules=True)
    p.set_defaults(run=cmd_nf)

    p = sub.add_parser("enum-nf", help="list normal forms up to a size bound")
    common(p, fuel=False, max_size=10)
    p.set_defaults(run=cmd_enum_nf)

    p = sub.add_parser("quines", help="normal forms t with nf(t @ e) = t")
    common(p, max_size=10)
    p.set_defaults(run=cmd_quines)

    p = sub.add_parser("twins", help="pairs that express each other")
    common(p, max_size=10)
    p.set_defaults(run=cmd_twins)

    p = sub.add_parser("cycles", help="cycles of the expression map")
    common(p, max_size=10)
    p.add_argument("--max-len", type=int, default=6,
                   help="longest cycle length to chase (default: 6)")
    p.set_defaults(run=cmd_cycles)

    p = sub.add_parser("graph", help="the expression map as a graph")
    common(p, fmt=("text", "structured", "dot"), max_size=10)
    p.set_defaults(run=cmd_graph)

    p = sub.add_parser("yang", help="the self-feeding sequence from d @ (d + d)")
    p.add_argument("--count", type=int, default=8, help="how many entries (default: 8)")
    p.add_argument("--fuel", type=int, default=None,
                   help="application budget (default: library default)")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(run=cmd_yang)

    p = sub.add_parser("critical-pairs", help="list all critical pairs")
    common(p, fuel=False, rules=True)
    p.set_defaults(run=cmd_critical_pairs)

    p = sub.add_parser("confluence", help="check joinability of all critical pairs")
    common(p, rules=True)
    p.set_defaults(run=cmd_confluence)

    p = sub.add_parser("termination", help="certify termination under a precedence")
    p.add_argument("--precedence", required=True,
                   help="e.g. 'app > e > [+, d]; u1 > [+, d]'")
    common(p, fuel=False, rules=True)
    p.set_defaults(run=cmd_termination)

    p = sub.add_parser("find-precedence", help="search for a termination certificate")
    common(p, fuel=False, rules=True)
    p.set_defaults(run=cmd_find_precedence)

    p = sub.add_parser("loop", help="breadth-first search for a rewrite cycle")
    p.add_argument("term")
    p.add_argument("--max-states", type=int, default=100_000,
                   help="state budget (default: 100000)")
    common(p, fuel=False, rules=True)
    p.set_defaults(run=cmd_loop)

    p = sub.add_parser("interpret", help="compile a term to machine code")
    p.add_argument("term")
    common(p, system=False, fuel=False)
    p.set_defaults(run=cmd_interpret)

    p = sub.add_parser("apply", help="run one program on another's source")
    p.add_argument("program")
    p.add_argument("argument")
    common(p, system=False, fuel=False)
    p.set_defaults(run=cmd_apply)

    p = sub.add_parser("check-model", help="sweep the laws against the machine")
    p.add_argument("--system", choices=("d", "dw", "w"), default="d")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--max-size", type=int, default=4,
                   help="instantiation size bound (default: 4)")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(run=cmd_check_model)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except ParseError as exc:
        return _fail(str(exc))
    except FileNotFoundError as exc:
        return _fail(str(exc))
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
