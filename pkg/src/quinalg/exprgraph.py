"""The expression map and its graph over bounded normal forms.

A normal form p *expresses* nf(p @ e): the result of running p on the empty
input.  Iterating the map over every normal form up to a size bound gives a
functional graph whose fixed points are the quines and whose cycles are the
twin pairs and longer rings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .terms import App, Const, E, Plus, Term, parse_term, print_term, size
from .rewriting import (
    DEFAULT_FUEL,
    FuelExhausted,
    RewriteSystem,
    SYS_D,
    normalize,
)
from .normalforms import enumerate_normal_forms


def expresses(
    system: RewriteSystem, p: Term, fuel: int = DEFAULT_FUEL,
    size_cap: Optional[int] = None,
) -> Optional[Term]:
    """nf(p @ e), or None when normalization runs out of fuel.

    ``size_cap`` optionally abandons the computation early once intermediate
    terms outgrow it (also reported as None); see :func:`quinalg.rewriting.normalize`.
    """
    result = normalize(system, App(p, E), fuel, keep_trace=False, size_cap=size_cap)
    if isinstance(result, FuelExhausted):
        return None
    return result.nf


@dataclass(frozen=True)
class ExpressionGraph:
    system: str
    max_size: int
    nodes: tuple[Term, ...]
    edges: dict[Term, Term]  # successor map, only for in-bound successors
    boundary: tuple[Term, ...]  # nodes whose successor outgrew max_size
    undecided: tuple[Term, ...]  # nodes whose successor ran out of fuel


#: Intermediate-size cap for successor computations while building the graph.
#: Any successor this large is out of the graph regardless (it dwarfs every
#: sensible max_size), so the node is reported as undecided without grinding
#: through a runaway derivation first.
_GRAPH_SIZE_CAP = 200_000


def build_graph(system: RewriteSystem, max_size: int, fuel: int = DEFAULT_FUEL) -> ExpressionGraph:
    """The expression map restricted to normal forms of size <= max_size.

    Every node has exactly one successor; successors that exceed the size
    bound leave their node in ``boundary`` instead of growing the node set.
    """
    nodes = tuple(enumerate_normal_forms(system.fragment, max_size))
    edges: dict[Term, Term] = {}
    boundary: list[Term] = []
    undecided: list[Term] = []
    for node in nodes:
        succ = expresses(system, node, fuel, size_cap=_GRAPH_SIZE_CAP)
        if succ is None:
            undecided.append(node)
        elif size(succ) > max_size:
            boundary.append(node)
        else:
            edges[node] = succ
    return ExpressionGraph(system.name, max_size, nodes, edges, tuple(boundary), tuple(undecided))


class _SharedApplier:
    """Evaluates nf(B @ z) for {e, d}-normal-forms B and z with full sharing.

    The sequence below squares its own size at every step, so the terms are
    astronomically large *as trees* while containing few distinct subterms.
    This evaluator hash-conses every node it builds and memoizes application
    and concatenation on the shared nodes, turning the computation into a
    small DAG.  It relies on the system being confluent and terminating (so
    the normal form is strategy-independent) and on the shape of its normal
    forms: e, d, d @ t, or a right-nested sum of those.  Equality of results
    degrades to pointer equality, which keeps the memo tables O(1) per hit.
    """

    def __init__(self) -> None:
        self._pool: dict[Term, Term] = {}
        self.e = self._intern(E)
        self.d = self._intern(Const("d"))
        self._sums: dict[tuple[Term, Term], Term] = {}
        self._apps: dict[tuple[Term, Term], Term] = {}
        self.evaluations = 0

    def _intern(self, node: Term) -> Term:
        found = self._pool.get(node)
        if found is None:
            self._pool[node] = node
            return node
        return found

    def intern_term(self, t: Term) -> Term:
        if isinstance(t, Const):
            return self._intern(t)
        return self._intern(
            type(t)(self.intern_term(t.left), self.intern_term(t.right))
        )

    def _sum_nf(self, x: Term, y: Term) -> Term:
        """nf(x + y): drop units, keep the sum right-nested."""
        if x is self.e:
            return y
        if y is self.e:
            return x
        key = (x, y)
        found = self._sums.get(key)
        if found is not None:
            return found
        summands = []
        cur = x
        while isinstance(cur, Plus):
            summands.append(cur.left)
            cur = cur.right
        summands.append(cur)
        out = y
        for s in reversed(summands):
            out = self._intern(Plus(s, out))
        self._sums[key] = out
        return out

    def apply(self, base: Term, arg: Term) -> Term:
        """nf(base @ arg) for interned normal forms, computed iteratively.

        One step per distinct (base, arg) pair:
          e @ z         -> z
          d @ z         -> e if z = e, else the normal form d @ z itself
          (d @ c) @ z   -> c @ (z + c)
          (b1 + b2) @ z -> b2 @ (b1 @ z)
        """
        stack: list[tuple] = [("call", base, arg)]
        results: list[Term] = []
        while stack:
            frame = stack.pop()
            op = frame[0]
            if op == "call":
                _, b, z = frame
                if b is self.e:
                    results.append(z)
                    continue
                if b is self.d:
                    results.append(self.e if z is self.e else self._intern(App(self.d, z)))
                    continue
                found = self._apps.get((b, z))
                if found is not None:
                    results.append(found)
                    continue
                self.evaluations += 1
                if isinstance(b, App):
                    if b.left is not self.d:
                        raise ValueError(f"not a normal-form application: {b!r}")
                    inner = b.right
                    stack.append(("save", b, z))
                    stack.append(("call", inner, self._sum_nf(z, inner)))
                else:
                    stack.append(("save", b, z))
                    stack.append(("then", b.right))
                    stack.append(("call", b.left, z))
            elif op == "then":
                stack.append(("call", frame[1], results.pop()))
            else:
                _, b, z = frame
                self._apps[(b, z)] = results[-1]
        return results.pop()


def yang_sequence(n: int, fuel: int = 1_000_000) -> list[Term]:
    """First n entries of the sequence p0 = d @ (d + d), p_{k+1} = nf(p_k @ e).

    Every entry is a normal form; the sequence never repeats and never meets
    the quine d @ d, showing the supply of self-referential-but-not-quine
    programs is unbounded.  Entries grow explosively (the eighth has over
    5 * 10^7 nodes) but share almost all of their structure, so they are
    computed on shared nodes rather than through the step-by-step engine;
    ``fuel`` bounds the number of distinct applications evaluated.
    """
    if n < 1:
        return []
    ev = _SharedApplier()
    seq = [ev.intern_term(parse_term("d @ (d + d)"))]
    while len(seq) < n:
        seq.append(ev.apply(seq[-1], ev.e))
        if ev.evaluations > fuel:
            raise RuntimeError(f"fuel exhausted at index {len(seq) - 1}")
    return seq


def export_graph(graph: ExpressionGraph, format: str) -> str:
    """Render a graph as Graphviz "dot" or machine-readable "structured" JSON.

    Output is deterministic: nodes stay in enumeration order.
    """
    if format == "dot":
        lines = [f'digraph "{graph.system} expression map" {{']
        boundary = set(graph.boundary)
        undecided = set(graph.undecided)
        for node in graph.nodes:
            label = print_term(node)
            if node in boundary:
                lines.append(f'  "{label}" [style=dashed];')
            elif node in undecided:
                lines.append(f'  "{label}" [style=dotted];')
            else:
                lines.append(f'  "{label}";')
        for node in graph.nodes:
            if node in graph.edges:
                lines.append(f'  "{print_term(node)}" -> "{print_term(graph.edges[node])}";')
        lines.append("}")
        return "\n".join(lines)
    if format == "structured":
        return json.dumps(
            {
                "system": graph.system,
                "max_size": graph.max_size,
                "nodes": [print_term(t) for t in graph.nodes],
                "edges": [
                    [print_term(t), print_term(graph.edges[t])]
                    for t in graph.nodes
                    if t in graph.edges
                ],
                "boundary": [print_term(t) for t in graph.boundary],
                "undecided": [print_term(t) for t in graph.undecided],
            },
            indent=2,
        )
    raise ValueError(f"unknown format {format!r}; expected 'dot' or 'structured'")
