"""Meta-analysis of rewrite systems: critical pairs, termination, loops.

Three independent tools live here:

* syntactic unification and the critical-pair / local-confluence check;
* a recursive path order with quasi-precedence (symbols may share a
  precedence class; each class carries a lexicographic or multiset status)
  plus an exhaustive precedence search;
* a bounded breadth-first loop finder for non-terminating systems.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .terms import (
    App,
    Const,
    Node,
    Pattern,
    Plus,
    Position,
    ROOT,
    Var,
    FRAGMENTS,
    positions,
    print_term,
    replace_at,
    subterm_at,
    variables,
)
from .rewriting import (
    FuelExhausted,
    Normalized,
    RewriteSystem,
    Rule,
    Step,
    Substitution,
    DEFAULT_FUEL,
    all_one_step_rewrites,
    normalize,
    substitute,
)

# ---------------------------------------------------------------------------
# Unification


def _walk(t: Node, subst: Substitution) -> Node:
    while isinstance(t, Var) and t.name in subst:
        t = subst[t.name]
    return t


def _occurs(name: str, t: Node, subst: Substitution) -> bool:
    t = _walk(t, subst)
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, Const):
        return False
    return _occurs(name, t.left, subst) or _occurs(name, t.right, subst)


def unify(p: Node, q: Node) -> Optional[Substitution]:
    """Most general unifier of p and q, or None.  Includes the occurs check.

    The result is idempotent: applying it twice equals applying it once.
    """
    subst: Substitution = {}
    stack = [(p, q)]
    while stack:
        a, b = stack.pop()
        a = _walk(a, subst)
        b = _walk(b, subst)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs(a.name, b, subst):
                return None
            subst[a.name] = b
        elif isinstance(b, Var):
            if _occurs(b.name, a, subst):
                return None
            subst[b.name] = a
        elif type(a) is type(b) and isinstance(a, (Plus, App)):
            stack.append((a.right, b.right))
            stack.append((a.left, b.left))
        else:
            return None
    return {name: substitute_resolved(t, subst) for name, t in subst.items()}


def substitute_resolved(t: Node, subst: Substitution) -> Node:
    """Apply a triangular substitution exhaustively (resolve chained bindings)."""
    t = _walk(t, subst)
    if isinstance(t, (Const, Var)):
        return t
    return type(t)(substitute_resolved(t.left, subst), substitute_resolved(t.right, subst))


def apply_subst(t: Node, subst: Substitution) -> Node:
    """Apply an idempotent substitution; unbound variables stay themselves."""
    if isinstance(t, Var):
        return subst.get(t.name, t)
    if isinstance(t, Const):
        return t
    return type(t)(apply_subst(t.left, subst), apply_subst(t.right, subst))


# ---------------------------------------------------------------------------
# Critical pairs and local confluence


@dataclass(frozen=True)
class CriticalPair:
    outer_id: str
    inner_id: str
    position: Position
    peak: Node
    left_result: Node  # outer rule contracted at the root of the peak
    right_result: Node  # inner rule contracted at `position`

    def __str__(self) -> str:
        pos = "".join(self.position) or "root"
        return (
            f"({self.outer_id}, {self.inner_id}) at {pos}: "
            f"{print_term(self.peak)}  =>  {print_term(self.left_result)}  |  "
            f"{print_term(self.right_result)}"
        )


def _rename(t: Node, suffix: str) -> Node:
    if isinstance(t, Var):
        return Var(t.name + suffix)
    if isinstance(t, Const):
        return t
    return type(t)(_rename(t.left, suffix), _rename(t.right, suffix))


def critical_pairs(system: RewriteSystem) -> list[CriticalPair]:
    """All critical pairs between ordered rule pairs of the system.

    The inner rule's left-hand side is unified with each non-variable subterm
    of the outer rule's left-hand side; the trivial overlap of a rule with
    itself at the root is skipped.  Both overlapping rules may be the same
    rule (renamed apart) at a proper position, and distinct rules may overlap
    at the root.
    """
    out: list[CriticalPair] = []
    for oi, outer in enumerate(system.rules):
        for ii, inner in enumerate(system.rules):
            inner_lhs = _rename(inner.lhs, "'")
            inner_rhs = _rename(inner.rhs, "'")
            for pos in positions(outer.lhs):
                sub = subterm_at(outer.lhs, pos)
                if isinstance(sub, Var):
                    continue
                if pos == ROOT and oi == ii:
                    continue
                sigma = unify(sub, inner_lhs)
                if sigma is None:
                    continue
                peak = apply_subst(outer.lhs, sigma)
                left = apply_subst(outer.rhs, sigma)
                right = replace_at(peak, pos, apply_subst(inner_rhs, sigma))
                out.append(CriticalPair(outer.id, inner.id, pos, peak, left, right))
    return out


@dataclass(frozen=True)
class ConfluenceReport:
    system: str
    pairs: int
    joinable: int
    non_joinable: tuple[CriticalPair, ...]
    unresolved: tuple[CriticalPair, ...]

    @property
    def locally_confluent(self) -> bool:
        return not self.non_joinable and not self.unresolved


def check_local_confluence(system: RewriteSystem, fuel: int = DEFAULT_FUEL) -> ConfluenceReport:
    """Join every critical pair by normalizing both sides (variables are inert).

    A pair that runs out of fuel on either side is reported as unresolved, not
    as a failure.
    """
    pairs = critical_pairs(system)
    joinable = 0
    bad: list[CriticalPair] = []
    unresolved: list[CriticalPair] = []
    for pair in pairs:
        left = normalize(system, pair.left_result, fuel)
        right = normalize(system, pair.right_result, fuel)
        if isinstance(left, FuelExhausted) or isinstance(right, FuelExhausted):
            unresolved.append(pair)
        elif left.nf == right.nf:
            joinable += 1
        else:
            bad.append(pair)
    return ConfluenceReport(system.name, len(pairs), joinable, tuple(bad), tuple(unresolved))


# ---------------------------------------------------------------------------
# Recursive path order with quasi-precedence


BINARY_SYMBOLS = ("plus", "app")


def symbol_of(t: Node) -> str:
    if isinstance(t, Plus):
        return "plus"
    if isinstance(t, App):
        return "app"
    if isinstance(t, Const):
        return t.name
    raise TypeError(f"variables carry no symbol: {t!r}")


def _args(t: Node) -> tuple[Node, ...]:
    if isinstance(t, (Plus, App)):
        return (t.left, t.right)
    return ()


def fragment_symbols(fragment: str) -> tuple[str, ...]:
    return tuple(sorted(FRAGMENTS[fragment])) + BINARY_SYMBOLS


@dataclass(frozen=True)
class Precedence:
    """A quasi-precedence: disjoint symbol classes, partially ordered.

    ``greater`` holds transitively-closed pairs of class indices; symbols in
    the same class are equivalent.  ``status`` gives each class "lex"
    (left-to-right lexicographic) or "mul" (multiset) argument comparison.
    """

    classes: tuple[frozenset[str], ...]
    greater: frozenset[tuple[int, int]]
    status: tuple[str, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for cls in self.classes:
            if cls & seen:
                raise ValueError(f"symbol in two classes: {sorted(cls & seen)}")
            seen |= cls
        if len(self.status) != len(self.classes):
            raise ValueError("one status per class required")
        if any(s not in ("lex", "mul") for s in self.status):
            raise ValueError("status must be 'lex' or 'mul'")
        if any((i, i) in self.greater for i in range(len(self.classes))):
            raise ValueError("precedence must be irreflexive")

    @classmethod
    def chain(
        cls, groups: Sequence[str | Iterable[str]], status: Optional[Sequence[str]] = None
    ) -> "Precedence":
        """A total quasi-precedence: each group is strictly above the next."""
        classes = tuple(
            frozenset([g]) if isinstance(g, str) else frozenset(g) for g in groups
        )
        greater = frozenset(
            (i, j) for i in range(len(classes)) for j in range(len(classes)) if i < j
        )
        return cls(classes, greater, tuple(status) if status else ("lex",) * len(classes))

    def class_of(self, symbol: str) -> Optional[int]:
        for i, cls in enumerate(self.classes):
            if symbol in cls:
                return i
        return None

    def compare(self, f: str, g: str) -> str:
        """One of '>', '<', '=', '?' ('?' also covers unlisted symbols)."""
        ci, cj = self.class_of(f), self.class_of(g)
        if ci is None or cj is None:
            return "?"
        if ci == cj:
            return "="
        if (ci, cj) in self.greater:
            return ">"
        if (cj, ci) in self.greater:
            return "<"
        return "?"

    def status_of(self, symbol: str) -> str:
        ci = self.class_of(symbol)
        return self.status[ci] if ci is not None else "lex"

    def __str__(self) -> str:
        def show(i: int) -> str:
            names = sorted(
                "+" if s == "plus" else "@" if s == "app" else s for s in self.classes[i]
            )
            body = ",".join(names)
            if self.status[i] == "mul":
                body += " (mul)"
            return body if len(names) == 1 and self.status[i] == "lex" else f"[{body}]"

        k = len(self.classes)
        if len(self.greater) == k * (k - 1) // 2:  # total order: render as a chain
            ranked = sorted(range(k), key=lambda i: sum(1 for j in range(k) if (j, i) in self.greater))
            return " > ".join(show(i) for i in ranked)
        parts = [
            f"{show(i)} > {show(j)}"
            for i, j in sorted(self.greater)
            if not any((i, m) in self.greater and (m, j) in self.greater for m in range(k))
        ]
        lonely = [show(i) for i in range(k) if not any(i in pair for pair in self.greater)]
        return "; ".join(parts + lonely) if parts or lonely else "(empty)"


_SYMBOL_ALIASES = {"+": "plus", "@": "app", "plus": "plus", "app": "app"}


def parse_precedence(text: str, status: Optional[dict[str, str]] = None) -> Precedence:
    """Parse constraints like ``app > [+,e,d]`` or ``app > e > [+,d]; u1 > [+,d]``.

    Semicolons separate chains; a class is one symbol or a bracketed list and
    may appear in several chains.  ``status`` maps a member symbol to "lex" or
    "mul" for its whole class (default "lex").
    """

    def parse_class(chunk: str) -> frozenset[str]:
        chunk = chunk.strip()
        if chunk.startswith("[") and chunk.endswith("]"):
            names = [c.strip() for c in chunk[1:-1].split(",")]
        else:
            names = [chunk]
        out = set()
        for name in names:
            if not name:
                raise ValueError(f"empty class in {text!r}")
            out.add(_SYMBOL_ALIASES.get(name, name))
        return frozenset(out)

    classes: list[frozenset[str]] = []

    def class_index(cls: frozenset[str]) -> int:
        for i, existing in enumerate(classes):
            if existing == cls:
                return i
            if existing & cls:
                raise ValueError(f"overlapping classes {sorted(existing)} and {sorted(cls)}")
        classes.append(cls)
        return len(classes) - 1

    edges: set[tuple[int, int]] = set()
    for chain in text.split(";"):
        chain = chain.strip()
        if not chain:
            continue
        idxs = [class_index(parse_class(chunk)) for chunk in chain.split(">")]
        for a, b in zip(idxs, idxs[1:]):
            edges.add((a, b))
    # transitive closure
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(tuple(edges), repeat=2):
            if b == c and (a, d) not in edges:
                edges.add((a, d))
                changed = True
    if any((a, a) in edges for a in range(len(classes))):
        raise ValueError(f"cyclic precedence in {text!r}")
    statuses = ["lex"] * len(classes)
    for sym, st in (status or {}).items():
        sym = _SYMBOL_ALIASES.get(sym, sym)
        for i, cls in enumerate(classes):
            if sym in cls:
                statuses[i] = st
    return Precedence(tuple(classes), frozenset(edges), tuple(statuses))


def rpo_equivalent(prec: Precedence, s: Node, t: Node) -> bool:
    """Equivalence induced by the quasi-precedence (equal up to class and status)."""
    if isinstance(s, Var) or isinstance(t, Var):
        return s == t
    if prec.compare(symbol_of(s), symbol_of(t)) != "=":
        return False
    ss, ts = _args(s), _args(t)
    if prec.status_of(symbol_of(s)) == "lex":
        return len(ss) == len(ts) and all(
            rpo_equivalent(prec, a, b) for a, b in zip(ss, ts)
        )
    return _multiset_equivalent(prec, list(ss), list(ts))


def _multiset_equivalent(prec: Precedence, ss: list[Node], ts: list[Node]) -> bool:
    if len(ss) != len(ts):
        return False
    remaining = list(ts)
    for a in ss:
        for i, b in enumerate(remaining):
            if rpo_equivalent(prec, a, b):
                del remaining[i]
                break
        else:
            return False
    return True


def rpo_greater(prec: Precedence, s: Node, t: Node) -> bool:
    """Strict recursive path order with quasi-precedence and per-class status."""
    if isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return t.name in variables(s)
    ss, ts = _args(s), _args(t)
    for si in ss:
        if rpo_equivalent(prec, si, t) or rpo_greater(prec, si, t):
            return True
    cmp = prec.compare(symbol_of(s), symbol_of(t))
    if cmp == ">":
        return all(rpo_greater(prec, s, tj) for tj in ts)
    if cmp == "=":
        if not all(rpo_greater(prec, s, tj) for tj in ts):
            return False
        if prec.status_of(symbol_of(s)) == "lex":
            return _lex_strictly_greater(prec, ss, ts)
        return _multiset_strictly_greater(prec, list(ss), list(ts))
    return False


def _lex_strictly_greater(prec: Precedence, ss: tuple[Node, ...], ts: tuple[Node, ...]) -> bool:
    for a, b in zip(ss, ts):
        if rpo_equivalent(prec, a, b):
            continue
        return rpo_greater(prec, a, b)
    return len(ss) > len(ts)


def _multiset_strictly_greater(prec: Precedence, ss: list[Node], ts: list[Node]) -> bool:
    # cancel pairwise-equivalent elements, then every survivor on the right
    # must be strictly below some survivor on the left
    left = list(ss)
    right = list(ts)
    for a in list(left):
        for i, b in enumerate(right):
            if rpo_equivalent(prec, a, b):
                left.remove(a)
                del right[i]
                break
    if not left:
        return False
    return all(any(rpo_greater(prec, a, b) for a in left) for b in right)


@dataclass(frozen=True)
class TerminationReport:
    system: str
    precedence: Precedence
    per_rule: tuple[tuple[str, bool], ...]
    certified: bool


def check_termination(system: RewriteSystem, prec: Precedence) -> TerminationReport:
    """Certify termination: every rule must strictly decrease under the order.

    The order is closed under contexts and substitutions and well-founded, so
    an all-rules-decrease certificate is sound; failure to certify proves
    nothing by itself.
    """
    per_rule = tuple((r.id, rpo_greater(prec, r.lhs, r.rhs)) for r in system.rules)
    return TerminationReport(system.name, prec, per_rule, all(ok for _, ok in per_rule))


def search_precedence(system: RewriteSystem) -> Optional[Precedence]:
    """Exhaustively search quasi-precedences (all ordered partitions of the
    fragment's symbols, both statuses for classes containing a binary symbol)
    and return the first one whose path order certifies every rule.

    Partitions are tried with fewer classes first, so the returned certificate
    is as coarse as possible.  Returns None only after exhausting the space.
    """
    symbols = fragment_symbols(system.fragment)
    rule_order = list(range(len(system.rules)))  # adaptive: failing rules move up
    for assignment in _ordered_partitions_ranked(symbols):
        k = max(assignment) + 1
        classes = tuple(
            frozenset(sym for sym, c in zip(symbols, assignment) if c == rank)
            for rank in range(k)
        )
        flexible = [i for i, cls in enumerate(classes) if cls & set(BINARY_SYMBOLS)]
        choices = [("lex", "mul") if i in flexible else ("lex",) for i in range(k)]
        greater = frozenset((i, j) for i in range(k) for j in range(k) if i < j)
        for status in itertools.product(*choices):
            prec = Precedence(classes, greater, status)
            ok = True
            for idx in rule_order:
                rule = system.rules[idx]
                if not rpo_greater(prec, rule.lhs, rule.rhs):
                    ok = False
                    rule_order.remove(idx)
                    rule_order.insert(0, idx)
                    break
            if ok:
                return prec
    return None


def _ordered_partitions_ranked(symbols: Sequence[str]):
    """Ordered partitions where class 0 is the greatest: enumerate unordered
    partitions canonically, then every ordering of the blocks."""
    n = len(symbols)
    for k in range(1, n + 1):
        assignment = [0] * n

        def place(i: int, used: int):
            if n - i < k - used:
                return
            if i == n:
                yield tuple(assignment)
                return
            limit = min(used + 1, k)
            for c in range(limit):
                assignment[i] = c
                yield from place(i + 1, used + 1 if c == used else used)

        for canonical in place(0, 0):
            for perm in itertools.permutations(range(k)):
                yield tuple(perm[c] for c in canonical)


# ---------------------------------------------------------------------------
# Loop search


@dataclass(frozen=True)
class LoopWitness:
    start: Node
    steps: tuple[Step, ...]  # replaying from start ends back at start

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class LoopSearch:
    witness: Optional[LoopWitness]
    exhausted: bool  # True when the whole reachable graph fit in the bound
    states: int


def find_loop(system: RewriteSystem, t: Node, max_states: int = 100_000) -> LoopSearch:
    """Breadth-first search of the one-step rewrite graph for a cycle.

    Exploration is level by level with successors ordered as in
    :func:`all_one_step_rewrites`.  When the start term itself lies on a
    cycle, the witness is a shortest cycle through the start; ties are broken
    by the lexicographically least sequence of (rule id, position) step keys.
    A ``witness=None`` result is definitive only when ``exhausted`` is True.
    """
    adj: dict[Node, list[Step]] = {}
    dist: dict[Node, int] = {t: 0}
    parent: dict[Node, Optional[Node]] = {t: None}
    order: list[Node] = [t]
    queue: deque[Node] = deque([t])
    stop_level: Optional[int] = None
    truncated = False

    def on_ancestor_path(node: Node, candidate: Node) -> bool:
        cur: Optional[Node] = node
        while cur is not None:
            if cur == candidate:
                return True
            cur = parent[cur]
        return False

    while queue:
        x = queue.popleft()
        if stop_level is not None and dist[x] > stop_level:
            break
        steps = all_one_step_rewrites(system, x)
        adj[x] = steps
        for step in steps:
            v = step.result
            if v not in dist:
                if len(dist) >= max_states:
                    truncated = True
                    continue
                dist[v] = dist[x] + 1
                parent[v] = x
                order.append(v)
                queue.append(v)
            elif stop_level is None and on_ancestor_path(x, v):
                # a cycle certainly exists; finish this level so that every
                # competing closing edge is on record, then extract
                stop_level = dist[x]
    witness = _extract_cycle(adj, order)
    exhausted = not truncated and stop_level is None and not queue
    return LoopSearch(witness, exhausted, len(dist))


def _extract_cycle(adj: dict[Node, list[Step]], order: list[Node]) -> Optional[LoopWitness]:
    for anchor in order:
        cycle = _shortest_cycle_through(adj, anchor)
        if cycle is not None:
            return LoopWitness(anchor, cycle)
    return None


def _step_key(step: Step) -> tuple[str, str]:
    return (step.rule_id, "".join(step.position))


def _shortest_cycle_through(adj: dict[Node, list[Step]], anchor: Node) -> Optional[tuple[Step, ...]]:
    """Shortest cycle anchor -> ... -> anchor within the recorded edges,
    lex-least by step keys among equals; None if anchor is not on a cycle."""
    if anchor not in adj:
        return None
    dist: dict[Node, int] = {anchor: 0}
    frontier = [anchor]
    level = 0
    best: Optional[list[Step]] = None
    while frontier and best is None:
        closing = [
            node
            for node in frontier
            if node in adj and any(s.result == anchor for s in adj[node])
        ]
        if closing:
            paths: list[list[Step]] = []
            for node in closing:
                for prefix in _shortest_paths(adj, anchor, node, dist):
                    for s in adj[node]:
                        if s.result == anchor:
                            paths.append(prefix + [s])
            best = min(paths, key=lambda p: [_step_key(s) for s in p])
            break
        nxt = []
        for node in frontier:
            for s in adj.get(node, ()):
                if s.result not in dist:
                    dist[s.result] = level + 1
                    nxt.append(s.result)
        frontier = nxt
        level += 1
    return tuple(best) if best is not None else None


def _shortest_paths(
    adj: dict[Node, list[Step]], source: Node, target: Node, dist: dict[Node, int], cap: int = 10_000
) -> list[list[Step]]:
    """All shortest paths source -> target along edges consistent with dist."""
    if source == target:
        return [[]]
    out: list[list[Step]] = []

    def extend(node: Node, path: list[Step]):
        if len(out) >= cap:
            return
        if node == target:
            out.append(list(path))
            return
        for s in adj.get(node, ()):
            if dist.get(s.result) == dist.get(node, -2) + 1 and len(path) < dist[target]:
                path.append(s)
                extend(s.result, path)
                path.pop()

    extend(source, [])
    return out
