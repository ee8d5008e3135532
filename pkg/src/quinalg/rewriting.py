"""Rewrite rules, the four built-in systems, and the normalization engine.

The deterministic strategy is leftmost-outermost: scan positions in pre-order
(root first, then the left subtree, then the right) and at each position try
the system's rules in listed order; the first match fires.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .terms import (
    App,
    Const,
    Node,
    Pattern,
    Plus,
    Position,
    ROOT,
    Term,
    Var,
    FRAGMENTS,
    in_fragment,
    parse_pattern,
    print_term,
    shared_size,
    variables,
)

DEFAULT_FUEL = 10_000

Substitution = dict[str, Node]


@dataclass(frozen=True)
class Rule:
    """An oriented equation lhs -> rhs."""

    id: str
    lhs: Pattern
    rhs: Pattern

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise ValueError(f"rule {self.id}: left-hand side must not be a bare variable")
        extra = variables(self.rhs) - variables(self.lhs)
        if extra:
            raise ValueError(f"rule {self.id}: right-hand side introduces {sorted(extra)}")

    def __str__(self) -> str:
        return f"{self.id} : {print_term(self.lhs)} -> {print_term(self.rhs)}"


@dataclass(frozen=True)
class RewriteSystem:
    name: str
    rules: tuple[Rule, ...]
    fragment: str

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)


def _rule(rule_id: str, lhs: str, rhs: str) -> Rule:
    return Rule(rule_id, parse_pattern(lhs), parse_pattern(rhs))


#: Core system over {e, d}: sums are monoid concatenation with unit e,
#: application runs the left term's instructions, d diagonalizes.
SYS_D = RewriteSystem(
    "SYS-D",
    (
        _rule("plus-e", "x + e", "x"),
        _rule("e-plus", "e + x", "x"),
        _rule("assoc", "(x + y) + z", "x + (y + z)"),
        _rule("app-plus", "(x + y) @ z", "y @ (x @ z)"),
        _rule("app-d", "(d @ x) @ y", "x @ (y + x)"),
        _rule("app-e", "e @ x", "x"),
        _rule("d-e", "d @ e", "e"),
    ),
    "d",
)

#: Refinement over {e, d, w}: d expands into a write step w plus a copy, and
#: w distributes over sums.
SYS_DW = RewriteSystem(
    "SYS-DW",
    (
        _rule("plus-e", "x + e", "x"),
        _rule("e-plus", "e + x", "x"),
        _rule("assoc", "(x + y) + z", "x + (y + z)"),
        _rule("app-plus", "(x + y) @ z", "y @ (x @ z)"),
        _rule("d-exp", "d @ x", "(w @ x) + x"),
        _rule("app-e", "e @ x", "x"),
        _rule("w-dist", "w @ (x + y)", "(w @ x) + (w @ y)"),
        _rule("app-w", "(w @ x) @ y", "y + x"),
        _rule("w-e", "w @ e", "e"),
    ),
    "dw",
)

#: The write-only fragment: SYS-DW without the d rule, over {e, w}.
SYS_W = RewriteSystem(
    "SYS-W",
    tuple(r for r in SYS_DW.rules if r.id != "d-exp"),
    "w",
)

#: The extended system over all six constants.  The final rule app-d is
#: derivable from d-exp, w-dist, app-w and the unit rules; it is included so
#: that diagonal applications can step directly.
SYS_FULL = RewriteSystem(
    "SYS-FULL",
    SYS_DW.rules
    + (
        _rule("s11", "((s11 @ x) @ y) @ z", "(x @ y) @ z"),
        _rule("u0", "u0 @ x", "x @ e"),
        _rule("u1", "(u1 @ x) @ y", "x @ y"),
        _rule("app-d", "(d @ x) @ y", "x @ (y + x)"),
    ),
    "full",
)

SYSTEMS = {"d": SYS_D, "dw": SYS_DW, "w": SYS_W, "full": SYS_FULL}


def match(pattern: Pattern, target: Node, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Match pattern against target at the root; return the substitution or None.

    Variables in the target (when rewriting open terms) are opaque: only a
    pattern variable can bind them.
    """
    if subst is None:
        subst = {}
    if isinstance(pattern, Var):
        bound = subst.get(pattern.name)
        if bound is None:
            subst[pattern.name] = target
            return subst
        return subst if bound == target else None
    if isinstance(pattern, Const):
        return subst if pattern == target else None
    if type(pattern) is not type(target):
        return None
    subst = match(pattern.left, target.left, subst)
    if subst is None:
        return None
    return match(pattern.right, target.right, subst)


def substitute(pattern: Pattern, subst: Substitution) -> Node:
    if isinstance(pattern, Var):
        return subst[pattern.name]
    if isinstance(pattern, Const):
        return pattern
    return type(pattern)(substitute(pattern.left, subst), substitute(pattern.right, subst))


class Step(NamedTuple):
    position: Position
    rule_id: str
    result: Node


@dataclass(frozen=True)
class Trace:
    start: Node
    steps: tuple[Step, ...]

    @property
    def final(self) -> Node:
        return self.steps[-1].result if self.steps else self.start

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Normalized:
    nf: Node
    trace: Optional[Trace]


@dataclass(frozen=True)
class FuelExhausted:
    last: Node
    steps_used: int
    trace: Optional[Trace]


NormalizeOutcome = Normalized | FuelExhausted


def format_position(pos: Position) -> str:
    return "".join(pos) if pos else "root"


def render_trace(trace: Trace) -> str:
    """Plain-text rendering of a derivation, one line per step."""
    lines = [print_term(trace.start)]
    for step in trace.steps:
        lines.append(f"  -> {print_term(step.result)}   [{step.rule_id} at {format_position(step.position)}]")
    return "\n".join(lines)


_EXIT = object()


def rewrite_step(system: RewriteSystem, t: Node) -> Optional[Step]:
    """One leftmost-outermost step, or None if t is a normal form."""
    return _rewrite_step(system, t, set())


def _rewrite_step(system: RewriteSystem, t: Node, normal: set[Node]) -> Optional[Step]:
    """Iterative pre-order redex search.

    ``normal`` collects subterms found to be in normal form so that later
    scans (of terms sharing structure with this one) skip them outright: a
    subterm in normal form stays normal in every context.  Entries are added
    on post-order exit, when the whole subtree has been checked.

    Positions are threaded as linked cons cells and only materialized into a
    tuple when a redex is actually found, so scanning a deep normal term
    costs O(1) per node instead of O(depth).
    """
    stack: list[tuple] = [(t, None)]
    while stack:
        entry = stack.pop()
        if entry[0] is _EXIT:
            normal.add(entry[1])
            continue
        sub, link = entry
        if sub in normal:
            continue
        for rule in system.rules:
            subst = match(rule.lhs, sub)
            if subst is not None:
                pos = _link_to_position(link)
                return Step(pos, rule.id, _replace(t, pos, substitute(rule.rhs, subst)))
        if isinstance(sub, (Plus, App)):
            stack.append((_EXIT, sub))
            stack.append((sub.right, ("R", link)))
            stack.append((sub.left, ("L", link)))
        else:
            normal.add(sub)
    return None


def _link_to_position(link) -> Position:
    steps = []
    while link is not None:
        steps.append(link[0])
        link = link[1]
    steps.reverse()
    return tuple(steps)


def all_one_step_rewrites(system: RewriteSystem, t: Node) -> list[Step]:
    """Every one-step rewrite of t, in (pre-order position, rule order)."""
    out: list[Step] = []
    stack: list[tuple[Node, Position]] = [(t, ROOT)]
    while stack:
        sub, here = stack.pop()
        for rule in system.rules:
            subst = match(rule.lhs, sub)
            if subst is not None:
                reduct = substitute(rule.rhs, subst)
                out.append(Step(here, rule.id, _replace(t, here, reduct)))
        if isinstance(sub, (Plus, App)):
            stack.append((sub.right, here + ("R",)))
            stack.append((sub.left, here + ("L",)))
    return out


def _replace(t: Node, pos: Position, replacement: Node) -> Node:
    if not pos:
        return replacement
    spine: list[Node] = []
    sub = t
    for step in pos:
        spine.append(sub)
        sub = sub.left if step == "L" else sub.right
    result = replacement
    for parent, step in zip(reversed(spine), reversed(pos)):
        if step == "L":
            result = type(parent)(result, parent.right)
        else:
            result = type(parent)(parent.left, result)
    return result


def is_normal_form(system: RewriteSystem, t: Node) -> bool:
    return rewrite_step(system, t) is None


def normalize(
    system: RewriteSystem,
    t: Node,
    fuel: int = DEFAULT_FUEL,
    keep_trace: bool = True,
    size_cap: Optional[int] = None,
) -> NormalizeOutcome:
    """Rewrite to normal form under the deterministic strategy.

    Performs at most ``fuel`` steps; a term still reducible after that many
    steps yields :class:`FuelExhausted`.  With ``keep_trace=False`` the
    intermediate terms are discarded (outcome.trace is None), which keeps
    memory flat on long derivations.

    ``size_cap`` additionally bounds the size of intermediate terms.  The
    duplicating rules can nearly double a term per step, so a runaway
    derivation costs time proportional to the *term*, not the step count;
    a cap cuts it off early (also reported as :class:`FuelExhausted`).
    The check is incremental — a shared size memo means each step pays only
    for the nodes it created.
    """
    steps: list[Step] = []
    used = 0
    current = t
    normal: set[Node] = set()
    sizes: Optional[dict[Node, int]] = {} if size_cap is not None else None
    for _ in range(fuel):
        step = _rewrite_step(system, current, normal)
        if step is None:
            trace = Trace(t, tuple(steps)) if keep_trace else None
            return Normalized(current, trace)
        if keep_trace:
            steps.append(step)
        used += 1
        current = step.result
        if sizes is not None and shared_size(current, sizes) > size_cap:
            trace = Trace(t, tuple(steps)) if keep_trace else None
            return FuelExhausted(current, used, trace)
    if _rewrite_step(system, current, normal) is None:
        trace = Trace(t, tuple(steps)) if keep_trace else None
        return Normalized(current, trace)
    trace = Trace(t, tuple(steps)) if keep_trace else None
    return FuelExhausted(current, used, trace)


def normalize_random(
    system: RewriteSystem, t: Node, rng: random.Random, fuel: int = DEFAULT_FUEL
) -> NormalizeOutcome:
    """Like :func:`normalize` but picks a uniformly random redex each step."""
    steps: list[Step] = []
    current = t
    for _ in range(fuel):
        candidates = all_one_step_rewrites(system, current)
        if not candidates:
            return Normalized(current, Trace(t, tuple(steps)))
        step = rng.choice(candidates)
        steps.append(step)
        current = step.result
    if not all_one_step_rewrites(system, current):
        return Normalized(current, Trace(t, tuple(steps)))
    return FuelExhausted(current, len(steps), Trace(t, tuple(steps)))


class Answer(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


def equal(system: RewriteSystem, s: Node, t: Node, fuel: int = DEFAULT_FUEL) -> Answer:
    """Decide s = t by comparing normal forms (sound for confluent systems).

    Returns UNKNOWN when either side runs out of fuel.
    """
    left = normalize(system, s, fuel, keep_trace=False)
    right = normalize(system, t, fuel, keep_trace=False)
    if isinstance(left, FuelExhausted) or isinstance(right, FuelExhausted):
        return Answer.UNKNOWN
    return Answer.YES if left.nf == right.nf else Answer.NO


def parse_rules_file(text: str, name: str = "custom") -> RewriteSystem:
    """Parse a rule listing, one ``<id> : <lhs> -> <rhs>`` per line.

    Blank lines and lines starting with ``#`` are ignored.  The fragment is
    inferred as the smallest named signature containing every constant used.
    """
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            head, rest = line.split(":", 1)
            lhs_text, rhs_text = rest.split("->", 1)
        except ValueError:
            raise ValueError(f"line {lineno}: expected '<id> : <lhs> -> <rhs>'") from None
        rule_id = head.strip()
        if not rule_id:
            raise ValueError(f"line {lineno}: empty rule id")
        try:
            rules.append(_rule(rule_id, lhs_text.strip(), rhs_text.strip()))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not rules:
        raise ValueError("no rules in file")
    ids = [r.id for r in rules]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise ValueError(f"duplicate rule ids: {sorted(dupes)}")
    used = set()
    for r in rules:
        for side in (r.lhs, r.rhs):
            used |= _constants_of(side)
    fragment = "full"
    for tag in ("d", "w", "dw", "full"):
        if used <= FRAGMENTS[tag]:
            fragment = tag
            break
    return RewriteSystem(name, tuple(rules), fragment)


def _constants_of(t: Node) -> set[str]:
    if isinstance(t, Const):
        return {t.name}
    if isinstance(t, Var):
        return set()
    return _constants_of(t.left) | _constants_of(t.right)
