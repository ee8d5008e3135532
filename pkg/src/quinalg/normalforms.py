"""Normal-form grammars and the census of self-reproducing terms.

For each terminating system the set of normal forms has a small grammar:

* fragment ``d``: ``e``, ``d``, applications ``d @ t`` (t normal, t != e),
  and right-nested sums of two or more summands, each ``d`` or such an
  application;
* fragments ``dw`` / ``w``: ``e``, the generators, applications ``w @ a``
  where ``a`` is itself a non-sum, non-``e`` normal form ("atom"), and
  right-nested sums of two or more atoms.

On top of the grammars sit the census tools: quines (normal forms t with
``nf(t @ e) = t``), expression cycles, and the classifier that checks every
fixed point and 2-cycle of the ``dw`` fragment against the four known shapes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .terms import (
    App,
    Const,
    D,
    E,
    Plus,
    Term,
    W,
    parse_term,
    print_term,
)
from .rewriting import (
    DEFAULT_FUEL,
    FuelExhausted,
    RewriteSystem,
    Trace,
    normalize,
)

#: Grammar production labels, in the order unit / generator / application / sum.
NF_CLASSES = ("unit", "generator", "application", "sum")


def nf_grammar_member(fragment: str, t: Term) -> Optional[str]:
    """The grammar production t belongs to, or None if t is not a normal form.

    Supported fragments: "d", "dw", "w".  The full system is not terminating,
    so it has no normal-form grammar here.
    """
    if fragment == "d":
        return _member_d(t)
    if fragment in ("dw", "w"):
        return _member_w(t, generators={"d", "w"} if fragment == "dw" else {"w"})
    raise ValueError(f"no normal-form grammar for fragment {fragment!r}")


def _member_d(t: Term) -> Optional[str]:
    if t == E:
        return "unit"
    if t == D:
        return "generator"
    if isinstance(t, App):
        if t.left == D and t.right != E and _member_d(t.right) is not None:
            return "application"
        return None
    if isinstance(t, Plus):
        return "sum" if _summands_ok(t, _d_summand) else None
    return None


def _d_summand(t: Term) -> bool:
    return t == D or (isinstance(t, App) and _member_d(t) == "application")


def _member_w(t: Term, generators: set[str]) -> Optional[str]:
    if t == E:
        return "unit"
    if isinstance(t, Const):
        return "generator" if t.name in generators else None
    if isinstance(t, App):
        # only w may head an application, and its argument must be an atom:
        # a sum argument would step by distribution, e by the unit rule
        if t.left == W and _w_atom(t.right, generators):
            return "application"
        return None
    if isinstance(t, Plus):
        return "sum" if _summands_ok(t, lambda s: _w_atom(s, generators)) else None
    return None


def _w_atom(t: Term, generators: set[str]) -> bool:
    if isinstance(t, Const):
        return t.name in generators
    return isinstance(t, App) and t.left == W and _w_atom(t.right, generators)


def _summands_ok(t: Term, is_summand) -> bool:
    """Right-nested sum of >= 2 admissible summands (left child never a sum)."""
    count = 0
    while isinstance(t, Plus):
        if not is_summand(t.left):
            return False
        count += 1
        t = t.right
    return count >= 1 and is_summand(t)


def enumerate_normal_forms(fragment: str, max_size: int) -> list[Term]:
    """Every normal form of the fragment with ``size <= max_size``, generated
    from the grammar (not by filtering); ordered by size then printed form."""
    if fragment == "d":
        return _enumerate(max_size, _d_layers)
    if fragment == "dw":
        return _enumerate(max_size, lambda n, by: _w_layers(n, by, [D, W]))
    if fragment == "w":
        return _enumerate(max_size, lambda n, by: _w_layers(n, by, [W]))
    raise ValueError(f"no normal-form grammar for fragment {fragment!r}")


def _enumerate(max_size: int, layers) -> list[Term]:
    by_size: dict[int, dict[str, list[Term]]] = {}
    out: list[Term] = []
    for n in range(1, max_size + 1):
        layer = layers(n, by_size)
        by_size[n] = layer
        flat = sorted(layer["nf"], key=print_term)
        out.extend(flat)
    return out


def _d_layers(n: int, by_size) -> dict[str, list[Term]]:
    if n == 1:
        return {"nf": [E, D], "summand": [D]}
    apps = [
        App(D, t)
        for t in by_size.get(n - 2, {}).get("nf", ())
        if t != E
    ]
    sums = _sums(n, by_size)
    return {"nf": apps + sums, "summand": apps, "sum": sums}


def _w_layers(n: int, by_size, generators: list[Term]) -> dict[str, list[Term]]:
    if n == 1:
        return {"nf": [E] + generators, "summand": list(generators)}
    atoms = [App(W, a) for a in by_size.get(n - 2, {}).get("summand", ())]
    sums = _sums(n, by_size)
    return {"nf": atoms + sums, "summand": atoms, "sum": sums}


def _sums(n: int, by_size) -> list[Term]:
    """Right-nested sums of total size n whose summands come from the
    'summand' groups of smaller layers."""
    out = []
    for i in range(1, n - 1):
        j = n - 1 - i
        heads = by_size.get(i, {}).get("summand", ())
        tails = list(by_size.get(j, {}).get("summand", ())) + list(
            by_size.get(j, {}).get("sum", ())
        )
        out.extend(Plus(h, t) for h in heads for t in tails)
    return out


# ---------------------------------------------------------------------------
# Quines and cycles


@dataclass(frozen=True)
class QuineResult:
    term: Term
    verified: bool  # False only when normalization ran out of fuel
    trace: Trace


#: Size cap on intermediate terms while chasing successor chains.  Some
#: normal forms have successors whose successors grow without bound (squaring
#: per generation); the cap abandons those chains in bounded time instead of
#: grinding through millions of nodes only to run out of fuel anyway.
CHAIN_SIZE_CAP = 200_000


def _successor(system: RewriteSystem, t: Term, fuel: int, keep_trace: bool = True,
               size_cap: Optional[int] = None):
    return normalize(system, App(t, E), fuel, keep_trace=keep_trace, size_cap=size_cap)


def find_quines(system: RewriteSystem, max_size: int, fuel: int = DEFAULT_FUEL) -> list[QuineResult]:
    """All normal forms t with size <= max_size and nf(t @ e) = t.

    Every enumerated normal form is tested.  Entries with ``verified=False``
    (possible only if fuel ran out, which the terminating fragments never hit)
    mark candidates the search could not decide.
    """
    out = []
    for t in enumerate_normal_forms(system.fragment, max_size):
        result = _successor(system, t, fuel)
        if isinstance(result, FuelExhausted):
            out.append(QuineResult(t, False, result.trace))
        elif result.nf == t:
            out.append(QuineResult(t, True, result.trace))
    return out


@dataclass(frozen=True)
class Cycle:
    """An expression cycle t0 -> t1 -> ... -> t0 (length 1 = fixed point).

    Members are stored in cycle order starting from the lexicographically
    least printed member, so equal cycles compare equal.
    """

    members: tuple[Term, ...]

    @staticmethod
    def canonical(members: Iterable[Term]) -> "Cycle":
        ms = tuple(members)
        start = min(range(len(ms)), key=lambda i: print_term(ms[i]))
        return Cycle(ms[start:] + ms[:start])

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class TwinPair:
    """An unordered 2-cycle: nf(first @ e) = second and vice versa."""

    first: Term
    second: Term

    @staticmethod
    def of(a: Term, b: Term) -> "TwinPair":
        a, b = sorted((a, b), key=print_term)
        return TwinPair(a, b)


def find_cycles(
    system: RewriteSystem, max_size: int, max_len: int = 6, fuel: int = DEFAULT_FUEL
) -> list[Cycle]:
    """Cycles of the expression map reachable from normal forms of
    size <= max_size by following at most max_len successor steps.

    Chains may pass through terms larger than max_size; cycle members are
    therefore not themselves bounded by it.  Each cycle is reported once.
    """
    # Every seed walks its own full window: a chain that merely passes
    # through a term near the end of its window proves nothing about cycles
    # reachable from that term, so seeds may not be skipped as "already
    # visited".  A successor memo keeps the revisits O(1).
    succ_cache: dict[Term, Optional[Term]] = {}
    found: list[Cycle] = []
    known: set[Cycle] = set()
    for start in enumerate_normal_forms(system.fragment, max_size):
        chain: list[Term] = [start]
        index = {start: 0}
        for _ in range(max_len):
            cur = chain[-1]
            if cur in succ_cache:
                nxt = succ_cache[cur]
            else:
                result = _successor(system, cur, fuel, keep_trace=False,
                                    size_cap=CHAIN_SIZE_CAP)
                nxt = None if isinstance(result, FuelExhausted) else result.nf
                succ_cache[cur] = nxt
            if nxt is None:
                break
            if nxt in index:
                cycle = Cycle.canonical(chain[index[nxt] :])
                if cycle not in known:
                    known.add(cycle)
                    found.append(cycle)
                break
            index[nxt] = len(chain)
            chain.append(nxt)
    return found


def twin_pairs(cycles: Iterable[Cycle]) -> list[TwinPair]:
    return [TwinPair.of(*c.members) for c in cycles if len(c) == 2]


# The four known shapes of dw fixed points and twins, by their printed forms.
_CASE_SHAPES: tuple[tuple[int, frozenset[str]], ...] = (
    (1, frozenset(["e"])),
    (2, frozenset(["w @ d + d"])),
    (
        3,
        frozenset(
            [
                "w @ w + w @ (w @ d) + w + w @ d",
                "w @ w + w @ (w @ d) + d",
            ]
        ),
    ),
    (
        4,
        frozenset(
            [
                "w @ (w @ d) + w @ (w @ w) + w @ d + w @ w",
                "w @ d + w @ w + d + w",
            ]
        ),
    ),
)


@dataclass(frozen=True)
class TwinClassification:
    entries: tuple[tuple[Cycle, Optional[int]], ...]
    counterexamples: tuple[Cycle, ...]

    @property
    def all_classified(self) -> bool:
        return not self.counterexamples


def classify_twins_dw(cycles: Iterable[Union[Cycle, TwinPair]]) -> TwinClassification:
    """Match each dw fixed point (1-cycle) or twin (2-cycle) against the four
    known cases; anything else in the input, or any unmatched cycle, is a
    counterexample to the classification."""
    entries: list[tuple[Cycle, Optional[int]]] = []
    bad: list[Cycle] = []
    for item in cycles:
        cycle = (
            Cycle.canonical((item.first, item.second))
            if isinstance(item, TwinPair)
            else item
        )
        shape = frozenset(print_term(m) for m in cycle.members)
        case = next((n for n, s in _CASE_SHAPES if s == shape), None)
        entries.append((cycle, case))
        if case is None:
            bad.append(cycle)
    return TwinClassification(tuple(entries), tuple(bad))


def case_shape(case: int) -> frozenset[Term]:
    """The terms of one of the four known shapes (1-based)."""
    for n, shape in _CASE_SHAPES:
        if n == case:
            return frozenset(parse_term(s) for s in shape)
    raise ValueError(f"no case {case}")
