"""Syntax of the calculus: terms, parsing, printing, positions.

A term is built from named constants with two binary operators, a sum
``t + u`` and an application ``t @ u``.  Application binds tighter than
sum and associates to the left; sum associates to the right.  Patterns
are terms that may additionally contain variables (single lowercase
letters, optionally with a numeric suffix).

Node objects are immutable by convention and cache a structural hash at
construction time, so hashing is O(1) and equality can short-circuit on
hash mismatches.  All traversals here are iterative: terms produced by
repeated rewriting can be far deeper than the default recursion limit.
"""

from __future__ import annotations

import functools
import re
from typing import Iterator, Optional, Union

CONSTANTS = ("e", "d", "w", "s11", "u0", "u1")

#: Which constants each named fragment of the calculus may use.
FRAGMENTS: dict[str, frozenset[str]] = {
    "d": frozenset({"e", "d"}),
    "w": frozenset({"e", "w"}),
    "dw": frozenset({"e", "d", "w"}),
    "full": frozenset(CONSTANTS),
}


class Node:
    """Base class of all syntax-tree nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_term(self)


class Const(Node):
    """A named constant such as ``e``, ``d`` or ``w``."""

    __slots__ = ("name", "_hash")

    def __init__(self, name: str) -> None:
        self.name = name
        self._hash = hash((0, name))

    def __repr__(self) -> str:
        return f"Const({self.name!r})"

    def __eq__(self, other: object) -> bool:
        return self is other or (type(other) is Const and other.name == self.name)

    def __hash__(self) -> int:
        return self._hash


class Var(Node):
    """A pattern variable; never appears in a ground term."""

    __slots__ = ("name", "_hash")

    def __init__(self, name: str) -> None:
        self.name = name
        self._hash = hash((1, name))

    def __repr__(self) -> str:
        return f"Var({self.name!r})"

    def __eq__(self, other: object) -> bool:
        return self is other or (type(other) is Var and other.name == self.name)

    def __hash__(self) -> int:
        return self._hash


class _Binary(Node):
    __slots__ = ("left", "right", "_hash")

    _tag = -1

    def __init__(self, left: Node, right: Node) -> None:
        self.left = left
        self.right = right
        self._hash = hash((self._tag, left._hash, right._hash))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(other) is not type(self) or other._hash != self._hash:  # type: ignore[attr-defined]
            return False
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is not type(b):
                return False
            if isinstance(a, _Binary):
                if a._hash != b._hash:
                    return False
                stack.append((a.right, b.right))
                stack.append((a.left, b.left))
            elif a.name != b.name:  # type: ignore[attr-defined]
                return False
        return True

    def __hash__(self) -> int:
        return self._hash


class Plus(_Binary):
    """The sum ``left + right``."""

    __slots__ = ()
    _tag = 2


class App(_Binary):
    """The application ``left @ right``."""

    __slots__ = ()
    _tag = 3


#: Aliases used in signatures: a Term is ground, a Pattern may contain Vars.
Term = Node
Pattern = Node

#: A path from the root: each step descends into the "L"eft or "R"ight child.
Position = tuple[str, ...]
ROOT: Position = ()

E = Const("e")
D = Const("d")
W = Const("w")


class ParseError(ValueError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class PositionError(ValueError):
    pass


_TOKEN = re.compile(r"[ \t]*([A-Za-z][A-Za-z0-9']*|[()+@])")
_VAR_NAME = re.compile(r"[a-z][0-9]*'*\Z")


class _Parser:
    """Hand-rolled recursive descent over the token stream.

    Grammar (application binds tighter than sum):

        sum  := app ('+' app)*        right associative
        app  := atom ('@' atom)*      left associative
        atom := name | '(' sum ')'
    """

    def __init__(self, text: str, allow_vars: bool) -> None:
        self.text = text
        self.allow_vars = allow_vars
        self.pos = 0
        self.tokens: list[tuple[str, int]] = []
        i = 0
        while i < len(text):
            m = _TOKEN.match(text, i)
            if m is None:
                if text[i:].strip() == "":
                    break
                raise ParseError(f"unexpected character {text[i:].lstrip()[0]!r}", i)
            self.tokens.append((m.group(1), m.start(1)))
            i = m.end()

    def _peek(self) -> Optional[str]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def _next(self) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise ParseError("unexpected end of input", len(self.text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self._sum()
        if self.pos < len(self.tokens):
            tok, off = self.tokens[self.pos]
            raise ParseError(f"trailing input {tok!r}", off)
        return node

    def _sum(self) -> Node:
        parts = [self._app()]
        while self._peek() == "+":
            self._next()
            parts.append(self._app())
        node = parts[-1]
        for part in reversed(parts[:-1]):
            node = Plus(part, node)
        return node

    def _app(self) -> Node:
        node = self._atom()
        while self._peek() == "@":
            self._next()
            node = App(node, self._atom())
        return node

    def _atom(self) -> Node:
        tok, off = self._next()
        if tok == "(":
            node = self._sum()
            closer, coff = self._next()
            if closer != ")":
                raise ParseError(f"expected ')', found {closer!r}", coff)
            return node
        if tok in ("+", "@", ")"):
            raise ParseError(f"expected a term, found {tok!r}", off)
        if tok in CONSTANTS:
            return Const(tok)
        if self.allow_vars and _VAR_NAME.match(tok):
            return Var(tok)
        if self.allow_vars:
            raise ParseError(f"bad name {tok!r}", off)
        raise ParseError(
            f"unknown constant {tok!r} (known: {', '.join(CONSTANTS)})", off
        )


def parse_term(text: str) -> Term:
    """Parse a ground term; raises ParseError on variables or junk."""
    return _Parser(text, allow_vars=False).parse()


def parse_pattern(text: str) -> Pattern:
    """Parse a pattern: like a term, but lowercase names that are not
    constants become variables."""
    return _Parser(text, allow_vars=True).parse()


def print_term(t: Node) -> str:
    """Render with the minimum parentheses that survive a round trip.

    Sums drop parentheses on the right (they associate right); nested
    applications keep them everywhere except a bare leftmost atom.
    """
    out: list[str] = []
    stack: list[Union[Node, str]] = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, Plus):
            stack.append(item.right)
            stack.append(" + ")
            if isinstance(item.left, Plus):
                stack.append(")")
                stack.append(item.left)
                stack.append("(")
            else:
                stack.append(item.left)
        elif isinstance(item, App):
            if isinstance(item.right, _Binary):
                stack.append(")")
                stack.append(item.right)
                stack.append("(")
            else:
                stack.append(item.right)
            stack.append(" @ ")
            if isinstance(item.left, _Binary):
                stack.append(")")
                stack.append(item.left)
                stack.append("(")
            else:
                stack.append(item.left)
        else:
            out.append(item.name)  # type: ignore[union-attr]
    return "".join(out)


def size(t: Node) -> int:
    """Number of nodes (constants, variables and operators)."""
    n = 0
    stack = [t]
    while stack:
        sub = stack.pop()
        n += 1
        if isinstance(sub, _Binary):
            stack.append(sub.left)
            stack.append(sub.right)
    return n


def shared_size(t: Node, memo: Optional[dict[Node, int]] = None) -> int:
    """Same value as :func:`size`, but memoized over equal subterms.

    Terms produced with heavy structure sharing (the expression sequence
    squares in size per step) can have astronomically many tree nodes yet
    few distinct subterms; this walks each distinct subterm once.  Passing
    the same ``memo`` dict across calls makes repeated measurements of
    closely related terms cost only the nodes not seen before.
    """
    sizes: dict[Node, int] = {} if memo is None else memo
    stack: list[Node] = [t]
    while stack:
        sub = stack[-1]
        if sub in sizes:
            stack.pop()
            continue
        if isinstance(sub, _Binary):
            left_size = sizes.get(sub.left)
            right_size = sizes.get(sub.right)
            if left_size is not None and right_size is not None:
                sizes[sub] = 1 + left_size + right_size
                stack.pop()
            else:
                if right_size is None:
                    stack.append(sub.right)
                if left_size is None:
                    stack.append(sub.left)
        else:
            sizes[sub] = 1
            stack.pop()
    return sizes[t]


def d_count(t: Node) -> int:
    """How many times the constant d occurs."""
    n = 0
    stack = [t]
    while stack:
        sub = stack.pop()
        if isinstance(sub, _Binary):
            stack.append(sub.left)
            stack.append(sub.right)
        elif isinstance(sub, Const) and sub.name == "d":
            n += 1
    return n


def occurs_e(t: Node) -> bool:
    """True iff the constant e occurs anywhere in t."""
    stack = [t]
    while stack:
        sub = stack.pop()
        if isinstance(sub, _Binary):
            stack.append(sub.left)
            stack.append(sub.right)
        elif isinstance(sub, Const) and sub.name == "e":
            return True
    return False


def subterm_at(t: Node, pos: Position) -> Node:
    sub = t
    for i, step in enumerate(pos):
        if not isinstance(sub, _Binary):
            raise PositionError(f"no child at {''.join(pos[:i + 1])!r} in {t}")
        if step == "L":
            sub = sub.left
        elif step == "R":
            sub = sub.right
        else:
            raise PositionError(f"bad step {step!r} in position")
    return sub


def replace_at(t: Node, pos: Position, replacement: Node) -> Node:
    """The term t with the subterm at pos swapped for replacement.

    Untouched siblings are shared with the input, not copied.
    """
    spine: list[tuple[_Binary, str]] = []
    sub = t
    for i, step in enumerate(pos):
        if not isinstance(sub, _Binary):
            raise PositionError(f"no child at {''.join(pos[:i + 1])!r} in {t}")
        spine.append((sub, step))
        if step == "L":
            sub = sub.left
        elif step == "R":
            sub = sub.right
        else:
            raise PositionError(f"bad step {step!r} in position")
    result = replacement
    for parent, step in reversed(spine):
        if step == "L":
            result = type(parent)(result, parent.right)
        else:
            result = type(parent)(parent.left, result)
    return result


def positions(t: Node) -> Iterator[Position]:
    """All positions of t in pre-order (root first, left before right)."""
    stack: list[tuple[Node, Position]] = [(t, ROOT)]
    while stack:
        sub, pos = stack.pop()
        yield pos
        if isinstance(sub, _Binary):
            stack.append((sub.right, pos + ("R",)))
            stack.append((sub.left, pos + ("L",)))


def variables(p: Node) -> set[str]:
    """Names of all variables occurring in a pattern."""
    out: set[str] = set()
    stack = [p]
    while stack:
        sub = stack.pop()
        if isinstance(sub, _Binary):
            stack.append(sub.left)
            stack.append(sub.right)
        elif isinstance(sub, Var):
            out.add(sub.name)
    return out


def is_ground(p: Node) -> bool:
    stack = [p]
    while stack:
        sub = stack.pop()
        if isinstance(sub, _Binary):
            stack.append(sub.left)
            stack.append(sub.right)
        elif isinstance(sub, Var):
            return False
    return True


def in_fragment(t: Node, fragment: str) -> bool:
    """True iff t is ground and only uses the fragment's constants."""
    allowed = FRAGMENTS[fragment]
    stack = [t]
    while stack:
        sub = stack.pop()
        if isinstance(sub, _Binary):
            stack.append(sub.left)
            stack.append(sub.right)
        elif isinstance(sub, Var) or sub.name not in allowed:  # type: ignore[union-attr]
            return False
    return True


@functools.lru_cache(maxsize=None)
def _term_layer(fragment: str, n: int) -> tuple[Term, ...]:
    if n <= 0:
        return ()
    if n == 1:
        return tuple(Const(c) for c in sorted(FRAGMENTS[fragment]))
    out: list[Term] = []
    for k in range(1, n - 1):
        for left in _term_layer(fragment, k):
            for right in _term_layer(fragment, n - 1 - k):
                out.append(Plus(left, right))
                out.append(App(left, right))
    out.sort(key=print_term)
    return tuple(out)


def enumerate_terms(fragment: str, max_size: int) -> Iterator[Term]:
    """Every ground term of the fragment with size <= max_size, smallest
    first; ties in size are ordered by printed form."""
    if fragment not in FRAGMENTS:
        raise ValueError(f"unknown fragment {fragment!r}")
    for n in range(1, max_size + 1):
        yield from _term_layer(fragment, n)
