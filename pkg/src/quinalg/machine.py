"""A tiny register machine that realizes the calculus as running code.

A program is a finite instruction sequence acting on a single string
register.  ``Lit(s)`` appends a fixed string, ``Quote`` replaces the
register with its quoted (source-code) form, and ``Diag`` replaces the
register with the quoted form followed by the original — the classic
self-reference move.  Programs serialize to `;`-separated token strings;
``kleene_apply`` runs one program on another's source text and reads the
register back as a program, which interprets application of terms.

The language is deliberately total: every instruction is a total string
function, so the only failure mode is reading back a register that is not
valid program text (``MalformedProgram``), and that never happens on the
image of :func:`interp_term`.

The design invariant making the algebra work syntactically is that the
serialized form is a monoid homomorphism: ``encode(p ++ q)`` is the
separator-join of ``encode(p)`` and ``encode(q)``, and quoting splits into
per-token literals, so sums become concatenation and the write constant
distributes over sums after canonicalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .terms import App, Const, Plus, Term, enumerate_terms, print_term, variables
from .rewriting import (
    DEFAULT_FUEL,
    FuelExhausted,
    Rule,
    SYSTEMS,
    normalize,
    substitute,
)


class MalformedProgram(ValueError):
    """Raised when a register string does not parse back into a program."""


@dataclass(frozen=True)
class Lit:
    """Append a fixed string to the register."""

    payload: str

    def __str__(self) -> str:
        return f"Lit({self.payload!r})"


@dataclass(frozen=True)
class Quote:
    """Replace the register with its quoted source form."""

    def __str__(self) -> str:
        return "Quote"


@dataclass(frozen=True)
class Diag:
    """Replace the register r with quote(r) followed by r itself."""

    def __str__(self) -> str:
        return "Diag"


Instruction = Lit | Quote | Diag
Program = tuple["Instruction", ...]

_QUOTE = Quote()
_DIAG = Diag()


def join2(a: str, b: str) -> str:
    """Separator-join: identity on empty strings, else a ';' between."""
    if not a:
        return b
    if not b:
        return a
    return a + ";" + b


def _quote_chunk(chunk: str) -> str:
    return '"' + chunk.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _unquote_chunk(token: str) -> str:
    if len(token) < 2 or token[0] != '"' or token[-1] != '"':
        raise MalformedProgram(f"bad token {token!r}")
    out = []
    i = 1
    end = len(token) - 1
    while i < end:
        c = token[i]
        if c == "\\":
            i += 1
            if i >= end or token[i] not in ('\\', '"'):
                raise MalformedProgram(f"bad escape in {token!r}")
            out.append(token[i])
        elif c == '"':
            raise MalformedProgram(f"unescaped quote in {token!r}")
        else:
            out.append(c)
        i += 1
    return "".join(out)


def quote_text(s: str) -> str:
    """The quoted source form of a register string.

    Splits on the separator and quotes each chunk, so that quoting a
    serialized program yields the serialized sequence of literals that
    rebuilds it — quoting commutes with concatenation chunk by chunk.
    """
    if s == "":
        return ""
    return ";".join(_quote_chunk(chunk) for chunk in s.split(";"))


def run(program: Sequence[Instruction], register: str = "") -> str:
    """Execute the program on the register; total."""
    reg = register
    for ins in program:
        if isinstance(ins, Lit):
            reg = join2(reg, ins.payload)
        elif isinstance(ins, Quote):
            reg = quote_text(reg)
        elif isinstance(ins, Diag):
            reg = join2(quote_text(reg), reg)
        else:
            raise TypeError(f"not an instruction: {ins!r}")
    return reg


def canonicalize(program: Iterable[Instruction]) -> Program:
    """Merge adjacent literals and drop empty ones.

    Canonical programs are the image of :func:`decode`; two programs that
    canonicalize identically are indistinguishable by :func:`run`.
    """
    out: list[Instruction] = []
    for ins in program:
        if isinstance(ins, Lit):
            if ins.payload == "":
                continue
            if out and isinstance(out[-1], Lit):
                out[-1] = Lit(join2(out[-1].payload, ins.payload))
                continue
        out.append(ins)
    return tuple(out)


def encode(program: Sequence[Instruction]) -> str:
    """Serialize to program text: d | w | quoted-literal tokens, ';'-joined."""
    parts: list[str] = []
    for ins in program:
        if isinstance(ins, Diag):
            parts.append("d")
        elif isinstance(ins, Quote):
            parts.append("w")
        elif isinstance(ins, Lit):
            if ins.payload == "":
                continue
            parts.append(quote_text(ins.payload))
        else:
            raise TypeError(f"not an instruction: {ins!r}")
    return ";".join(parts)


def decode(text: str) -> Program:
    """Parse program text back into a canonical program.

    Raises :class:`MalformedProgram` on any token that is not ``d``, ``w``
    or a well-quoted literal.  Inverse of :func:`encode` up to
    canonicalization: decode(encode(p)) == canonicalize(p).
    """
    if text == "":
        return ()
    instructions: list[Instruction] = []
    for token in text.split(";"):
        if token == "d":
            instructions.append(_DIAG)
        elif token == "w":
            instructions.append(_QUOTE)
        elif token.startswith('"'):
            instructions.append(Lit(_unquote_chunk(token)))
        else:
            raise MalformedProgram(f"bad token {token!r}")
    return canonicalize(instructions)


def kleene_apply(p: Sequence[Instruction], q: Sequence[Instruction]) -> Program:
    """Run p on the source text of q and read the register back as a program.

    Raises :class:`MalformedProgram` if the final register is not program
    text; this never happens when p and q are interpretations of terms.
    """
    return decode(run(p, encode(q)))


def interp_term(t: Term) -> Program:
    """Interpret a ground {e,d,w}-term as a canonical program.

    e is the empty program, d runs Diag, w runs Quote, a sum concatenates,
    and an application Kleene-applies the left program to the right one.
    """
    if isinstance(t, Const):
        if t.name == "e":
            return ()
        if t.name == "d":
            return (_DIAG,)
        if t.name == "w":
            return (_QUOTE,)
        raise ValueError(f"constant {t.name} has no machine interpretation")
    if isinstance(t, Plus):
        return canonicalize(interp_term(t.left) + interp_term(t.right))
    if isinstance(t, App):
        return kleene_apply(interp_term(t.left), interp_term(t.right))
    raise ValueError(f"cannot interpret non-ground term {t!r}")


#: One probe per instruction kind plus the empty register and a two-token mix.
STANDARD_PROBES: tuple[str, ...] = (
    "",
    encode((_DIAG,)),
    encode((_QUOTE,)),
    encode((Lit("x"),)),
    encode((_DIAG, _QUOTE)),
)


def behaviorally_equal(
    p: Sequence[Instruction],
    q: Sequence[Instruction],
    probes: Sequence[str] = STANDARD_PROBES,
) -> bool:
    """True iff p and q produce identical registers on every probe input.

    An observational approximation of extensional equality; canonical
    programs that differ syntactically can still be behaviorally equal.
    """
    return all(run(p, s) == run(q, s) for s in probes)


@dataclass(frozen=True)
class EquationReport:
    fragment: str
    rule_instances: int
    consistency_checks: int
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_equations(
    fragment: str, max_size: int = 4, fuel: int = DEFAULT_FUEL
) -> EquationReport:
    """Sweep the fragment's laws against the machine semantics.

    Two families are checked over all ground fragment terms of size <=
    max_size:
      * every rewrite rule, instantiated at all combinations of such terms,
        must relate behaviorally equal programs;
      * interp(t) must be behaviorally equal to interp(nf(t)).

    Returns a report; a violation entry names the rule or term that broke.
    """
    if fragment not in SYSTEMS:
        raise ValueError(f"unknown fragment {fragment!r}")
    if fragment == "full":
        raise ValueError("the extended constants have no machine interpretation")
    system = SYSTEMS[fragment]
    pool = list(enumerate_terms(fragment, max_size))
    violations: list[str] = []
    rule_instances = 0
    for rule in system.rules:
        names = sorted(_pattern_variables(rule))
        for combo in _assignments(names, pool):
            lhs = substitute(rule.lhs, combo)
            rhs = substitute(rule.rhs, combo)
            rule_instances += 1
            if not behaviorally_equal(interp_term(lhs), interp_term(rhs)):
                binding = ", ".join(f"{n} := {print_term(combo[n])}" for n in names)
                violations.append(f"rule {rule.id} at [{binding}]")
    consistency = 0
    for t in pool:
        consistency += 1
        outcome = normalize(system, t, fuel, keep_trace=False)
        if isinstance(outcome, FuelExhausted):
            violations.append(f"fuel exhausted normalizing {print_term(t)}")
            continue
        if not behaviorally_equal(interp_term(t), interp_term(outcome.nf)):
            violations.append(f"interp({print_term(t)}) != interp(nf)")
    return EquationReport(fragment, rule_instances, consistency, tuple(violations))


def _pattern_variables(rule: Rule) -> set[str]:
    return variables(rule.lhs) | variables(rule.rhs)


def _assignments(names: list[str], pool: list[Term]):
    if not names:
        yield {}
        return
    first, rest = names[0], names[1:]
    for t in pool:
        for tail in _assignments(rest, pool):
            yield {first: t, **tail}
