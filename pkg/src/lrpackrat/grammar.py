"""Clause algebra and rule tables.

A grammar is a table of named rules, each bound to a clause tree built from
four principal operators (``Seq``, ``First``, ``OneOrMore``,
``NotFollowedBy``) plus terminals, ``Epsilon`` and ``RuleRef``.  The derived
operators ``Optional``, ``ZeroOrMore`` and ``FollowedBy`` exist only as
construction conveniences; :func:`desugar` rewrites them away and
:func:`resolve_refs` always desugars before binding references.

Clause values are immutable and compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Iterable, Iterator, Mapping

__all__ = [
    "SEQ", "FIRST", "ONE_OR_MORE", "NOT_FOLLOWED_BY", "CHAR", "CHAR_RANGE",
    "LITERAL", "EPSILON", "RULE_REF", "SYNTAX_ERROR", "RECOVERED_ROOT",
    "Clause", "Seq", "First", "OneOrMore", "NotFollowedBy", "Terminal",
    "Char", "CharRange", "Literal", "Epsilon", "RuleRef", "Optional",
    "ZeroOrMore", "FollowedBy", "SyntaxErrorMarker", "RecoveredRoot",
    "SYNTAX_ERROR_CLAUSE", "Grammar", "GrammarError", "UnknownRule",
    "MissingStartRule", "desugar", "resolve_refs", "iter_clauses",
    "nullable_rules", "left_recursive_rules", "lookahead_cycle_rules",
]

# Integer kind tags shared by both engine backends.
SEQ = 0
FIRST = 1
ONE_OR_MORE = 2
NOT_FOLLOWED_BY = 3
CHAR = 4
CHAR_RANGE = 5
LITERAL = 6
EPSILON = 7
RULE_REF = 8
SYNTAX_ERROR = 9
RECOVERED_ROOT = 10
OPTIONAL = 11
ZERO_OR_MORE = 12
FOLLOWED_BY = 13


class GrammarError(Exception):
    """Base class for grammar construction failures."""


class UnknownRule(GrammarError):
    def __init__(self, name: str, referencing: str, origin: str | None = None, line: int = 0):
        where = f"{origin}:{line}: " if origin else ""
        super().__init__(f"{where}rule {referencing!r} references unknown rule {name!r}")
        self.name = name
        self.referencing = referencing
        self.origin = origin
        self.line = line


class MissingStartRule(GrammarError):
    def __init__(self, name: str | None):
        super().__init__(f"start rule {name!r} is not defined")
        self.name = name


@dataclass(frozen=True)
class Clause:
    kind: ClassVar[int] = -1

    def subclauses(self) -> tuple[Clause, ...]:
        return ()


def _flatten(cls, children: Iterable[Clause]) -> tuple[Clause, ...]:
    out: list[Clause] = []
    for c in children:
        if type(c) is cls:
            out.extend(c.children)
        else:
            out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class Seq(Clause):
    children: tuple[Clause, ...]
    kind: ClassVar[int] = SEQ

    def __init__(self, *children: Clause):
        if len(children) == 1 and isinstance(children[0], (list, tuple)):
            children = tuple(children[0])
        flat = _flatten(Seq, children)
        if len(flat) < 2:
            raise ValueError("Seq needs at least two subclauses")
        object.__setattr__(self, "children", flat)

    def subclauses(self):
        return self.children


@dataclass(frozen=True)
class First(Clause):
    children: tuple[Clause, ...]
    kind: ClassVar[int] = FIRST

    def __init__(self, *children: Clause):
        if len(children) == 1 and isinstance(children[0], (list, tuple)):
            children = tuple(children[0])
        flat = _flatten(First, children)
        if len(flat) < 2:
            raise ValueError("First needs at least two subclauses")
        object.__setattr__(self, "children", flat)

    def subclauses(self):
        return self.children


@dataclass(frozen=True)
class OneOrMore(Clause):
    child: Clause
    kind: ClassVar[int] = ONE_OR_MORE

    def subclauses(self):
        return (self.child,)


@dataclass(frozen=True)
class NotFollowedBy(Clause):
    child: Clause
    kind: ClassVar[int] = NOT_FOLLOWED_BY

    def subclauses(self):
        return (self.child,)


class Terminal(Clause):
    """Common base of the three terminal kinds."""

    def matches_at(self, text: str, pos: int) -> int:
        """Length matched at ``pos``, or -1."""
        raise NotImplementedError


@dataclass(frozen=True)
class Char(Terminal):
    char: str
    kind: ClassVar[int] = CHAR

    def __post_init__(self):
        if len(self.char) != 1:
            raise ValueError(f"Char takes exactly one character, got {self.char!r}")

    def matches_at(self, text, pos):
        return 1 if pos < len(text) and text[pos] == self.char else -1


@dataclass(frozen=True)
class CharRange(Terminal):
    """A character class: a union of inclusive code-point ranges."""

    ranges: tuple[tuple[str, str], ...]
    kind: ClassVar[int] = CHAR_RANGE

    def __init__(self, *ranges):
        if len(ranges) == 2 and all(isinstance(r, str) and len(r) == 1 for r in ranges):
            ranges = ((ranges[0], ranges[1]),)
        norm = []
        for r in ranges:
            lo, hi = (r, r) if isinstance(r, str) else r
            if len(lo) != 1 or len(hi) != 1 or lo > hi:
                raise ValueError(f"bad character range {lo!r}-{hi!r}")
            norm.append((lo, hi))
        if not norm:
            raise ValueError("empty character class")
        object.__setattr__(self, "ranges", tuple(norm))

    def contains(self, ch: str) -> bool:
        return any(lo <= ch <= hi for lo, hi in self.ranges)

    def matches_at(self, text, pos):
        return 1 if pos < len(text) and self.contains(text[pos]) else -1


@dataclass(frozen=True)
class Literal(Terminal):
    text: str
    kind: ClassVar[int] = LITERAL

    def __post_init__(self):
        if not self.text:
            raise ValueError("empty literal; use Epsilon")

    def matches_at(self, text, pos):
        return len(self.text) if text.startswith(self.text, pos) else -1


@dataclass(frozen=True)
class Epsilon(Clause):
    kind: ClassVar[int] = EPSILON


@dataclass(frozen=True)
class RuleRef(Clause):
    """Reference to a rule; ``index`` is -1 until the grammar is resolved."""

    name: str
    index: int = field(default=-1, compare=False)
    kind: ClassVar[int] = RULE_REF


@dataclass(frozen=True)
class Optional(Clause):
    child: Clause
    kind: ClassVar[int] = OPTIONAL

    def subclauses(self):
        return (self.child,)


@dataclass(frozen=True)
class ZeroOrMore(Clause):
    child: Clause
    kind: ClassVar[int] = ZERO_OR_MORE

    def subclauses(self):
        return (self.child,)


@dataclass(frozen=True)
class FollowedBy(Clause):
    child: Clause
    kind: ClassVar[int] = FOLLOWED_BY

    def subclauses(self):
        return (self.child,)


# Markers used only as the clause of nodes synthesised by recovery.
@dataclass(frozen=True)
class SyntaxErrorMarker(Clause):
    kind: ClassVar[int] = SYNTAX_ERROR


@dataclass(frozen=True)
class RecoveredRoot(Clause):
    """Clause of the root node when the parse needed top-level resynchronisation."""

    name: str
    kind: ClassVar[int] = RECOVERED_ROOT


SYNTAX_ERROR_CLAUSE = SyntaxErrorMarker()


def desugar(clause: Clause) -> Clause:
    """Rewrite derived operators into principal ones.

    ``e?`` becomes ``e / ε``, ``e*`` becomes ``e+ / ε`` and ``&e`` becomes
    ``!!e``.  Idempotent.
    """
    k = clause.kind
    if k == OPTIONAL:
        return First(desugar(clause.child), Epsilon())
    if k == ZERO_OR_MORE:
        return First(OneOrMore(desugar(clause.child)), Epsilon())
    if k == FOLLOWED_BY:
        return NotFollowedBy(NotFollowedBy(desugar(clause.child)))
    if k == SEQ:
        return Seq(*[desugar(c) for c in clause.children])
    if k == FIRST:
        return First(*[desugar(c) for c in clause.children])
    if k == ONE_OR_MORE:
        return OneOrMore(desugar(clause.child))
    if k == NOT_FOLLOWED_BY:
        return NotFollowedBy(desugar(clause.child))
    return clause


def iter_clauses(clause: Clause) -> Iterator[Clause]:
    """Pre-order walk over a clause tree (does not follow rule references)."""
    stack = [clause]
    while stack:
        c = stack.pop()
        yield c
        stack.extend(reversed(c.subclauses()))


class Grammar:
    """An ordered rule table with a designated start rule.

    ``rules`` maps names to clause trees.  The first rule is the start rule
    unless ``start`` says otherwise.  A grammar fresh from construction is
    unresolved; :func:`resolve_refs` returns the resolved twin the engine
    needs.
    """

    def __init__(self, rules: Mapping[str, Clause] | Iterable[tuple[str, Clause]],
                 start: str | None = None, *, locations: Mapping[str, tuple[int, int]] | None = None,
                 origin: str = "<grammar>"):
        items = list(rules.items()) if isinstance(rules, Mapping) else list(rules)
        self.rules: dict[str, Clause] = {}
        for name, body in items:
            if name in self.rules:
                raise GrammarError(f"duplicate rule {name!r}")
            self.rules[name] = body
        self.start = start if start is not None else (items[0][0] if items else None)
        self.names: tuple[str, ...] = tuple(self.rules)
        self.index = {name: i for i, name in enumerate(self.names)}
        self.bodies: tuple[Clause, ...] = tuple(self.rules.values())
        self.locations = dict(locations or {})
        self.origin = origin
        self.resolved = False
        self.start_ref: RuleRef | None = None

    def __repr__(self):
        return f"Grammar({len(self.rules)} rules, start={self.start!r})"

    def __eq__(self, other):
        if not isinstance(other, Grammar):
            return NotImplemented
        return self.start == other.start and list(self.rules.items()) == list(other.rules.items())

    def __hash__(self):
        return hash((self.start, self.names))

    @property
    def size(self) -> int:
        """Total clause count over all rule bodies, |G| in complexity bounds."""
        return sum(1 for body in self.bodies for _ in iter_clauses(body))

    def rule_index(self, rule: str | int) -> int:
        if isinstance(rule, int):
            return rule
        try:
            return self.index[rule]
        except KeyError:
            raise UnknownRule(rule, "<caller>") from None

    def resolve(self) -> Grammar:
        return resolve_refs(self)


def _bind(clause: Clause, index: Mapping[str, int], owner: str) -> Clause:
    k = clause.kind
    if k == RULE_REF:
        try:
            return RuleRef(clause.name, index[clause.name])
        except KeyError:
            raise UnknownRule(clause.name, owner) from None
    if k == SEQ:
        return Seq(*[_bind(c, index, owner) for c in clause.children])
    if k == FIRST:
        return First(*[_bind(c, index, owner) for c in clause.children])
    if k == ONE_OR_MORE:
        return OneOrMore(_bind(clause.child, index, owner))
    if k == NOT_FOLLOWED_BY:
        return NotFollowedBy(_bind(clause.child, index, owner))
    return clause


def resolve_refs(grammar: Grammar) -> Grammar:
    """Desugar every rule body and bind each ``RuleRef`` to its rule index.

    Self- and mutually-recursive references are fine.  Raises
    :class:`UnknownRule` for dangling references and :class:`MissingStartRule`
    when the start rule is absent.
    """
    if grammar.start is None or grammar.start not in grammar.rules:
        raise MissingStartRule(grammar.start)
    bound = []
    for name, body in grammar.rules.items():
        try:
            bound.append((name, _bind(desugar(body), grammar.index, name)))
        except UnknownRule as e:
            if name not in grammar.locations:
                raise
            raise UnknownRule(e.name, name, grammar.origin, grammar.locations[name][0]) from None
    out = Grammar(bound, grammar.start, locations=grammar.locations, origin=grammar.origin)
    out.resolved = True
    out.start_ref = RuleRef(grammar.start, out.index[grammar.start])
    return out


def nullable_rules(grammar: Grammar) -> set[str]:
    """Names of rules that can succeed without consuming input."""
    g = grammar if grammar.resolved else resolve_refs(grammar)
    nullable: set[int] = set()

    def can_be_empty(c: Clause) -> bool:
        k = c.kind
        if k in (EPSILON, NOT_FOLLOWED_BY):
            return True
        if k in (CHAR, CHAR_RANGE, LITERAL):
            return False
        if k == SEQ:
            return all(can_be_empty(x) for x in c.children)
        if k == FIRST:
            return any(can_be_empty(x) for x in c.children)
        if k == ONE_OR_MORE:
            return can_be_empty(c.child)
        if k == RULE_REF:
            return c.index in nullable
        raise TypeError(c)

    changed = True
    while changed:
        changed = False
        for i, body in enumerate(g.bodies):
            if i not in nullable and can_be_empty(body):
                nullable.add(i)
                changed = True
    return {g.names[i] for i in nullable}


def _left_calls(c: Clause, nullable: set[int], out: set[int], lookahead: bool = True) -> None:
    """Rule indices that ``c`` may invoke before consuming any input."""
    k = c.kind
    if k == RULE_REF:
        out.add(c.index)
    elif k == SEQ:
        for x in c.children:
            _left_calls(x, nullable, out, lookahead)
            if not _nullable_clause(x, nullable):
                break
    elif k == FIRST:
        for x in c.children:
            _left_calls(x, nullable, out, lookahead)
    elif k == ONE_OR_MORE or (k == NOT_FOLLOWED_BY and lookahead):
        _left_calls(c.child, nullable, out, lookahead)


def _nullable_clause(c: Clause, nullable: set[int]) -> bool:
    k = c.kind
    if k in (EPSILON, NOT_FOLLOWED_BY):
        return True
    if k in (CHAR, CHAR_RANGE, LITERAL):
        return False
    if k == SEQ:
        return all(_nullable_clause(x, nullable) for x in c.children)
    if k == FIRST:
        return any(_nullable_clause(x, nullable) for x in c.children)
    if k == ONE_OR_MORE:
        return _nullable_clause(c.child, nullable)
    return c.index in nullable


def left_recursive_rules(grammar: Grammar, through_lookahead: bool = True) -> set[str]:
    """Names of rules that can reach themselves without consuming input.

    By default lookahead bodies count as left calls, so a rule that re-enters
    itself through ``!e`` at the same position is reported too.  Pass
    ``through_lookahead=False`` to only follow consuming paths.
    """
    g = grammar if grammar.resolved else resolve_refs(grammar)
    nullable = {g.index[name] for name in nullable_rules(g)}
    edges = []
    for body in g.bodies:
        out: set[int] = set()
        _left_calls(body, nullable, out, through_lookahead)
        edges.append(out)
    result = set()
    for i in range(len(g.bodies)):
        seen: set[int] = set()
        stack = list(edges[i])
        while stack:
            j = stack.pop()
            if j == i:
                result.add(g.names[i])
                break
            if j not in seen:
                seen.add(j)
                stack.extend(edges[j])
    return result


def _left_edges(c: Clause, nullable: set[int], under_not: bool, out: set[tuple[int, bool]]) -> None:
    k = c.kind
    if k == RULE_REF:
        out.add((c.index, under_not))
    elif k == SEQ:
        for x in c.children:
            _left_edges(x, nullable, under_not, out)
            if not _nullable_clause(x, nullable):
                break
    elif k == FIRST:
        for x in c.children:
            _left_edges(x, nullable, under_not, out)
    elif k == ONE_OR_MORE:
        _left_edges(c.child, nullable, under_not, out)
    elif k == NOT_FOLLOWED_BY:
        _left_edges(c.child, nullable, True, out)


def lookahead_cycle_rules(grammar: Grammar) -> set[str]:
    """Rules that can re-enter themselves at the same position through a ``!e``.

    Such cycles make a rule's result depend negatively on itself (``A <- !A``
    is the extreme case); seed growing has no well-defined fixed point there.
    """
    g = grammar if grammar.resolved else resolve_refs(grammar)
    nullable = {g.index[name] for name in nullable_rules(g)}
    edges = []
    for body in g.bodies:
        out: set[tuple[int, bool]] = set()
        _left_edges(body, nullable, False, out)
        edges.append(out)
    result = set()
    for i in range(len(g.bodies)):
        seen: set[tuple[int, bool]] = set()
        stack = [(j, la) for j, la in edges[i]]
        while stack:
            j, la = stack.pop()
            if j == i and la:
                result.add(g.names[i])
                break
            if (j, la) not in seen:
                seen.add((j, la))
                stack.extend((t, la or tla) for t, tla in edges[j])
    return result
