"""Brute-force reference interpreter and random grammar generation.

The oracle shares no code with the engines beyond the clause classes.  It
interprets clauses directly, without a memo table, so it is exponential in
the worst case and only meant for short inputs.  Left recursion is handled
by bounded unrolling at each call: a rule call that finds its own
(rule, pos) already active gets the result of the previous unrolling round
of that active call (a mismatch in the first round), and the active call
repeats its body until the result stops growing.
"""

from __future__ import annotations

import random
from typing import Iterator

from .grammar import (
    CHAR, CHAR_RANGE, EPSILON, FIRST, LITERAL, NOT_FOLLOWED_BY, ONE_OR_MORE,
    RECOVERED_ROOT, RULE_REF, SEQ, SYNTAX_ERROR, Char, CharRange, Clause,
    Epsilon, First, FollowedBy, Grammar, Literal, NotFollowedBy, OneOrMore,
    Optional, RuleRef, Seq, ZeroOrMore, left_recursive_rules, resolve_refs,
)

__all__ = ["BudgetExceeded", "OracleMatch", "OracleResult", "oracle_match", "shape",
           "random_clause", "random_grammar", "random_non_lr_grammar", "random_lr_grammar",
           "all_strings"]


class BudgetExceeded(Exception):
    """The oracle gave up: recursion depth, step count or round limit hit."""


class OracleMatch:
    __slots__ = ("clause", "pos", "len", "children", "is_complete")

    def __init__(self, clause, pos, length, children=()):
        self.clause = clause
        self.pos = pos
        self.len = length
        self.children = children
        self.is_complete = True

    def __repr__(self):
        return f"OracleMatch({self.clause!r}, {self.pos}, {self.len})"


NO_MATCH = OracleMatch(None, -1, -1)


class OracleResult:
    """Outcome of :func:`oracle_match` plus what the run looked at."""

    __slots__ = ("match", "max_inspected", "rounds", "left_recursive")

    def __init__(self, match, max_inspected, rounds, left_recursive):
        self.match = match
        self.max_inspected = max_inspected
        self.rounds = rounds
        self.left_recursive = left_recursive


class _Interp:
    def __init__(self, grammar, text, depth_budget, step_budget):
        self.g = grammar
        self.text = text
        self.n = len(text)
        self.depth_budget = depth_budget
        self.step_budget = step_budget
        self.steps = 0
        self.rounds = 0
        self.max_inspected = -1
        self.seeds: dict[tuple[int, int], OracleMatch] = {}
        self.reentered: set[tuple[int, int]] = set()
        self.left_recursive = False

    def saw(self, last):
        if last > self.max_inspected:
            self.max_inspected = min(last, self.n)

    def rule(self, idx, pos, depth):
        key = (idx, pos)
        seed = self.seeds.get(key)
        if seed is not None:
            self.reentered.add(key)
            self.left_recursive = True
            return seed
        if depth > self.depth_budget:
            raise BudgetExceeded(f"depth {depth}")
        self.seeds[key] = NO_MATCH
        rounds = 0
        try:
            while True:
                self.rounds += 1
                m = self.eval(self.g.bodies[idx], pos, depth + 1)
                best = self.seeds[key]
                if m.len <= best.len:
                    m = best
                    break
                self.seeds[key] = m
                if key not in self.reentered:
                    break
                rounds += 1
                if rounds > self.n + 1:
                    raise BudgetExceeded(f"no fixed point for rule {self.g.names[idx]} at {pos}")
        finally:
            del self.seeds[key]
            self.reentered.discard(key)
        return m

    def eval(self, c, pos, depth):
        self.steps += 1
        if self.steps > self.step_budget:
            raise BudgetExceeded(f"{self.steps} steps")
        k = c.kind
        text = self.text
        if k == CHAR:
            self.saw(pos)
            return OracleMatch(c, pos, 1) if pos < self.n and text[pos] == c.char else NO_MATCH
        if k == CHAR_RANGE:
            self.saw(pos)
            return OracleMatch(c, pos, 1) if pos < self.n and c.contains(text[pos]) else NO_MATCH
        if k == LITERAL:
            self.saw(pos + len(c.text) - 1)
            return OracleMatch(c, pos, len(c.text)) if text[pos:pos + len(c.text)] == c.text else NO_MATCH
        if k == EPSILON:
            return OracleMatch(c, pos, 0)
        if k == RULE_REF:
            m = self.rule(c.index, pos, depth)
            return NO_MATCH if m.len < 0 else OracleMatch(c, pos, m.len, (m,))
        if k == SEQ:
            kids = []
            p = pos
            for child in c.children:
                m = self.eval(child, p, depth + 1)
                if m.len < 0:
                    return NO_MATCH
                kids.append(m)
                p += m.len
            return OracleMatch(c, pos, p - pos, tuple(kids))
        if k == FIRST:
            for child in c.children:
                m = self.eval(child, pos, depth + 1)
                if m.len >= 0:
                    return OracleMatch(c, pos, m.len, (m,))
            return NO_MATCH
        if k == ONE_OR_MORE:
            kids = []
            p = pos
            while True:
                m = self.eval(c.child, p, depth + 1)
                if m.len < 0:
                    break
                kids.append(m)
                p += m.len
                if m.len == 0:
                    break
            return OracleMatch(c, pos, p - pos, tuple(kids)) if kids else NO_MATCH
        if k == NOT_FOLLOWED_BY:
            m = self.eval(c.child, pos, depth + 1)
            return OracleMatch(c, pos, 0) if m.len < 0 else NO_MATCH
        raise TypeError(f"oracle cannot interpret {c!r}")


def oracle_match(grammar: Grammar, text: str, depth_budget: int = 400,
                 step_budget: int = 2_000_000, rule: str | None = None,
                 detail: bool = False):
    """Interpret ``grammar`` on ``text`` from position 0.

    Returns the root match (a rule-reference wrapper around the rule's
    match, like the engines produce) or a mismatch with ``len == -1``.
    With ``detail=True`` an :class:`OracleResult` is returned instead.
    Raises :class:`BudgetExceeded` when a budget runs out.
    """
    if depth_budget < 1:
        raise ValueError("depth_budget must be at least 1")
    g = grammar if grammar.resolved else resolve_refs(grammar)
    ref = g.start_ref if rule is None else RuleRef(rule, g.rule_index(rule))
    it = _Interp(g, text, depth_budget, step_budget)
    root = it.eval(ref, 0, 0)
    if detail:
        return OracleResult(root, it.max_inspected, it.rounds, it.left_recursive)
    return root


def _label(clause) -> str:
    if clause is None:
        return "MISMATCH"
    k = clause.kind
    if k == RULE_REF:
        return clause.name
    if k == CHAR:
        return repr(clause.char)
    if k == LITERAL:
        return repr(clause.text)
    if k == SYNTAX_ERROR:
        return "ERROR"
    if k == RECOVERED_ROOT:
        return "ROOT:" + clause.name
    return type(clause).__name__


def shape(m):
    """Backend-neutral nested tuple ``(label, pos, len, children)`` of a match tree."""
    if m.len < 0:
        return ("MISMATCH",)
    out_stack = [[]]
    work = [(m, False)]
    while work:
        node, done = work.pop()
        if done:
            kids = tuple(out_stack.pop())
            out_stack[-1].append((_label(node.clause), node.pos, node.len, kids))
            continue
        out_stack.append([])
        work.append((node, True))
        for child in reversed(node.children):
            work.append((child, False))
    return out_stack[0][0]


# -- random grammars ---------------------------------------------------------

def random_clause(rng: random.Random, names: list[str], depth: int, alphabet: str = "ab",
                  derived: bool = True) -> Clause:
    """A random clause tree over ``alphabet`` referencing ``names``."""
    if depth <= 0:
        r = rng.random()
        if r < 0.45:
            return Char(rng.choice(alphabet))
        if r < 0.8:
            return RuleRef(rng.choice(names))
        if r < 0.9:
            return Literal("".join(rng.choice(alphabet) for _ in range(2)))
        if r < 0.96:
            lo = rng.choice(alphabet)
            return CharRange(lo, max(lo, rng.choice(alphabet)))
        return Epsilon()
    r = rng.random()
    sub = lambda: random_clause(rng, names, depth - 1, alphabet, derived)  # noqa: E731
    if r < 0.3:
        return Seq(*[sub() for _ in range(rng.randint(2, 3))])
    if r < 0.5:
        return First(*[sub() for _ in range(rng.randint(2, 3))])
    if r < 0.58:
        return OneOrMore(sub())
    if r < 0.63:
        return NotFollowedBy(sub())
    if derived and r < 0.7:
        return rng.choice((Optional, ZeroOrMore, FollowedBy))(sub())
    return random_clause(rng, names, 0, alphabet, derived)


def random_grammar(rng: random.Random, max_rules: int = 6, depth: int = 3,
                   alphabet: str = "ab") -> Grammar:
    """A resolved random grammar with 1..max_rules rules."""
    count = rng.randint(1, max_rules)
    names = [f"R{i}" for i in range(count)]
    rules = [(name, random_clause(rng, names, rng.randint(1, depth), alphabet)) for name in names]
    return resolve_refs(Grammar(rules))


def random_non_lr_grammar(rng: random.Random, max_rules: int = 6, depth: int = 3,
                          alphabet: str = "ab", tries: int = 1000) -> Grammar:
    for _ in range(tries):
        g = random_grammar(rng, max_rules, depth, alphabet)
        if not left_recursive_rules(g):
            return g
    raise RuntimeError("could not generate a grammar without left recursion")


def random_lr_grammar(rng: random.Random, max_rules: int = 6, depth: int = 3,
                      alphabet: str = "ab", tries: int = 1000) -> Grammar:
    """A random grammar whose start rule is left-recursive or reaches one that is."""
    for _ in range(tries):
        g = random_grammar(rng, max_rules, depth, alphabet)
        if left_recursive_rules(g):
            return g
    raise RuntimeError("could not generate a left-recursive grammar")


def all_strings(alphabet: str = "ab", max_len: int = 12) -> Iterator[str]:
    """Every string over ``alphabet`` up to ``max_len`` chars, shortest first."""
    level = [""]
    yield ""
    for _ in range(max_len):
        level = [s + ch for s in level for ch in alphabet]
        yield from level

