r"""Textual grammar front end.

Grammar files look like::

    # comment
    Expr <- Expr '+' Term / Term ;
    Term <- [0-9]+ ;

Meta-grammar (whitespace and ``#`` comments allowed between tokens)::

    grammar   = rule+
    rule      = IDENT '<-' choice ';'
    choice    = sequence ('/' sequence)*
    sequence  = suffixed+
    suffixed  = prefixed ('?' / '*' / '+')*
    prefixed  = ('!' / '&') prefixed / primary
    primary   = IDENT / LITERAL / CLASS / '(' choice ')' / '(' ')'
    IDENT     = [A-Za-z_] [A-Za-z0-9_]*
    LITERAL   = "'" (escape / [^'\\])+ "'"
    CLASS     = '[' (escape / [^\]\\])+ ']'
    escape    = '\\' [\\'\]\-nrt]

Prefix operators bind tighter than suffix operators, so ``!a*`` reads as
``(!a)*``.  ``()`` is the empty expression, which always matches without
consuming input.  The first rule is the start rule.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import (
    CHAR, CHAR_RANGE, EPSILON, FIRST, LITERAL, NOT_FOLLOWED_BY, ONE_OR_MORE,
    RULE_REF, SEQ, Char, CharRange, Clause, Epsilon, First, FollowedBy, Grammar,
    GrammarError, Literal, NotFollowedBy, OneOrMore, Optional, RuleRef, Seq,
    ZeroOrMore, desugar,
)

__all__ = ["GrammarSource", "GrammarSyntaxError", "DuplicateRule",
           "parse_grammar_text", "load_grammar", "format_grammar", "format_clause"]

_ESCAPES = {"\\": "\\", "'": "'", "]": "]", "-": "-", "n": "\n", "r": "\r", "t": "\t"}


@dataclass(frozen=True)
class GrammarSource:
    text: str
    origin: str = "<string>"


class GrammarSyntaxError(GrammarError):
    def __init__(self, line: int, col: int, expected: str, origin: str = "<string>"):
        super().__init__(f"{origin}:{line}:{col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected
        self.origin = origin


class DuplicateRule(GrammarError):
    def __init__(self, name: str, line: int = 0, origin: str = "<string>"):
        super().__init__(f"{origin}:{line}: duplicate rule {name!r}")
        self.name = name
        self.line = line
        self.origin = origin


class _Reader:
    def __init__(self, src: GrammarSource):
        self.text = src.text
        self.origin = src.origin
        self.pos = 0

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, expected, pos=None):
        line, col = self.where(pos)
        raise GrammarSyntaxError(line, col, expected, self.origin)

    def skip_ws(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif c == "#":
                end = text.find("\n", self.pos)
                self.pos = len(text) if end < 0 else end + 1
            else:
                break

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_arrow(self):
        self.skip_ws()
        return self.text.startswith("<-", self.pos)

    def expect(self, token, what=None):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            self.fail(what or repr(token))
        self.pos += len(token)

    def ident(self):
        self.skip_ws()
        start = self.pos
        text = self.text
        if start < len(text) and (text[start].isalpha() or text[start] == "_") and text[start].isascii():
            end = start + 1
            while end < len(text) and text[end].isascii() and (text[end].isalnum() or text[end] == "_"):
                end += 1
            self.pos = end
            return text[start:end]
        return None

    def escaped_char(self, closing):
        text = self.text
        if self.pos >= len(text):
            self.fail(repr(closing))
        c = text[self.pos]
        if c == "\\":
            if self.pos + 1 >= len(text) or text[self.pos + 1] not in _ESCAPES:
                self.fail("valid escape", self.pos)
            self.pos += 2
            return _ESCAPES[text[self.pos - 1]], True
        self.pos += 1
        return c, False


def _parse_literal(r: _Reader) -> Clause:
    start = r.pos
    r.pos += 1
    chars = []
    while True:
        if r.pos >= len(r.text):
            r.fail("closing quote", start)
        if r.text[r.pos] == "'":
            r.pos += 1
            break
        chars.append(r.escaped_char("'")[0])
    if not chars:
        r.fail("non-empty literal", start)
    s = "".join(chars)
    return Char(s) if len(s) == 1 else Literal(s)


def _parse_class(r: _Reader) -> Clause:
    start = r.pos
    r.pos += 1
    items: list[tuple[str, bool]] = []
    while True:
        if r.pos >= len(r.text):
            r.fail("']'", start)
        if r.text[r.pos] == "]":
            r.pos += 1
            break
        items.append(r.escaped_char("]"))
    if not items:
        r.fail("non-empty character class", start)
    ranges = []
    i = 0
    while i < len(items):
        c, _ = items[i]
        if i + 2 < len(items) and items[i + 1] == ("-", False):
            hi = items[i + 2][0]
            if hi < c:
                r.fail(f"ascending range, got {c!r}-{hi!r}", start)
            ranges.append((c, hi))
            i += 3
        else:
            ranges.append((c, c))
            i += 1
    return CharRange(*ranges)


def _parse_primary(r: _Reader) -> Clause | None:
    c = r.peek()
    if c == "'":
        return _parse_literal(r)
    if c == "[":
        return _parse_class(r)
    if c == "(":
        r.pos += 1
        if r.peek() == ")":
            r.pos += 1
            return Epsilon()
        inner = _parse_choice(r)
        r.expect(")")
        return inner
    save = r.pos
    name = r.ident()
    if name is None:
        return None
    if r.at_arrow():
        # start of the next rule: the previous one lacks its ';'
        r.pos = save
        return None
    return RuleRef(name)


def _parse_prefixed(r: _Reader) -> Clause | None:
    c = r.peek()
    if c in ("!", "&"):
        r.pos += 1
        inner = _parse_prefixed(r)
        if inner is None:
            r.fail("expression after " + repr(c))
        return NotFollowedBy(inner) if c == "!" else FollowedBy(inner)
    return _parse_primary(r)


def _parse_suffixed(r: _Reader) -> Clause | None:
    e = _parse_prefixed(r)
    if e is None:
        return None
    while True:
        c = r.peek()
        if c == "?":
            e = Optional(e)
        elif c == "*":
            e = ZeroOrMore(e)
        elif c == "+":
            e = OneOrMore(e)
        else:
            return e
        r.pos += 1


def _parse_sequence(r: _Reader) -> Clause:
    items = []
    while True:
        e = _parse_suffixed(r)
        if e is None:
            break
        items.append(e)
    if not items:
        r.fail("expression")
    return items[0] if len(items) == 1 else Seq(*items)


def _parse_choice(r: _Reader) -> Clause:
    alts = [_parse_sequence(r)]
    while r.peek() == "/":
        r.pos += 1
        alts.append(_parse_sequence(r))
    return alts[0] if len(alts) == 1 else First(*alts)


def parse_grammar_text(src: GrammarSource | str, origin: str = "<string>") -> Grammar:
    """Parse grammar text into an unresolved, desugared :class:`Grammar`."""
    if isinstance(src, str):
        src = GrammarSource(src, origin)
    r = _Reader(src)
    rules: list[tuple[str, Clause]] = []
    seen: set[str] = set()
    locations = {}
    while r.peek():
        start = r.pos
        name = r.ident()
        if name is None:
            r.fail("rule name")
        if name in seen:
            raise DuplicateRule(name, r.where(start)[0], src.origin)
        r.expect("<-", "'<-'")
        body = _parse_choice(r)
        r.expect(";", "';'")
        seen.add(name)
        locations[name] = r.where(start)
        rules.append((name, desugar(body)))
    if not rules:
        r.fail("rule name")
    return Grammar(rules, locations=locations, origin=src.origin)


def load_grammar(path) -> Grammar:
    """Read, parse and resolve a grammar file."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return parse_grammar_text(GrammarSource(text, str(path))).resolve()


# Pretty printing.  Levels: 0 choice, 1 sequence, 2 suffixed, 3 prefixed/primary.

def _quote(s: str, quote: str) -> str:
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == quote:
            out.append("\\" + quote)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif quote == "]" and ch == "-":
            out.append("\\-")
        else:
            out.append(ch)
    return "".join(out)


def _fmt(c: Clause, level: int) -> tuple[str, int]:
    k = c.kind
    if k == CHAR:
        return "'" + _quote(c.char, "'") + "'", 3
    if k == LITERAL:
        return "'" + _quote(c.text, "'") + "'", 3
    if k == CHAR_RANGE:
        parts = [_quote(lo, "]") if lo == hi else _quote(lo, "]") + "-" + _quote(hi, "]")
                 for lo, hi in c.ranges]
        return "[" + "".join(parts) + "]", 3
    if k == RULE_REF:
        return c.name, 3
    if k == FIRST and c.children[-1].kind == EPSILON:
        rest = c.children[:-1]
        if len(rest) == 1 and rest[0].kind == ONE_OR_MORE:
            return _wrap(rest[0].child, 2) + "*", 2
        inner = rest[0] if len(rest) == 1 else First(*rest)
        return _wrap(inner, 2) + "?", 2
    if k == NOT_FOLLOWED_BY:
        if c.child.kind == NOT_FOLLOWED_BY:
            return "&" + _wrap(c.child.child, 3), 3
        return "!" + _wrap(c.child, 3), 3
    if k == ONE_OR_MORE:
        return _wrap(c.child, 2) + "+", 2
    if k == SEQ:
        return " ".join(_wrap(x, 2) for x in c.children), 1
    if k == FIRST:
        return " / ".join(_wrap(x, 1) for x in c.children), 0
    if k == EPSILON:
        return "()", 3
    raise TypeError(f"cannot format {c!r}")


def _wrap(c: Clause, min_level: int) -> str:
    text, level = _fmt(c, min_level)
    return text if level >= min_level else "(" + text + ")"


def format_clause(c: Clause) -> str:
    return _fmt(c, 0)[0]


def format_grammar(grammar: Grammar) -> str:
    """Render a grammar as text that parses back to the same clause trees."""
    return "".join(f"{name} <- {format_clause(body)} ;\n" for name, body in grammar.rules.items())
