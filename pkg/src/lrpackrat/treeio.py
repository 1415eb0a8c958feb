"""Rendering parse trees as s-expressions or JSON, and listing their errors.

By default rule-reference nodes are flattened: a rule's node shows the rule
name followed by its body's content, with choice wrappers made transparent,
sequences and repetitions inlined, terminals shown as their matched text and
zero-length lookahead/empty nodes dropped.  ``raw=True`` prints every node.

All walks are iterative, so trees thousands of levels deep (long
left-associative chains) serialize without hitting the recursion limit.
"""

from __future__ import annotations

import enum
import json
from typing import Any, NamedTuple

from .grammar import (
    CHAR, CHAR_RANGE, EPSILON, FIRST, LITERAL, NOT_FOLLOWED_BY, ONE_OR_MORE,
    RECOVERED_ROOT, RULE_REF, SEQ, SYNTAX_ERROR,
)
from .grammar_text import format_clause

__all__ = ["TreeFormat", "ErrorSpan", "serialize_tree", "tree_to_dict", "collect_errors",
           "node_label"]


class TreeFormat(str, enum.Enum):
    SEXPR = "sexpr"
    JSON = "json"


class ErrorSpan(NamedTuple):
    pos: int
    len: int
    kind: str  # skip | trailing | total | eof-delete


_RAW_LABELS = {SEQ: "<seq>", FIRST: "<first>", ONE_OR_MORE: "<plus>",
               NOT_FOLLOWED_BY: "<not>", EPSILON: "<eps>"}
_TERMINALS = (CHAR, CHAR_RANGE, LITERAL)


def node_label(m) -> str:
    c = m.clause
    k = c.kind
    if k == RULE_REF or k == RECOVERED_ROOT:
        return c.name
    if k == SYNTAX_ERROR:
        return "ERROR"
    if k in _TERMINALS:
        return format_clause(c)
    return _RAW_LABELS[k]


def _content(m, raw: bool) -> list:
    """Children to print under ``m``'s group."""
    if raw:
        return list(m.children)
    out = []
    # a rule node shows its body's content, not the body node itself
    stack = list(reversed(m.children))
    while stack:
        c = stack.pop()
        k = c.clause.kind
        if k in (SEQ, FIRST, ONE_OR_MORE):
            stack.extend(reversed(c.children))
        elif k in (EPSILON, NOT_FOLLOWED_BY):
            continue
        else:
            out.append(c)
    return out


def _is_group(m, raw: bool) -> bool:
    k = m.clause.kind
    if raw:
        return k not in _TERMINALS
    return k in (RULE_REF, RECOVERED_ROOT, SYNTAX_ERROR)


def _sexpr(root, text: str, raw: bool) -> str:
    parts: list[str] = []
    stack: list[Any] = [root]
    while stack:
        m = stack.pop()
        if isinstance(m, str):
            parts.append(m)
            continue
        span = json.dumps(text[m.pos:m.pos + m.len], ensure_ascii=False)
        k = m.clause.kind
        if k == SYNTAX_ERROR:
            parts.append(f" (ERROR {m.pos} {m.len} {span})")
        elif not _is_group(m, raw):
            parts.append(f" ({node_label(m)} {m.pos} {m.len} {span})" if raw else " " + span)
        else:
            parts.append(f" ({node_label(m)} {m.pos} {m.len}")
            stack.append(")")
            stack.extend(reversed(_content(m, raw)))
    return "".join(parts).strip()


def tree_to_dict(root, text: str, raw: bool = False) -> dict:
    """Nested dicts with fields rule, pos, len, complete, text, children, error."""

    def make(m):
        d = {"rule": node_label(m), "pos": m.pos, "len": m.len,
             "complete": bool(m.is_complete), "error": m.clause.kind == SYNTAX_ERROR}
        k = m.clause.kind
        if k in _TERMINALS or k == SYNTAX_ERROR:
            d["text"] = text[m.pos:m.pos + m.len]
        d["children"] = []
        return d

    top = make(root)
    stack = [(root, top)]
    while stack:
        m, d = stack.pop()
        if not _is_group(m, raw) or m.clause.kind == SYNTAX_ERROR:
            continue
        for c in _content(m, raw):
            cd = make(c)
            d["children"].append(cd)
            stack.append((c, cd))
    return top


def _json(root, text: str, raw: bool, indent: int | None) -> str:
    # hand-rolled writer: json.dumps recurses and would fail on deep trees
    parts: list[str] = []
    stack: list[Any] = [tree_to_dict(root, text, raw)]
    while stack:
        d = stack.pop()
        if isinstance(d, str):
            parts.append(d)
            continue
        head = {k: v for k, v in d.items() if k != "children"}
        parts.append(json.dumps(head, ensure_ascii=False)[:-1] + ', "children": [')
        stack.append("]}")
        kids = d["children"]
        for i in range(len(kids) - 1, -1, -1):
            stack.append(kids[i])
            if i:
                stack.append(", ")
    out = "".join(parts)
    if indent is not None:
        try:
            out = json.dumps(json.loads(out), indent=indent, ensure_ascii=False)
        except RecursionError:
            pass
    return out


def serialize_tree(root, fmt: TreeFormat | str = TreeFormat.SEXPR, text: str = "",
                   raw: bool = False, indent: int | None = None) -> str:
    """Render a spanning parse tree over ``text``."""
    fmt = TreeFormat(fmt)
    if fmt is TreeFormat.SEXPR:
        return _sexpr(root, text, raw)
    return _json(root, text, raw, indent)


def collect_errors(root) -> list[ErrorSpan]:
    """Every syntax error span and end-of-input deletion, ordered by position.

    Deletions show up as sequences holding fewer grammar children than their
    clause has; they are reported with length 0 at the sequence's end.
    """
    if root.clause.kind == SYNTAX_ERROR:
        return [ErrorSpan(root.pos, root.len, "total")]
    found: list[tuple[int, int, ErrorSpan]] = []
    order = 0
    n_end = root.pos + root.len
    stack = [(root, None)]
    while stack:
        m, parent = stack.pop()
        k = m.clause.kind
        order += 1
        if k == SYNTAX_ERROR:
            trailing = (parent is not None and parent.clause.kind == RECOVERED_ROOT
                        and parent.children[-1] is m and m.pos + m.len == n_end)
            found.append((m.pos, order, ErrorSpan(m.pos, m.len, "trailing" if trailing else "skip")))
            continue
        if k == SEQ:
            real = sum(1 for c in m.children if c.clause.kind != SYNTAX_ERROR)
            if real < len(m.clause.children):
                end = m.pos + m.len
                found.append((end, order + 0.5, ErrorSpan(end, 0, "eof-delete")))
        for c in reversed(m.children):
            stack.append((c, m))
    found.sort(key=lambda t: (t[0], t[1]))
    return [e for _, _, e in found]
