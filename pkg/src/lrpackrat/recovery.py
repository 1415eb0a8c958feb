"""Error recovery configuration and the backend-independent recovery algebra.

The recovery-mode code paths themselves live in the engine backends (they
are part of the match kernels).  This module holds what both backends share:
the configuration, the completeness rules, bound selection, EOF deletion,
the spanning wrapper, and the two-phase entry point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .grammar import SYNTAX_ERROR, SYNTAX_ERROR_CLAUSE, Clause, RecoveredRoot

__all__ = ["RecoveryConfig", "DEFAULT_MAX_SKIP", "completeness_of", "bound_for",
           "eof_delete", "span_wrap", "syntax_error_node", "two_phase_parse"]

DEFAULT_MAX_SKIP = 64


@dataclass(frozen=True)
class RecoveryConfig:
    max_skip: int = DEFAULT_MAX_SKIP
    enabled: bool = True

    def __post_init__(self):
        if not isinstance(self.max_skip, int) or self.max_skip < 1:
            raise ValueError(f"max_skip must be a positive integer, got {self.max_skip!r}")


def completeness_of(kind: str, child_flags: Sequence[bool] = (), used_recovery: bool = False,
                    truncated: bool = False) -> bool:
    """Completeness of an operator result from its children's flags.

    ``kind`` is one of ``"seq"``, ``"first"``, ``"repetition"`` or a leaf kind
    (``"terminal"``, ``"epsilon"``, ``"not_followed_by"``), which are always
    complete when they succeed.
    """
    if kind == "seq":
        if not child_flags:
            raise ValueError("seq completeness needs child flags")
        return all(child_flags) and not used_recovery
    if kind == "first":
        if len(child_flags) != 1:
            raise ValueError("first completeness takes the chosen child's flag only")
        return bool(child_flags[0])
    if kind == "repetition":
        if not child_flags:
            raise ValueError("repetition completeness needs child flags")
        return not truncated and all(child_flags)
    if kind in ("terminal", "epsilon", "not_followed_by"):
        return True
    raise ValueError(f"unknown operator kind {kind!r}")


def bound_for(children: Sequence[Clause], i: int, bound: Clause | None) -> Clause | None:
    """The clause child ``i`` of a sequence must not skip past."""
    if not 0 <= i < len(children):
        raise IndexError(i)
    return children[i + 1] if i + 1 < len(children) else bound


def syntax_error_node(match_type, pos: int, length: int):
    return match_type(SYNTAX_ERROR_CLAUSE, pos, length, (), False)


def eof_delete(clause: Clause, matched: Sequence, pos: int, match_type):
    """Close a sequence at end of input by deleting its unmatched tail.

    ``matched`` holds the matches of the children that did succeed; the
    result is their contiguous span, flagged incomplete.
    """
    length = sum(m.len for m in matched)
    return match_type(clause, pos, length, tuple(matched), False)


def span_wrap(result, n: int, root_clause: Clause, match_type=None):
    """Make ``result`` cover the whole input.

    A mismatch becomes one syntax error node over everything; a short match
    gains a trailing syntax error node; a spanning match is returned as is.
    """
    mt = match_type or type(result)
    if result.len < 0:
        return syntax_error_node(mt, 0, n)
    if result.len == n:
        return result
    if result.len > n:
        raise ValueError("match longer than input")
    tail = syntax_error_node(mt, result.len, n - result.len)
    label = root_clause if isinstance(root_clause, RecoveredRoot) else RecoveredRoot(
        getattr(root_clause, "name", "root"))
    return mt(label, 0, n, (result, tail), False)


def is_syntax_error(m) -> bool:
    return m.clause is not None and m.clause.kind == SYNTAX_ERROR


def two_phase_parse(grammar, text: str, config: RecoveryConfig | None = None, backend=None):
    """Parse ``text`` with discovery then (if needed) recovery.

    Returns the spanning root match.  ``backend`` selects ``"python"`` or
    ``"cython"``; by default the active backend is used.
    """
    from .engine import make_session
    return make_session(grammar, text, config, backend=backend).parse()
