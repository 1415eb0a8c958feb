"""Packrat PEG parsing with left recursion and two-phase error recovery."""

from .grammar import (
    Char, CharRange, Epsilon, First, FollowedBy, Grammar, GrammarError, Literal,
    MissingStartRule, NotFollowedBy, OneOrMore, Optional, RuleRef, Seq,
    UnknownRule, ZeroOrMore, desugar, left_recursive_rules, resolve_refs,
)
from .grammar_text import (
    DuplicateRule, GrammarSource, GrammarSyntaxError, format_grammar,
    load_grammar, parse_grammar_text,
)
from .recovery import RecoveryConfig, two_phase_parse
from .engine import MISMATCH, Match, ParseSession, default_backend, make_session, parse

__version__ = "0.1.0"
