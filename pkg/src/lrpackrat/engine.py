"""Backend selection for the match core.

Two interchangeable backends implement :class:`ParseSession`: the compiled
``_cengine`` extension and the pure-Python ``_pyengine``.  The compiled one
is used when it imports; setting ``LRPACKRAT_PURE_PYTHON=1`` forces the
fallback.
"""

from __future__ import annotations

import os

from . import _pyengine
from .grammar import Grammar, resolve_refs
from .recovery import RecoveryConfig

try:
    from . import _cengine
except ImportError:  # extension not built
    _cengine = None

__all__ = ["available_backends", "default_backend", "backend_module", "make_session",
           "parse", "Match", "MISMATCH", "MemoEntry", "ParseSession"]


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _cengine is not None else [])


def default_backend() -> str:
    if os.environ.get("LRPACKRAT_PURE_PYTHON", "") not in ("", "0") or _cengine is None:
        return "python"
    return "cython"


def backend_module(name: str | None = None):
    name = name or default_backend()
    if name == "python":
        return _pyengine
    if name == "cython":
        if _cengine is None:
            raise RuntimeError("compiled backend is not available in this installation")
        return _cengine
    raise ValueError(f"unknown backend {name!r}")


_active = backend_module()
Match = _active.Match
MISMATCH = _active.MISMATCH
MemoEntry = _active.MemoEntry
ParseSession = _active.ParseSession


def make_session(grammar: Grammar, text: str, config: RecoveryConfig | None = None,
                 backend: str | None = None):
    if not grammar.resolved:
        grammar = resolve_refs(grammar)
    return backend_module(backend).ParseSession(grammar, text, config)


def parse(grammar: Grammar, text: str, config: RecoveryConfig | None = None,
          backend: str | None = None):
    """Two-phase parse of ``text``; returns the spanning root match."""
    return make_session(grammar, text, config, backend).parse()
