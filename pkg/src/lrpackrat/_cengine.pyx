# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled match kernels.

A line-for-line port of ``_pyengine``; clause trees are compiled once per
grammar into typed ``_Node`` records so the hot loop never touches Python
dataclass attributes.  Results are ``Match`` objects with the same public
attributes as the pure-Python backend.
"""

cimport cython
from cpython.mem cimport PyMem_Calloc, PyMem_Free

import sys

from . import grammar as _g
from .grammar import SYNTAX_ERROR_CLAUSE, RecoveredRoot, resolve_refs
from .recovery import RecoveryConfig, span_wrap

BACKEND = "cython"

cdef enum:
    K_SEQ = 0
    K_FIRST = 1
    K_PLUS = 2
    K_NOT = 3
    K_CHAR = 4
    K_RANGE = 5
    K_LITERAL = 6
    K_EPS = 7
    K_REF = 8
    K_ERROR = 9

assert (_g.SEQ, _g.FIRST, _g.ONE_OR_MORE, _g.NOT_FOLLOWED_BY, _g.CHAR, _g.CHAR_RANGE,
        _g.LITERAL, _g.EPSILON, _g.RULE_REF, _g.SYNTAX_ERROR) == tuple(range(10))


@cython.trashcan(True)
@cython.freelist(64)
cdef class Match:
    """Parse tree node, or a mismatch when ``len < 0``."""

    cdef public object clause
    cdef public Py_ssize_t pos
    cdef public Py_ssize_t len
    cdef public tuple children
    cdef public bint is_complete
    cdef public MemoEntry seed

    def __init__(self, clause, Py_ssize_t pos, Py_ssize_t length, tuple children=(),
                 bint is_complete=True, MemoEntry seed=None):
        self.clause = clause
        self.pos = pos
        self.len = length
        self.children = children
        self.is_complete = is_complete
        self.seed = seed

    @property
    def matched(self):
        return self.len >= 0

    @property
    def end(self):
        return self.pos + self.len

    @property
    def is_error(self):
        return self.clause is not None and self.clause.kind == K_ERROR

    @property
    def is_from_lr_context(self):
        return self.seed is not None and self.seed.in_rec_path

    def __repr__(self):
        if self.len < 0:
            return "MISMATCH" if self.seed is None else "MISMATCH(lr-seed)"
        return (f"<Match {type(self.clause).__name__} pos={self.pos} len={self.len} "
                f"children={len(self.children)}>")


cdef inline Match _mk(object clause, Py_ssize_t pos, Py_ssize_t length, tuple children,
                      bint complete):
    cdef Match m = Match.__new__(Match)
    m.clause = clause
    m.pos = pos
    m.len = length
    m.children = children
    m.is_complete = complete
    m.seed = None
    return m


cdef Match _MISMATCH = _mk(None, -1, -1, (), False)
MISMATCH = _MISMATCH
cdef tuple _EMPTY = ()


cdef class MemoEntry:
    cdef public Match result
    cdef public bint in_rec_path
    cdef public bint found_left_rec
    cdef public Py_ssize_t cycle_depth
    cdef public bint cached_in_recovery_phase
    cdef public Match lr_seed
    cdef public int epoch
    cdef public bint carried

    def __init__(self):
        self.result = None
        self.lr_seed = None


cdef class _Node:
    cdef int kind
    cdef tuple children
    cdef _Node child
    cdef object clause
    cdef Py_UCS4 ch
    cdef unicode lows
    cdef unicode highs
    cdef unicode text
    cdef Py_ssize_t tlen
    cdef Py_ssize_t index


cdef _Node _compile(object clause, dict cache):
    cdef _Node node = cache.get(clause)
    if node is not None and node.clause is clause:
        return node
    node = _Node.__new__(_Node)
    node.clause = clause
    node.kind = clause.kind
    node.children = _EMPTY
    node.index = -1
    k = node.kind
    if k == K_SEQ or k == K_FIRST:
        node.children = tuple([_compile(c, cache) for c in clause.children])
    elif k == K_PLUS or k == K_NOT:
        node.child = _compile(clause.child, cache)
    elif k == K_CHAR:
        node.ch = clause.char
    elif k == K_RANGE:
        node.lows = "".join([lo for lo, hi in clause.ranges])
        node.highs = "".join([hi for lo, hi in clause.ranges])
    elif k == K_LITERAL:
        node.text = clause.text
        node.tlen = len(clause.text)
    elif k == K_REF:
        if clause.index < 0:
            raise ValueError(f"unresolved rule reference {clause.name!r}")
        node.index = clause.index
    elif k != K_EPS:
        raise TypeError(f"clause {clause!r} cannot be matched (derived operator?)")
    cache[clause] = node
    return node


_COUNTERS = (
    "body_evals", "expansions", "cache_hits", "cross_phase_reuse",
    "cross_phase_incomplete", "skip_searches", "recoveries", "lr_blocked",
    "lr_violations", "probes", "terminal_attempts", "eof_deletions", "resyncs",
    "stale_reuse",
)


cdef class ParseSession:
    """State of one parse: input, memo table, per-position cycle depths, phase flag."""

    cdef public object grammar
    cdef public object config
    cdef public unicode input
    cdef public Py_ssize_t n
    cdef public Py_ssize_t max_skip
    cdef public bint in_recovery_phase
    cdef public bint phase2_entered
    cdef public int epoch
    cdef public object phase1_counts
    cdef public Py_ssize_t max_inspected
    cdef public long long body_evals, expansions, cache_hits, cross_phase_reuse
    cdef public long long cross_phase_incomplete, skip_searches, recoveries, lr_blocked
    cdef public long long lr_violations, probes, terminal_attempts, eof_deletions, resyncs
    cdef public long long stale_reuse
    cdef list _memo
    cdef Py_ssize_t *_cdfp
    cdef tuple _bodies
    cdef _Node _start
    cdef dict _cache
    cdef Py_ssize_t _nrules
    cdef int _depth
    cdef int _depth_limit

    backend = BACKEND

    def __cinit__(self):
        self._cdfp = NULL

    def __init__(self, grammar, text, config=None):
        if not grammar.resolved:
            grammar = resolve_refs(grammar)
        self.grammar = grammar
        self.input = str(text)
        self.n = len(self.input)
        self.config = config or RecoveryConfig()
        self.max_skip = self.config.max_skip
        self._nrules = len(grammar.bodies)
        self._memo = [None] * (self._nrules * (self.n + 1))
        self._cdfp = <Py_ssize_t *> PyMem_Calloc(self.n + 1, sizeof(Py_ssize_t))
        if self._cdfp == NULL:
            raise MemoryError()
        self._cache = {}
        self._bodies = tuple([_compile(b, self._cache) for b in grammar.bodies])
        self._start = _compile(grammar.start_ref, self._cache)
        self.in_recovery_phase = False
        self.phase2_entered = False
        self.epoch = 0
        self.phase1_counts = None
        self.max_inspected = -1
        self._depth = 0
        # each rule level costs a handful of C frames; stay well inside the stack
        self._depth_limit = max(sys.getrecursionlimit(), 1000)

    def __dealloc__(self):
        if self._cdfp != NULL:
            PyMem_Free(self._cdfp)
            self._cdfp = NULL

    # -- instrumentation -------------------------------------------------

    @property
    def stats(self):
        out = {name: getattr(self, name) for name in _COUNTERS}
        out["phase2_entered"] = self.phase2_entered
        out["memo_entries"] = sum(1 for e in self._memo if e is not None)
        if self.phase1_counts is not None:
            out["phase1_body_evals"], out["phase1_terminal_attempts"] = self.phase1_counts
        else:
            out["phase1_body_evals"], out["phase1_terminal_attempts"] = self.body_evals, self.terminal_attempts
        return out

    @property
    def memo(self):
        """Touched memo entries keyed by ``rule * (n + 1) + pos``."""
        return {i: e for i, e in enumerate(self._memo) if e is not None}

    @property
    def cycle_depth_for_pos(self):
        return [self._cdfp[i] for i in range(self.n + 1)]

    # -- memoized rule matching -----------------------------------------

    def match_rule(self, rule, Py_ssize_t pos, bound=None):
        if not isinstance(rule, int):
            rule = self.grammar.rule_index(rule)
        return self._rule(rule, pos, self._node(bound))

    def entry(self, rule, Py_ssize_t pos):
        if not isinstance(rule, int):
            rule = self.grammar.rule_index(rule)
        return self._memo[rule * (self.n + 1) + pos]

    def cache_valid(self, MemoEntry entry):
        return entry.result.is_complete or entry.cached_in_recovery_phase == self.in_recovery_phase

    cdef _Node _node(self, clause):
        if clause is None:
            return None
        return _compile(clause, self._cache)

    cdef Match _rule(self, Py_ssize_t rule, Py_ssize_t pos, _Node bound):
        cdef Py_ssize_t key = rule * (self.n + 1) + pos
        cdef MemoEntry entry = <MemoEntry> self._memo[key]
        if entry is None:
            entry = MemoEntry.__new__(MemoEntry)
            self._memo[key] = entry
        return self._entry_match(entry, rule, pos, bound)

    def memo_entry_match(self, MemoEntry entry, rule, Py_ssize_t pos, bound=None):
        return self._entry_match(entry, self.grammar.rule_index(rule), pos, self._node(bound))

    cdef Match _entry_match(self, MemoEntry entry, Py_ssize_t rule, Py_ssize_t pos, _Node bound):
        cdef Py_ssize_t *cdfp = self._cdfp
        cdef bint mode = self.in_recovery_phase
        cdef Match result = entry.result
        cdef Match seed, new, old
        cdef bint same_phase
        cdef _Node body
        if result is not None:
            same_phase = entry.cached_in_recovery_phase == mode
            if result.is_complete or same_phase:
                if entry.cycle_depth >= cdfp[pos]:
                    self.cache_hits += 1
                    if not same_phase:
                        self.cross_phase_reuse += 1
                        if not result.is_complete and mode and entry.epoch == 0:
                            self.cross_phase_incomplete += 1
                    return result
            elif not entry.in_rec_path:
                entry.result = None
                entry.found_left_rec = False

        if entry.in_rec_path:
            if entry.result is None:
                entry.found_left_rec = True
                seed = entry.lr_seed
                if seed is None:
                    seed = _mk(None, -1, -1, _EMPTY, False)
                    seed.seed = entry
                    entry.lr_seed = seed
                entry.result = seed
                entry.cached_in_recovery_phase = mode
                entry.epoch = self.epoch
            else:
                if mode and entry.epoch == 0 and not entry.result.is_complete:
                    self.cross_phase_incomplete += 1
                if entry.carried:
                    self.stale_reuse += 1
            entry.cycle_depth = cdfp[pos]
            return entry.result

        self._depth += 1
        if self._depth > self._depth_limit:
            self._depth = 0
            raise RecursionError("rule nesting too deep for the compiled backend")
        entry.in_rec_path = True
        entry.carried = entry.result is not None
        body = <_Node> self._bodies[rule]
        try:
            while True:
                self.body_evals += 1
                new = self._m(body, pos, bound)
                old = entry.result
                if old is not None and new.len <= old.len:
                    if entry.carried and new.len < old.len:
                        self.stale_reuse += 1
                    break
                entry.result = new
                entry.carried = False
                entry.cached_in_recovery_phase = mode
                entry.epoch = self.epoch
                if not entry.found_left_rec:
                    break
                cdfp[pos] += 1
                entry.cycle_depth = cdfp[pos]
                self.expansions += 1
        finally:
            entry.in_rec_path = False
            self._depth -= 1
        entry.cycle_depth = cdfp[pos]
        return entry.result

    # -- clause matching -------------------------------------------------

    def match(self, clause, Py_ssize_t pos, bound=None):
        return self._m(self._node(clause), pos, self._node(bound))

    cdef Match _m(self, _Node c, Py_ssize_t pos, _Node bound):
        cdef int k = c.kind
        cdef Match m
        cdef Py_UCS4 ch
        cdef Py_ssize_t i, last
        if k == K_CHAR:
            self.terminal_attempts += 1
            if pos > self.max_inspected:
                self.max_inspected = pos
            if pos < self.n and self.input[pos] == c.ch:
                return _mk(c.clause, pos, 1, _EMPTY, True)
            return _MISMATCH
        if k == K_REF:
            m = self._rule(c.index, pos, bound)
            if m.len < 0:
                return m
            return _mk(c.clause, pos, m.len, (m,), m.is_complete)
        if k == K_SEQ:
            return self._seq(c, pos, bound)
        if k == K_FIRST:
            return self._first(c, pos, bound)
        if k == K_RANGE:
            self.terminal_attempts += 1
            if pos > self.max_inspected:
                self.max_inspected = pos
            if pos < self.n:
                ch = self.input[pos]
                for i in range(len(c.lows)):
                    if c.lows[i] <= ch <= c.highs[i]:
                        return _mk(c.clause, pos, 1, _EMPTY, True)
            return _MISMATCH
        if k == K_LITERAL:
            self.terminal_attempts += 1
            last = pos + c.tlen - 1
            if last > self.max_inspected:
                self.max_inspected = last if last < self.n else self.n
            if self.input.startswith(c.text, pos):
                return _mk(c.clause, pos, c.tlen, _EMPTY, True)
            return _MISMATCH
        if k == K_PLUS:
            return self._plus(c, pos, bound)
        if k == K_NOT:
            if self._probe(c.child, pos).len < 0:
                return _mk(c.clause, pos, 0, _EMPTY, True)
            return _MISMATCH
        if k == K_EPS:
            return _mk(c.clause, pos, 0, _EMPTY, True)
        raise TypeError(f"clause kind {k} cannot be matched")

    cdef Match _seq(self, _Node c, Py_ssize_t pos, _Node bound):
        cdef tuple children = c.children
        cdef Py_ssize_t count = len(children)
        cdef Py_ssize_t i, p = pos, k
        cdef bint complete = True, used = False
        cdef list out = []
        cdef _Node child, eb
        cdef Match m, resumed
        for i in range(count):
            child = <_Node> children[i]
            eb = <_Node> children[i + 1] if i + 1 < count else bound
            m = self._m(child, p, eb)
            if m.len >= 0:
                out.append(m)
                p += m.len
                if not m.is_complete:
                    complete = False
                continue
            if not self.in_recovery_phase or p == pos:
                return m
            if m.seed is not None and m.seed.in_rec_path:
                self.lr_blocked += 1
                return m
            if p == self.n:
                self.eof_deletions += 1
                used = True
                break
            resumed = self._skip(child, p, eb, m, &k)
            if resumed is not None:
                out.append(_mk(SYNTAX_ERROR_CLAUSE, p, k, _EMPTY, False))
                out.append(resumed)
                p += k + resumed.len
                used = True
            elif k > 0 and p + k == self.n:
                out.append(_mk(SYNTAX_ERROR_CLAUSE, p, k, _EMPTY, False))
                p = self.n
                used = True
                self.eof_deletions += 1
            else:
                return _MISMATCH
        return _mk(c.clause, pos, p - pos, tuple(out), complete and not used)

    cdef Match _first(self, _Node c, Py_ssize_t pos, _Node bound):
        cdef Match m, lr = None
        cdef _Node alt
        if self.in_recovery_phase:
            self.in_recovery_phase = False
            try:
                for alt in c.children:
                    m = self._m(alt, pos, None)
                    if m.len >= 0:
                        return _mk(c.clause, pos, m.len, (m,), m.is_complete)
            finally:
                self.in_recovery_phase = True
        for alt in c.children:
            m = self._m(alt, pos, bound)
            if m.len >= 0:
                return _mk(c.clause, pos, m.len, (m,), m.is_complete)
            if lr is None and m.seed is not None and m.seed.in_rec_path:
                lr = m
        return _MISMATCH if lr is None else lr

    cdef Match _plus(self, _Node c, Py_ssize_t pos, _Node bound):
        cdef _Node child = c.child
        cdef Match m = self._m(child, pos, bound)
        cdef Match resumed
        cdef list out
        cdef Py_ssize_t p, k
        cdef bint complete, truncated = False
        if m.len < 0:
            return m
        out = [m]
        p = pos + m.len
        complete = m.is_complete
        if m.len > 0:
            while True:
                m = self._m(child, p, bound)
                if m.len >= 0:
                    out.append(m)
                    p += m.len
                    if not m.is_complete:
                        complete = False
                    if m.len == 0:
                        break
                    continue
                if not self.in_recovery_phase or p == self.n:
                    break
                if m.seed is not None and m.seed.in_rec_path:
                    self.lr_blocked += 1
                    break
                if bound is not None and self._probe(bound, p).len >= 0:
                    break
                resumed = self._skip(child, p, bound, m, &k)
                if resumed is not None:
                    out.append(_mk(SYNTAX_ERROR_CLAUSE, p, k, _EMPTY, False))
                    out.append(resumed)
                    p += k + resumed.len
                    complete = False
                    if resumed.len == 0:
                        break
                    continue
                if k > 0:
                    out.append(_mk(SYNTAX_ERROR_CLAUSE, p, k, _EMPTY, False))
                    p += k
                    truncated = True
                break
        return _mk(c.clause, pos, p - pos, tuple(out), complete and not truncated)

    # -- recovery --------------------------------------------------------

    def probe(self, clause, Py_ssize_t pos):
        return self._probe(self._node(clause), pos)

    cdef Match _probe(self, _Node c, Py_ssize_t pos):
        self.probes += 1
        if not self.in_recovery_phase:
            return self._m(c, pos, None)
        self.in_recovery_phase = False
        try:
            return self._m(c, pos, None)
        finally:
            self.in_recovery_phase = True

    def recovery_skip_search(self, failed, Py_ssize_t pos, bound=None, Match mismatch=_MISMATCH):
        cdef Py_ssize_t k = 0
        m = self._skip(self._node(failed), pos, self._node(bound), mismatch, &k)
        return k, m

    cdef Match _skip(self, _Node failed, Py_ssize_t pos, _Node bound, Match mismatch,
                     Py_ssize_t *k_out):
        cdef Py_ssize_t k, limit = self.n - pos
        cdef Match m
        self.skip_searches += 1
        if mismatch.seed is not None and mismatch.seed.in_rec_path:
            self.lr_violations += 1
        if self.max_skip < limit:
            limit = self.max_skip
        for k in range(1, limit + 1):
            m = self._probe(failed, pos + k)
            if m.len >= 0:
                self.recoveries += 1
                k_out[0] = k
                return m
            if bound is not None and self._probe(bound, pos + k).len >= 0:
                k_out[0] = k
                return None
        k_out[0] = limit if pos + limit == self.n else 0
        return None

    # -- driver ----------------------------------------------------------

    cdef Match _root(self, Match body):
        if body.len < 0:
            return body
        return _mk(self.grammar.start_ref, body.pos, body.len, (body,), body.is_complete)

    def discover(self):
        self.in_recovery_phase = False
        return self._root(self._rule(self._start.index, 0, None))

    cdef Match _resync(self, Py_ssize_t p, Py_ssize_t *k_out):
        cdef Py_ssize_t k, limit = self.n - p - 1
        cdef Match m
        if self.max_skip < limit:
            limit = self.max_skip
        for k in range(1, limit + 1):
            if self._probe(self._start, p + k).len > 0:
                m = self._rule(self._start.index, p + k, None)
                if m.len > 0:
                    k_out[0] = k
                    return self._root(m)
        k_out[0] = 0
        return None

    def parse(self):
        cdef Py_ssize_t n = self.n, p = 0, k = 0
        cdef Match root, first, m
        cdef list items
        root = self.discover()
        self.phase1_counts = (self.body_evals, self.terminal_attempts)
        if root.len == n and root.is_complete:
            return root
        wrap_label = RecoveredRoot(self.grammar.start)
        if not self.config.enabled:
            return span_wrap(root, n, wrap_label, Match)

        self.phase2_entered = True
        self.epoch = 1
        self.in_recovery_phase = True
        first = self._root(self._rule(self._start.index, 0, None))
        if first.len == n:
            return first
        items = []
        if first.len > 0:
            items.append(first)
            p = first.len
        while p < n:
            m = self._resync(p, &k)
            if m is None:
                items.append(_mk(SYNTAX_ERROR_CLAUSE, p, n - p, _EMPTY, False))
                break
            self.resyncs += 1
            items.append(_mk(SYNTAX_ERROR_CLAUSE, p, k, _EMPTY, False))
            items.append(m)
            p += k + m.len
        if not items:
            return span_wrap(first, n, wrap_label, Match)
        if len(items) == 1:
            return items[0]
        if len(items) == 2 and items[0] is first:
            return span_wrap(first, n, wrap_label, Match)
        return _mk(wrap_label, 0, n, tuple(items), False)
