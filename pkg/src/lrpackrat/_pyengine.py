"""Pure-Python match kernels.

This is the reference backend.  ``_cengine.pyx`` mirrors it clause for
clause; any behavioural change here must be made there too (the test suite
cross-checks both backends on random grammars).
"""

from __future__ import annotations

from .grammar import (
    CHAR, CHAR_RANGE, EPSILON, FIRST, LITERAL, NOT_FOLLOWED_BY, ONE_OR_MORE,
    RULE_REF, SEQ, SYNTAX_ERROR, SYNTAX_ERROR_CLAUSE, RecoveredRoot, resolve_refs,
)
from .recovery import RecoveryConfig, span_wrap

BACKEND = "python"


class Match:
    """One node of a parse tree, or a mismatch when ``len < 0``.

    ``seed`` is set only on the mismatch an LR cycle hands out as its
    initial seed (and on mismatches propagated straight from it); it points
    at the memo entry that owns the cycle.
    """

    __slots__ = ("clause", "pos", "len", "children", "is_complete", "seed")

    def __init__(self, clause, pos, length, children=(), is_complete=True, seed=None):
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
        return self.clause is not None and self.clause.kind == SYNTAX_ERROR

    @property
    def is_from_lr_context(self):
        """True while the LR cycle that produced this seed mismatch is still expanding."""
        return self.seed is not None and self.seed.in_rec_path

    def __repr__(self):
        if self.len < 0:
            return "MISMATCH" if self.seed is None else "MISMATCH(lr-seed)"
        label = type(self.clause).__name__
        return f"<Match {label} pos={self.pos} len={self.len} children={len(self.children)}>"


MISMATCH = Match(None, -1, -1, (), False)


class MemoEntry:
    __slots__ = ("result", "in_rec_path", "found_left_rec", "cycle_depth",
                 "cached_in_recovery_phase", "lr_seed", "epoch", "carried")

    def __init__(self):
        self.result = None
        self.in_rec_path = False
        self.found_left_rec = False
        self.cycle_depth = 0
        self.cached_in_recovery_phase = False
        self.lr_seed = None
        self.epoch = 0
        self.carried = False


_COUNTERS = (
    "body_evals", "expansions", "cache_hits", "cross_phase_reuse",
    "cross_phase_incomplete", "skip_searches", "recoveries", "lr_blocked",
    "lr_violations", "probes", "terminal_attempts", "eof_deletions", "resyncs",
    "stale_reuse",
)


class ParseSession:
    """State of one parse: input, memo table, per-position cycle depths, phase flag."""

    backend = BACKEND

    def __init__(self, grammar, text, config=None):
        if not grammar.resolved:
            grammar = resolve_refs(grammar)
        self.grammar = grammar
        self.bodies = grammar.bodies
        self.input = text
        self.n = len(text)
        self.config = config or RecoveryConfig()
        self.max_skip = self.config.max_skip
        self.memo = {}
        self.cycle_depth_for_pos = [0] * (self.n + 1)
        self.in_recovery_phase = False
        self.epoch = 0
        self.phase2_entered = False
        self.phase1_counts = None
        self.max_inspected = -1  # furthest input position any terminal looked at (n = end)
        for name in _COUNTERS:
            setattr(self, name, 0)

    # -- instrumentation -------------------------------------------------

    @property
    def stats(self):
        out = {name: getattr(self, name) for name in _COUNTERS}
        out["phase2_entered"] = self.phase2_entered
        out["memo_entries"] = len(self.memo)
        if self.phase1_counts is not None:
            out["phase1_body_evals"], out["phase1_terminal_attempts"] = self.phase1_counts
        else:
            out["phase1_body_evals"], out["phase1_terminal_attempts"] = self.body_evals, self.terminal_attempts
        return out

    # -- memoized rule matching -----------------------------------------

    def match_rule(self, rule, pos, bound=None):
        """Match rule ``rule`` (name or index) at ``pos`` through the memo table."""
        if not isinstance(rule, int):
            rule = self.grammar.rule_index(rule)
        return self._rule(rule, pos, bound)

    def entry(self, rule, pos):
        """The memo entry for (rule, pos), or None if never touched."""
        if not isinstance(rule, int):
            rule = self.grammar.rule_index(rule)
        return self.memo.get(rule * (self.n + 1) + pos)

    def _rule(self, rule, pos, bound):
        key = rule * (self.n + 1) + pos
        entry = self.memo.get(key)
        if entry is None:
            entry = self.memo[key] = MemoEntry()
        return self.memo_entry_match(entry, rule, pos, bound)

    def cache_valid(self, entry):
        """Phase check for a present, version-fresh entry."""
        return entry.result.is_complete or entry.cached_in_recovery_phase == self.in_recovery_phase

    def memo_entry_match(self, entry, rule, pos, bound=None):
        cdfp = self.cycle_depth_for_pos
        mode = self.in_recovery_phase
        result = entry.result
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
                # incomplete result from the other phase: recompute from scratch
                entry.result = None
                entry.found_left_rec = False

        if entry.in_rec_path:
            # (rule, pos) is already on the call path: left recursion
            if entry.result is None:
                entry.found_left_rec = True
                seed = entry.lr_seed
                if seed is None:
                    seed = entry.lr_seed = Match(None, -1, -1, (), False, entry)
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

        entry.in_rec_path = True
        # a result surviving from before this loop is a stale prior
        entry.carried = entry.result is not None
        body = self.bodies[rule]
        try:
            while True:
                self.body_evals += 1
                new = self.match(body, pos, bound)
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
        entry.cycle_depth = cdfp[pos]
        return entry.result

    # -- clause matching (unmemoized) -----------------------------------

    def match(self, clause, pos, bound=None):
        k = clause.kind
        if k == CHAR:
            self.terminal_attempts += 1
            if pos > self.max_inspected:
                self.max_inspected = pos
            if pos < self.n and self.input[pos] == clause.char:
                return Match(clause, pos, 1)
            return MISMATCH
        if k == RULE_REF:
            m = self._rule(clause.index, pos, bound)
            if m.len < 0:
                return m
            return Match(clause, pos, m.len, (m,), m.is_complete)
        if k == SEQ:
            return self._seq(clause, pos, bound)
        if k == FIRST:
            return self._first(clause, pos, bound)
        if k == CHAR_RANGE:
            self.terminal_attempts += 1
            if pos > self.max_inspected:
                self.max_inspected = pos
            if pos < self.n:
                ch = self.input[pos]
                for lo, hi in clause.ranges:
                    if lo <= ch <= hi:
                        return Match(clause, pos, 1)
            return MISMATCH
        if k == LITERAL:
            self.terminal_attempts += 1
            last = pos + len(clause.text) - 1
            if last > self.max_inspected:
                self.max_inspected = last if last < self.n else self.n
            if self.input.startswith(clause.text, pos):
                return Match(clause, pos, len(clause.text))
            return MISMATCH
        if k == ONE_OR_MORE:
            return self._one_or_more(clause, pos, bound)
        if k == NOT_FOLLOWED_BY:
            if self.probe(clause.child, pos).len < 0:
                return Match(clause, pos, 0)
            return MISMATCH
        if k == EPSILON:
            return Match(clause, pos, 0)
        raise TypeError(f"clause kind {k} cannot be matched (unresolved or derived?)")

    def _seq(self, clause, pos, bound):
        children = clause.children
        last = len(children) - 1
        out = []
        p = pos
        complete = True
        used = False
        for i, child in enumerate(children):
            eb = children[i + 1] if i < last else bound
            m = self.match(child, p, eb)
            if m.len >= 0:
                out.append(m)
                p += m.len
                if not m.is_complete:
                    complete = False
                continue
            # only a sequence that has consumed input may repair itself
            if not self.in_recovery_phase or p == pos:
                return m
            if m.is_from_lr_context:
                self.lr_blocked += 1
                return m
            if p == self.n:
                self.eof_deletions += 1
                used = True
                break
            k, resumed = self.recovery_skip_search(child, p, eb, m)
            if resumed is not None:
                out.append(Match(SYNTAX_ERROR_CLAUSE, p, k, (), False))
                out.append(resumed)
                p += k + resumed.len
                used = True
            elif k > 0 and p + k == self.n:
                # skipped to end of input; the failed child is deleted there
                out.append(Match(SYNTAX_ERROR_CLAUSE, p, k, (), False))
                p = self.n
                used = True
                self.eof_deletions += 1
            else:
                return MISMATCH
        return Match(clause, pos, p - pos, tuple(out), complete and not used)

    def _first(self, clause, pos, bound):
        lr = None
        if self.in_recovery_phase:
            # clean pass first, so ordered choice commits exactly as in discovery
            self.in_recovery_phase = False
            try:
                for alt in clause.children:
                    m = self.match(alt, pos, None)
                    if m.len >= 0:
                        return Match(clause, pos, m.len, (m,), m.is_complete)
            finally:
                self.in_recovery_phase = True
        for alt in clause.children:
            m = self.match(alt, pos, bound)
            if m.len >= 0:
                return Match(clause, pos, m.len, (m,), m.is_complete)
            if lr is None and m.seed is not None and m.seed.in_rec_path:
                lr = m
        return MISMATCH if lr is None else lr

    def _one_or_more(self, clause, pos, bound):
        child = clause.child
        m = self.match(child, pos, bound)
        if m.len < 0:
            return m
        out = [m]
        p = pos + m.len
        complete = m.is_complete
        truncated = False
        if m.len > 0:
            while True:
                m = self.match(child, p, bound)
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
                if m.is_from_lr_context:
                    self.lr_blocked += 1
                    break
                if bound is not None and self.probe(bound, p).len >= 0:
                    break
                k, resumed = self.recovery_skip_search(child, p, bound, m)
                if resumed is not None:
                    out.append(Match(SYNTAX_ERROR_CLAUSE, p, k, (), False))
                    out.append(resumed)
                    p += k + resumed.len
                    complete = False
                    if resumed.len == 0:
                        break
                    continue
                if k > 0:
                    out.append(Match(SYNTAX_ERROR_CLAUSE, p, k, (), False))
                    p += k
                    truncated = True
                break
        return Match(clause, pos, p - pos, tuple(out), complete and not truncated)

    # -- recovery --------------------------------------------------------

    def probe(self, clause, pos):
        """Match with recovery suppressed; memo entries land in the discovery phase."""
        self.probes += 1
        if not self.in_recovery_phase:
            return self.match(clause, pos, None)
        self.in_recovery_phase = False
        try:
            return self.match(clause, pos, None)
        finally:
            self.in_recovery_phase = True

    def recovery_skip_search(self, failed, pos, bound=None, mismatch=MISMATCH):
        """Find the smallest skip after which ``failed`` matches cleanly.

        Returns ``(k, match)`` on success.  On failure returns ``(k, None)``:
        ``k > 0`` is the skip at which ``bound`` matched or end of input was
        reached, ``k == 0`` means the skip budget ran out.
        """
        self.skip_searches += 1
        if mismatch.is_from_lr_context:
            self.lr_violations += 1
        limit = min(self.max_skip, self.n - pos)
        for k in range(1, limit + 1):
            m = self.probe(failed, pos + k)
            if m.len >= 0:
                self.recoveries += 1
                return k, m
            if bound is not None and self.probe(bound, pos + k).len >= 0:
                return k, None
        if pos + limit == self.n:
            return limit, None
        return 0, None

    # -- driver ----------------------------------------------------------

    def _root(self, body):
        if body.len < 0:
            return body
        return Match(self.grammar.start_ref, body.pos, body.len, (body,), body.is_complete)

    def discover(self):
        """Phase 1: match the start rule at 0 with recovery disabled."""
        self.in_recovery_phase = False
        return self._root(self._rule(self.grammar.start_ref.index, 0, None))

    def _resync(self, p):
        start = self.grammar.start_ref.index
        limit = min(self.max_skip, self.n - p - 1)
        for k in range(1, limit + 1):
            if self.probe(self.grammar.start_ref, p + k).len > 0:
                m = self._rule(start, p + k, None)
                if m.len > 0:
                    return k, self._root(m)
        return 0, None

    def parse(self):
        """Two-phase parse; always returns a match spanning the whole input."""
        n = self.n
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
        first = self._root(self._rule(self.grammar.start_ref.index, 0, None))
        if first.len == n:
            return first
        items = []
        p = 0
        if first.len > 0:
            items.append(first)
            p = first.len
        while p < n:
            k, m = self._resync(p)
            if m is None:
                items.append(Match(SYNTAX_ERROR_CLAUSE, p, n - p, (), False))
                break
            self.resyncs += 1
            items.append(Match(SYNTAX_ERROR_CLAUSE, p, k, (), False))
            items.append(m)
            p += k + m.len
        if not items:
            return span_wrap(first, n, wrap_label, Match)
        if len(items) == 1:
            return items[0]
        if len(items) == 2 and items[0] is first:
            return span_wrap(first, n, wrap_label, Match)
        return Match(wrap_label, 0, n, tuple(items), False)
