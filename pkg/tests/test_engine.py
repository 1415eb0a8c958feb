import pytest

from lrpackrat import Char, RecoveryConfig, make_session
from lrpackrat.grammar import RULE_REF
from lrpackrat.engine import available_backends, backend_module, default_backend
from lrpackrat.oracle import shape

from conftest import G, discover

EXPR = "E <- E '+' N / N ; N <- [0-9] ;"


def flat(m):
    """Rule structure only: nested (name, pos, len, [subrules])."""
    out = []
    stack = list(reversed(m.children))
    while stack:
        c = stack.pop()
        if c.clause is not None and c.clause.kind == RULE_REF and c.children:
            out.append((c.clause.name, c.pos, c.len, flat(c.children[0])))
        else:
            stack.extend(reversed(c.children))
    return out


def rule_tree(root):
    return (root.clause.name, root.pos, root.len, flat(root.children[0]))


class TestTerminals:
    def test_char(self, backend):
        assert discover("A <- 'a' ;", "a", backend)[0].len == 1
        assert discover("A <- 'a' ;", "b", backend)[0].len == -1

    def test_char_at_end(self, backend):
        assert discover("A <- 'a' ;", "", backend)[0].len == -1

    def test_literal(self, backend):
        assert discover("A <- 'abc' ;", "abcd", backend)[0].len == 3
        assert discover("A <- 'abc' ;", "ab", backend)[0].len == -1

    def test_char_range(self, backend):
        g = "A <- [a-c0] ;"
        assert [discover(g, s, backend)[0].len for s in "ab0d"] == [1, 1, 1, -1]

    def test_epsilon(self, backend):
        assert discover("A <- () ;", "xyz", backend)[0].len == 0

    def test_non_ascii(self, backend):
        assert discover("A <- 'é' [α-ω]+ ;", "éλμ", backend)[0].len == 3


class TestOperators:
    def test_seq(self, backend):
        assert discover("A <- 'a' 'b' 'c' ;", "abc", backend)[0].len == 3
        assert discover("A <- 'a' 'b' 'c' ;", "abx", backend)[0].len == -1

    def test_first_commits_to_first_match(self, backend):
        r, _ = discover("A <- 'a' / 'a' 'b' ;", "ab", backend)
        assert r.len == 1

    def test_first_falls_through(self, backend):
        assert discover("A <- 'x' / 'y' / 'z' ;", "z", backend)[0].len == 1

    def test_one_or_more_greedy(self, backend):
        assert discover("A <- 'a'+ ;", "aaab", backend)[0].len == 3

    def test_one_or_more_needs_one(self, backend):
        assert discover("A <- 'a'+ ;", "b", backend)[0].len == -1

    def test_one_or_more_of_nullable_terminates(self, backend):
        assert discover("A <- ('a'?)+ ;", "aab", backend)[0].len == 2

    def test_star_no_backtracking(self, backend):
        assert discover("A <- 'a'* 'a' ;", "aaa", backend)[0].len == -1

    def test_not_followed_by(self, backend):
        g = "A <- !'b' [a-z] ;"
        assert discover(g, "a", backend)[0].len == 1
        assert discover(g, "b", backend)[0].len == -1

    def test_followed_by(self, backend):
        g = "A <- &'a' [a-z]+ ;"
        assert discover(g, "ab", backend)[0].len == 2
        assert discover(g, "ba", backend)[0].len == -1

    def test_lookahead_consumes_nothing(self, backend):
        r, _ = discover("A <- !'x' ;", "abc", backend)
        assert r.len == 0

    def test_optional(self, backend):
        g = "A <- 'a'? 'b' ;"
        assert discover(g, "ab", backend)[0].len == 2
        assert discover(g, "b", backend)[0].len == 1

    def test_nested_rules(self, backend):
        g = "S <- A B ; A <- 'a'+ ; B <- 'b'+ ;"
        r, _ = discover(g, "aabbb", backend)
        assert rule_tree(r) == ("S", 0, 5, [("A", 0, 2, []), ("B", 2, 3, [])])

    def test_partial_match_is_prefix(self, backend):
        r, _ = discover("A <- 'a'+ ;", "aab", backend)
        assert r.len == 2

    def test_root_wraps_start_rule(self, backend):
        r, _ = discover("A <- 'a' ;", "a", backend)
        assert r.clause.name == "A" and len(r.children) == 1

    def test_unresolved_grammar_is_resolved(self, backend):
        from lrpackrat import parse_grammar_text
        g = parse_grammar_text("A <- 'a' ;")
        assert make_session(g, "a", backend=backend).parse().len == 1


class TestMatchObjects:
    def test_match_properties(self, backend):
        r, _ = discover("A <- 'a' 'b' ;", "ab", backend)
        assert r.matched and r.end == 2 and not r.is_error and r.is_complete

    def test_mismatch_properties(self, backend):
        mod = backend_module(backend)
        assert not mod.MISMATCH.matched and mod.MISMATCH.len == -1
        assert not mod.MISMATCH.is_from_lr_context

    def test_repr(self, backend):
        r, _ = discover("A <- 'a' ;", "a", backend)
        assert "len=1" in repr(r)
        assert repr(backend_module(backend).MISMATCH) == "MISMATCH"

    def test_match_constructor(self, backend):
        m = backend_module(backend).Match(Char("a"), 3, 1)
        assert (m.pos, m.len, m.children, m.is_complete) == (3, 1, (), True)


class TestLeftRecursion:
    def test_direct_left_assoc(self, backend):
        r, _ = discover(EXPR, "1+2+3", backend)
        assert rule_tree(r) == ("E", 0, 5, [("E", 0, 3, [("E", 0, 1, [("N", 0, 1, [])]),
                                                         ("N", 2, 1, [])]), ("N", 4, 1, [])])

    def test_direct_single_term(self, backend):
        assert discover(EXPR, "7", backend)[0].len == 1

    def test_direct_stops_at_garbage(self, backend):
        assert discover(EXPR, "1+2+", backend)[0].len == 3

    def test_indirect(self, backend):
        assert discover("A <- B 'x' / 'y' ; B <- A ;", "yxxx", backend)[0].len == 4

    def test_indirect_three(self, backend):
        assert discover("A <- B 'x' / 'y' ; B <- C ; C <- A ;", "yxx", backend)[0].len == 3

    def test_lr_under_optional(self, backend):
        assert discover("A <- 'w'? A 'z' / 'x' ;", "xzz", backend)[0].len == 3

    def test_lr_under_first(self, backend):
        assert discover("A <- 'y' / A 'z' / 'x' ;", "xzz", backend)[0].len == 3

    def test_earlier_alternative_blocks_growth(self, backend):
        # 'x' 'y' wins every round, so the A 'z' alternative is never reached
        assert discover("A <- 'x' 'y' / A 'z' / 'x' ;", "xyzz", backend)[0].len == 2

    def test_lr_seed_fails(self, backend):
        assert discover("A <- A 'x' ;", "xxx", backend)[0].len == -1

    def test_right_recursion_is_right_leaning(self, backend):
        r, _ = discover("E <- N '+' E / N ; N <- '1' ;", "1+1+1", backend)
        tree = rule_tree(r)
        assert tree[3][1][0] == "E" and tree[3][1][2] == 3

    def test_ambiguous_is_right_leaning(self, backend):
        r, _ = discover("E <- E '+' E / N ; N <- '1' ;", "1+1+1", backend)
        tree = rule_tree(r)
        assert tree[3][0] == ("E", 0, 1, [("N", 0, 1, [])])
        assert tree[3][1][1:3] == (2, 3)

    def test_two_operator_precedence(self, backend):
        g = "E <- E '+' T / T ; T <- T '*' F / F ; F <- [0-9] ;"
        r, _ = discover(g, "1+2*3", backend)
        tree = rule_tree(r)
        assert tree[3][1][0] == "T" and tree[3][1][2] == 3

    def test_expansions_counted(self, backend):
        _, s = discover(EXPR, "1+2+3", backend)
        assert s.stats["expansions"] >= 3

    def test_in_rec_path_cleared_after_parse(self, backend):
        _, s = discover("E <- F 'n' / 'n' ; F <- E '+' I* / G '-' ; G <- H 'm' / E ; "
                        "H <- G 'l' ; I <- '(' A+ ')' ; A <- 'a' ;", "nlm-n+(aaa)n", backend)
        assert all(not e.in_rec_path for e in s.memo.values())

    def test_long_chain_is_iterative(self, backend):
        text = "+".join("1" * 3000)
        r, s = discover(EXPR, text, backend)
        assert r.len == len(text)
        assert s.stats["body_evals"] < 4 * len(text)

    def test_lr_seed_is_tagged(self, backend):
        r, _ = discover("A <- A 'x' ;", "x", backend)
        assert r.len == -1


class TestMemo:
    def test_memo_reused(self, backend):
        g = "S <- A 'x' / A 'y' ; A <- 'a'+ ;"
        _, s = discover(g, "aaay", backend)
        assert s.stats["cache_hits"] >= 1
        assert s.stats["body_evals"] == 2

    def test_memo_keys(self, backend):
        _, s = discover("S <- A 'b' ; A <- 'a' ;", "ab", backend)
        assert set(s.memo) == {0 * 3 + 0, 1 * 3 + 0}

    def test_entry_lookup(self, backend):
        _, s = discover("S <- A 'b' ; A <- 'a' ;", "ab", backend)
        e = s.entry("A", 0)
        assert e.result.len == 1 and not e.in_rec_path
        assert s.entry("A", 1) is None

    def test_cycle_depth_stamped_without_lr(self, backend):
        _, s = discover("S <- A 'b' ; A <- 'a' ;", "ab", backend)
        assert s.entry("A", 0).cycle_depth == s.cycle_depth_for_pos[0]

    def test_cycle_depth_advances_with_growth(self, backend):
        _, s = discover(EXPR, "1+2+3", backend)
        assert s.cycle_depth_for_pos[0] >= 3
        assert s.entry("E", 0).cycle_depth == s.cycle_depth_for_pos[0]

    def test_cache_valid_phase_rule(self, backend):
        _, s = discover("S <- 'a' 'b' ;", "ab", backend)
        e = s.entry("S", 0)
        assert s.cache_valid(e)
        s.in_recovery_phase = True
        assert s.cache_valid(e)  # complete results cross phases

    def test_cache_invalid_for_incomplete_other_phase(self, backend):
        mod = backend_module(backend)
        _, s = discover("S <- 'a' 'b' ;", "ab", backend)
        e = mod.MemoEntry()
        e.result = mod.Match(Char("a"), 0, 1, (), False)
        e.cached_in_recovery_phase = False
        s.in_recovery_phase = True
        assert not s.cache_valid(e)

    def test_match_rule_by_name(self, backend):
        s = make_session(G("S <- A ; A <- 'a'+ ;"), "aaa", backend=backend)
        assert s.match_rule("A", 1).len == 2

    def test_body_evals_linear(self, backend):
        counts = []
        for n in (101, 201, 401):
            text = "+".join("1" * ((n + 1) // 2))
            _, s = discover(EXPR, text, backend)
            counts.append(s.stats["body_evals"])
        assert counts[1] / counts[0] == pytest.approx(2, rel=0.05)
        assert counts[2] / counts[1] == pytest.approx(2, rel=0.05)

    def test_max_inspected(self, backend):
        _, s = discover("S <- 'ab' / 'a' 'c' ;", "axxxx", backend)
        assert s.max_inspected == 1


class TestStaleReuse:
    """Inputs where a stale memo result outlives its recomputation.

    The expected values document the engine's fixed-point semantics; the
    oracle's bounded unrolling recomputes from scratch and differs here.
    """

    def test_shorter_recomputation_keeps_old_result(self, backend):
        g = G("R0 <- R3 'b' / !'a' ; R3 <- R0 / 'b' ;")
        r, s = discover(g, "b", backend)
        assert r.len == 0
        assert s.stats["stale_reuse"] > 0

    def test_stale_seed_in_outer_iteration(self, backend):
        g = G("R0 <- R3 ; R1 <- R4 / R0 'a' ; R3 <- R4 ; R4 <- R1? ;")
        r, s = discover(g, "a", backend)
        assert r.len == 0
        assert s.stats["stale_reuse"] > 0

    def test_oracle_differs_on_these(self):
        from lrpackrat.oracle import oracle_match
        assert oracle_match(G("R0 <- R3 'b' / !'a' ; R3 <- R0 / 'b' ;"), "b").len == 1
        assert oracle_match(G("R0 <- R3 ; R1 <- R4 / R0 'a' ; R3 <- R4 ; R4 <- R1? ;"), "a").len == 1

    def test_ordinary_lr_has_no_stale_reuse(self, backend):
        _, s = discover(EXPR, "1+2+3+4", backend)
        assert s.stats["stale_reuse"] == 0


class TestBackendSelection:
    def test_python_always_available(self):
        assert "python" in available_backends()

    def test_default_backend_is_available(self):
        assert default_backend() in available_backends()

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            backend_module("fortran")

    def test_env_forces_python(self, monkeypatch):
        monkeypatch.setenv("LRPACKRAT_PURE_PYTHON", "1")
        assert default_backend() == "python"

    def test_session_reports_backend(self, backend):
        assert make_session(G("A <- 'a' ;"), "a", backend=backend).backend == backend

    def test_config_default(self, backend):
        s = make_session(G("A <- 'a' ;"), "a", backend=backend)
        assert s.max_skip == RecoveryConfig().max_skip

    def test_same_shapes_across_backends(self):
        if len(available_backends()) < 2:
            pytest.skip("compiled backend not built")
        g = G("E <- E '+' T / T ; T <- T '*' F / F ; F <- [0-9]+ / '(' E ')' ;")
        text = "1+(2*3)+4*(5+6)"
        a = make_session(g, text, backend="python").parse()
        b = make_session(g, text, backend="cython").parse()
        assert shape(a) == shape(b)
