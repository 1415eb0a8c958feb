import random

import pytest

from lrpackrat.grammar import left_recursive_rules
from lrpackrat.oracle import (
    BudgetExceeded, all_strings, oracle_match, random_grammar, random_lr_grammar,
    random_non_lr_grammar, shape,
)

from conftest import G


def test_single_char():
    assert oracle_match(G("A <- 'x' ;"), "x").len == 1


def test_direct_lr():
    assert oracle_match(G("E <- E '+' T / T ; T <- '1' ;"), "1+1").len == 3


def test_left_leaning_shape():
    m = oracle_match(G("E <- E '+' T / T ; T <- '1' ;"), "1+1+1")
    body = m.children[0].children[0]  # Seq under First
    assert body.children[0].len == 3


def test_mismatch():
    assert oracle_match(G("A <- 'x' ;"), "y").len == -1


def test_detail_reports_inspection():
    r = oracle_match(G("A <- 'ab' / 'a' 'c' ;"), "axx", detail=True)
    assert r.max_inspected == 1 and r.match.len == -1 and not r.left_recursive


def test_detail_left_recursive_flag():
    r = oracle_match(G("E <- E 'a' / 'a' ;"), "aa", detail=True)
    assert r.left_recursive and r.match.len == 2


def test_depth_budget():
    g = G("A <- 'a' A / 'a' ;")
    with pytest.raises(BudgetExceeded):
        oracle_match(g, "a" * 100, depth_budget=50)


def test_step_budget():
    with pytest.raises(BudgetExceeded):
        oracle_match(G("A <- 'a' A / 'a' ;"), "a" * 50, step_budget=10)


def test_bad_depth_budget():
    with pytest.raises(ValueError):
        oracle_match(G("A <- 'a' ;"), "a", depth_budget=0)


def test_named_rule():
    assert oracle_match(G("A <- B 'x' ; B <- 'b'+ ;"), "bbx", rule="B").len == 2


def test_shape_mismatch():
    assert shape(oracle_match(G("A <- 'x' ;"), "y")) == ("MISMATCH",)


def test_shape_labels():
    s = shape(oracle_match(G("A <- 'x' 'yz' ;"), "xyz"))
    assert s[0] == "A" and s[3][0][0] == "Seq"
    assert [c[0] for c in s[3][0][3]] == ["'x'", "'yz'"]


def test_all_strings():
    out = list(all_strings("ab", 2))
    assert out == ["", "a", "b", "aa", "ab", "ba", "bb"]


def test_random_grammars_resolved():
    rng = random.Random(0)
    for _ in range(20):
        g = random_grammar(rng, 4, 2)
        assert g.resolved and 1 <= len(g.names) <= 4


def test_random_non_lr():
    rng = random.Random(1)
    for _ in range(20):
        assert not left_recursive_rules(random_non_lr_grammar(rng))


def test_random_lr():
    rng = random.Random(2)
    for _ in range(20):
        assert left_recursive_rules(random_lr_grammar(rng))
