import json

import pytest

from lrpackrat.treeio import (
    ErrorSpan, TreeFormat, collect_errors, node_label, serialize_tree, tree_to_dict,
)

from conftest import run

ARITH = "E <- E '+' T / T ; T <- [0-9]+ ;"


def tree(text, grammar=ARITH, backend=None):
    return run(grammar, text, backend)[0]


class TestSexpr:
    def test_flattened(self, backend):
        r = tree("1+2", backend=backend)
        assert serialize_tree(r, "sexpr", "1+2") == '(E 0 3 (E 0 1 (T 0 1 "1")) "+" (T 2 1 "2"))'

    def test_enum_format(self):
        r = tree("1")
        assert serialize_tree(r, TreeFormat.SEXPR, "1") == '(E 0 1 (T 0 1 "1"))'

    def test_default_is_sexpr(self):
        assert serialize_tree(tree("1"), text="1").startswith("(E")

    def test_raw_shows_every_node(self):
        out = serialize_tree(tree("1"), "sexpr", "1", raw=True)
        assert "<first>" in out and "<plus>" in out and "([0-9] 0 1" in out

    def test_error_node(self):
        assert serialize_tree(tree("?"), "sexpr", "?") == '(ERROR 0 1 "?")'

    def test_quotes_escaped(self):
        r = tree('"', 'S <- \'"\' ;')
        assert serialize_tree(r, "sexpr", '"') == r'(S 0 1 "\"")'

    def test_lookahead_dropped(self):
        r = tree("ab", "S <- !'x' 'a' 'b' ;")
        assert serialize_tree(r, "sexpr", "ab") == '(S 0 2 "a" "b")'

    def test_epsilon_dropped(self):
        r = tree("b", "S <- 'a'? 'b' ;")
        assert serialize_tree(r, "sexpr", "b") == '(S 0 1 "b")'

    def test_deep_tree_no_recursion_error(self):
        text = "+".join("1" * 5000)
        out = serialize_tree(tree(text), "sexpr", text)
        assert out.count("(E ") == 5000

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            serialize_tree(tree("1"), "xml", "1")


class TestJson:
    def test_valid_json(self):
        out = serialize_tree(tree("1+2"), "json", "1+2")
        d = json.loads(out)
        assert d["rule"] == "E" and d["pos"] == 0 and d["len"] == 3 and d["complete"]

    def test_children_structure(self):
        d = json.loads(serialize_tree(tree("1+2"), "json", "1+2"))
        assert [c["rule"] for c in d["children"]] == ["E", "'+'", "T"]
        assert d["children"][1]["text"] == "+"

    def test_error_flagged(self):
        d = json.loads(serialize_tree(tree("1+?"), "json", "1+?"))
        errs = [c for c in d["children"] if c["error"]]
        assert len(errs) == 1 and errs[0]["text"] == "+?" and errs[0]["rule"] == "ERROR"
        assert not d["complete"]

    def test_indent(self):
        out = serialize_tree(tree("1"), "json", "1", indent=2)
        assert "\n  " in out and json.loads(out)["len"] == 1

    def test_matches_tree_to_dict(self):
        r = tree("1+2+3")
        assert json.loads(serialize_tree(r, "json", "1+2+3")) == tree_to_dict(r, "1+2+3")

    def test_raw_json(self):
        d = tree_to_dict(tree("1"), "1", raw=True)
        assert d["children"][0]["rule"] == "<first>"

    def test_deep_json(self):
        text = "+".join("1" * 3000)
        out = serialize_tree(tree(text), "json", text)
        assert out.count('"rule": "E"') == 3000

    def test_unicode_kept(self):
        r = tree("é", "S <- 'é' ;")
        assert "é" in serialize_tree(r, "json", "é")


class TestErrors:
    def test_clean(self):
        assert collect_errors(tree("1+2")) == []

    def test_total(self):
        assert collect_errors(tree("?")) == [ErrorSpan(0, 1, "total")]

    def test_trailing(self):
        assert collect_errors(tree("1+?")) == [ErrorSpan(1, 2, "trailing")]

    def test_skip(self):
        assert collect_errors(tree("1+?+3")) == [ErrorSpan(1, 3, "skip")]

    def test_sorted_by_position(self):
        errs = collect_errors(tree("1?2?3"))
        assert [e.pos for e in errs] == sorted(e.pos for e in errs) and len(errs) == 2

    def test_node_label(self):
        r = tree("1")
        assert node_label(r) == "E"
        assert node_label(tree("?")) == "ERROR"


def test_total_failure_sexpr():
    assert serialize_tree(tree("yy", "A <- 'x' ;"), "sexpr", "yy") == '(ERROR 0 2 "yy")'


def test_single_rule_sexpr():
    assert serialize_tree(tree("1", "T <- '1' ;"), "sexpr", "1") == '(T 0 1 "1")'


def test_distinct_trees_distinct_text():
    a = serialize_tree(tree("1+1+1", "E <- E '+' T / T ; T <- '1' ;"), "sexpr", "1+1+1")
    b = serialize_tree(tree("1+1+1", "E <- T '+' E / T ; T <- '1' ;"), "sexpr", "1+1+1")
    assert a != b


def test_deterministic_output():
    r = tree("1+2+3")
    assert serialize_tree(r, "json", "1+2+3") == serialize_tree(r, "json", "1+2+3")
