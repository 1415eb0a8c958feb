import pytest
from hypothesis import given, settings, strategies as st

from lrpackrat.grammar import (
    Char, CharRange, Epsilon, First, Literal, NotFollowedBy, OneOrMore, RuleRef, Seq,
)
from lrpackrat.grammar_text import (
    DuplicateRule, GrammarSource, GrammarSyntaxError, format_clause, format_grammar,
    load_grammar, parse_grammar_text,
)
from lrpackrat.oracle import random_grammar


def body(text):
    return parse_grammar_text("A <- " + text + " ;").rules["A"]


class TestPrimaries:
    def test_single_char_literal_is_char(self):
        assert body("'a'") == Char("a")

    def test_multi_char_literal(self):
        assert body("'abc'") == Literal("abc")

    def test_escapes(self):
        assert body(r"'\n'") == Char("\n")
        assert body(r"'\''") == Char("'")
        assert body(r"'\\'") == Char("\\")
        assert body(r"'a\tb'") == Literal("a\tb")

    def test_bad_escape(self):
        with pytest.raises(GrammarSyntaxError):
            body(r"'\q'")

    def test_class_range(self):
        assert body("[0-9]") == CharRange("0", "9")

    def test_class_mixed(self):
        assert body("[a-cx_]") == CharRange(("a", "c"), "x", "_")

    def test_class_escaped_dash_and_bracket(self):
        assert body(r"[\-\]]") == CharRange(("-", "-"), ("]", "]"))

    def test_class_inverted_range(self):
        with pytest.raises(GrammarSyntaxError):
            body("[z-a]")

    def test_empty_class(self):
        with pytest.raises(GrammarSyntaxError):
            body("[]")

    def test_empty_literal_rejected(self):
        with pytest.raises(GrammarSyntaxError):
            body("''")

    def test_epsilon(self):
        assert body("()") == Epsilon()

    def test_rule_reference(self):
        assert parse_grammar_text("A <- B ; B <- 'b' ;").rules["A"] == RuleRef("B")

    def test_group(self):
        assert body("('a' / 'b') 'c'") == Seq(First(Char("a"), Char("b")), Char("c"))


class TestOperators:
    def test_sequence(self):
        assert body("'a' 'b'") == Seq(Char("a"), Char("b"))

    def test_choice_lower_than_sequence(self):
        assert body("'a' 'b' / 'c'") == First(Seq(Char("a"), Char("b")), Char("c"))

    def test_optional_desugared(self):
        assert body("'a'?") == First(Char("a"), Epsilon())

    def test_star_desugared(self):
        assert body("'a'*") == First(OneOrMore(Char("a")), Epsilon())

    def test_plus(self):
        assert body("'a'+") == OneOrMore(Char("a"))

    def test_not(self):
        assert body("!'a'") == NotFollowedBy(Char("a"))

    def test_and_desugared(self):
        assert body("&'a'") == NotFollowedBy(NotFollowedBy(Char("a")))

    def test_prefix_binds_tighter_than_suffix(self):
        assert body("!'a'+") == OneOrMore(NotFollowedBy(Char("a")))

    def test_stacked_suffixes(self):
        assert body("'a'+?") == First(OneOrMore(Char("a")), Epsilon())


class TestLayout:
    def test_comments_and_whitespace(self):
        g = parse_grammar_text("# top\nA <- 'a'  # trailing\n   B ;\n\tB <- 'b' ; # end")
        assert g.names == ("A", "B")

    def test_first_rule_is_start(self):
        assert parse_grammar_text("Z <- 'z' ; A <- 'a' ;").start == "Z"

    def test_locations_recorded(self):
        g = parse_grammar_text("A <- 'a' ;\n  B <- 'b' ;")
        assert g.locations["A"] == (1, 1) and g.locations["B"] == (2, 3)

    def test_underscore_identifiers(self):
        assert parse_grammar_text("_a1 <- 'x' ;").start == "_a1"


class TestErrors:
    def test_missing_semicolon_reports_line(self):
        with pytest.raises(GrammarSyntaxError) as ei:
            parse_grammar_text("A <- 'a'\nB <- 'b' ;", origin="f.peg")
        assert ei.value.line == 2
        assert str(ei.value).startswith("f.peg:2:")

    def test_missing_arrow(self):
        with pytest.raises(GrammarSyntaxError):
            parse_grammar_text("A 'a' ;")

    def test_unclosed_literal(self):
        with pytest.raises(GrammarSyntaxError) as ei:
            parse_grammar_text("A <- 'a ;")
        assert ei.value.line == 1

    def test_unclosed_group(self):
        with pytest.raises(GrammarSyntaxError):
            parse_grammar_text("A <- ('a' ;")

    def test_empty_body(self):
        with pytest.raises(GrammarSyntaxError):
            parse_grammar_text("A <- ;")

    def test_empty_file(self):
        with pytest.raises(GrammarSyntaxError):
            parse_grammar_text("  # nothing\n")

    def test_dangling_prefix(self):
        with pytest.raises(GrammarSyntaxError):
            parse_grammar_text("A <- ! ;")

    def test_duplicate_rule(self):
        with pytest.raises(DuplicateRule) as ei:
            parse_grammar_text("A <- 'a' ;\nA <- 'b' ;")
        assert ei.value.line == 2

    def test_column_reported(self):
        with pytest.raises(GrammarSyntaxError) as ei:
            parse_grammar_text("A <- 'a' )")
        assert ei.value.col == 10


class TestFiles:
    def test_load_grammar_resolves(self, tmp_path):
        p = tmp_path / "g.peg"
        p.write_text("S <- 'a' S / 'b' ;\n", encoding="utf-8")
        g = load_grammar(p)
        assert g.resolved and g.start_ref.name == "S"

    def test_load_grammar_origin_in_errors(self, tmp_path):
        p = tmp_path / "bad.peg"
        p.write_text("S <- 'a'\n", encoding="utf-8")
        with pytest.raises(GrammarSyntaxError) as ei:
            load_grammar(p)
        assert "bad.peg" in str(ei.value)

    def test_source_object(self):
        g = parse_grammar_text(GrammarSource("A <- 'a' ;", "mem"))
        assert g.origin == "mem"

    def test_bundled_grammars_load(self):
        from importlib import resources
        for name in ("expr.peg", "arith.peg"):
            with resources.as_file(resources.files("lrpackrat") / "grammars" / name) as p:
                assert load_grammar(p).resolved


class TestFormatting:
    @pytest.mark.parametrize("src", [
        "'a' 'b' / 'c'", "('a' / 'b') 'c'", "'a'?", "'a'*", "'a'+", "!'a'", "&'a'",
        "[a-z_]", r"'it\'s'", "()", "('a' 'b')+", "!('a' / 'b')", r"[\-\]]", r"'\n\t\\'",
    ])
    def test_round_trip(self, src):
        c = body(src)
        assert body(format_clause(c)) == c

    def test_format_grammar_round_trip(self):
        g = parse_grammar_text("E <- E '+' T / T ; T <- [0-9]+ ;")
        assert parse_grammar_text(format_grammar(g)) == g

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**9))
    def test_random_grammars_round_trip(self, seed):
        import random
        from lrpackrat.grammar import Grammar, desugar
        g = random_grammar(random.Random(seed), 5, 3, "ab'\\-]")
        raw = Grammar([(n, desugar(b)) for n, b in g.rules.items()])
        back = parse_grammar_text(format_grammar(raw))
        assert back.rules == {n: desugar(b) for n, b in g.rules.items()}
