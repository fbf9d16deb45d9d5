import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termalign.terms import (
    Abs,
    Comb,
    Id,
    Kind,
    TtSyntaxError,
    constants_of,
    parse_sexp,
    parse_tt_file,
    to_sexp,
)
from util import alpha_rename, random_term


class TestParseTtFile:
    def test_listing_items(self, listing2_text, listing2_golden):
        items = parse_tt_file(listing2_text, 1)
        assert [it.name for it in items] == [
            "const/arith/PRE", "thm/arith/PRE_0", "thm/arith/PRE_1",
        ]
        assert [it.kind for it in items] == [Kind.TY, Kind.AX, Kind.AX]
        assert all(it.library_id == 1 for it in items)
        assert tuple(to_sexp(it.term) for it in items) == listing2_golden

    def test_ty_wraps_declared_constant(self, listing2_text):
        item = parse_tt_file(listing2_text, 1)[0]
        assert item.term == Comb(
            Id(":"),
            Comb(Id("const/arith/PRE"),
                 Comb(Id(">"), Comb(Id("type/nums/num"), Id("type/nums/num")))),
        )

    def test_every_ty_item_has_typing_shape(self, listing2_text):
        for item in parse_tt_file(listing2_text, 1):
            if item.kind is Kind.TY:
                term = item.term
                assert isinstance(term, Comb) and term.fun == Id(":")
                assert isinstance(term.arg, Comb) and term.arg.fun == Id(item.name)

    def test_single_leaf_item(self):
        items = parse_tt_file("tt('a', ax, x).", 3)
        assert len(items) == 1
        item = items[0]
        assert item.name == "a"
        assert item.kind is Kind.AX
        assert item.term == Id("x")
        assert item.library_id == 3

    def test_quantifier_shape(self, listing2_text):
        item = parse_tt_file(listing2_text, 1)[2]
        assert item.term == Comb(
            Id("!"),
            Abs("n", Id("type/nums/num"),
                Comb(Id("="),
                     Comb(Comb(Id("const/arith/PRE"),
                               Comb(Id("const/nums/SUC"), Id("n"))),
                          Id("n")))),
        )

    def test_application_is_left_associative(self):
        item = parse_tt_file("tt('a', ax, (f a b)).", 1)[0]
        assert item.term == Comb(Comb(Id("f"), Id("a")), Id("b"))

    def test_infix_encodes_as_pair_application(self):
        item = parse_tt_file("tt('a', ax, (x = y)).", 1)[0]
        assert item.term == Comb(Id("="), Comb(Id("x"), Id("y")))

    def test_precedence_conjunction_tighter_than_implication(self):
        item = parse_tt_file("tt('a', ax, (p /\\ q ==> r)).", 1)[0]
        assert item.term == Comb(
            Id("==>"),
            Comb(Comb(Id("/\\"), Comb(Id("p"), Id("q"))), Id("r")),
        )

    def test_infix_right_associative(self):
        item = parse_tt_file("tt('a', ax, (p /\\ q /\\ r)).", 1)[0]
        assert item.term == Comb(
            Id("/\\"),
            Comb(Id("p"), Comb(Id("/\\"), Comb(Id("q"), Id("r")))),
        )

    def test_comments_and_blank_lines_ignored(self):
        text = "% header comment\n\ntt('a', ax, x). % trailing\n# another\ntt('b', ax, y).\n"
        assert [it.name for it in parse_tt_file(text, 1)] == ["a", "b"]

    def test_clause_spanning_lines(self):
        text = "tt('a',\n   ax,\n   (x =\n    y)\n).\n"
        item = parse_tt_file(text, 1)[0]
        assert item.term == Comb(Id("="), Comb(Id("x"), Id("y")))

    def test_quoted_constants_recorded(self, listing2_text):
        item = parse_tt_file(listing2_text, 1)[2]
        assert "const/arith/PRE" in item.constants
        assert "const/nums/SUC" in item.constants
        assert "n" not in item.constants

    def test_unbalanced_parens(self):
        with pytest.raises(TtSyntaxError):
            parse_tt_file("tt('a', ax, ((x = y)).", 1)

    def test_unknown_operator_rejected(self):
        with pytest.raises(TtSyntaxError):
            parse_tt_file("tt('a', ax, (x <=> y)).", 1, operators={"=": 5})

    def test_unknown_character(self):
        with pytest.raises(TtSyntaxError):
            parse_tt_file("tt('a', ax, (x & y)).", 1)

    def test_error_carries_position(self):
        with pytest.raises(TtSyntaxError) as exc:
            parse_tt_file("tt('a', ax,\n  (x = )).", 1)
        assert exc.value.line == 2

    def test_bad_kind(self):
        with pytest.raises(TtSyntaxError):
            parse_tt_file("tt('a', def, x).", 1)

    def test_missing_terminator(self):
        with pytest.raises(TtSyntaxError):
            parse_tt_file("tt('a', ax, x)", 1)

    def test_escaped_quote_in_atom(self):
        item = parse_tt_file(r"tt('a\'b', ax, x).", 1)[0]
        assert item.name == "a'b"

    def test_custom_operator_table(self):
        items = parse_tt_file("tt('a', ax, (x + y)).", 1, operators={"=": 5, "+": 6})
        assert items[0].term == Comb(Id("+"), Comb(Id("x"), Id("y")))


class TestSexp:
    def test_id_round(self):
        assert to_sexp(Id("x")) == '(Id "x")'
        assert parse_sexp('(Id "x")') == Id("x")

    def test_simple_theorem_sexp(self, simple_theorem):
        text = ('(Comb (Id "!") (Abs "x" (Id "num") '
                '(Comb (Id "=") (Comb (Id "x") (Id "x")))))')
        assert to_sexp(simple_theorem) == text
        assert parse_sexp(text) == simple_theorem

    def test_escapes_round_trip(self):
        term = Abs('we"ird', Id("a\\b"), Id('q"\\'))
        assert parse_sexp(to_sexp(term)) == term

    def test_malformed(self):
        for bad in ['(Id "x"', '(Comb (Id "x"))', '(Abs "x" (Id "a"))',
                    '(Foo "x")', '(Id "x") junk', "", "(Id x)"]:
            with pytest.raises(TtSyntaxError):
                parse_sexp(bad)

    def test_arity_mismatch(self):
        with pytest.raises(TtSyntaxError):
            parse_sexp('(Comb (Id "x") (Id "y") (Id "z"))')

    def test_round_trip_random(self):
        rng = np.random.default_rng(20240211)
        for _ in range(1000):
            term = random_term(rng, max_depth=7)
            assert parse_sexp(to_sexp(term)) == term

    @settings(max_examples=200)
    @given(st.data())
    def test_round_trip_hypothesis(self, data):
        names = st.text(
            alphabet=st.sampled_from('ab"\\\'/x _0'), min_size=1, max_size=5
        )
        terms = st.recursive(
            st.builds(Id, names),
            lambda sub: st.one_of(
                st.builds(Comb, sub, sub),
                st.builds(Abs, names, sub, sub),
            ),
            max_leaves=25,
        )
        term = data.draw(terms)
        assert parse_sexp(to_sexp(term)) == term


class TestConstantsOf:
    def test_matching_pair_holes(self, matching_pair):
        t1, _ = matching_pair
        assert constants_of(t1, {"!", "="}) == ["num", "+", "0"]

    def test_free_variable_with_known_set(self):
        assert constants_of(Id("x"), set(), known_constants=frozenset()) == []

    def test_free_name_defaults_to_constant(self):
        assert constants_of(Id("x"), set()) == ["x"]

    def test_duplicates_collapse(self):
        term = Comb(Id("c"), Comb(Id("d"), Id("c")))
        assert constants_of(term, set()) == ["c", "d"]

    def test_bound_variables_excluded(self):
        term = Abs("v", Id("ty"), Comb(Id("v"), Id("w")))
        assert constants_of(term, set()) == ["ty", "w"]

    def test_invariant_under_alpha_renaming(self):
        rng = np.random.default_rng(99)
        logical = {"=", "!"}
        for _ in range(300):
            term = random_term(rng, max_depth=6)
            renamed = alpha_rename(term)
            assert constants_of(term, logical) == constants_of(renamed, logical)

    def test_shadowed_binder(self):
        # inner binder reuses the outer name; occurrences stay variables
        term = Abs("x", Id("t"), Abs("x", Id("u"), Id("x")))
        assert constants_of(term, set()) == ["t", "u"]
