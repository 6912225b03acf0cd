"""Parser, renderer and variable-analysis tests for the concrete syntax."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfol.syntax import (
    And,
    App,
    ArrowVar,
    Atom,
    BridgeRule,
    Const,
    Eq,
    Exists,
    Falsum,
    Forall,
    Implies,
    LabeledFormula,
    Not,
    Or,
    Signature,
    SyntaxError_,
    Var,
    arrow_vars,
    classify_variables,
    free_plain_vars,
    parse_bridge_rule_text,
    parse_formula,
    parse_labeled_formula,
    parse_theory,
    render,
    render_formula,
    render_theory,
    substitute,
)

TWO_INDEX = parse_theory(
    """
    index 1, 2
    signature 1 { const c, d; func f/1; pred p/1, q/2, r/0; }
    signature 2 { const c; pred p/1, s/1; }
    """
)

SIG1 = TWO_INDEX.signature("1")


def f1(text: str):
    return parse_formula(TWO_INDEX, "1", text)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_precedence_chain():
    # ~ binds tightest, then &, then |, then ->
    got = f1("~r & r | r -> r")
    r = Atom("r")
    assert got == Implies(Or(And(Not(r), r), r), r)


def test_right_associativity():
    r = Atom("r")
    assert f1("r -> r -> r") == Implies(r, Implies(r, r))
    assert f1("r | r | r") == Or(r, Or(r, r))
    assert f1("r & r & r") == And(r, And(r, r))


def test_quantifier_scope_extends_right():
    got = f1("forall x. p(x) -> r")
    assert got == Forall("x", Implies(Atom("p", (Var("x"),)), Atom("r")))


def test_false_keyword():
    assert f1("false") == Falsum()
    assert f1("p(c) -> false") == Implies(Atom("p", (Const("c"),)), Falsum())


def test_arrow_variable_parse():
    assert f1("p(x^>2)") == Atom("p", (ArrowVar("x", ">", "2"),))
    assert f1("p(x^<2)") == Atom("p", (ArrowVar("x", "<", "2"),))
    assert f1("p(x^>2@E)") == Atom("p", (ArrowVar("x", ">", "2", "E"),))


def test_terms_disambiguated_by_signature():
    assert f1("q(f(c), d)") == Atom(
        "q", (App("f", (Const("c"),)), Const("d"))
    )
    assert f1("x = f(y)") == Eq(Var("x"), App("f", (Var("y"),)))


def test_quantified_arrow_variable_rejected():
    with pytest.raises(SyntaxError_, match="quantified arrow variable"):
        f1("forall x^<2. p(x^<2)")


def test_unknown_foreign_index_rejected():
    with pytest.raises(SyntaxError_, match="index"):
        f1("p(x^>9)")


def test_own_index_arrow_rejected():
    with pytest.raises(SyntaxError_, match="index"):
        f1("p(x^>1)")


def test_arity_mismatch_rejected():
    with pytest.raises(SyntaxError_, match="expects"):
        f1("p(c, d)")
    with pytest.raises(SyntaxError_, match="expects"):
        f1("q(c)")


def test_undeclared_predicate_rejected():
    with pytest.raises(SyntaxError_, match="undeclared"):
        f1("missing(c)")


def test_error_positions_are_line_and_column():
    with pytest.raises(SyntaxError_) as err:
        parse_theory("index 1\nsignature 1 { pred p/1; }\naxiom 1: p(x, y)")
    assert str(err.value).startswith("3:")


def test_trailing_input_rejected():
    with pytest.raises(SyntaxError_):
        f1("r r")


# ---------------------------------------------------------------------------
# theories
# ---------------------------------------------------------------------------


def test_duplicate_index_rejected():
    with pytest.raises(SyntaxError_, match="duplicate index"):
        parse_theory("index 1; index 1")


def test_signature_blocks_merge():
    t = parse_theory(
        "index 1; signature 1 { pred p/1; } signature 1 { pred q/1; }"
    )
    sig = t.signature("1")
    assert sig.pred_arity("p") == 1 and sig.pred_arity("q") == 1


def test_complete_grouping():
    t = parse_theory(
        "index 1; signature 1 { complete const a; complete pred p/1; pred q/1; }"
    )
    sig = t.signature("1")
    assert sig.is_complete("const", "a")
    assert sig.is_complete("pred", "p")
    assert not sig.is_complete("pred", "q")


def test_multi_premise_bridge_rule():
    t = parse_theory(
        """
        index 1, 2, 3
        signature 1 { pred p/1; }
        signature 2 { pred q/1; }
        signature 3 { pred s/2; }
        bridge 1: p(x^>3), 2: q(y^>3) ==> 3: s(x, y)
        """
    )
    (rule,) = t.rules
    assert len(rule.premises) == 2
    assert rule.conclusion.index == "3"


def test_empty_premise_bridge_rule():
    rule = parse_bridge_rule_text(TWO_INDEX, "==> 1: p(c)")
    assert rule.premises == ()
    assert rule.conclusion == LabeledFormula("1", Atom("p", (Const("c"),)))


def test_property_expansion_appends_rules():
    t = parse_theory(
        """
        index 1, 2
        signature 1 { pred p/1; }
        signature 2 { pred q/1; }
        property fun 1 2
        property tot 1 2
        """
    )
    assert [p.kind for p in t.properties] == ["fun", "tot"]
    assert all(r.origin for r in t.rules)
    assert len(t.rules) == 2


def test_unknown_property_rejected():
    with pytest.raises(SyntaxError_, match="unknown relation property"):
        parse_theory("index 1, 2; property magic 1 2")


def test_property_needs_distinct_indices():
    with pytest.raises(SyntaxError_, match="distinct"):
        parse_theory("index 1, 2; property fun 1 1")


def test_comments_and_separators():
    t = parse_theory(
        """
        # a comment
        index 1;           # trailing comment
        signature 1 { pred p/0; };
        axiom 1: p
        """
    )
    assert len(t.axioms) == 1


def test_numbers_are_not_terms():
    with pytest.raises(SyntaxError_):
        parse_formula(TWO_INDEX, "1", "x = 1")


# ---------------------------------------------------------------------------
# variable analysis
# ---------------------------------------------------------------------------


def test_arrow_and_plain_variables_are_distinct():
    lf = parse_labeled_formula(TWO_INDEX, "1: p(x^>2)")
    free, arrows, closed, _ = classify_variables(lf)
    assert free == set()
    assert arrows == {ArrowVar("x", ">", "2")}
    assert not closed


def test_fully_bound_formula_is_closed():
    lf = parse_labeled_formula(TWO_INDEX, "1: forall x. p(x)")
    free, arrows, closed, complete = classify_variables(lf)
    assert closed and not free and not arrows
    assert not complete  # p is not complete in this signature


def test_complete_flag_uses_signature():
    t = parse_theory(
        "index 1; signature 1 { complete const l; complete pred inbox/2; pred q/0; }"
    )
    lf = parse_labeled_formula(t, "1: inbox(x, l)")
    *_, complete = classify_variables(lf, t.signature("1"))
    assert complete
    lf2 = parse_labeled_formula(t, "1: inbox(x, l) & q")
    *_, complete2 = classify_variables(lf2, t.signature("1"))
    assert not complete2


def test_equality_is_always_complete():
    lf = parse_labeled_formula(TWO_INDEX, "1: x = y | false")
    *_, complete = classify_variables(lf, SIG1)
    assert complete


def test_quantifier_binds_only_its_variable():
    got = f1("forall x. q(x, y)")
    assert free_plain_vars(got) == {"y"}
    got = f1("exists x. q(x^>2, x)")
    assert free_plain_vars(got) == set()
    assert arrow_vars(got) == {ArrowVar("x", ">", "2")}


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------


def test_substitute_ground():
    assert substitute(f1("p(x)"), "x", Const("c")) == f1("p(c)")


def test_substitute_leaves_arrow_variables_alone():
    got = substitute(f1("q(x, x^>2)"), "x", Const("c"))
    assert got == f1("q(c, x^>2)")


def test_substitute_capture_rejected():
    with pytest.raises(ValueError, match="capture"):
        substitute(f1("exists y. q(x, y)"), "x", App("f", (Var("y"),)))


def test_substitute_arrow_term_reparses():
    got = substitute(f1("q(x, c)"), "x", ArrowVar("x", ">", "2"))
    assert parse_formula(TWO_INDEX, "1", render_formula(got)) == got


def test_substitute_bound_variable_untouched():
    phi = f1("forall x. p(x)")
    assert substitute(phi, "x", Const("c")) == phi


# ---------------------------------------------------------------------------
# rendering round-trips
# ---------------------------------------------------------------------------


def test_bridge_rule_round_trip():
    t = parse_theory(
        """
        index 1, 2
        signature 1 { pred black/1; }
        signature 2 { pred black/1; }
        bridge 1: black(x^>2) ==> 2: black(x)
        """
    )
    (rule,) = t.rules
    assert parse_bridge_rule_text(t, render(rule)) == rule


def test_theory_round_trip_fixed():
    out = render_theory(TWO_INDEX)
    assert render_theory(parse_theory(out)) == out


NAMES = st.sampled_from(["x", "y", "z"])


def terms(depth: int = 2):
    base = st.one_of(
        NAMES.map(Var),
        st.sampled_from(["c", "d"]).map(Const),
        st.builds(
            ArrowVar,
            NAMES,
            st.sampled_from([">", "<"]),
            st.just("2"),
            st.sampled_from([None, "E"]),
        ),
    )
    if depth == 0:
        return base
    return st.one_of(base, st.builds(lambda a: App("f", (a,)), terms(depth - 1)))


def formulas(depth: int = 3):
    base = st.one_of(
        st.just(Falsum()),
        st.just(Atom("r")),
        terms().map(lambda t: Atom("p", (t,))),
        st.builds(lambda a, b: Atom("q", (a, b)), terms(), terms()),
        st.builds(Eq, terms(), terms()),
    )
    if depth == 0:
        return base
    sub = formulas(depth - 1)
    return st.one_of(
        base,
        st.builds(Not, sub),
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(Implies, sub, sub),
        st.builds(Forall, NAMES, sub),
        st.builds(Exists, NAMES, sub),
    )


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_parse_render_round_trip(phi):
    assert parse_formula(TWO_INDEX, "1", render_formula(phi)) == phi


def formulas_at_2(depth: int = 2):
    # restricted to signature 2's symbols with arrows pointing back at 1
    base = st.one_of(
        st.just(Falsum()),
        st.one_of(NAMES.map(Var), st.just(Const("c"))).map(lambda t: Atom("p", (t,))),
        st.builds(
            lambda n, d: Atom("s", (ArrowVar(n, d, "1"),)),
            NAMES,
            st.sampled_from([">", "<"]),
        ),
        st.builds(Eq, NAMES.map(Var), NAMES.map(Var)),
    )
    if depth == 0:
        return base
    sub = formulas_at_2(depth - 1)
    return st.one_of(base, st.builds(Not, sub), st.builds(And, sub, sub))


@settings(max_examples=100, deadline=None)
@given(st.lists(formulas(2), min_size=0, max_size=3), formulas_at_2())
def test_bridge_rule_render_round_trip(premises, conclusion):
    rule = BridgeRule(
        tuple(LabeledFormula("1", p) for p in premises),
        LabeledFormula("2", conclusion),
    )
    assert parse_bridge_rule_text(TWO_INDEX, render(rule)) == rule
