"""Satisfaction, admissibility and model-validation tests.

The recurring fixture is the two-observer box scenario: index 1 sees a box
with two sectors and three balls, index 2 sees three sectors and four balls,
and the domain relations connect the one ball both observers see.
"""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfol.semantics import (
    Assignment,
    DfolModel,
    LocalModel,
    make_local_model,
    enumerate_admissible,
    eval_term,
    load_model,
    model_to_json,
    satisfies_bridge_rule,
    satisfies_labeled,
    satisfies_local,
    validate_assignment,
    validate_model,
)
from dfol.syntax import (
    App,
    ArrowVar,
    Const,
    Var,
    parse_bridge_rule_text,
    parse_formula,
    parse_labeled_formula,
    parse_theory,
)

MBOX_THEORY = parse_theory(
    """
    index 1, 2
    signature 1 {
      complete const b1, b2, b3, l, r;
      complete pred inbox/2, black/1, white/1;
    }
    signature 2 {
      complete const b1, b2, b3, b4, l, c, r;
      complete pred inbox/2, black/1, white/1;
    }
    """
)

DOM1 = ("left", "right", "a", "b", "c")
DOM2 = ("left", "centre", "right", "a", "b", "c", "d")

M1 = make_local_model(
    DOM1,
    consts={"b1": "a", "b2": "b", "b3": "c", "l": "left", "r": "right"},
    preds={
        "inbox": [("b", "left"), ("c", "right")],
        "black": [("a",), ("c",)],
        "white": [("b",)],
    },
)

M2 = make_local_model(
    DOM2,
    consts={
        "b1": "a",
        "b2": "b",
        "b3": "c",
        "b4": "d",
        "l": "left",
        "c": "centre",
        "r": "right",
    },
    preds={
        "inbox": [("a", "left"), ("b", "right")],
        "black": [("a",), ("b",), ("d",)],
        "white": [("c",)],
    },
)


def mbox_model(**overrides) -> DfolModel:
    base = dict(
        domains={"1": DOM1, "2": DOM2},
        model_sets={"1": (M1,), "2": (M2,)},
        relations={
            ("1", "2", None): frozenset({("c", "a")}),
            ("2", "1", None): frozenset({("a", "c")}),
        },
    )
    base.update(overrides)
    return DfolModel(**base)


def lf(text: str):
    return parse_labeled_formula(MBOX_THEORY, text)


# ---------------------------------------------------------------------------
# term evaluation and local satisfaction
# ---------------------------------------------------------------------------


def test_eval_constant():
    assert eval_term(M1, {}, Const("b3")) == "c"


def test_eval_variable_lookup():
    assert eval_term(M1, {Var("x"): "b"}, Var("x")) == "b"


def test_eval_function_composition():
    m = make_local_model(
        ("0", "1"),
        consts={"c": "0"},
        funcs={
            "f": {("0",): "1", ("1",): "1"},
            "g": {("0",): "1", ("1",): "0"},
        },
    )
    assert eval_term(m, {}, App("f", (App("g", (Const("c"),)),))) == "1"


def test_satisfies_local_inbox():
    phi = parse_formula(MBOX_THEORY, "1", "inbox(x, r)")
    assert satisfies_local(M1, phi, {Var("x"): "c"})
    assert not satisfies_local(M1, phi, {Var("x"): "b"})


def test_satisfies_local_exists_with_arrow():
    phi = parse_formula(MBOX_THEORY, "2", "exists y. inbox(x^<1, y)")
    assert satisfies_local(M2, phi, {ArrowVar("x", "<", "1"): "a"})
    assert not satisfies_local(M2, phi, {ArrowVar("x", "<", "1"): "d"})


def test_identity_holds_everywhere():
    phi = parse_formula(MBOX_THEORY, "1", "x = x")
    for d in DOM1:
        assert satisfies_local(M1, phi, {Var("x"): d})


# ---------------------------------------------------------------------------
# assignment conditions
# ---------------------------------------------------------------------------


def test_to_variable_condition():
    M = mbox_model()
    a = Assignment([("1", ArrowVar("x", ">", "2"), "c"), ("2", Var("x"), "a")])
    assert validate_assignment(M, a) == []


def test_from_variable_condition():
    M = mbox_model()
    a = Assignment([("2", ArrowVar("x", "<", "1"), "a"), ("1", Var("x"), "c")])
    assert validate_assignment(M, a) == []


def test_empty_relation_rejects_arrow():
    M = mbox_model(relations={})
    a = Assignment([("1", ArrowVar("x", ">", "2"), "c"), ("2", Var("x"), "a")])
    assert any("domain-relation" in p for p in validate_assignment(M, a))


def test_arrow_without_anchor_rejected():
    M = mbox_model()
    a = Assignment([("1", ArrowVar("x", ">", "2"), "c")])
    assert validate_assignment(M, a) != []


def test_out_of_domain_value_rejected():
    M = mbox_model()
    a = Assignment([("1", Var("x"), "nowhere")])
    assert any("outside the domain" in p for p in validate_assignment(M, a))


# ---------------------------------------------------------------------------
# labeled satisfaction
# ---------------------------------------------------------------------------


def test_non_admissible_satisfies_neither_formula_nor_negation():
    M = mbox_model()
    empty = Assignment()
    assert not satisfies_labeled(M, lf("1: black(x^>2)"), empty)
    assert not satisfies_labeled(M, lf("1: ~black(x^>2)"), empty)


def test_empty_model_set_satisfies_falsum():
    M = mbox_model(model_sets={"1": (), "2": (M2,)})
    assert satisfies_labeled(M, lf("1: false"), Assignment())
    assert not satisfies_labeled(M, lf("2: false"), Assignment())


def test_empty_model_set_satisfies_admissible_formulas_only():
    M = mbox_model(model_sets={"1": (), "2": (M2,)}, relations={})
    assert satisfies_labeled(M, lf("1: black(b1) & ~black(b1)"), Assignment())
    assert not satisfies_labeled(M, lf("1: black(x^>2)"), Assignment())


@settings(max_examples=200, deadline=None)
@given(
    ext=st.sets(st.sampled_from(["a", "b", "c", "left", "right"])),
    value=st.sampled_from(["a", "b", "c", "left", "right"]),
)
def test_singleton_satisfaction_is_local_satisfaction(ext, value):
    m = make_local_model(DOM1, consts=M1.consts and dict(M1.consts), preds={"black": [(e,) for e in ext]})
    M = DfolModel({"1": DOM1, "2": DOM2}, {"1": (m,), "2": ()}, {})
    phi = parse_formula(MBOX_THEORY, "1", "black(x)")
    a = Assignment([("1", Var("x"), value)])
    assert satisfies_labeled(M, lf("1: black(x)"), a) == satisfies_local(
        m, phi, {Var("x"): value}
    )


# ---------------------------------------------------------------------------
# admissible-assignment enumeration
# ---------------------------------------------------------------------------


def test_enumeration_runs_over_the_whole_domain():
    # dom_1 has five elements, so a plain premise variable takes five values
    M = mbox_model()
    got = list(enumerate_admissible(M, [lf("1: inbox(x, r)")]))
    assert [a.get("1", Var("x")) for a in got] == sorted(DOM1)


def test_enumeration_with_empty_relation_is_empty():
    M = mbox_model(relations={})
    assert list(enumerate_admissible(M, [lf("1: black(x^>2)")])) == []


def test_enumeration_pairs_arrow_with_anchor_through_relation():
    M = mbox_model()
    got = list(enumerate_admissible(M, [lf("1: black(x^>2)")]))
    assert len(got) == 1
    (a,) = got
    assert a.get("1", ArrowVar("x", ">", "2")) == "c"
    assert a.get("2", Var("x")) == "a"


def test_enumeration_order_is_lexicographic():
    M = mbox_model()
    got = list(enumerate_admissible(M, [lf("1: inbox(x, y)")]))
    keys = [(a.get("1", Var("x")), a.get("1", Var("y"))) for a in got]
    assert keys == sorted(keys)
    assert len(got) == len(DOM1) ** 2


# ---------------------------------------------------------------------------
# bridge-rule satisfaction
# ---------------------------------------------------------------------------


def test_box_rule_right_sector_holds():
    M = mbox_model()
    rule = parse_bridge_rule_text(
        MBOX_THEORY, "1: inbox(x, r) ==> 2: exists y. inbox(x^<1, y)"
    )
    assert satisfies_bridge_rule(M, rule) == (True, None)


def test_box_rule_failure_reports_premise_witness():
    m2_empty = make_local_model(
        DOM2,
        consts=dict(M2.consts),
        preds={"inbox": [], "black": [], "white": []},
    )
    M = mbox_model(model_sets={"1": (M1,), "2": (m2_empty,)})
    rule = parse_bridge_rule_text(
        MBOX_THEORY, "1: inbox(x, r) ==> 2: exists y. inbox(x^<1, y)"
    )
    ok, witness = satisfies_bridge_rule(M, rule)
    assert not ok
    assert witness.get("1", Var("x")) == "c"


def test_inconsistency_propagation_vacuous_when_source_consistent():
    M = mbox_model()
    rule = parse_bridge_rule_text(MBOX_THEORY, "2: false ==> 1: false")
    assert satisfies_bridge_rule(M, rule) == (True, None)


def test_colour_rules_hold_on_the_box_model():
    M = mbox_model()
    for text in (
        "1: black(x^>2) ==> 2: black(x)",
        "2: black(x^>1) ==> 1: black(x)",
        "1: white(x^>2) ==> 2: white(x)",
        "2: white(x^>1) ==> 1: white(x)",
    ):
        rule = parse_bridge_rule_text(MBOX_THEORY, text)
        assert satisfies_bridge_rule(M, rule) == (True, None), text


def test_join_rule_three_indices():
    T = parse_theory(
        """
        index 1, 2, 3
        signature 1 { pred P/1; }
        signature 2 { pred Q/1; }
        signature 3 { pred R/2; }
        """
    )
    rule = parse_bridge_rule_text(T, "1: P(x^>3), 2: Q(y^>3) ==> 3: R(x, y)")
    m1 = make_local_model(("d1", "d2"), preds={"P": [("d1",)]})
    m2 = make_local_model(("c1",), preds={"Q": [("c1",)]})
    m3 = make_local_model(("e1", "e2"), preds={"R": [("e1", "e2")]})
    M = DfolModel(
        domains={"1": ("d1", "d2"), "2": ("c1",), "3": ("e1", "e2")},
        model_sets={"1": (m1,), "2": (m2,), "3": (m3,)},
        relations={
            ("1", "3", None): frozenset({("d1", "e1")}),
            ("2", "3", None): frozenset({("c1", "e2")}),
        },
    )
    assert satisfies_bridge_rule(M, rule) == (True, None)
    m3_empty = make_local_model(("e1", "e2"), preds={"R": []})
    M_bad = DfolModel(M.domains, {**M.model_sets, "3": (m3_empty,)}, M.relations)
    ok, witness = satisfies_bridge_rule(M_bad, rule)
    assert not ok and witness is not None


def _forced_meaning(models, domain, pred):
    # elements all local models put in the predicate; whole domain when empty
    out = set(domain)
    for m in models:
        out &= {t[0] for t in m.pred(pred)}
    return out


@settings(max_examples=200, deadline=None)
@given(
    p1=st.sets(st.sampled_from(["d1", "d2"])),
    p2=st.sets(st.sampled_from(["d1", "d2"])),
    q1=st.sets(st.sampled_from(["e1", "e2"])),
    q2=st.sets(st.sampled_from(["e1", "e2"])),
    n1=st.integers(0, 2),
    n2=st.integers(0, 2),
    rel=st.sets(st.tuples(st.sampled_from(["d1", "d2"]), st.sampled_from(["e1", "e2"]))),
)
def test_query_containment_reading(p1, p2, q1, q2, n1, n2, rel):
    # rule i:P(x^>j) ==> j:Q(x) holds exactly when r_ij(P) lies inside Q,
    # with P and Q read as what every local model asserts
    T = parse_theory(
        "index 1, 2; signature 1 { pred P/1; } signature 2 { pred Q/1; }"
    )
    rule = parse_bridge_rule_text(T, "1: P(x^>2) ==> 2: Q(x)")
    dom1, dom2 = ("d1", "d2"), ("e1", "e2")
    ms1 = (
        make_local_model(dom1, preds={"P": [(e,) for e in p1]}),
        make_local_model(dom1, preds={"P": [(e,) for e in p2]}),
    )[:n1]
    ms2 = (
        make_local_model(dom2, preds={"Q": [(e,) for e in q1]}),
        make_local_model(dom2, preds={"Q": [(e,) for e in q2]}),
    )[:n2]
    M = DfolModel(
        {"1": dom1, "2": dom2},
        {"1": ms1, "2": ms2},
        {("1", "2", None): frozenset(rel)},
    )
    p_meaning = _forced_meaning(ms1, dom1, "P")
    q_meaning = _forced_meaning(ms2, dom2, "Q")
    image = {e for d, e in rel if d in p_meaning}
    ok, _ = satisfies_bridge_rule(M, rule)
    assert ok == image.issubset(q_meaning)


# ---------------------------------------------------------------------------
# arrow-variable satisfaction properties
# ---------------------------------------------------------------------------


def test_undefined_arrow_refutes_its_existential():
    M = mbox_model()
    assert not satisfies_labeled(M, lf("1: exists y. y = x^>2"), Assignment())


def test_universal_does_not_instantiate_to_unassigned_arrow():
    # a tautology under every plain instantiation fails on an unassigned arrow
    M = mbox_model(relations={})
    taut = lf("1: forall x. (black(x) -> black(x))")
    arrowed = lf("1: black(x^>2) -> black(x^>2)")
    assert satisfies_labeled(M, taut, Assignment())
    assert not satisfies_labeled(M, arrowed, Assignment())


def test_negation_does_not_weaken_to_implication():
    # 1: ~black(b1) fails to spread to 1: black(x^>2) -> ~black(b1)
    m = make_local_model(DOM1, consts=dict(M1.consts), preds={"black": [], "inbox": [], "white": []})
    M = mbox_model(model_sets={"1": (m,), "2": (M2,)}, relations={})
    assert satisfies_labeled(M, lf("1: ~black(b1)"), Assignment())
    assert not satisfies_labeled(M, lf("1: black(x^>2) -> ~black(b1)"), Assignment())


def test_disjunction_introduction_fails_with_new_arrow():
    M = mbox_model(relations={})
    assert satisfies_labeled(M, lf("1: black(b1)"), Assignment())
    assert not satisfies_labeled(M, lf("1: black(b1) | black(x^>2)"), Assignment())


def test_modus_ponens_is_sound():
    M = mbox_model()
    for a in enumerate_admissible(M, [lf("1: black(x) -> white(x)"), lf("1: black(x)")]):
        if satisfies_labeled(M, lf("1: black(x) -> white(x)"), a) and satisfies_labeled(
            M, lf("1: black(x)"), a
        ):
            assert satisfies_labeled(M, lf("1: white(x)"), a)


@settings(max_examples=150, deadline=None)
@given(
    black1=st.sets(st.sampled_from(DOM1)),
    black2=st.sets(st.sampled_from(DOM1)),
    imp1=st.sets(st.sampled_from(DOM1)),
    imp2=st.sets(st.sampled_from(DOM1)),
)
def test_modus_ponens_on_random_model_sets(black1, black2, imp1, imp2):
    mk = lambda b, w: make_local_model(
        DOM1, consts=dict(M1.consts), preds={"black": [(e,) for e in b], "white": [(e,) for e in w]}
    )
    M = mbox_model(model_sets={"1": (mk(black1, imp1), mk(black2, imp2)), "2": (M2,)})
    phi, psi, imp = lf("1: black(x)"), lf("1: white(x)"), lf("1: black(x) -> white(x)")
    for d in DOM1:
        a = Assignment([("1", Var("x"), d)])
        if satisfies_labeled(M, imp, a) and satisfies_labeled(M, phi, a):
            assert satisfies_labeled(M, psi, a)


def test_assigned_arrow_yields_existential():
    M = mbox_model()
    a = Assignment([("1", ArrowVar("x", ">", "2"), "c"), ("2", Var("x"), "a")])
    assert satisfies_labeled(M, lf("1: black(x^>2)"), a)
    assert satisfies_labeled(M, lf("1: exists z. black(z)"), a)


# ---------------------------------------------------------------------------
# partial knowledge through several local models
# ---------------------------------------------------------------------------


def _two_model_set(pred_a, pred_b):
    dom = ("d1", "d2")
    m1 = make_local_model(dom, consts={"t": "d1"}, preds={"p": pred_a, "q": []})
    m2 = make_local_model(dom, consts={"t": "d2"}, preds={"p": [], "q": pred_b})
    T = parse_theory("index 1; signature 1 { const t; pred p/1, q/1; }")
    M = DfolModel({"1": dom}, {"1": (m1, m2)}, {})
    return T, M


def test_non_complete_term_value_can_be_unknown():
    T, M = _two_model_set([], [])
    eq = parse_labeled_formula(T, "1: x = t")
    for d in ("d1", "d2"):
        assert not satisfies_labeled(M, eq, Assignment([("1", Var("x"), d)]))


def test_disjunction_without_determined_disjunct():
    T, M = _two_model_set([("d1",)], [("d1",)])
    a = Assignment([("1", Var("x"), "d1")])
    assert satisfies_labeled(M, parse_labeled_formula(T, "1: p(x) | q(x)"), a)
    assert not satisfies_labeled(M, parse_labeled_formula(T, "1: p(x)"), a)
    assert not satisfies_labeled(M, parse_labeled_formula(T, "1: q(x)"), a)


def test_existential_without_witness():
    dom = ("d1", "d2")
    m1 = make_local_model(dom, preds={"p": [("d1",)]})
    m2 = make_local_model(dom, preds={"p": [("d2",)]})
    T = parse_theory("index 1; signature 1 { pred p/1; }")
    M = DfolModel({"1": dom}, {"1": (m1, m2)}, {})
    assert satisfies_labeled(M, parse_labeled_formula(T, "1: exists x. p(x)"), Assignment())
    for d in dom:
        assert not satisfies_labeled(
            M, parse_labeled_formula(T, "1: p(x)"), Assignment([("1", Var("x"), d)])
        )


COMPLETE_T = parse_theory(
    "index 1; signature 1 { complete const t; complete pred p/1, q/1; pred u/1; }"
)


@settings(max_examples=200, deadline=None)
@given(
    shared_p=st.sets(st.sampled_from(["d1", "d2"])),
    shared_q=st.sets(st.sampled_from(["d1", "d2"])),
    t_value=st.sampled_from(["d1", "d2"]),
    u1=st.sets(st.sampled_from(["d1", "d2"])),
    u2=st.sets(st.sampled_from(["d1", "d2"])),
    size=st.integers(0, 2),
)
def test_complete_formulas_behave_classically(shared_p, shared_q, t_value, u1, u2, size):
    # local models may only disagree on the incomplete symbol u
    dom = ("d1", "d2")
    mk = lambda u: make_local_model(
        dom,
        consts={"t": t_value},
        preds={"p": [(e,) for e in shared_p], "q": [(e,) for e in shared_q], "u": [(e,) for e in u]},
    )
    M = DfolModel({"1": dom}, {"1": (mk(u1), mk(u2))[:size]}, {})
    peq = parse_labeled_formula(COMPLETE_T, "1: x = t")
    assert any(
        satisfies_labeled(M, peq, Assignment([("1", Var("x"), d)])) for d in dom
    )
    por = parse_labeled_formula(COMPLETE_T, "1: p(x) | q(x)")
    pp = parse_labeled_formula(COMPLETE_T, "1: p(x)")
    pq = parse_labeled_formula(COMPLETE_T, "1: q(x)")
    for d in dom:
        a = Assignment([("1", Var("x"), d)])
        assert satisfies_labeled(M, por, a) == (
            satisfies_labeled(M, pp, a) or satisfies_labeled(M, pq, a)
        )
    pex = parse_labeled_formula(COMPLETE_T, "1: exists x. p(x)")
    assert satisfies_labeled(M, pex, Assignment()) == any(
        satisfies_labeled(M, pp, Assignment([("1", Var("x"), d)])) for d in dom
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def test_validate_box_model_ok():
    assert validate_model(MBOX_THEORY, mbox_model()) == []


def test_validate_allows_empty_model_set_over_nonempty_domain():
    M = mbox_model(model_sets={"1": (), "2": (M2,)})
    assert validate_model(MBOX_THEORY, M) == []


def test_validate_rejects_missing_domain():
    M = mbox_model(domains={"1": DOM1})
    assert any("missing or empty domain" in p for p in validate_model(MBOX_THEORY, M))


def test_validate_rejects_partial_constants():
    bad = make_local_model(DOM1, consts={"b1": "a"}, preds={})
    M = mbox_model(model_sets={"1": (bad,), "2": (M2,)})
    assert any("not interpreted" in p for p in validate_model(MBOX_THEORY, M))


def test_validate_rejects_non_total_function():
    T = parse_theory("index 1; signature 1 { func f/1; }")
    m = make_local_model(("d1", "d2"), funcs={"f": {("d1",): "d1"}})
    M = DfolModel({"1": ("d1", "d2")}, {"1": (m,)}, {})
    assert any("not total" in p for p in validate_model(T, M))


def test_validate_rejects_complete_disagreement():
    other = make_local_model(
        DOM1,
        consts=dict(M1.consts),
        preds={"inbox": [], "black": [("b",)], "white": []},
    )
    M = mbox_model(model_sets={"1": (M1, other), "2": (M2,)})
    assert any("disagree on complete" in p for p in validate_model(MBOX_THEORY, M))


def test_validate_rejects_relation_pair_outside_domains():
    M = mbox_model(relations={("1", "2", None): frozenset({("c", "zz")})})
    assert any("leaves the domains" in p for p in validate_model(MBOX_THEORY, M))


def test_validate_rejects_unknown_index():
    M = mbox_model(domains={"1": DOM1, "2": DOM2, "9": ("x",)})
    assert any("unknown index 9" in p for p in validate_model(MBOX_THEORY, M))


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def test_model_json_round_trip():
    M = mbox_model()
    assert load_model(model_to_json(M)) == M


def test_load_model_with_labeled_relation():
    data = {
        "domains": {"1": ["d"], "2": ["e"]},
        "models": {"1": [], "2": []},
        "relations": {"1->2@E": [["d", "e"]]},
    }
    M = load_model(data)
    assert M.rel("1", "2", "E") == frozenset({("d", "e")})
    assert M.rel("1", "2") == frozenset()


def test_missing_relations_default_to_empty():
    M = load_model({"domains": {"1": ["d"], "2": ["e"]}})
    assert M.rel("1", "2") == frozenset()
    assert M.models("1") == ()


def test_function_entries_args_then_value():
    data = {
        "domains": {"1": ["d", "e"]},
        "models": {
            "1": [
                {
                    "func": {"f": [["d", "e"], ["e", "d"]]},
                }
            ]
        },
    }
    M = load_model(data)
    (m,) = M.models("1")
    assert m.func("f", ("d",)) == "e"
    assert m.func("f", ("e",)) == "d"


def test_load_model_rejects_empty_domain():
    with pytest.raises(Exception, match="nonempty"):
        load_model({"domains": {"1": []}})


# ---------------------------------------------------------------------------
# assignment API
# ---------------------------------------------------------------------------


def test_assignment_extension_relation():
    a = Assignment([("1", Var("x"), "a")])
    b = a.extend([("1", ArrowVar("x", ">", "2"), "c")])
    assert b.extends(a)
    assert not a.extends(b)
    assert a.extends(a)


def test_assignment_env_slices_by_index():
    a = Assignment([("1", Var("x"), "a"), ("2", Var("x"), "b")])
    assert a.env("1") == {Var("x"): "a"}
    assert a.env("2") == {Var("x"): "b"}
