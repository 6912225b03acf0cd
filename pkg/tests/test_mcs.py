"""Tests for grounded equilibria of propositional multi-context systems."""

from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfol.mcs import (
    McsRule,
    PropFormatError,
    PropModelSet,
    PropSystem,
    _body_holds,
    equilibrium_json_text,
    equilibrium_to_json,
    fixpoint_steps,
    load_prop_system,
    local_reduction,
    minimal_model,
    parse_prop_system,
    render_equilibrium,
)

FIXTURES = Path(__file__).parent / "fixtures"


def sets(ms):
    return sorted(sorted(m) for m in ms)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def test_parse_fixture():
    S = load_prop_system(FIXTURES / "twocontexts.mcs")
    assert S.contexts == ("1", "2")
    assert S.letters == {"1": ("p",), "2": ("q", "r")}
    assert S.axioms == {"1": (), "2": ()}
    assert [str(r) for r in S.rules] == [
        "1:p <- 2:q.",
        "2:q <- 1:p.",
        "2:r <- not(1:p).",
    ]


def test_parse_axioms_and_facts():
    S = parse_prop_system(
        """
        context a { letters x, y; axiom x -> y; axiom ~(x & y) | x; }
        rule a:x.
        """
    )
    assert len(S.axioms["a"]) == 2
    assert S.rules == (McsRule(head=("a", "x")),)


@pytest.mark.parametrize(
    "text",
    [
        "rule 1:p.",  # no contexts at all
        "context 1 { letters p; } context 1 { letters q; }",
        "context 1 { letters p, p; }",
        "context 1 { letters p; } rule 1:q.",
        "context 1 { letters p; } rule 2:p.",
        "context 1 { letters p; } rule not(1:p) <- 1:p.",
        "context 1 { letters p; axiom q; }",
        "context 1 { letters p; axiom forall x. p; }",
        "context 1 { widgets p; }",
        "context 1 { letters p; ",
    ],
)
def test_parse_rejects(text):
    with pytest.raises(PropFormatError):
        parse_prop_system(text)


# ---------------------------------------------------------------------------
# The worked two-context example
# ---------------------------------------------------------------------------


def test_fixpoint_table():
    S = load_prop_system(FIXTURES / "twocontexts.mcs")
    steps = list(fixpoint_steps(S))
    assert len(steps) == 2
    assert sets(steps[0].models["1"]) == [[], ["p"]]
    assert sets(steps[0].models["2"]) == [[], ["q"], ["q", "r"], ["r"]]
    assert sets(steps[0].mc_models()) == [["not(1:p)", "not(2:q)", "not(2:r)"]]
    # only the nonmonotonic rule applies, filtering context 2 down to r
    assert sets(steps[1].models["1"]) == [[], ["p"]]
    assert sets(steps[1].models["2"]) == [["q", "r"], ["r"]]
    assert sets(steps[1].mc_models()) == [["not(1:p)", "not(2:q)"]]


def test_minimal_model_matches_table():
    S = load_prop_system(FIXTURES / "twocontexts.mcs")
    eq = minimal_model(S)
    assert sets(eq.models["1"]) == [[]]
    assert sets(eq.models["2"]) == [["r"]]
    assert sets(eq.mc_models()) == [["not(1:p)", "not(2:q)"]]
    assert render_equilibrium(eq) == (
        "M_1 = {{}}\nM_2 = {{r}}\nmc = {{not(1:p), not(2:q)}}"
    )


def test_equilibrium_json_is_stable():
    S = load_prop_system(FIXTURES / "twocontexts.mcs")
    text = equilibrium_json_text(minimal_model(S))
    assert text == equilibrium_json_text(minimal_model(S))
    assert equilibrium_to_json(minimal_model(S)) == {
        "contexts": {"1": [[]], "2": [["r"]]},
        "mc": [["not(1:p)", "not(2:q)"]],
    }


# ---------------------------------------------------------------------------
# Local reduction
# ---------------------------------------------------------------------------


def reduce_sets(system, **models):
    S = PropModelSet(
        system=system,
        models={c: frozenset(frozenset(m) for m in ms) for c, ms in models.items()},
    )
    return local_reduction(S)


ONE = PropSystem(
    contexts=("1",),
    letters={"1": ("p", "q", "r")},
    axioms={"1": ()},
    rules=(),
)


def test_local_reduction_examples():
    assert sets(reduce_sets(ONE, **{"1": [["r"], ["q", "r"]]}).models["1"]) == [["r"]]
    assert sets(reduce_sets(ONE, **{"1": [[]]}).models["1"]) == [[]]
    # incomparable assignments both survive
    assert sets(reduce_sets(ONE, **{"1": [["p"], ["q"]]}).models["1"]) == [
        ["p"],
        ["q"],
    ]


def test_fact_rule_matches_brute_force():
    S = parse_prop_system("context 1 { letters p; } rule 1:p.")
    eq = minimal_model(S)
    assert sets(eq.models["1"]) == [["p"]]
    # oracle: the fixpoint is the largest rule-closed family of
    # axiom-satisfying assignments
    universe = [frozenset(), frozenset({"p"})]
    closed = []
    for mask in range(4):
        cand = frozenset(universe[k] for k in range(2) if mask >> k & 1)
        if all("p" in m for m in cand):
            closed.append(cand)
    best = max(closed, key=len)
    assert sets(best) == [["p"]]


def test_inconsistent_context_empties_mc():
    # an unsatisfiable axiom empties the context, which exports the
    # inconsistency to the meta context; negative premises then hold
    # vacuously
    S = parse_prop_system(
        """
        context 1 { letters p; axiom p & ~p; }
        context 2 { letters q; }
        rule 2:q <- not(1:p).
        """
    )
    eq = minimal_model(S)
    assert sets(eq.models["1"]) == []
    assert sets(eq.mc_models()) == []
    assert sets(eq.models["2"]) == [["q"]]


def test_axioms_restrict_initial_candidates():
    S = parse_prop_system(
        """
        context 1 { letters p, q; axiom p | q; }
        """
    )
    steps = list(fixpoint_steps(S))
    assert sets(steps[0].models["1"]) == [["p"], ["p", "q"], ["q"]]
    assert sets(minimal_model(S).models["1"]) == [["p"], ["q"]]


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

LETTERS = {"1": ("a", "b"), "2": ("c",)}
ATOMS = [("1", "a"), ("1", "b"), ("2", "c")]


@st.composite
def small_systems(draw):
    rules = []
    for head, pos, neg in draw(
        st.lists(
            st.tuples(
                st.sampled_from(ATOMS),
                st.lists(st.sampled_from(ATOMS), max_size=3),
                st.lists(st.sampled_from(ATOMS), max_size=2),
            ),
            max_size=5,
        )
    ):
        rules.append(McsRule(head=head, positive=tuple(pos), negative=tuple(neg)))
    return PropSystem(
        contexts=("1", "2"),
        letters=LETTERS,
        axioms={"1": (), "2": ()},
        rules=tuple(rules),
    )


@st.composite
def model_sets(draw, system):
    models = {
        ctx: draw(
            st.frozensets(st.frozensets(st.sampled_from(system.letters[ctx])))
        )
        for ctx in system.contexts
    }
    return PropModelSet(system=system, models=models)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_reduction_is_idempotent_and_preserves_bodies(data):
    system = data.draw(small_systems())
    S = data.draw(model_sets(system))
    R = local_reduction(S)
    assert local_reduction(R).models == R.models
    for ctx in system.contexts:
        assert R.models[ctx] <= S.models[ctx]
        assert bool(R.models[ctx]) == bool(S.models[ctx])
    # reduction never changes whether a rule body holds, which is why it
    # preserves rule satisfaction
    for rule in system.rules:
        assert _body_holds(S, rule) == _body_holds(R, rule)


@settings(max_examples=100, deadline=None)
@given(small_systems())
def test_fixpoint_shrinks_and_closes(system):
    steps = list(fixpoint_steps(system))
    total = sum(len(steps[0].models[c]) for c in system.contexts)
    assert len(steps) <= total + 1
    for earlier, later in zip(steps, steps[1:]):
        for ctx in system.contexts:
            assert later.models[ctx] <= earlier.models[ctx]
    for candidate in (steps[-1], minimal_model(system)):
        for rule in system.rules:
            if _body_holds(candidate, rule):
                ctx, letter = rule.head
                assert all(letter in m for m in candidate.models[ctx])
