"""Domain-relation properties, their characterizing bridge rules, and direct
set-theoretic checks.

Each property tag (`property fun 1 2` in theory files) expands to bridge
rules whose satisfaction, over models with nonempty local-model sets,
coincides with the set-theoretic property of the underlying relations.
With an empty model set the premise (or conclusion) side of a rule becomes
vacuous and the equivalence degenerates; see tests for the two directions.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterable

from .syntax import (
    ArrowVar,
    BridgeRule,
    Eq,
    Exists,
    Falsum,
    LabeledFormula,
    Not,
    RelationProperty,
    Var,
)

if TYPE_CHECKING:  # pragma: no cover
    from .semantics import DfolModel

__all__ = [
    "bridge_rules_for_property",
    "relation_has_property",
    "relation_preserves_order",
    "inconsistency_propagation_rule",
]


def _lf(index: str, formula) -> LabeledFormula:
    return LabeledFormula(index, formula)


def bridge_rules_for_property(p: RelationProperty) -> list[BridgeRule]:
    """Bridge rules characterizing p over nonempty local-model sets.

    fun/tot/sur/inj need one rule, inv and com two, euc four; congr's single
    rule is degenerate (its premises force the two source variables to
    coincide) and is emitted verbatim for completeness of the catalog.
    """
    kind = p.kind
    tag = f"{kind}({','.join(p.indices)})"

    def rule(premises: Iterable[LabeledFormula], conclusion: LabeledFormula, n: int) -> BridgeRule:
        return BridgeRule(tuple(premises), conclusion, origin=f"{tag}/{n}")

    if kind == "fun":
        i, j = p.indices
        return [
            rule(
                [_lf(i, Eq(ArrowVar("x", ">", j), ArrowVar("y", ">", j)))],
                _lf(j, Eq(Var("x"), Var("y"))),
                1,
            )
        ]
    if kind == "tot":
        i, j = p.indices
        return [
            rule(
                [_lf(i, Eq(Var("x"), Var("x")))],
                _lf(j, Exists("y", Eq(Var("y"), ArrowVar("x", "<", i)))),
                1,
            )
        ]
    if kind == "sur":
        i, j = p.indices
        return [
            rule(
                [_lf(j, Eq(Var("x"), Var("x")))],
                _lf(i, Exists("y", Eq(Var("y"), ArrowVar("x", ">", j)))),
                1,
            )
        ]
    if kind == "inj":
        i, j = p.indices
        return [
            rule(
                [_lf(i, Not(Eq(ArrowVar("x", ">", j), ArrowVar("y", ">", j))))],
                _lf(j, Not(Eq(Var("x"), Var("y")))),
                1,
            )
        ]
    if kind == "inv":
        i, j = p.indices
        return [
            rule(
                [_lf(i, Eq(Var("x"), ArrowVar("y", ">", j)))],
                _lf(j, Eq(Var("y"), ArrowVar("x", ">", i))),
                1,
            ),
            rule(
                [_lf(j, Eq(Var("x"), ArrowVar("y", ">", i)))],
                _lf(i, Eq(Var("y"), ArrowVar("x", ">", j))),
                2,
            ),
        ]
    if kind == "congr":
        i, j = p.indices
        return [
            rule(
                [
                    _lf(i, Eq(Var("x"), ArrowVar("v", ">", j))),
                    _lf(i, Eq(Var("y"), ArrowVar("v", ">", j))),
                    _lf(i, Eq(Var("x"), ArrowVar("w", ">", j))),
                ],
                _lf(j, Eq(ArrowVar("y", "<", i), Var("w"))),
                1,
            )
        ]
    if kind == "com":
        i, j, k = p.indices
        return [
            rule(
                [_lf(j, Eq(ArrowVar("x", "<", i), ArrowVar("z", ">", k)))],
                _lf(k, Eq(ArrowVar("x", "<", i), Var("z"))),
                1,
            ),
            rule(
                [_lf(i, Eq(Var("x"), ArrowVar("z", ">", k)))],
                _lf(j, Eq(ArrowVar("x", "<", i), ArrowVar("z", ">", k))),
                2,
            ),
        ]
    if kind == "euc":
        i, j, k = p.indices
        return [
            rule(
                [_lf(j, Eq(Var("y"), ArrowVar("z", ">", k)))],
                _lf(i, Eq(ArrowVar("y", ">", j), ArrowVar("z", ">", k))),
                1,
            ),
            rule(
                [_lf(i, Eq(ArrowVar("y", ">", j), ArrowVar("z", ">", k)))],
                _lf(j, Eq(Var("y"), ArrowVar("z", ">", k))),
                2,
            ),
            rule(
                [_lf(j, Eq(Var("y"), ArrowVar("z", "<", k)))],
                _lf(i, Eq(ArrowVar("y", ">", j), ArrowVar("z", ">", k))),
                3,
            ),
            rule(
                [_lf(i, Eq(ArrowVar("y", ">", j), ArrowVar("z", ">", k)))],
                _lf(j, Eq(Var("y"), ArrowVar("z", "<", k))),
                4,
            ),
        ]
    raise ValueError(f"unknown relation property {kind!r}")


def inconsistency_propagation_rule(j: str, i: str) -> BridgeRule:
    """`j: false ==> i: false` — inconsistency propagation from j to i."""
    return BridgeRule((_lf(j, Falsum()),), _lf(i, Falsum()), origin=f"incp({j},{i})")


# ---------------------------------------------------------------------------
# Direct set-theoretic checks
# ---------------------------------------------------------------------------


def _compose(r1: frozenset[tuple[str, str]], r2: frozenset[tuple[str, str]]) -> set[tuple[str, str]]:
    by_src: dict[str, list[str]] = {}
    for e, f in r2:
        by_src.setdefault(e, []).append(f)
    return {(d, f) for d, e in r1 for f in by_src.get(e, [])}


def relation_has_property(M: "DfolModel", p: RelationProperty) -> bool:
    """Check p directly on M's domain relations (no bridge rules involved)."""
    kind = p.kind
    if kind in ("fun", "tot", "sur", "inj", "inv", "congr"):
        i, j = p.indices
        r_ij = M.rel(i, j)
        if kind == "fun":
            image: dict[str, str] = {}
            for d, e in r_ij:
                if image.setdefault(d, e) != e:
                    return False
            return True
        if kind == "tot":
            sources = {d for d, _ in r_ij}
            return all(d in sources for d in M.domains[i])
        if kind == "sur":
            targets = {e for _, e in r_ij}
            return all(e in targets for e in M.domains[j])
        if kind == "inj":
            images: dict[str, set[str]] = {}
            for d, e in r_ij:
                images.setdefault(d, set()).add(e)
            ds = sorted(images)
            return all(
                not (images[d1] & images[d2])
                for a, d1 in enumerate(ds)
                for d2 in ds[a + 1 :]
            )
        if kind == "inv":
            r_ji = M.rel(j, i)
            return r_ij == frozenset((e, d) for d, e in r_ji)
        if kind == "congr":
            for x, v in r_ij:
                for y, v2 in r_ij:
                    if v2 != v:
                        continue
                    for x2, w in r_ij:
                        if x2 == x and (y, w) not in r_ij:
                            return False
            return True
    if kind == "com":
        i, j, k = p.indices
        return _compose(M.rel(i, j), M.rel(j, k)) == set(M.rel(i, k))
    if kind == "euc":
        i, j, k = p.indices
        joined = {
            (e, f)
            for d, e in M.rel(i, j)
            for d2, f in M.rel(i, k)
            if d2 == d
        }
        return set(M.rel(j, k)) == joined and set(M.rel(k, j)) == {
            (f, e) for e, f in joined
        }
    raise ValueError(f"unknown relation property {kind!r}")


def relation_preserves_order(
    M: "DfolModel",
    i: str,
    j: str,
    order_i: set[tuple[str, str]],
    order_j: set[tuple[str, str]],
) -> bool:
    """Ordering preservation: d ≤_i d' and (d,e),(d',e') ∈ r_ij imply e ≤_j e'.

    Orders are given explicitly as sets of (lesser, greater) pairs; the
    caller supplies whatever closure it intends.  No bridge-rule form exists
    for this property, so only the direct check is offered.
    """
    r_ij = M.rel(i, j)
    for d, e in r_ij:
        for d2, e2 in r_ij:
            if (d, d2) in order_i and (e, e2) not in order_j:
                return False
    return True
