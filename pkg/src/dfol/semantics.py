"""Finite-model semantics: local models, domain relations, assignments, and
satisfaction of labeled formulas and bridge rules.

A DfolModel pairs every index with a shared finite domain and a finite —
possibly empty — set of local first-order models over it, plus directed
domain relations between indices.  Satisfaction of `i: φ` under an
assignment `a` requires (i) `a` to be admissible for the formula (every
arrow variable assigned, with its relation condition met) and (ii) every
local model at `i` to satisfy φ; an empty model set therefore satisfies
everything admissible, including `i: false`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .syntax import (
    App,
    ArrowVar,
    Atom,
    BridgeRule,
    Const,
    Eq,
    Exists,
    Falsum,
    Forall,
    Formula,
    Implies,
    LabeledFormula,
    Not,
    And,
    Or,
    Signature,
    Term,
    Theory,
    Var,
    arrow_vars,
    free_plain_vars,
    render_term,
)

__all__ = [
    "LocalModel",
    "DfolModel",
    "Assignment",
    "UndefinedVariableError",
    "ModelFormatError",
    "validate_model",
    "validate_assignment",
    "eval_term",
    "satisfies_local",
    "is_admissible",
    "satisfies_labeled",
    "enumerate_admissible",
    "satisfies_bridge_rule",
    "satisfies_axiom",
    "check_theory",
    "load_model",
    "load_model_file",
    "model_to_json",
]


class UndefinedVariableError(Exception):
    """A term evaluation met a variable the assignment does not cover."""


class ModelFormatError(ValueError):
    """Malformed model JSON."""


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalModel:
    """One classical first-order model over a finite domain.

    `funcs` maps a function name to a tuple of (args, value) pairs covering
    every argument tuple; `preds` maps a predicate name to its extension.
    """

    domain: tuple[str, ...]
    consts: tuple[tuple[str, str], ...] = ()
    funcs: tuple[tuple[str, tuple[tuple[tuple[str, ...], str], ...]], ...] = ()
    preds: tuple[tuple[str, frozenset[tuple[str, ...]]], ...] = ()

    def const(self, name: str) -> str:
        for n, v in self.consts:
            if n == name:
                return v
        raise UndefinedVariableError(f"constant {name} not interpreted")

    def func(self, name: str, args: tuple[str, ...]) -> str:
        for n, table in self.funcs:
            if n == name:
                for key, value in table:
                    if key == args:
                        return value
                raise UndefinedVariableError(f"function {name} undefined on {args}")
        raise UndefinedVariableError(f"function {name} not interpreted")

    def pred(self, name: str) -> frozenset[tuple[str, ...]]:
        for n, ext in self.preds:
            if n == name:
                return ext
        return frozenset()

    def interp_key(self, kind: str, name: str):
        """Canonical value of one symbol's interpretation, for agreement checks."""
        if kind == "const":
            return dict(self.consts).get(name)
        if kind == "func":
            for n, table in self.funcs:
                if n == name:
                    return tuple(sorted(table))
            return ()
        return tuple(sorted(self.pred(name)))

    def key(self):
        return (
            self.domain,
            tuple(sorted(self.consts)),
            tuple((n, tuple(sorted(t))) for n, t in sorted(self.funcs)),
            tuple((n, tuple(sorted(e))) for n, e in sorted(self.preds)),
        )


def make_local_model(
    domain: Iterable[str],
    consts: Mapping[str, str] | None = None,
    funcs: Mapping[str, Mapping[tuple[str, ...], str]] | None = None,
    preds: Mapping[str, Iterable[tuple[str, ...]]] | None = None,
) -> LocalModel:
    """Convenience constructor from plain mappings."""
    return LocalModel(
        tuple(domain),
        tuple(sorted((consts or {}).items())),
        tuple(
            (name, tuple(sorted(table.items())))
            for name, table in sorted((funcs or {}).items())
        ),
        tuple(
            (name, frozenset(tuple(t) for t in ext))
            for name, ext in sorted((preds or {}).items())
        ),
    )


@dataclass
class DfolModel:
    """Per-index domains and local-model sets plus directed domain relations.

    Relations are keyed (source index, target index, link label or None);
    absent keys denote the empty relation.
    """

    domains: dict[str, tuple[str, ...]] = field(default_factory=dict)
    model_sets: dict[str, tuple[LocalModel, ...]] = field(default_factory=dict)
    relations: dict[tuple[str, str, str | None], frozenset[tuple[str, str]]] = field(
        default_factory=dict
    )

    def rel(self, src: str, tgt: str, label: str | None = None) -> frozenset[tuple[str, str]]:
        return self.relations.get((src, tgt, label), frozenset())

    def models(self, index: str) -> tuple[LocalModel, ...]:
        return self.model_sets.get(index, ())

    def key(self):
        return (
            tuple(sorted(self.domains.items())),
            tuple(
                (i, tuple(sorted(m.key() for m in ms)))
                for i, ms in sorted(self.model_sets.items())
            ),
            tuple((k, tuple(sorted(v))) for k, v in sorted(self.relations.items()) if v),
        )


# ---------------------------------------------------------------------------
# Assignments
# ---------------------------------------------------------------------------


class Assignment:
    """Immutable per-index partial map from (plain and arrow) variables to
    domain elements; `x`, `x^>j` and `x^<j` are distinct keys."""

    __slots__ = ("_map",)

    def __init__(self, entries: Iterable[tuple[str, Term, str]] = ()):
        m: dict[tuple[str, Term], str] = {}
        for index, var, elem in entries:
            m[(index, var)] = elem
        object.__setattr__(self, "_map", m)

    def get(self, index: str, var: Term) -> str | None:
        return self._map.get((index, var))

    def defined(self, index: str, var: Term) -> bool:
        return (index, var) in self._map

    def entries(self) -> list[tuple[str, Term, str]]:
        return sorted(
            ((i, v, e) for (i, v), e in self._map.items()),
            key=lambda t: (t[0], render_term(t[1])),
        )

    def extend(self, entries: Iterable[tuple[str, Term, str]]) -> "Assignment":
        return Assignment(self.entries() + list(entries))

    def env(self, index: str) -> dict[Term, str]:
        return {v: e for (i, v), e in self._map.items() if i == index}

    def extends(self, other: "Assignment") -> bool:
        return all(self._map.get(k) == v for k, v in other._map.items())

    def key(self):
        return tuple((i, render_term(v), e) for i, v, e in self.entries())

    def to_json(self) -> dict[str, dict[str, str]]:
        out: dict[str, dict[str, str]] = {}
        for i, v, e in self.entries():
            out.setdefault(i, {})[render_term(v)] = e
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Assignment) and self._map == other._map

    def __hash__(self) -> int:
        return hash(self.key())

    def __len__(self) -> int:
        return len(self._map)

    def __repr__(self) -> str:
        body = ", ".join(f"{i}:{render_term(v)}={e}" for i, v, e in self.entries())
        return f"Assignment({body})"


def _arrow_condition(M: DfolModel, a: Assignment, index: str, av: ArrowVar) -> bool:
    """Def. Assignment conditions: to-variables map through r_{index,foreign},
    from-variables through r_{foreign,index}, anchored at the plain variable."""
    value = a.get(index, av)
    anchor = a.get(av.foreign, Var(av.base))
    if value is None or anchor is None:
        return False
    if av.direction == ">":
        return (value, anchor) in M.rel(index, av.foreign, av.label)
    return (anchor, value) in M.rel(av.foreign, index, av.label)


def validate_assignment(M: DfolModel, a: Assignment) -> list[str]:
    """Violations of Def. Assignment; empty list means ok."""
    problems: list[str] = []
    for index, var, elem in a.entries():
        if index not in M.domains:
            problems.append(f"assignment uses unknown index {index}")
            continue
        if elem not in M.domains[index]:
            problems.append(
                f"a_{index}({render_term(var)}) = {elem} is outside the domain"
            )
        if isinstance(var, ArrowVar) and not _arrow_condition(M, a, index, var):
            problems.append(
                f"a_{index}({render_term(var)}) = {elem} violates its domain-relation condition"
            )
    return problems


# ---------------------------------------------------------------------------
# Satisfaction
# ---------------------------------------------------------------------------


def eval_term(m: LocalModel, env: Mapping[Term, str], t: Term) -> str:
    if isinstance(t, (Var, ArrowVar)):
        try:
            return env[t]
        except KeyError:
            raise UndefinedVariableError(f"unassigned variable {render_term(t)}") from None
    if isinstance(t, Const):
        return m.const(t.name)
    if isinstance(t, App):
        return m.func(t.func, tuple(eval_term(m, env, a) for a in t.args))
    raise TypeError(f"not a term: {t!r}")


def satisfies_local(m: LocalModel, phi: Formula, env: Mapping[Term, str]) -> bool:
    """Classical Tarskian satisfaction; arrow variables act as assigned names."""
    if isinstance(phi, Atom):
        return tuple(eval_term(m, env, a) for a in phi.args) in m.pred(phi.pred)
    if isinstance(phi, Eq):
        return eval_term(m, env, phi.lhs) == eval_term(m, env, phi.rhs)
    if isinstance(phi, Falsum):
        return False
    if isinstance(phi, Not):
        return not satisfies_local(m, phi.body, env)
    if isinstance(phi, And):
        return satisfies_local(m, phi.lhs, env) and satisfies_local(m, phi.rhs, env)
    if isinstance(phi, Or):
        return satisfies_local(m, phi.lhs, env) or satisfies_local(m, phi.rhs, env)
    if isinstance(phi, Implies):
        return (not satisfies_local(m, phi.lhs, env)) or satisfies_local(m, phi.rhs, env)
    if isinstance(phi, Forall):
        v = Var(phi.var)
        return all(satisfies_local(m, phi.body, {**env, v: d}) for d in m.domain)
    if isinstance(phi, Exists):
        v = Var(phi.var)
        return any(satisfies_local(m, phi.body, {**env, v: d}) for d in m.domain)
    raise TypeError(f"not a formula: {phi!r}")


def is_admissible(M: DfolModel, a: Assignment, lf: LabeledFormula) -> bool:
    """a assigns every arrow variable of lf, meeting its relation condition."""
    return all(
        a.defined(lf.index, av) and _arrow_condition(M, a, lf.index, av)
        for av in arrow_vars(lf.formula)
    )


def satisfies_labeled(M: DfolModel, lf: LabeledFormula, a: Assignment) -> bool:
    """True iff a is admissible for lf and every local model at its index
    satisfies the body; an empty model set satisfies vacuously."""
    if not is_admissible(M, a, lf):
        return False
    env = a.env(lf.index)
    return all(satisfies_local(m, lf.formula, env) for m in M.models(lf.index))


# ---------------------------------------------------------------------------
# Admissible-assignment enumeration
# ---------------------------------------------------------------------------


def _variables_of(formulas: Iterable[LabeledFormula]) -> list[tuple[str, Term]]:
    """All (index, variable) slots a materialized assignment must cover:
    free plain variables, arrow variables, and the anchors of arrow
    variables (plain variables at the foreign index)."""
    slots: set[tuple[str, Term]] = set()
    for lf in formulas:
        for name in free_plain_vars(lf.formula):
            slots.add((lf.index, Var(name)))
        for av in arrow_vars(lf.formula):
            slots.add((lf.index, av))
            slots.add((av.foreign, Var(av.base)))
    return sorted(slots, key=lambda s: (s[0], render_term(s[1])))


def _assignments_over(
    M: DfolModel, slots: list[tuple[str, Term]]
) -> Iterator[Assignment]:
    """Depth-first lexicographic enumeration over the given variable slots,
    pruning as soon as an arrow variable's relation condition is decidable."""
    n = len(slots)
    slot_pos = {s: k for k, s in enumerate(slots)}

    # for each position, the arrow conditions fully determined once it is set
    checks: list[list[tuple[str, ArrowVar]]] = [[] for _ in range(n)]
    for index, var in slots:
        if isinstance(var, ArrowVar):
            anchor_pos = slot_pos.get((var.foreign, Var(var.base)), -1)
            own_pos = slot_pos[(index, var)]
            checks[max(anchor_pos, own_pos)].append((index, var))

    values: dict[tuple[str, Term], str] = {}

    def condition_ok(index: str, av: ArrowVar) -> bool:
        value = values[(index, av)]
        anchor = values.get((av.foreign, Var(av.base)))
        if anchor is None:
            return False
        if av.direction == ">":
            return (value, anchor) in M.rel(index, av.foreign, av.label)
        return (anchor, value) in M.rel(av.foreign, index, av.label)

    def rec(k: int) -> Iterator[Assignment]:
        if k == n:
            yield Assignment([(i, v, e) for (i, v), e in values.items()])
            return
        index, var = slots[k]
        for elem in sorted(M.domains.get(index, ())):
            values[(index, var)] = elem
            if all(condition_ok(i, av) for i, av in checks[k]):
                yield from rec(k + 1)
        values.pop((index, var), None)

    yield from rec(0)


def enumerate_admissible(
    M: DfolModel, formulas: Iterable[LabeledFormula], strict: bool = True
) -> Iterator[Assignment]:
    """Assignments over exactly the variables occurring in the formula set,
    admissible for every formula.  Materialization already confines the
    assignment to occurring variables, so `strict` (assign no arrow
    variables beyond the formulas') is guaranteed by construction for
    either flag value.
    """
    del strict
    yield from _assignments_over(M, _variables_of(formulas))


def admissible_extensions(
    M: DfolModel, a: Assignment, lf: LabeledFormula
) -> Iterator[Assignment]:
    """Extensions of a assigning lf's missing arrow variables admissibly,
    in deterministic element order; yields a itself when nothing is missing."""
    missing = sorted(
        (av for av in arrow_vars(lf.formula) if not a.defined(lf.index, av)),
        key=render_term,
    )

    def rec(k: int, acc: Assignment) -> Iterator[Assignment]:
        if k == len(missing):
            if is_admissible(M, acc, lf):
                yield acc
            return
        av = missing[k]
        anchor = acc.get(av.foreign, Var(av.base))
        if anchor is None:
            return
        if av.direction == ">":
            candidates = sorted(d for d, e in M.rel(lf.index, av.foreign, av.label) if e == anchor)
        else:
            candidates = sorted(e for d, e in M.rel(av.foreign, lf.index, av.label) if d == anchor)
        for value in candidates:
            yield from rec(k + 1, acc.extend([(lf.index, av, value)]))

    yield from rec(0, a)


# ---------------------------------------------------------------------------
# Bridge rules, axioms, whole theories
# ---------------------------------------------------------------------------


def _rule_slots(rule: BridgeRule) -> list[tuple[str, Term]]:
    """Outer-assignment slots of a bridge rule: the premises' variables plus
    the conclusion's plain variables and anchors.  The conclusion's own new
    arrow variables stay out: they are found by extension search."""
    slots = set(_variables_of(rule.premises))
    concl = rule.conclusion
    for name in free_plain_vars(concl.formula):
        slots.add((concl.index, Var(name)))
    for av in arrow_vars(concl.formula):
        slots.add((av.foreign, Var(av.base)))
    premise_arrows = {
        (lf.index, av) for lf in rule.premises for av in arrow_vars(lf.formula)
    }
    slots = {
        s
        for s in slots
        if not isinstance(s[1], ArrowVar) or s in premise_arrows
    }
    return sorted(slots | premise_arrows, key=lambda s: (s[0], render_term(s[1])))


def satisfies_bridge_rule(
    M: DfolModel, rule: BridgeRule
) -> tuple[bool, Assignment | None]:
    """(True, None) iff every strictly premise-admissible assignment that
    satisfies all premises admits an extension satisfying the conclusion;
    otherwise (False, witnessing assignment)."""
    for a in _assignments_over(M, _rule_slots(rule)):
        if not all(satisfies_labeled(M, p, a) for p in rule.premises):
            continue
        if not any(
            satisfies_labeled(M, rule.conclusion, ext)
            for ext in admissible_extensions(M, a, rule.conclusion)
        ):
            return False, a
    return True, None


def satisfies_axiom(M: DfolModel, ax: LabeledFormula) -> tuple[bool, Assignment | None]:
    """An axiom holds when every admissible assignment over its variables
    satisfies it; closed axioms reduce to the single empty assignment."""
    for a in enumerate_admissible(M, [ax]):
        if not satisfies_labeled(M, ax, a):
            return False, a
    return True, None


@dataclass
class TheoryReport:
    """Outcome of checking a model against a theory's axioms and rules."""

    axiom_results: list[tuple[LabeledFormula, bool, Assignment | None]]
    rule_results: list[tuple[BridgeRule, bool, Assignment | None]]

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.axiom_results) and all(
            ok for _, ok, _ in self.rule_results
        )


def check_theory(T: Theory, M: DfolModel) -> TheoryReport:
    axiom_results = [(ax, *satisfies_axiom(M, ax)) for ax in T.axioms]
    rule_results = [(rule, *satisfies_bridge_rule(M, rule)) for rule in T.rules]
    return TheoryReport(axiom_results, rule_results)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _validate_local(
    sig: Signature, domain: tuple[str, ...], m: LocalModel, where: str
) -> list[str]:
    problems: list[str] = []
    if tuple(m.domain) != tuple(domain):
        problems.append(f"{where}: local model domain differs from the index domain")
    dom = set(domain)
    const_names = {n for n, _ in m.consts}
    for c in sig.consts:
        if c not in const_names:
            problems.append(f"{where}: constant {c} not interpreted")
    for n, v in m.consts:
        if not sig.is_const(n):
            problems.append(f"{where}: undeclared constant {n}")
        if v not in dom:
            problems.append(f"{where}: constant {n} maps outside the domain")
    func_names = {n for n, _ in m.funcs}
    for f, arity in sig.funcs:
        if f not in func_names:
            problems.append(f"{where}: function {f} not interpreted")
    for n, table in m.funcs:
        arity = sig.func_arity(n)
        if arity is None:
            problems.append(f"{where}: undeclared function {n}")
            continue
        seen = set()
        for args, value in table:
            if len(args) != arity:
                problems.append(f"{where}: function {n} entry has arity {len(args)}")
            if any(x not in dom for x in args) or value not in dom:
                problems.append(f"{where}: function {n} entry leaves the domain")
            seen.add(args)
        need = 1
        for _ in range(arity):
            need *= len(domain)
        if len(seen) != need:
            problems.append(f"{where}: function {n} is not total over the domain")
    for n, ext in m.preds:
        arity = sig.pred_arity(n)
        if arity is None:
            problems.append(f"{where}: undeclared predicate {n}")
            continue
        for tup in ext:
            if len(tup) != arity:
                problems.append(f"{where}: predicate {n} tuple has arity {len(tup)}")
            elif any(x not in dom for x in tup):
                problems.append(f"{where}: predicate {n} tuple leaves the domain")
    return problems


def validate_model(T: Theory, M: DfolModel) -> list[str]:
    """All structural violations: empty domains, partial interpretations,
    out-of-domain tuples, complete-symbol disagreements, bad relations.
    Empty model sets over nonempty domains are legal."""
    problems: list[str] = []
    for index in T.indices:
        if index not in M.domains or not M.domains[index]:
            problems.append(f"index {index}: missing or empty domain")
    for index in M.domains:
        if index not in T.indices:
            problems.append(f"unknown index {index}")
    for index, ms in M.model_sets.items():
        if index not in T.indices:
            problems.append(f"model set for unknown index {index}")
            continue
        sig = T.signatures[index]
        domain = M.domains.get(index, ())
        for k, m in enumerate(ms):
            problems.extend(_validate_local(sig, tuple(domain), m, f"M_{index}[{k}]"))
        for kind, name in sorted(sig.complete):
            interps = {m.interp_key(kind, name) for m in ms}
            if len(interps) > 1:
                problems.append(
                    f"M_{index}: local models disagree on complete {kind} {name}"
                )
    for (src, tgt, label), pairs in M.relations.items():
        if src not in T.indices or tgt not in T.indices or src == tgt:
            problems.append(f"bad relation key {src}->{tgt}")
            continue
        dom_s, dom_t = set(M.domains.get(src, ())), set(M.domains.get(tgt, ()))
        for d, e in pairs:
            if d not in dom_s or e not in dom_t:
                suffix = f"@{label}" if label else ""
                problems.append(f"relation {src}->{tgt}{suffix}: pair ({d},{e}) leaves the domains")
    return problems


# ---------------------------------------------------------------------------
# JSON model files
# ---------------------------------------------------------------------------


def load_model(data: dict) -> DfolModel:
    """Build a DfolModel from the JSON object format::

        {"domains": {"1": ["a"]},
         "models": {"1": [{"const": {"l": "a"}, "func": {"f": [["a", "a"]]},
                            "pred": {"p": [["a"]]}}]},
         "relations": {"1->2": [["a", "b"]], "1->2@E": []}}

    Function entries list argument elements followed by the value.
    """
    if not isinstance(data, dict):
        raise ModelFormatError("model file must be a JSON object")
    domains: dict[str, tuple[str, ...]] = {}
    for index, elems in (data.get("domains") or {}).items():
        if not isinstance(elems, list) or not elems:
            raise ModelFormatError(f"domain of index {index} must be a nonempty array")
        domains[str(index)] = tuple(str(e) for e in elems)
    model_sets: dict[str, tuple[LocalModel, ...]] = {i: () for i in domains}
    for index, models in (data.get("models") or {}).items():
        index = str(index)
        if index not in domains:
            raise ModelFormatError(f"models given for index {index} without a domain")
        if not isinstance(models, list):
            raise ModelFormatError(f"models of index {index} must be an array")
        built = []
        for m in models:
            if not isinstance(m, dict):
                raise ModelFormatError(f"local model of index {index} must be an object")
            consts = {str(k): str(v) for k, v in (m.get("const") or {}).items()}
            funcs: dict[str, dict[tuple[str, ...], str]] = {}
            for name, entries in (m.get("func") or {}).items():
                table: dict[tuple[str, ...], str] = {}
                for entry in entries:
                    if not isinstance(entry, list) or len(entry) < 1:
                        raise ModelFormatError(f"bad function entry for {name}")
                    table[tuple(str(x) for x in entry[:-1])] = str(entry[-1])
                funcs[str(name)] = table
            preds = {
                str(name): [tuple(str(x) for x in t) for t in ext]
                for name, ext in (m.get("pred") or {}).items()
            }
            built.append(make_local_model(domains[index], consts, funcs, preds))
        model_sets[index] = tuple(built)
    relations: dict[tuple[str, str, str | None], frozenset[tuple[str, str]]] = {}
    for key, pairs in (data.get("relations") or {}).items():
        name, _, label = str(key).partition("@")
        src, sep, tgt = name.partition("->")
        if not sep:
            raise ModelFormatError(f"relation key {key!r} must look like 'i->j'")
        rel = frozenset((str(d), str(e)) for d, e in pairs)
        relations[(src.strip(), tgt.strip(), label or None)] = rel
    return DfolModel(domains, model_sets, relations)


def load_model_file(path: str) -> DfolModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: {exc}") from exc
    return load_model(data)


def model_to_json(M: DfolModel) -> dict:
    """Inverse of load_model (up to key ordering)."""
    models = {}
    for index, ms in sorted(M.model_sets.items()):
        out = []
        for m in ms:
            out.append(
                {
                    "const": {n: v for n, v in sorted(m.consts)},
                    "func": {
                        n: [[*args, value] for args, value in sorted(table)]
                        for n, table in sorted(m.funcs)
                    },
                    "pred": {n: sorted(list(t) for t in ext) for n, ext in sorted(m.preds)},
                }
            )
        models[index] = out
    relations = {}
    for (src, tgt, label), pairs in sorted(M.relations.items(), key=lambda kv: str(kv[0])):
        key = f"{src}->{tgt}" + (f"@{label}" if label else "")
        relations[key] = sorted(list(p) for p in pairs)
    return {
        "domains": {i: list(d) for i, d in sorted(M.domains.items())},
        "models": models,
        "relations": relations,
    }
