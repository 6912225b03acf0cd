"""Proof scripts for the multi-language natural deduction calculus.

A proof script is a Lemmon style listing of numbered steps, each one a
labeled formula justified by a rule application over earlier steps.
Local rules (``impI`` through ``eqE``, plus ``cut``) work at single
indices or glue indices through their major premise; interface rules
(``BR``, ``fromII``, ``toII``) move information across indices through
declared bridge rules and domain relations.  ``check_proof`` validates
every step against its rule schema and against the six global
restrictions R1 to R6 that keep arrow variable reasoning sound, and
reports the first failing step.

Key notions, all relative to a script's concluding step:

* dependencies: the assumptions a step still rests on, in the usual
  Lemmon arithmetic (assumptions depend on themselves; a rule's
  dependencies are its premises' minus anything it discharges);
* existential arrow variables of a step: arrow variables occurring in
  its formula but in none of the assumptions it depends on, i.e.
  variables that assert mere existence of a counterpart rather than
  naming one from an open hypothesis;
* local assumptions: assumptions with the conclusion's index whose
  every path from the conclusion crosses neither an interface rule nor
  the major premise of a cross index ``cut``/``orE``/``exE``; all other
  assumptions are global.

The ``local-lemma`` pseudo rule compresses classical reasoning inside
one index: it accepts a step when the bundled bounded prover derives
the conclusion from the cited premises together with the arrow free
local axioms of that index, reading arrow variables as constants.

Proof file format, one step per line::

    theory <path>
    (1) 1: inbox(x,r) ; rule=assumption
    (2) 2: exists y. inbox(x^<1,y) ; rule=BR:1 ; from=1
    ...
    conclude (2) global=1 local=

``from=`` lists premises in schema order (major premise first for
``cut``, ``orE``, ``exE``); ``discharge=`` lists the assumption steps a
rule closes.  ``#`` starts a comment.  The footer claims the concluding
step and the split of its dependencies into global and local parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .prover import DEFAULT_GAMMA_ROUNDS, DEFAULT_MAX_STEPS, tableau_valid
from .syntax import (
    And,
    ArrowVar,
    App,
    Atom,
    Const,
    Eq,
    Exists,
    Falsum,
    Forall,
    Formula,
    Implies,
    LabeledFormula,
    Not,
    Or,
    Term,
    Theory,
    Var,
    arrow_vars,
    free_plain_vars,
    is_complete_formula,
    parse_labeled_formula,
    parse_theory,
    substitute,
    term_arrow_vars,
)

__all__ = [
    "RuleId",
    "ProofStep",
    "ProofScript",
    "CheckResult",
    "CheckConfig",
    "ProofSyntaxError",
    "parse_rule_id",
    "parse_proof_script",
    "load_proof_script",
    "check_proof",
    "assumption_status",
    "existential_vars_of_step",
]


LEAF_RULES = {"assumption", "axiom"}
LOCAL_RULES = {
    "impI",
    "impE",
    "andI",
    "andE",
    "orI",
    "orE",
    "botI",
    "allI",
    "allE",
    "exI",
    "exE",
    "eqI",
    "eqE",
    "cut",
    "local-lemma",
}
INTERFACE_RULES = {"BR", "fromII", "toII"}
# rules that may glue different indices through their major premise
CROSS_RULES = {"cut", "orE", "exE"}
# rules that may close assumptions
DISCHARGING_RULES = {"impI", "botI", "orE", "exE", "cut"}


@dataclass(frozen=True)
class RuleId:
    """Rule tag of a step: a name plus an optional side or bridge index.

    ``side`` picks the projection of ``andE`` or the injection of
    ``orI`` (``left``/``right``, optional: the checker infers it);
    ``br_ref`` is the 1-based position of a bridge rule in the theory.
    """

    name: str
    side: str | None = None
    br_ref: int | None = None

    def __post_init__(self) -> None:
        if self.name not in LEAF_RULES | LOCAL_RULES | INTERFACE_RULES:
            raise ValueError(f"unknown rule {self.name!r}")
        if self.side is not None and self.side not in ("left", "right"):
            raise ValueError(f"bad rule side {self.side!r}")
        if self.name == "BR" and (self.br_ref is None or self.br_ref < 1):
            raise ValueError("BR needs a 1-based bridge rule reference")

    def __str__(self) -> str:
        if self.br_ref is not None:
            return f"{self.name}:{self.br_ref}"
        if self.side is not None:
            return f"{self.name}:{self.side}"
        return self.name


@dataclass(frozen=True)
class ProofStep:
    """One numbered line of a proof script."""

    id: int
    formula: LabeledFormula
    rule: RuleId
    premises: tuple[int, ...] = ()
    discharged: tuple[int, ...] = ()

    @property
    def index(self) -> str:
        return self.formula.index


@dataclass(frozen=True)
class ProofScript:
    """A parsed proof: theory, steps, and the claimed conclusion split."""

    theory: Theory
    steps: tuple[ProofStep, ...]
    concluded: int
    claimed_global: frozenset[int]
    claimed_local: frozenset[int]

    def step(self, sid: int) -> ProofStep:
        for s in self.steps:
            if s.id == sid:
                return s
        raise KeyError(f"no step ({sid})")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of ``check_proof``: valid, or first violation found.

    ``code`` is one of R1..R6, ``shape`` (rule schema mismatch, failed
    lemma obligation), ``ref`` (bad step reference), or ``conclusion``
    (footer inconsistent with the computed dependencies).
    """

    ok: bool
    step: int | None = None
    code: str | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def valid(cls) -> CheckResult:
        return cls(True)

    @classmethod
    def violation(cls, step: int | None, code: str, message: str) -> CheckResult:
        return cls(False, step, code, message)


@dataclass(frozen=True)
class CheckConfig:
    """Budgets for the bundled prover behind ``local-lemma`` steps."""

    lemma_gamma_rounds: int = DEFAULT_GAMMA_ROUNDS
    lemma_max_steps: int = DEFAULT_MAX_STEPS


class ProofSyntaxError(Exception):
    """Malformed proof file, with the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_rule_id(text: str) -> RuleId:
    text = text.strip()
    name, _, tail = text.partition(":")
    name = name.strip()
    tail = tail.strip()
    if not tail:
        return RuleId(name)
    if name == "BR":
        if not tail.isdigit():
            raise ValueError(f"bad bridge rule reference {tail!r}")
        return RuleId(name, br_ref=int(tail))
    return RuleId(name, side=tail)


def _parse_ids(text: str, line_no: int) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk.isdigit():
            raise ProofSyntaxError(f"bad step reference {chunk!r}", line_no)
        out.append(int(chunk))
    return tuple(out)


def _parse_step_line(theory: Theory, line: str, line_no: int) -> ProofStep:
    head, *fields = [part.strip() for part in line.split(";")]
    if not head.startswith("("):
        raise ProofSyntaxError("step must start with (<id>)", line_no)
    close = head.find(")")
    if close < 0:
        raise ProofSyntaxError("unterminated step id", line_no)
    id_text = head[1:close].strip()
    if not id_text.isdigit():
        raise ProofSyntaxError(f"bad step id {id_text!r}", line_no)
    sid = int(id_text)
    try:
        lf = parse_labeled_formula(theory, head[close + 1:].strip())
    except Exception as exc:
        raise ProofSyntaxError(f"bad formula: {exc}", line_no) from exc
    rule: RuleId | None = None
    premises: tuple[int, ...] = ()
    discharged: tuple[int, ...] = ()
    for f in fields:
        if not f:
            continue
        key, eq, value = f.partition("=")
        key = key.strip()
        if not eq:
            raise ProofSyntaxError(f"expected key=value, found {f!r}", line_no)
        if key == "rule":
            try:
                rule = parse_rule_id(value)
            except ValueError as exc:
                raise ProofSyntaxError(str(exc), line_no) from exc
        elif key == "from":
            premises = _parse_ids(value, line_no)
        elif key == "discharge":
            discharged = _parse_ids(value, line_no)
        else:
            raise ProofSyntaxError(f"unknown field {key!r}", line_no)
    if rule is None:
        raise ProofSyntaxError("step needs a rule= field", line_no)
    return ProofStep(sid, lf, rule, premises, discharged)


def parse_proof_script(
    text: str,
    *,
    theory: Theory | None = None,
    base_dir: str | Path = ".",
) -> ProofScript:
    """Parse a proof file; the theory comes from the ``theory <path>``
    header (resolved against base_dir) unless passed explicitly."""
    steps: list[ProofStep] = []
    footer = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("theory"):
            if steps or footer is not None:
                raise ProofSyntaxError("theory header must come first", line_no)
            path = line[len("theory"):].strip()
            if theory is None:
                theory = parse_theory((Path(base_dir) / path).read_text())
            continue
        if line.startswith("conclude"):
            if footer is not None:
                raise ProofSyntaxError("duplicate conclude footer", line_no)
            footer = (line[len("conclude"):].strip(), line_no)
            continue
        if theory is None:
            raise ProofSyntaxError("no theory header before first step", line_no)
        if footer is not None:
            raise ProofSyntaxError("steps after conclude footer", line_no)
        steps.append(_parse_step_line(theory, line, line_no))
    if theory is None:
        raise ProofSyntaxError("proof has no theory", 1)
    if footer is None:
        raise ProofSyntaxError("proof has no conclude footer", 1)
    footer_text, footer_line = footer
    if not footer_text.startswith("("):
        raise ProofSyntaxError("conclude needs (<id>)", footer_line)
    close = footer_text.find(")")
    concluded_text = footer_text[1:close].strip()
    if close < 0 or not concluded_text.isdigit():
        raise ProofSyntaxError("bad concluded step id", footer_line)
    concluded = int(concluded_text)
    claimed: dict[str, tuple[int, ...]] = {"global": (), "local": ()}
    for f in footer_text[close + 1:].split():
        key, eq, value = f.partition("=")
        if not eq or key not in claimed:
            raise ProofSyntaxError(f"bad footer field {f!r}", footer_line)
        claimed[key] = _parse_ids(value, footer_line)
    return ProofScript(
        theory=theory,
        steps=tuple(steps),
        concluded=concluded,
        claimed_global=frozenset(claimed["global"]),
        claimed_local=frozenset(claimed["local"]),
    )


def load_proof_script(path: str | Path, *, theory: Theory | None = None) -> ProofScript:
    path = Path(path)
    return parse_proof_script(path.read_text(), theory=theory, base_dir=path.parent)


# ---------------------------------------------------------------------------
# Structural matching helpers
# ---------------------------------------------------------------------------


def _match_hole(body: Formula, var: str, target: Formula) -> tuple[bool, Term | None]:
    """Does ``body[t/var] == target`` for some term t?  Returns (ok, t);
    t is None when var has no free occurrence (then body must equal
    target and any instantiating term works)."""
    candidates: list[Term] = []

    def terms_match(b: Term, t: Term, bound: set[str]) -> bool:
        if isinstance(b, Var) and b.name == var and var not in bound:
            candidates.append(t)
            return True
        if type(b) is not type(t):
            return False
        if isinstance(b, Var):
            return b == t
        if isinstance(b, (Const, ArrowVar)):
            return b == t
        assert isinstance(b, App) and isinstance(t, App)
        return b.func == t.func and len(b.args) == len(t.args) and all(
            terms_match(x, y, bound) for x, y in zip(b.args, t.args)
        )

    def walk(b: Formula, t: Formula, bound: set[str]) -> bool:
        if type(b) is not type(t):
            return False
        if isinstance(b, Falsum):
            return True
        if isinstance(b, Atom):
            return b.pred == t.pred and len(b.args) == len(t.args) and all(
                terms_match(x, y, bound) for x, y in zip(b.args, t.args)
            )
        if isinstance(b, Eq):
            return terms_match(b.lhs, t.lhs, bound) and terms_match(b.rhs, t.rhs, bound)
        if isinstance(b, Not):
            return walk(b.body, t.body, bound)
        if isinstance(b, (And, Or, Implies)):
            return walk(b.lhs, t.lhs, bound) and walk(b.rhs, t.rhs, bound)
        assert isinstance(b, (Forall, Exists))
        if b.var != t.var:
            return False
        return walk(b.body, t.body, bound | {b.var})

    if not walk(body, target, set()):
        return (False, None)
    distinct = set(candidates)
    if not distinct:
        return (True, None)
    if len(distinct) > 1:
        return (False, None)
    t = distinct.pop()
    # confirm via real substitution so capture rules stay authoritative
    try:
        if substitute(body, var, t) != target:
            return (False, None)
    except ValueError:
        return (False, None)
    return (True, t)


def _rewrite_ok(before: Formula, after: Formula, t: Term, u: Term) -> bool:
    """True iff ``after`` comes from ``before`` by replacing some free
    occurrences of t with u (no replacement under binders capturing
    variables of either side)."""
    def term_vars(x: Term) -> set[str]:
        if isinstance(x, Var):
            return {x.name}
        if isinstance(x, App):
            out: set[str] = set()
            for a in x.args:
                out |= term_vars(a)
            return out
        return set()

    # binders over these names block replacement underneath them
    frozen = term_vars(t) | term_vars(u)

    def terms(b: Term, a: Term, bound: set[str]) -> bool:
        if b == t and a == u and not (frozen & bound):
            return True
        if b == a:
            return True
        if isinstance(b, App) and isinstance(a, App):
            return b.func == a.func and len(b.args) == len(a.args) and all(
                terms(x, y, bound) for x, y in zip(b.args, a.args)
            )
        return False

    def walk(b: Formula, a: Formula, bound: set[str]) -> bool:
        if type(b) is not type(a):
            return False
        if isinstance(b, Falsum):
            return True
        if isinstance(b, Atom):
            return b.pred == a.pred and len(b.args) == len(a.args) and all(
                terms(x, y, bound) for x, y in zip(b.args, a.args)
            )
        if isinstance(b, Eq):
            return terms(b.lhs, a.lhs, bound) and terms(b.rhs, a.rhs, bound)
        if isinstance(b, Not):
            return walk(b.body, a.body, bound)
        if isinstance(b, (And, Or, Implies)):
            return walk(b.lhs, a.lhs, bound) and walk(b.rhs, a.rhs, bound)
        assert isinstance(b, (Forall, Exists))
        if b.var != a.var:
            return False
        return walk(b.body, a.body, bound | {b.var})

    return walk(before, after, set())


def _match_renaming(
    pattern: Formula,
    target: Formula,
    sigma: dict[str, str],
) -> bool:
    """Match target against pattern under a plain variable renaming,
    extending sigma in place.  Arrow variables rename through their
    base name; bound variables must agree literally."""

    def term(p: Term, t: Term, bound: set[str]) -> bool:
        if isinstance(p, Var):
            if not isinstance(t, Var):
                return False
            if p.name in bound:
                return p.name == t.name
            if p.name in sigma:
                return sigma[p.name] == t.name
            sigma[p.name] = t.name
            return True
        if isinstance(p, ArrowVar):
            if not isinstance(t, ArrowVar):
                return False
            if (p.direction, p.foreign, p.label) != (t.direction, t.foreign, t.label):
                return False
            if p.base in sigma:
                return sigma[p.base] == t.base
            sigma[p.base] = t.base
            return True
        if isinstance(p, Const):
            return p == t
        assert isinstance(p, App)
        return (
            isinstance(t, App)
            and p.func == t.func
            and len(p.args) == len(t.args)
            and all(term(x, y, bound) for x, y in zip(p.args, t.args))
        )

    def walk(p: Formula, t: Formula, bound: set[str]) -> bool:
        if type(p) is not type(t):
            return False
        if isinstance(p, Falsum):
            return True
        if isinstance(p, Atom):
            return p.pred == t.pred and len(p.args) == len(t.args) and all(
                term(x, y, bound) for x, y in zip(p.args, t.args)
            )
        if isinstance(p, Eq):
            return term(p.lhs, t.lhs, bound) and term(p.rhs, t.rhs, bound)
        if isinstance(p, Not):
            return walk(p.body, t.body, bound)
        if isinstance(p, (And, Or, Implies)):
            return walk(p.lhs, t.lhs, bound) and walk(p.rhs, t.rhs, bound)
        assert isinstance(p, (Forall, Exists))
        if p.var != t.var:
            return False
        return walk(p.body, t.body, bound | {p.var})

    return walk(pattern, target, set())


def _as_implication(f: Formula) -> tuple[Formula, Formula] | None:
    """Implication view of f; negation reads as implying falsum."""
    if isinstance(f, Implies):
        return (f.lhs, f.rhs)
    if isinstance(f, Not):
        return (f.body, Falsum())
    return None


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------


class _Checker:
    def __init__(self, script: ProofScript, config: CheckConfig):
        self.script = script
        self.theory = script.theory
        self.config = config
        self.by_id: dict[int, ProofStep] = {}
        self.dep: dict[int, frozenset[int]] = {}
        # locality flags relative to the concluding step
        self.clean: dict[int, bool] = {}
        self.dirty: dict[int, bool] = {}

    # -- plumbing -----------------------------------------------------------

    def fail(self, step: ProofStep | None, code: str, message: str) -> CheckResult:
        return CheckResult.violation(step.id if step else None, code, message)

    def arrows_of(self, sid: int) -> frozenset[ArrowVar]:
        return frozenset(arrow_vars(self.by_id[sid].formula.formula))

    def existential(self, sid: int) -> frozenset[ArrowVar]:
        anchored: set[ArrowVar] = set()
        for a in self.dep[sid]:
            anchored |= self.arrows_of(a)
        return self.arrows_of(sid) - anchored

    def is_assumption(self, sid: int) -> bool:
        return self.by_id[sid].rule.name == "assumption"

    def complete(self, step: ProofStep) -> bool:
        sig = self.theory.signature(step.index)
        return is_complete_formula(sig, step.formula.formula)

    def premise_edges(self, step: ProofStep) -> list[tuple[int, bool]]:
        """(premise id, preserves locality) pairs for the step."""
        if step.rule.name in INTERFACE_RULES:
            return [(p, False) for p in step.premises]
        if step.rule.name in CROSS_RULES and step.premises:
            major = self.by_id[step.premises[0]]
            cross = major.index != step.index
            return [(step.premises[0], not cross)] + [
                (p, True) for p in step.premises[1:]
            ]
        return [(p, True) for p in step.premises]

    def compute_locality(self) -> None:
        root = self.by_id.get(self.script.concluded)
        if root is None:
            return
        # propagate (clean, dirty) reachability down every premise edge;
        # a discharged subtree still counts, its branches exist in the tree
        work = [(root.id, True)]
        while work:
            sid, clean = work.pop()
            key = self.clean if clean else self.dirty
            if key.get(sid):
                continue
            key[sid] = True
            step = self.by_id[sid]
            for pid, preserves in self.premise_edges(step):
                work.append((pid, clean and preserves))

    def is_local(self, sid: int) -> bool:
        root = self.by_id[self.script.concluded]
        step = self.by_id[sid]
        return (
            step.index == root.index
            and self.clean.get(sid, False)
            and not self.dirty.get(sid, False)
        )

    # -- rule schemas --------------------------------------------------------

    def shape_error(self, step: ProofStep) -> str | None:
        """None if the step instantiates its rule schema, else a message."""
        name = step.rule.name
        prem = [self.by_id[p] for p in step.premises]
        f = step.formula.formula
        i = step.index

        def same_index(*steps: ProofStep) -> bool:
            return all(s.index == i for s in steps)

        if name in LEAF_RULES:
            if step.premises or step.discharged:
                return f"{name} takes no premises"
            if name == "axiom":
                if step.formula not in self.theory.axioms:
                    return "axiom step does not match any theory axiom"
            return None

        if name != "local-lemma" and name in LOCAL_RULES and not prem:
            if name != "eqI":
                return f"{name} needs premises"

        if name == "impI":
            view = _as_implication(f)
            if view is None:
                return "impI must conclude an implication"
            a, b = view
            if len(prem) != 1 or not same_index(prem[0]):
                return "impI takes one premise at its own index"
            if prem[0].formula.formula != b:
                return "impI premise must be the consequent"
            return self._discharge_shape(step, a, i)

        if name == "impE":
            if len(prem) != 2 or not same_index(*prem):
                return "impE takes two premises at its own index"
            for maj, minor in (prem, reversed(prem)):
                view = _as_implication(maj.formula.formula)
                if view and minor.formula.formula == view[0] and f == view[1]:
                    return None
            return "impE premises must be an implication and its antecedent"

        if name == "andI":
            if not isinstance(f, And):
                return "andI must conclude a conjunction"
            if len(prem) != 2 or not same_index(*prem):
                return "andI takes two premises at its own index"
            got = (prem[0].formula.formula, prem[1].formula.formula)
            if got not in ((f.lhs, f.rhs), (f.rhs, f.lhs)):
                return "andI premises must be the two conjuncts"
            return None

        if name == "andE":
            if len(prem) != 1 or not same_index(prem[0]):
                return "andE takes one premise at its own index"
            src = prem[0].formula.formula
            if not isinstance(src, And):
                return "andE premise must be a conjunction"
            sides = {"left": src.lhs, "right": src.rhs}
            if step.rule.side is not None:
                return None if f == sides[step.rule.side] else "andE side mismatch"
            return None if f in sides.values() else "andE conclusion is neither conjunct"

        if name == "orI":
            if not isinstance(f, Or):
                return "orI must conclude a disjunction"
            if len(prem) != 1 or not same_index(prem[0]):
                return "orI takes one premise at its own index"
            src = prem[0].formula.formula
            sides = {"left": f.lhs, "right": f.rhs}
            if step.rule.side is not None:
                return None if src == sides[step.rule.side] else "orI side mismatch"
            return None if src in sides.values() else "orI premise is neither disjunct"

        if name == "orE":
            if len(prem) != 3:
                return "orE takes a major premise and two minors"
            major, m1, m2 = prem
            src = major.formula.formula
            if not isinstance(src, Or):
                return "orE major premise must be a disjunction"
            if not same_index(m1, m2):
                return "orE minors must sit at the conclusion index"
            if m1.formula.formula != f or m2.formula.formula != f:
                return "orE minors must both conclude the conclusion formula"
            for d in step.discharged:
                ds = self.by_id[d]
                if not self.is_assumption(d):
                    return "orE discharges assumptions only"
                if ds.index != major.index or ds.formula.formula not in (src.lhs, src.rhs):
                    return "orE discharges copies of the disjuncts"
            return None

        if name == "botI":
            if not isinstance(f, (Not, Implies)):
                return "botI must conclude a negation"
            view = _as_implication(f)
            if view is None or view[1] != Falsum():
                return "botI must conclude a negation"
            if len(prem) != 1 or not same_index(prem[0]):
                return "botI takes one premise at its own index"
            if prem[0].formula.formula != Falsum():
                return "botI premise must be falsum"
            return self._discharge_shape(step, view[0], i)

        if name == "allI":
            if not isinstance(f, Forall):
                return "allI must conclude a universal"
            if len(prem) != 1 or not same_index(prem[0]):
                return "allI takes one premise at its own index"
            if prem[0].formula.formula != f.body:
                return "allI premise must be the body"
            return None

        if name == "allE":
            if len(prem) != 1 or not same_index(prem[0]):
                return "allE takes one premise at its own index"
            src = prem[0].formula.formula
            if not isinstance(src, Forall):
                return "allE premise must be a universal"
            ok, _ = _match_hole(src.body, src.var, f)
            return None if ok else "allE conclusion is not an instance of the body"

        if name == "exI":
            if not isinstance(f, Exists):
                return "exI must conclude an existential"
            if len(prem) != 1 or not same_index(prem[0]):
                return "exI takes one premise at its own index"
            ok, _ = _match_hole(f.body, f.var, prem[0].formula.formula)
            return None if ok else "exI premise is not an instance of the body"

        if name == "exE":
            if len(prem) != 2:
                return "exE takes a major premise and one minor"
            major, minor = prem
            src = major.formula.formula
            if not isinstance(src, Exists):
                return "exE major premise must be an existential"
            if minor.index != i or minor.formula.formula != f:
                return "exE minor must conclude the conclusion formula"
            for d in step.discharged:
                ds = self.by_id[d]
                if not self.is_assumption(d):
                    return "exE discharges assumptions only"
                if ds.index != major.index or ds.formula.formula != src.body:
                    return "exE discharges the opened body"
            return None

        if name == "eqI":
            if not isinstance(f, Eq) or f.lhs != f.rhs:
                return "eqI must conclude t = t"
            if not same_index(*prem):
                return "eqI premises must sit at its own index"
            t_arrows = term_arrow_vars(f.lhs)
            cited: set[ArrowVar] = set()
            for p in prem:
                cited |= arrow_vars(p.formula.formula)
            if not t_arrows <= cited:
                return "every arrow variable of t needs a premise occurrence"
            return None

        if name == "eqE":
            if len(prem) != 2 or not same_index(*prem):
                return "eqE takes two premises at its own index"
            for eq_step, base in (prem, reversed(prem)):
                eq_f = eq_step.formula.formula
                if not isinstance(eq_f, Eq):
                    continue
                before = base.formula.formula
                for t, u in ((eq_f.lhs, eq_f.rhs), (eq_f.rhs, eq_f.lhs)):
                    if _rewrite_ok(before, f, t, u):
                        return None
            return "eqE conclusion is not an equality rewrite of the premise"

        if name == "cut":
            if len(prem) != 2:
                return "cut takes a major premise and one minor"
            major, minor = prem
            if minor.index != i or minor.formula.formula != f:
                return "cut minor must conclude the conclusion formula"
            for d in step.discharged:
                ds = self.by_id[d]
                if not self.is_assumption(d):
                    return "cut discharges assumptions only"
                if ds.index != major.index or ds.formula.formula != major.formula.formula:
                    return "cut discharges copies of its major premise"
            return None

        if name == "local-lemma":
            if not same_index(*prem):
                return "local-lemma premises must sit at its own index"
            axioms = [
                ax.formula
                for ax in self.theory.local_axioms(i)
                if not arrow_vars(ax.formula)
            ]
            obligations = [p.formula.formula for p in prem] + axioms
            if tableau_valid(
                obligations,
                f,
                gamma_rounds=self.config.lemma_gamma_rounds,
                max_steps=self.config.lemma_max_steps,
            ):
                return None
            return "local-lemma obligation not discharged within the prover budget"

        if name == "BR":
            ref = step.rule.br_ref
            assert ref is not None
            if ref > len(self.theory.rules):
                return f"theory has no bridge rule {ref}"
            rule = self.theory.rules[ref - 1]
            if len(prem) != len(rule.premises):
                return "BR premise count mismatch"
            sigma: dict[str, str] = {}
            for got, want in zip(prem, rule.premises):
                if got.index != want.index:
                    return "BR premise index mismatch"
                if not _match_renaming(want.formula, got.formula.formula, sigma):
                    return "BR premises do not instantiate the rule"
            if i != rule.conclusion.index:
                return "BR conclusion index mismatch"
            if not _match_renaming(rule.conclusion.formula, f, sigma):
                return "BR conclusion does not instantiate the rule"
            return None

        if name in ("fromII", "toII"):
            if len(prem) != 1:
                return f"{name} takes one premise"
            src = prem[0].formula.formula
            j = prem[0].index
            if j == i:
                return f"{name} must cross indices"
            if not isinstance(src, Eq) or not isinstance(f, Eq):
                return f"{name} connects two equalities"
            want_dir = ">" if name == "fromII" else "<"
            out_dir = "<" if name == "fromII" else ">"

            def split(eq: Eq, dir_: str, foreign: str):
                for a, b in ((eq.lhs, eq.rhs), (eq.rhs, eq.lhs)):
                    if (
                        isinstance(a, Var)
                        and isinstance(b, ArrowVar)
                        and b.direction == dir_
                        and b.foreign == foreign
                    ):
                        return (a.name, b.base, b.label)
                return None

            got = split(src, want_dir, i)
            if got is None:
                return f"{name} premise must equate a variable with its {want_dir} counterpart"
            x, y, label = got
            want = split(f, out_dir, j)
            if want is None:
                return f"{name} conclusion must equate a variable with its {out_dir} counterpart"
            # the roles swap: premise x = arrow-of-y turns into
            # arrow-of-x = y at the other index
            if want != (y, x, label):
                return f"{name} conclusion must swap the equated pair"
            return None

        return f"unsupported rule {name}"

    def _discharge_shape(self, step: ProofStep, hypothesis: Formula, index: str) -> str | None:
        for d in step.discharged:
            ds = self.by_id[d]
            if not self.is_assumption(d):
                return f"{step.rule.name} discharges assumptions only"
            if ds.index != index or ds.formula.formula != hypothesis:
                return f"{step.rule.name} discharges copies of its hypothesis"
        return None

    # -- restrictions ---------------------------------------------------------

    def restriction_error(self, step: ProofStep) -> tuple[str, str] | None:
        name = step.rule.name
        prem = [self.by_id[p] for p in step.premises]

        # R1: only cut, orE, and exE may consume existential variables
        if name not in CROSS_RULES:
            for p in prem:
                ex = self.existential(p.id)
                if ex:
                    return (
                        "R1",
                        f"premise ({p.id}) carries existential "
                        f"{', '.join(sorted(map(_render_arrow, ex)))}",
                    )

        # R2: only interface rules introduce new existential variables
        if name in ("fromII", "toII"):
            f = step.formula.formula
            assert isinstance(f, Eq)
            arrow = f.lhs if isinstance(f.lhs, ArrowVar) else f.rhs
            assert isinstance(arrow, ArrowVar)
            if arrow not in self.existential(step.id):
                return (
                    "R2",
                    f"{_render_arrow(arrow)} must be existential in the conclusion",
                )
        elif name != "BR":
            inherited: set[ArrowVar] = set()
            for p in prem:
                inherited |= self.arrows_of(p.id)
            new = self.existential(step.id) - inherited
            if new:
                return (
                    "R2",
                    f"introduces existential {', '.join(sorted(map(_render_arrow, new)))}",
                )

        # R3: discharged assumptions must be local or complete
        if step.discharged:
            local = {d: self.is_local(d) for d in step.discharged}
            complete = {d: self.complete(self.by_id[d]) for d in step.discharged}
            if name == "orE":
                if not all(local.values()) and not any(complete.values()):
                    return (
                        "R3",
                        "orE discharges non-local assumptions none of which is complete",
                    )
            else:
                for d in step.discharged:
                    if not local[d] and not complete[d]:
                        return (
                            "R3",
                            f"discharged assumption ({d}) is neither local nor complete",
                        )

        # R4: the major's existential variables stay out of the other
        # assumptions employed to derive the minors
        if name in CROSS_RULES and prem:
            major = prem[0]
            ex_major = self.existential(major.id)
            if ex_major:
                minor_deps: set[int] = set()
                for m in prem[1:]:
                    minor_deps |= self.dep[m.id]
                minor_deps -= set(step.discharged)
                for a in sorted(minor_deps):
                    shared = ex_major & self.arrows_of(a)
                    if shared:
                        return (
                            "R4",
                            f"existential {', '.join(sorted(map(_render_arrow, shared)))} "
                            f"of the major premise also occurs in assumption ({a})",
                        )

        # R5: the generalized variable stays out of the open assumptions
        if name == "allI":
            f = step.formula.formula
            assert isinstance(f, Forall)
            x = f.var
            for a in sorted(self.dep[prem[0].id]):
                af = self.by_id[a].formula
                if af.index == step.index and x in free_plain_vars(af.formula):
                    return ("R5", f"variable {x} is free in assumption ({a})")
                if af.index != step.index and any(
                    av.base == x and av.foreign == step.index
                    for av in arrow_vars(af.formula)
                ):
                    return (
                        "R5",
                        f"an arrow variable of {x} towards this index occurs in assumption ({a})",
                    )

        # R6: the witness variable of exE stays fenced
        if name == "exE":
            major, minor = prem
            src = major.formula.formula
            assert isinstance(src, Exists)
            x = src.var
            j, i = major.index, step.index
            open_deps = sorted(self.dep[minor.id] - set(step.discharged))
            for a in open_deps:
                af = self.by_id[a].formula
                if af.index == j and x in free_plain_vars(af.formula):
                    return ("R6", f"witness {x} is free in assumption ({a})")
            if j == i:
                if x in free_plain_vars(step.formula.formula):
                    return ("R6", f"witness {x} is free in the conclusion")
            else:
                arrows_out = [
                    av
                    for av in arrow_vars(step.formula.formula)
                    if av.base == x and av.foreign == j
                ]
                if arrows_out:
                    return ("R6", f"an arrow variable of witness {x} occurs in the conclusion")
                for a in open_deps:
                    af = self.by_id[a].formula
                    if any(
                        av.base == x and av.foreign == j
                        for av in arrow_vars(af.formula)
                    ):
                        return (
                            "R6",
                            f"an arrow variable of witness {x} occurs in assumption ({a})",
                        )

        return None

    # -- driver ---------------------------------------------------------------

    def run(self) -> CheckResult:
        last = 0
        for step in self.script.steps:
            if step.id <= last:
                return self.fail(step, "ref", "step ids must increase")
            last = step.id
            for p in step.premises + step.discharged:
                if p not in self.by_id:
                    return self.fail(step, "ref", f"reference to missing step ({p})")
            for d in step.discharged:
                if not self.is_assumption(d):
                    return self.fail(step, "ref", f"({d}) is not an assumption")
            self.by_id[step.id] = step
            if step.rule.name == "assumption":
                self.dep[step.id] = frozenset({step.id})
            else:
                deps: set[int] = set()
                for p in step.premises:
                    deps |= self.dep[p]
                self.dep[step.id] = frozenset(deps - set(step.discharged))

        if self.script.concluded not in self.by_id:
            return CheckResult.violation(
                None, "conclusion", f"concluded step ({self.script.concluded}) is missing"
            )
        self.compute_locality()

        for step in self.script.steps:
            err = self.shape_error(step)
            if err is not None:
                return self.fail(step, "shape", err)
            hit = self.restriction_error(step)
            if hit is not None:
                return self.fail(step, hit[0], hit[1])

        claimed_g = self.script.claimed_global
        claimed_l = self.script.claimed_local
        if claimed_g & claimed_l:
            return CheckResult.violation(
                self.script.concluded, "conclusion", "global and local claims overlap"
            )
        deps = self.dep[self.script.concluded]
        if claimed_g | claimed_l != deps:
            return CheckResult.violation(
                self.script.concluded,
                "conclusion",
                f"claimed premises {sorted(claimed_g | claimed_l)} differ from "
                f"computed dependencies {sorted(deps)}",
            )
        for a in sorted(claimed_l):
            if not self.is_local(a):
                return CheckResult.violation(
                    self.script.concluded,
                    "conclusion",
                    f"assumption ({a}) is claimed local but is global",
                )
        return CheckResult.valid()


def _render_arrow(av: ArrowVar) -> str:
    out = f"{av.base}^{av.direction}{av.foreign}"
    return out + (f"@{av.label}" if av.label else "")


def check_proof(script: ProofScript, *, config: CheckConfig | None = None) -> CheckResult:
    """Validate a proof script.

    The result is valid exactly when every step instantiates its rule
    schema and the restrictions R1 to R6 hold throughout; otherwise it
    pinpoints the first failing step together with the restriction id
    or a shape diagnosis.
    """
    return _Checker(script, config or CheckConfig()).run()


def assumption_status(script: ProofScript, step_id: int) -> str:
    """``local`` or ``global`` for an assumption step, relative to the
    script's concluding step."""
    checker = _Checker(script, CheckConfig())
    checker.run()
    step = script.step(step_id)
    if step.rule.name != "assumption":
        raise ValueError(f"step ({step_id}) is not an assumption")
    return "local" if checker.is_local(step_id) else "global"


def existential_vars_of_step(script: ProofScript, step_id: int) -> frozenset[ArrowVar]:
    """Arrow variables of the step's formula that occur in none of the
    assumptions the step depends on."""
    checker = _Checker(script, CheckConfig())
    checker.run()
    if step_id not in checker.dep:
        raise ValueError(f"step ({step_id}) was not checkable")
    return checker.existential(step_id)
