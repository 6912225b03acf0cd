"""Abstract syntax, parsing, and rendering for indexed first-order languages.

Formulas live at named indices and may contain arrow variables: `x^>j` (the
to-variable of x towards index j) and `x^<j` (the from-variable of x from
index j), optionally tagged with a link label as in `x^<j@E`.  Plain x,
x^>j and x^<j are three distinct variables; quantifiers bind plain
variables only.

Concrete syntax summary::

    index 1, 2
    signature 1 { const l, r; func f/1; pred inbox/2; complete pred inbox/2; }
    axiom 1: forall x. (inbox(x,l) -> ~inbox(x,r))
    bridge 1: inbox(x,r) ==> 2: exists y. inbox(x^<1,y)
    property fun 1 2

Connectives are `~ & | ->` with precedence `~` > `&` > `|` > `->` and
right-associative binaries; `false` is falsum; `#` starts a line comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "Var",
    "ArrowVar",
    "Const",
    "App",
    "Term",
    "Atom",
    "Eq",
    "Falsum",
    "Not",
    "And",
    "Or",
    "Implies",
    "Forall",
    "Exists",
    "Formula",
    "LabeledFormula",
    "BridgeRule",
    "RelationProperty",
    "Signature",
    "Theory",
    "SyntaxError_",
    "Token",
    "tokenize",
    "TokenStream",
    "parse_theory",
    "parse_formula",
    "parse_labeled_formula",
    "parse_bridge_rule_text",
    "render_term",
    "render_formula",
    "render_labeled",
    "render_bridge_rule",
    "render_theory",
    "free_plain_vars",
    "arrow_vars",
    "term_free_plain_vars",
    "term_arrow_vars",
    "is_closed",
    "substitute",
    "substitute_term",
    "formula_symbols",
    "is_complete_formula",
    "classify_variables",
    "render",
    "is_complete_term",
]


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    """Plain individual variable, e.g. `x`."""

    name: str


@dataclass(frozen=True)
class ArrowVar:
    """Arrow variable `base^>foreign` or `base^<foreign`, optionally `@label`."""

    base: str
    direction: str  # ">" (to-variable) or "<" (from-variable)
    foreign: str
    label: str | None = None

    def __post_init__(self) -> None:
        if self.direction not in (">", "<"):
            raise ValueError(f"bad arrow direction {self.direction!r}")


@dataclass(frozen=True)
class Const:
    """Constant symbol, e.g. `l`."""

    name: str


@dataclass(frozen=True)
class App:
    """Function application `f(t1, ..., tn)` with n >= 1."""

    func: str
    args: tuple["Term", ...]


Term = Var | ArrowVar | Const | App


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    """Predicate application `p(t1, ..., tn)`; arity 0 renders bare."""

    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    """Equality `t = u`; equality belongs to every complete sub-language."""

    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Falsum:
    """`false`."""


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    """`forall x. body`; only plain variables may be bound."""

    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Atom | Eq | Falsum | Not | And | Or | Implies | Forall | Exists


@dataclass(frozen=True)
class LabeledFormula:
    """Formula at an index, e.g. `1: inbox(x, r)`.

    Every arrow variable in the body must point at a foreign index
    different from `index`.
    """

    index: str
    formula: Formula


@dataclass(frozen=True)
class BridgeRule:
    """`bridge i1: f1, ..., in: fn ==> j: g`; premises may be empty.

    An empty-premise rule asserts its conclusion unconditionally for every
    assignment of the conclusion's plain variables and anchors.
    """

    premises: tuple[LabeledFormula, ...]
    conclusion: LabeledFormula
    origin: str | None = None  # set when expanded from a property tag


@dataclass(frozen=True)
class RelationProperty:
    """`property fun 1 2` style tag constraining one or two domain relations."""

    kind: str  # fun | tot | sur | inj | inv | com | congr | euc
    indices: tuple[str, ...]

    ARITIES = {
        "fun": 2,
        "tot": 2,
        "sur": 2,
        "inj": 2,
        "inv": 2,
        "com": 3,
        "congr": 2,
        "euc": 3,
    }

    def __post_init__(self) -> None:
        if self.kind not in self.ARITIES:
            raise ValueError(f"unknown relation property {self.kind!r}")
        if len(self.indices) != self.ARITIES[self.kind]:
            raise ValueError(
                f"property {self.kind} expects {self.ARITIES[self.kind]} indices,"
                f" got {len(self.indices)}"
            )


@dataclass(frozen=True)
class Signature:
    """Per-index signature; `complete` holds (kind, name) pairs, kind in
    {const, func, pred}.  Functions have arity >= 1, predicates >= 0."""

    consts: tuple[str, ...] = ()
    funcs: tuple[tuple[str, int], ...] = ()
    preds: tuple[tuple[str, int], ...] = ()
    complete: frozenset[tuple[str, str]] = frozenset()

    def func_arity(self, name: str) -> int | None:
        for f, n in self.funcs:
            if f == name:
                return n
        return None

    def pred_arity(self, name: str) -> int | None:
        for p, n in self.preds:
            if p == name:
                return n
        return None

    def is_const(self, name: str) -> bool:
        return name in self.consts

    def is_complete(self, kind: str, name: str) -> bool:
        return (kind, name) in self.complete

    def symbol_names(self) -> set[str]:
        return (
            set(self.consts)
            | {f for f, _ in self.funcs}
            | {p for p, _ in self.preds}
        )


@dataclass
class Theory:
    """A family of indexed signatures, local axioms, bridge rules, and
    relation-property tags (already expanded into `rules`)."""

    indices: tuple[str, ...] = ()
    signatures: dict[str, Signature] = field(default_factory=dict)
    axioms: tuple[LabeledFormula, ...] = ()
    rules: tuple[BridgeRule, ...] = ()
    properties: tuple[RelationProperty, ...] = ()

    def signature(self, index: str) -> Signature:
        try:
            return self.signatures[index]
        except KeyError:
            raise SyntaxError_(f"undeclared index {index!r}", 0, 0) from None

    def local_axioms(self, index: str) -> tuple[LabeledFormula, ...]:
        return tuple(ax for ax in self.axioms if ax.index == index)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


class SyntaxError_(Exception):
    """Parse-time error carrying line and column (1-based)."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = {
    "index",
    "signature",
    "const",
    "func",
    "pred",
    "complete",
    "axiom",
    "bridge",
    "property",
    "forall",
    "exists",
    "false",
}

_PUNCT = [
    "==>",
    "<-",
    "->",
    "^>",
    "^<",
    "(",
    ")",
    "{",
    "}",
    ",",
    ";",
    ":",
    ".",
    "/",
    "=",
    "~",
    "&",
    "|",
    "@",
]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | punctuation string | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    """Split source text into tokens; `#` starts a comment to end of line."""
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token(p, p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise SyntaxError_(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class TokenStream:
    """Cursor over a token list with one-token lookahead helpers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise SyntaxError_(
                f"expected {want!r}, found {tok.text or tok.kind!r}",
                tok.line,
                tok.col,
            )
        return self.next()

    def error(self, message: str) -> SyntaxError_:
        tok = self.peek()
        return SyntaxError_(message, tok.line, tok.col)


def _name_token(ts: TokenStream, what: str) -> Token:
    tok = ts.peek()
    if tok.kind not in ("ident", "number"):
        raise ts.error(f"expected {what}, found {tok.text or tok.kind!r}")
    if tok.kind == "ident" and tok.text in KEYWORDS:
        raise ts.error(f"keyword {tok.text!r} cannot be used as {what}")
    return ts.next()


# ---------------------------------------------------------------------------
# Formula parser (signature-directed)
# ---------------------------------------------------------------------------


class _FormulaParser:
    """Recursive-descent parser for formulas of one indexed language."""

    def __init__(self, theory: Theory, index: str, ts: TokenStream):
        if index not in theory.signatures:
            tok = ts.peek()
            raise SyntaxError_(f"undeclared index {index!r}", tok.line, tok.col)
        self.theory = theory
        self.index = index
        self.sig = theory.signatures[index]
        self.ts = ts
        self.bound: list[str] = []

    # formula := quantified | implication
    def formula(self) -> Formula:
        if self.ts.at("ident", "forall") or self.ts.at("ident", "exists"):
            return self.quantified()
        return self.implication()

    def quantified(self) -> Formula:
        kw = self.ts.next()
        var = _name_token(self.ts, "a variable")
        if var.kind != "ident":
            raise SyntaxError_("quantified variable must be an identifier", var.line, var.col)
        if self.ts.at("^>") or self.ts.at("^<"):
            raise SyntaxError_("quantified arrow variable", var.line, var.col)
        self.ts.expect(".")
        self.bound.append(var.text)
        try:
            body = self.formula()
        finally:
            self.bound.pop()
        return Forall(var.text, body) if kw.text == "forall" else Exists(var.text, body)

    def implication(self) -> Formula:
        lhs = self.disjunction()
        if self.ts.accept("->"):
            return Implies(lhs, self.formula())
        return lhs

    def disjunction(self) -> Formula:
        lhs = self.conjunction()
        if self.ts.accept("|"):
            return Or(lhs, self.disjunction())
        return lhs

    def conjunction(self) -> Formula:
        lhs = self.negation()
        if self.ts.accept("&"):
            return And(lhs, self.conjunction())
        return lhs

    def negation(self) -> Formula:
        if self.ts.accept("~"):
            return Not(self.negation())
        return self.atom()

    def atom(self) -> Formula:
        if self.ts.at("ident", "false"):
            self.ts.next()
            return Falsum()
        if self.ts.at("ident", "forall") or self.ts.at("ident", "exists"):
            return self.quantified()
        if self.ts.accept("("):
            inner = self.formula()
            self.ts.expect(")")
            return inner
        tok = self.ts.peek()
        if tok.kind == "ident" and self.sig.pred_arity(tok.text) is not None:
            return self.predicate()
        lhs = self.term()
        eq = self.ts.peek()
        if not self.ts.accept("="):
            raise SyntaxError_(
                f"expected '=' after term (is {render_term(lhs)!r} an undeclared predicate?)",
                eq.line,
                eq.col,
            )
        rhs = self.term()
        return Eq(lhs, rhs)

    def predicate(self) -> Formula:
        tok = self.ts.next()
        arity = self.sig.pred_arity(tok.text)
        args: tuple[Term, ...] = ()
        if self.ts.accept("("):
            parts = [self.term()]
            while self.ts.accept(","):
                parts.append(self.term())
            self.ts.expect(")")
            args = tuple(parts)
        if len(args) != arity:
            raise SyntaxError_(
                f"predicate {tok.text} expects {arity} arguments, got {len(args)}",
                tok.line,
                tok.col,
            )
        return Atom(tok.text, args)

    def term(self) -> Term:
        tok = _name_token(self.ts, "a term")
        name = tok.text
        if self.sig.pred_arity(name) is not None:
            raise SyntaxError_(f"predicate {name} used as a term", tok.line, tok.col)
        if self.sig.func_arity(name) is not None:
            arity = self.sig.func_arity(name)
            self.ts.expect("(")
            parts = [self.term()]
            while self.ts.accept(","):
                parts.append(self.term())
            self.ts.expect(")")
            if len(parts) != arity:
                raise SyntaxError_(
                    f"function {name} expects {arity} arguments, got {len(parts)}",
                    tok.line,
                    tok.col,
                )
            return App(name, tuple(parts))
        if self.sig.is_const(name):
            return Const(name)
        # variable, possibly an arrow variable
        if tok.kind == "number":
            raise SyntaxError_(f"number {name} is not a declared constant", tok.line, tok.col)
        arrow = self.ts.accept("^>") or self.ts.accept("^<")
        if arrow is None:
            return Var(name)
        foreign = _name_token(self.ts, "an index").text
        if foreign not in self.theory.signatures:
            raise SyntaxError_(f"undeclared index {foreign!r}", tok.line, tok.col)
        if foreign == self.index:
            raise SyntaxError_(
                f"arrow variable {name}^{arrow.text[1]}{foreign} points at its own index",
                tok.line,
                tok.col,
            )
        label = None
        if self.ts.accept("@"):
            label = _name_token(self.ts, "a link label").text
        if name in self.bound:
            # forall x. p(x^>j) is fine: x^>j is a different variable from x
            pass
        return ArrowVar(name, arrow.text[1], foreign, label)


def _parse_label(ts: TokenStream) -> str:
    tok = _name_token(ts, "an index label")
    ts.expect(":")
    return tok.text


def parse_formula(theory: Theory, index: str, text: str) -> Formula:
    """Parse an unlabeled formula in the language of `index`."""
    ts = TokenStream(tokenize(text))
    f = _FormulaParser(theory, index, ts).formula()
    tok = ts.peek()
    if tok.kind != "eof":
        raise SyntaxError_(f"trailing input {tok.text!r}", tok.line, tok.col)
    return f


def parse_labeled_formula(theory: Theory, text: str) -> LabeledFormula:
    """Parse `i: <formula>`."""
    ts = TokenStream(tokenize(text))
    index = _parse_label(ts)
    if index not in theory.signatures:
        raise SyntaxError_(f"undeclared index {index!r}", 1, 1)
    f = _FormulaParser(theory, index, ts).formula()
    tok = ts.peek()
    if tok.kind != "eof":
        raise SyntaxError_(f"trailing input {tok.text!r}", tok.line, tok.col)
    return LabeledFormula(index, f)


def _parse_bridge_rule(theory: Theory, ts: TokenStream, origin: str | None = None) -> BridgeRule:
    premises: list[LabeledFormula] = []
    if not ts.at("==>"):
        while True:
            index = _parse_label(ts)
            f = _FormulaParser(theory, index, ts).formula()
            premises.append(LabeledFormula(index, f))
            if not ts.accept(","):
                break
    ts.expect("==>")
    index = _parse_label(ts)
    f = _FormulaParser(theory, index, ts).formula()
    return BridgeRule(tuple(premises), LabeledFormula(index, f), origin)


def parse_bridge_rule_text(theory: Theory, text: str) -> BridgeRule:
    """Parse a bare bridge rule `i1: f1, ... ==> j: g` against a theory."""
    ts = TokenStream(tokenize(text))
    rule = _parse_bridge_rule(theory, ts)
    tok = ts.peek()
    if tok.kind != "eof":
        raise SyntaxError_(f"trailing input {tok.text!r}", tok.line, tok.col)
    return rule


# ---------------------------------------------------------------------------
# Theory parser
# ---------------------------------------------------------------------------

_STATEMENT_KEYWORDS = {"index", "signature", "axiom", "bridge", "property"}


def parse_theory(text: str) -> Theory:
    """Parse a full theory file; property tags are expanded into bridge rules.

    Statements may optionally be separated by `;`.  Indices must be declared
    before signatures, signatures before the axioms and rules that use them.
    """
    ts = TokenStream(tokenize(text))
    theory = Theory()
    declared_rules: list[BridgeRule] = []
    properties: list[RelationProperty] = []
    while not ts.at("eof"):
        if ts.accept(";"):
            continue
        tok = ts.peek()
        if tok.kind != "ident" or tok.text not in _STATEMENT_KEYWORDS:
            raise ts.error(
                f"expected a statement keyword {sorted(_STATEMENT_KEYWORDS)},"
                f" found {tok.text or tok.kind!r}"
            )
        ts.next()
        if tok.text == "index":
            names = [_name_token(ts, "an index name").text]
            while ts.accept(","):
                names.append(_name_token(ts, "an index name").text)
            for name in names:
                if name in theory.signatures:
                    raise ts.error(f"duplicate index {name!r}")
                theory.indices += (name,)
                theory.signatures[name] = Signature()
        elif tok.text == "signature":
            index = _name_token(ts, "an index name").text
            if index not in theory.signatures:
                raise ts.error(f"undeclared index {index!r}")
            theory.signatures[index] = _parse_signature_block(ts, theory.signatures[index])
        elif tok.text == "axiom":
            index = _parse_label(ts)
            if index not in theory.signatures:
                raise ts.error(f"undeclared index {index!r}")
            f = _FormulaParser(theory, index, ts).formula()
            theory.axioms += (LabeledFormula(index, f),)
        elif tok.text == "bridge":
            declared_rules.append(_parse_bridge_rule(theory, ts))
        elif tok.text == "property":
            kind = ts.expect("ident").text
            arity = RelationProperty.ARITIES.get(kind)
            if arity is None:
                raise ts.error(f"unknown relation property {kind!r}")
            idxs = tuple(_name_token(ts, "an index name").text for _ in range(arity))
            for i in idxs:
                if i not in theory.signatures:
                    raise ts.error(f"undeclared index {i!r}")
            if len(set(idxs)) != len(idxs):
                raise ts.error(f"property {kind} needs distinct indices")
            properties.append(RelationProperty(kind, idxs))
    theory.properties = tuple(properties)
    expanded: list[BridgeRule] = list(declared_rules)
    from . import relations  # late import: relations builds on this module

    for prop in properties:
        expanded.extend(relations.bridge_rules_for_property(prop))
    theory.rules = tuple(expanded)
    return theory


def _parse_signature_block(ts: TokenStream, sig: Signature) -> Signature:
    ts.expect("{")
    consts = list(sig.consts)
    funcs = list(sig.funcs)
    preds = list(sig.preds)
    complete = set(sig.complete)
    while not ts.accept("}"):
        is_complete = ts.accept("ident", "complete") is not None
        kind_tok = ts.peek()
        if ts.accept("ident", "const"):
            while True:
                name = _name_token(ts, "a constant name").text
                if name not in consts:
                    consts.append(name)
                if is_complete:
                    complete.add(("const", name))
                if not ts.accept(","):
                    break
        elif ts.accept("ident", "func"):
            while True:
                name = _name_token(ts, "a function name").text
                ts.expect("/")
                arity = int(ts.expect("number").text)
                if arity < 1:
                    raise ts.error(f"function {name} must have arity >= 1")
                if (name, arity) not in funcs:
                    funcs.append((name, arity))
                if is_complete:
                    complete.add(("func", name))
                if not ts.accept(","):
                    break
        elif ts.accept("ident", "pred"):
            while True:
                name = _name_token(ts, "a predicate name").text
                ts.expect("/")
                arity = int(ts.expect("number").text)
                if (name, arity) not in preds:
                    preds.append((name, arity))
                if is_complete:
                    complete.add(("pred", name))
                if not ts.accept(","):
                    break
        else:
            raise SyntaxError_(
                f"expected const/func/pred, found {kind_tok.text!r}",
                kind_tok.line,
                kind_tok.col,
            )
        ts.expect(";")
    new_sig = Signature(tuple(consts), tuple(funcs), tuple(preds), frozenset(complete))
    names = (
        [c for c in new_sig.consts]
        + [f for f, _ in new_sig.funcs]
        + [p for p, _ in new_sig.preds]
    )
    if len(names) != len(set(names)):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise ts.error(f"symbol declared twice in signature: {dup}")
    return new_sig


# ---------------------------------------------------------------------------
# Rendering (parse . render == id)
# ---------------------------------------------------------------------------


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, ArrowVar):
        suffix = f"@{t.label}" if t.label is not None else ""
        return f"{t.base}^{t.direction}{t.foreign}{suffix}"
    if isinstance(t, Const):
        return t.name
    if isinstance(t, App):
        return f"{t.func}({', '.join(render_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


# binary precedence levels; quantifiers and their bodies sit below "->"
_PREC = {Implies: 1, Or: 2, And: 3}


def render_formula(f: Formula) -> str:
    return _render(f, 0)


def _render(f: Formula, ctx: int) -> str:
    if isinstance(f, Falsum):
        return "false"
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(render_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{render_term(f.lhs)} = {render_term(f.rhs)}"
    if isinstance(f, Not):
        return f"~{_render(f.body, 4)}"
    if isinstance(f, (Forall, Exists)):
        kw = "forall" if isinstance(f, Forall) else "exists"
        text = f"{kw} {f.var}. {_render(f.body, 0)}"
        return f"({text})" if ctx > 0 else text
    if isinstance(f, (And, Or, Implies)):
        prec = _PREC[type(f)]
        op = {And: "&", Or: "|", Implies: "->"}[type(f)]
        # right-associative: the left child must bind strictly tighter
        lhs = _render(f.lhs, prec + 1)
        rhs = _render(f.rhs, prec)
        text = f"{lhs} {op} {rhs}"
        return f"({text})" if ctx > prec else text
    raise TypeError(f"not a formula: {f!r}")


def render_labeled(lf: LabeledFormula) -> str:
    return f"{lf.index}: {render_formula(lf.formula)}"


def render_bridge_rule(rule: BridgeRule) -> str:
    head = ", ".join(render_labeled(p) for p in rule.premises)
    if head:
        return f"{head} ==> {render_labeled(rule.conclusion)}"
    return f"==> {render_labeled(rule.conclusion)}"


def render_theory(theory: Theory) -> str:
    """Serialize a theory back to its file grammar; property-expanded rules
    are emitted via their `property` statement, not duplicated."""
    lines: list[str] = []
    if theory.indices:
        lines.append("index " + ", ".join(theory.indices))
    for index in theory.indices:
        sig = theory.signatures[index]
        if not (sig.consts or sig.funcs or sig.preds):
            continue
        parts: list[str] = []
        plain_consts = [c for c in sig.consts if not sig.is_complete("const", c)]
        comp_consts = [c for c in sig.consts if sig.is_complete("const", c)]
        if plain_consts:
            parts.append("const " + ", ".join(plain_consts) + ";")
        if comp_consts:
            parts.append("complete const " + ", ".join(comp_consts) + ";")
        plain_funcs = [f"{f}/{n}" for f, n in sig.funcs if not sig.is_complete("func", f)]
        comp_funcs = [f"{f}/{n}" for f, n in sig.funcs if sig.is_complete("func", f)]
        if plain_funcs:
            parts.append("func " + ", ".join(plain_funcs) + ";")
        if comp_funcs:
            parts.append("complete func " + ", ".join(comp_funcs) + ";")
        plain_preds = [f"{p}/{n}" for p, n in sig.preds if not sig.is_complete("pred", p)]
        comp_preds = [f"{p}/{n}" for p, n in sig.preds if sig.is_complete("pred", p)]
        if plain_preds:
            parts.append("pred " + ", ".join(plain_preds) + ";")
        if comp_preds:
            parts.append("complete pred " + ", ".join(comp_preds) + ";")
        lines.append(f"signature {index} {{ " + " ".join(parts) + " }")
    for ax in theory.axioms:
        lines.append(f"axiom {render_labeled(ax)}")
    for rule in theory.rules:
        if rule.origin is None:
            lines.append("bridge " + render_bridge_rule(rule))
    for prop in theory.properties:
        lines.append(f"property {prop.kind} " + " ".join(prop.indices))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Syntactic analysis
# ---------------------------------------------------------------------------


def term_free_plain_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        out: set[str] = set()
        for a in t.args:
            out |= term_free_plain_vars(a)
        return out
    return set()


def term_arrow_vars(t: Term) -> set[ArrowVar]:
    if isinstance(t, ArrowVar):
        return {t}
    if isinstance(t, App):
        out: set[ArrowVar] = set()
        for a in t.args:
            out |= term_arrow_vars(a)
        return out
    return set()


def free_plain_vars(f: Formula) -> set[str]:
    """Free plain variables; arrow variables are never bound and not included."""
    if isinstance(f, (Atom,)):
        out: set[str] = set()
        for a in f.args:
            out |= term_free_plain_vars(a)
        return out
    if isinstance(f, Eq):
        return term_free_plain_vars(f.lhs) | term_free_plain_vars(f.rhs)
    if isinstance(f, Falsum):
        return set()
    if isinstance(f, Not):
        return free_plain_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_plain_vars(f.lhs) | free_plain_vars(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return free_plain_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def arrow_vars(f: Formula) -> set[ArrowVar]:
    """All arrow variables occurring in f (they are free wherever they occur)."""
    if isinstance(f, Atom):
        out: set[ArrowVar] = set()
        for a in f.args:
            out |= term_arrow_vars(a)
        return out
    if isinstance(f, Eq):
        return term_arrow_vars(f.lhs) | term_arrow_vars(f.rhs)
    if isinstance(f, Falsum):
        return set()
    if isinstance(f, Not):
        return arrow_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return arrow_vars(f.lhs) | arrow_vars(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return arrow_vars(f.body)
    raise TypeError(f"not a formula: {f!r}")


def is_closed(f: Formula) -> bool:
    """Closed = no free plain variables and no arrow variables."""
    return not free_plain_vars(f) and not arrow_vars(f)


def substitute_term(t: Term, var: str, replacement: Term) -> Term:
    if isinstance(t, Var):
        return replacement if t.name == var else t
    if isinstance(t, App):
        return App(t.func, tuple(substitute_term(a, var, replacement) for a in t.args))
    return t  # constants and arrow variables are untouched: x^>j is not x


def substitute(f: Formula, var: str, replacement: Term) -> Formula:
    """Replace free occurrences of the plain variable `var` by `replacement`.

    Raises ValueError if a variable of the replacement would be captured by
    a quantifier of the target formula.
    """
    repl_vars = term_free_plain_vars(replacement)

    def go(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(substitute_term(a, var, replacement) for a in g.args))
        if isinstance(g, Eq):
            return Eq(
                substitute_term(g.lhs, var, replacement),
                substitute_term(g.rhs, var, replacement),
            )
        if isinstance(g, Falsum):
            return g
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, And):
            return And(go(g.lhs), go(g.rhs))
        if isinstance(g, Or):
            return Or(go(g.lhs), go(g.rhs))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        if isinstance(g, (Forall, Exists)):
            if g.var == var:
                return g  # var is bound here; nothing free below
            if g.var in repl_vars and var in free_plain_vars(g.body):
                raise ValueError(
                    f"substitution of {render_term(replacement)} for {var}"
                    f" would capture {g.var}"
                )
            cls = Forall if isinstance(g, Forall) else Exists
            return cls(g.var, go(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def _term_symbols(t: Term) -> set[tuple[str, str]]:
    if isinstance(t, Const):
        return {("const", t.name)}
    if isinstance(t, App):
        out = {("func", t.func)}
        for a in t.args:
            out |= _term_symbols(a)
        return out
    return set()


def formula_symbols(f: Formula) -> set[tuple[str, str]]:
    """All (kind, name) signature symbols occurring in f."""
    if isinstance(f, Atom):
        out = {("pred", f.pred)}
        for a in f.args:
            out |= _term_symbols(a)
        return out
    if isinstance(f, Eq):
        return _term_symbols(f.lhs) | _term_symbols(f.rhs)
    if isinstance(f, Falsum):
        return set()
    if isinstance(f, Not):
        return formula_symbols(f.body)
    if isinstance(f, (And, Or, Implies)):
        return formula_symbols(f.lhs) | formula_symbols(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return formula_symbols(f.body)
    raise TypeError(f"not a formula: {f!r}")


def is_complete_term(sig: Signature, t: Term) -> bool:
    return all(sig.is_complete(kind, name) for kind, name in _term_symbols(t))


def is_complete_formula(sig: Signature, f: Formula) -> bool:
    """True when every signature symbol of f is complete.

    Equality, falsum, variables and arrow variables belong to every complete
    sub-language: their satisfaction never varies across local models.
    """
    return all(sig.is_complete(kind, name) for kind, name in formula_symbols(f))


def classify_variables(
    lf: LabeledFormula, sig: Signature | None = None
) -> tuple[set[str], set[ArrowVar], bool, bool]:
    """(free plain names, arrow variables, closed, complete) of a labeled
    formula.  x, x^>j and x^<j are distinct: only x can be bound.  The
    complete flag needs the index's signature; without one only formulas
    built purely from equality, falsum and variables count as complete."""
    free = free_plain_vars(lf.formula)
    arrows = arrow_vars(lf.formula)
    closed = not free and not arrows
    if sig is None:
        complete = not formula_symbols(lf.formula)
    else:
        complete = is_complete_formula(sig, lf.formula)
    return free, arrows, closed, complete


def render(value) -> str:
    """Generic renderer over theories, rules, labeled formulas, formulas and
    terms; parse of the result reproduces the value."""
    if isinstance(value, Theory):
        return render_theory(value)
    if isinstance(value, BridgeRule):
        return render_bridge_rule(value)
    if isinstance(value, LabeledFormula):
        return render_labeled(value)
    if isinstance(value, (Var, ArrowVar, Const, App)):
        return render_term(value)
    return render_formula(value)
