"""Translations of five contextual formalisms into bridge-rule theories.

Each encoder reads a small dialect file and emits a standard theory file:
the result carries the rendered text, the parsed `Theory` (re-parsing the
text is how every emitted rule is validated against the auto-extended
signatures), and a name map listing every freshly invented symbol.  Fresh
names are content-addressed (an 8-hex digest of the named formula), so the
same input always produces the same output and distinct inputs produce
distinct theories.

Supported dialects
------------------

``ddl`` -- distributed description logics.  Ontology blocks declare
concepts, roles, individuals and subclass axioms; directed semantic
mappings between ontologies become bridge rules over the inter-domain
relations, and `compose i j k` adds a `com` relation property so mappings
chain across an intermediate ontology::

    ontology 1 { concepts AcademicPaper; }
    ontology 2 { concepts AcademicPaper, Document;
                 axiom AcademicPaper subclassof Document; }
    mapping 1: AcademicPaper into 2: AcademicPaper
    compose 1 2 3

An `into` mapping of concepts C, D gives `i: C(x^>j) ==> j: D(x)`; `onto`
gives the converse `j: D(x) ==> i: C(x^>j)`.  Role mappings pair both
argument positions with to-variables; individual mappings relate the
equations `x = a` across the arrow.

``econn`` -- link-connected ontologies.  Links are named inter-ontology
relations; subclass axioms whose right side is a link restriction become
bridge rules over the labelled domain relations::

    link Own from 1 to 2
    axiom 1: Person subclassof exists Own. House

`exists E` gives `i: C(x) ==> j: D(x^<i@E)`; `all E` gives
`i: C(x^>j@E) ==> j: D(x)`; `atleast n E` sweeps n premise copies of C
and concludes n pairwise-distinct labelled successors; `atmost n E`
sweeps n+1 successors of one element and concludes that two coincide.

``pdl`` -- package-based description logics.  Every name has the unique
home package that declares it; `import i: t into j` makes t usable in j:
concept and role imports emit the importing rule and its converse,
individual imports emit `i: x = a ==> j: x^>i = a`, and every import
attaches an `inj` property on the pair (chained imports also attach
`com` on each triple).

``qml`` -- quantified modal logic.  A formula of modal depth d is placed
at index d over indices 0..d, reading index i as "worlds reachable in
d - i steps".  Each boxed subformula becomes a fresh predicate `Box_h`
at its index, with an unboxing rule `i: Box_h(x^>i-1...) ==> i-1: body`
and necessitation `i-1: body(x^<i...) ==> i: Box_h(x...)` per atom, plus
the distribution form per ordered pair of distinct box atoms at one
index (longer distribution chains are derivable from these).  Domain
regimes are relation properties: increasing domains make each relation
toward lower indices total, decreasing domains the converse, constant
domains both.  `semantics kripke` defaults to increasing domains;
`semantics counterpart` defaults to no domain constraint and adds `com`
on every descending index triple.  After `box`, a parenthesised equation
list binds body variables to terms (`box(x = a) P(x)` is the de-re
reading, a one-place box predicate applied to a; `box P(a)` is de dicto,
a zero-place box predicate); the list is read as bindings only when a
formula follows it.

``qlc`` -- quantified logic of contexts.  Context names double as
constants; `ist(k, phi)` turns into the complete atom `ist(k, w)` where
w is a fresh term naming phi.  Input formulas must be prenex with
existentials already Skolemized away.  Per named formula the encoder
emits the entering rule `h: ist(k, f(x^>k...)) ==> k: phi(x...)` and the
exiting rule `k: phi(x^>h...) ==> h: ist(k, f(x...))` for every other
context h, rigid-designator rules `k: x = t ==> h: x^<k = t` per
declared constant, and `fun`, `tot`, `inj`, `inv` properties making all
context domains isomorphic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .syntax import (
    And,
    App,
    ArrowVar,
    Atom,
    Const,
    Eq,
    Exists,
    Falsum,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Signature,
    SyntaxError_,
    Term,
    Theory,
    TokenStream,
    Var,
    _name_token,
    _parse_signature_block,
    free_plain_vars,
    parse_theory,
    render_formula,
    substitute,
    tokenize,
)


class EncodeError(Exception):
    """Input is well-formed but outside the encodable fragment."""


@dataclass(frozen=True)
class EncodedTheory:
    """Output of one encoder run: theory file text plus its parse."""

    dialect: str
    text: str
    theory: Theory
    names: tuple[tuple[str, str], ...] = ()  # fresh symbol -> what it names

    def name_map(self) -> dict[str, str]:
        return dict(self.names)


def _hash8(text: str) -> str:
    return hashlib.md5(text.encode("utf8")).hexdigest()[:8]


def _assemble(dialect: str, names: tuple[tuple[str, str], ...], lines: list[str]) -> EncodedTheory:
    """Render, then parse the result back as the output validity check."""
    header = [f"# encoded {dialect} input"]
    header += [f"# {fresh} = {meaning}" for fresh, meaning in names]
    text = "\n".join(header + lines) + "\n"
    theory = parse_theory(text)
    return EncodedTheory(dialect, text, theory, names)


def _sig_line(
    index: str,
    consts: list[str],
    funcs: list[tuple[str, int]],
    preds: list[tuple[str, int]],
    complete_preds: tuple[tuple[str, int], ...] = (),
) -> str:
    parts: list[str] = []
    if consts:
        parts.append("const " + ", ".join(consts) + ";")
    if funcs:
        parts.append("func " + ", ".join(f"{f}/{n}" for f, n in funcs) + ";")
    if preds:
        parts.append("pred " + ", ".join(f"{p}/{n}" for p, n in preds) + ";")
    if complete_preds:
        parts.append("complete pred " + ", ".join(f"{p}/{n}" for p, n in complete_preds) + ";")
    return f"signature {index} {{ " + " ".join(parts) + " }"


def _axiom_line(index: str, f: Formula) -> str:
    return f"axiom {index}: {render_formula(f)}"


def _bridge_line(premises: list[tuple[str, Formula]], conclusion: tuple[str, Formula]) -> str:
    head = ", ".join(f"{i}: {render_formula(f)}" for i, f in premises)
    cidx, cf = conclusion
    if head:
        return f"bridge {head} ==> {cidx}: {render_formula(cf)}"
    return f"bridge ==> {cidx}: {render_formula(cf)}"


# ---------------------------------------------------------------------------
# Concept expressions (shared by the description-logic dialects)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CName:
    name: str


@dataclass(frozen=True)
class CNot:
    inner: "ConceptExpr"


@dataclass(frozen=True)
class CAnd:
    lhs: "ConceptExpr"
    rhs: "ConceptExpr"


@dataclass(frozen=True)
class COr:
    lhs: "ConceptExpr"
    rhs: "ConceptExpr"


ConceptExpr = CName | CNot | CAnd | COr


def concept_formula(c: ConceptExpr, t: Term) -> Formula:
    """Standard translation of a concept to a one-free-variable formula."""
    if isinstance(c, CName):
        return Atom(c.name, (t,))
    if isinstance(c, CNot):
        return Not(concept_formula(c.inner, t))
    if isinstance(c, CAnd):
        return And(concept_formula(c.lhs, t), concept_formula(c.rhs, t))
    return Or(concept_formula(c.lhs, t), concept_formula(c.rhs, t))


def concept_names(c: ConceptExpr) -> set[str]:
    if isinstance(c, CName):
        return {c.name}
    if isinstance(c, CNot):
        return concept_names(c.inner)
    return concept_names(c.lhs) | concept_names(c.rhs)


def render_concept(c: ConceptExpr, ctx: int = 0) -> str:
    # precedence: or=0 < and=1 < not=2
    if isinstance(c, CName):
        return c.name
    if isinstance(c, CNot):
        return "not " + render_concept(c.inner, 2)
    if isinstance(c, CAnd):
        s = f"{render_concept(c.lhs, 1)} and {render_concept(c.rhs, 2)}"
        return f"({s})" if ctx > 1 else s
    s = f"{render_concept(c.lhs, 0)} or {render_concept(c.rhs, 1)}"
    return f"({s})" if ctx > 0 else s


def _parse_concept(ts: TokenStream) -> ConceptExpr:
    c = _parse_concept_and(ts)
    while ts.accept("ident", "or"):
        c = COr(c, _parse_concept_and(ts))
    return c


def _parse_concept_and(ts: TokenStream) -> ConceptExpr:
    c = _parse_concept_unary(ts)
    while ts.accept("ident", "and"):
        c = CAnd(c, _parse_concept_unary(ts))
    return c


def _parse_concept_unary(ts: TokenStream) -> ConceptExpr:
    if ts.accept("ident", "not"):
        return CNot(_parse_concept_unary(ts))
    if ts.accept("("):
        c = _parse_concept(ts)
        ts.expect(")")
        return c
    return CName(_name_token(ts, "a concept name").text)


# ---------------------------------------------------------------------------
# Ontology / package blocks (shared block grammar)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OntologyBlock:
    """One `ontology i { ... }` or `package i { ... }` declaration."""

    name: str
    concepts: tuple[str, ...] = ()
    roles: tuple[str, ...] = ()
    individuals: tuple[str, ...] = ()
    axioms: tuple[tuple[ConceptExpr, ConceptExpr], ...] = ()

    def kind_of(self, name: str) -> str | None:
        if name in self.concepts:
            return "concept"
        if name in self.roles:
            return "role"
        if name in self.individuals:
            return "individual"
        return None


def _parse_name_list(ts: TokenStream, what: str) -> tuple[str, ...]:
    names = [_name_token(ts, what).text]
    while ts.accept(","):
        names.append(_name_token(ts, what).text)
    ts.expect(";")
    return tuple(names)


def _parse_block(ts: TokenStream, *, allow_roles: bool = True) -> OntologyBlock:
    name = _name_token(ts, "an ontology name").text
    ts.expect("{")
    concepts: tuple[str, ...] = ()
    roles: tuple[str, ...] = ()
    individuals: tuple[str, ...] = ()
    axioms: list[tuple[ConceptExpr, ConceptExpr]] = []
    while not ts.accept("}"):
        if ts.accept("ident", "concepts"):
            concepts += _parse_name_list(ts, "a concept name")
        elif allow_roles and ts.accept("ident", "roles"):
            roles += _parse_name_list(ts, "a role name")
        elif allow_roles and ts.accept("ident", "individuals"):
            individuals += _parse_name_list(ts, "an individual name")
        elif ts.accept("ident", "axiom"):
            lhs = _parse_concept(ts)
            ts.expect("ident", "subclassof")
            rhs = _parse_concept(ts)
            ts.expect(";")
            axioms.append((lhs, rhs))
        else:
            raise ts.error("expected concepts, roles, individuals, axiom, or }")
    return OntologyBlock(name, concepts, roles, individuals, tuple(axioms))


def _check_concept(c: ConceptExpr, block: OntologyBlock) -> None:
    for n in concept_names(c):
        if n not in block.concepts:
            raise EncodeError(f"unknown concept {n!r} in ontology {block.name}")


def _block_sig_line(block: OntologyBlock) -> str:
    preds = [(c, 1) for c in block.concepts] + [(r, 2) for r in block.roles]
    return _sig_line(block.name, list(block.individuals), [], preds)


def _block_axiom_lines(block: OntologyBlock) -> list[str]:
    lines = []
    for lhs, rhs in block.axioms:
        _check_concept(lhs, block)
        _check_concept(rhs, block)
        x = Var("x")
        lines.append(
            _axiom_line(block.name, Forall("x", Implies(concept_formula(lhs, x), concept_formula(rhs, x))))
        )
    return lines


# ---------------------------------------------------------------------------
# ddl: ontologies with directed semantic mappings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DdlMapping:
    """`mapping i: C into j: D` (or `onto`); entity is concept/role/individual."""

    direction: str  # "into" or "onto"
    entity: str
    src_index: str
    src: ConceptExpr | str
    dst_index: str
    dst: ConceptExpr | str


@dataclass(frozen=True)
class DdlSpec:
    ontologies: tuple[OntologyBlock, ...]
    mappings: tuple[DdlMapping, ...]
    compositions: tuple[tuple[str, str, str], ...]

    def ontology(self, name: str) -> OntologyBlock:
        for block in self.ontologies:
            if block.name == name:
                return block
        raise EncodeError(f"unknown ontology {name!r}")


def parse_ddl(text: str) -> DdlSpec:
    ts = TokenStream(tokenize(text))
    blocks: list[OntologyBlock] = []
    mappings: list[DdlMapping] = []
    compositions: list[tuple[str, str, str]] = []
    while not ts.at("eof"):
        if ts.accept("ident", "ontology"):
            block = _parse_block(ts)
            if any(b.name == block.name for b in blocks):
                raise ts.error(f"duplicate ontology {block.name!r}")
            blocks.append(block)
        elif ts.accept("ident", "mapping"):
            src_index = _name_token(ts, "an ontology name").text
            ts.expect(":")
            src = _parse_concept(ts)
            if ts.peek().text not in ("into", "onto"):
                raise ts.error("expected into or onto")
            direction = ts.next().text
            dst_index = _name_token(ts, "an ontology name").text
            ts.expect(":")
            dst = _parse_concept(ts)
            mappings.append(DdlMapping(direction, "", src_index, src, dst_index, dst))
        elif ts.accept("ident", "compose"):
            i = _name_token(ts, "an ontology name").text
            j = _name_token(ts, "an ontology name").text
            k = _name_token(ts, "an ontology name").text
            compositions.append((i, j, k))
        else:
            raise ts.error("expected ontology, mapping, or compose")
    spec = DdlSpec(tuple(blocks), tuple(mappings), tuple(compositions))
    return DdlSpec(spec.ontologies, tuple(_resolve_mapping(spec, m) for m in spec.mappings), spec.compositions)


def _resolve_mapping(spec: DdlSpec, m: DdlMapping) -> DdlMapping:
    """Decide whether a mapping relates concepts, roles, or individuals."""
    src_block = spec.ontology(m.src_index)
    dst_block = spec.ontology(m.dst_index)
    if m.src_index == m.dst_index:
        raise EncodeError(f"mapping must relate distinct ontologies, got {m.src_index}")
    kinds = []
    for side, block in ((m.src, src_block), (m.dst, dst_block)):
        assert isinstance(side, ConceptExpr)
        if isinstance(side, CName) and block.kind_of(side.name) in ("role", "individual"):
            kinds.append(block.kind_of(side.name))
        else:
            _check_concept(side, block)
            kinds.append("concept")
    if kinds[0] != kinds[1]:
        raise EncodeError(f"mapping mixes a {kinds[0]} with a {kinds[1]}")
    entity = kinds[0]
    if entity == "concept":
        return DdlMapping(m.direction, entity, m.src_index, m.src, m.dst_index, m.dst)
    assert isinstance(m.src, CName) and isinstance(m.dst, CName)
    return DdlMapping(m.direction, entity, m.src_index, m.src.name, m.dst_index, m.dst.name)


def ddl_mapping_rule(m: DdlMapping) -> str:
    """One bridge rule per mapping; `onto` swaps premise and conclusion."""
    i, j = m.src_index, m.dst_index
    if m.entity == "concept":
        assert isinstance(m.src, ConceptExpr) and isinstance(m.dst, ConceptExpr)
        src_f = concept_formula(m.src, ArrowVar("x", ">", j))
        dst_f = concept_formula(m.dst, Var("x"))
    elif m.entity == "role":
        src_f = Atom(str(m.src), (ArrowVar("x", ">", j), ArrowVar("y", ">", j)))
        dst_f = Atom(str(m.dst), (Var("x"), Var("y")))
    else:
        src_f = Eq(ArrowVar("x", ">", j), Const(str(m.src)))
        dst_f = Eq(Var("x"), Const(str(m.dst)))
    if m.direction == "into":
        return _bridge_line([(i, src_f)], (j, dst_f))
    return _bridge_line([(j, dst_f)], (i, src_f))


def encode_ddl(spec: DdlSpec) -> EncodedTheory:
    lines = ["index " + ", ".join(b.name for b in spec.ontologies)]
    for block in spec.ontologies:
        lines.append(_block_sig_line(block))
    for block in spec.ontologies:
        lines.extend(_block_axiom_lines(block))
    for m in spec.mappings:
        lines.append(ddl_mapping_rule(m))
    for i, j, k in spec.compositions:
        lines.append(f"property com {i} {j} {k}")
    return _assemble("ddl", (), lines)


# ---------------------------------------------------------------------------
# econn: ontologies connected by named links
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EconnLink:
    name: str
    src: str
    dst: str


@dataclass(frozen=True)
class EconnAxiom:
    """`axiom i: C subclassof <restriction> E. D` with D in E's target."""

    index: str
    lhs: ConceptExpr
    restriction: str  # "exists", "all", "atleast", "atmost"
    bound: int  # 0 for exists/all
    link: str
    rhs: ConceptExpr


@dataclass(frozen=True)
class EconnSpec:
    ontologies: tuple[OntologyBlock, ...]
    links: tuple[EconnLink, ...]
    axioms: tuple[EconnAxiom, ...]

    def link(self, name: str) -> EconnLink:
        for link in self.links:
            if link.name == name:
                return link
        raise EncodeError(f"unknown link {name!r}")


def parse_econn(text: str) -> EconnSpec:
    ts = TokenStream(tokenize(text))
    blocks: list[OntologyBlock] = []
    links: list[EconnLink] = []
    axioms: list[EconnAxiom] = []
    local: list[tuple[str, ConceptExpr, ConceptExpr]] = []
    while not ts.at("eof"):
        if ts.accept("ident", "ontology"):
            block = _parse_block(ts, allow_roles=False)
            if any(b.name == block.name for b in blocks):
                raise ts.error(f"duplicate ontology {block.name!r}")
            blocks.append(block)
        elif ts.accept("ident", "link"):
            name = _name_token(ts, "a link name").text
            ts.expect("ident", "from")
            src = _name_token(ts, "an ontology name").text
            ts.expect("ident", "to")
            dst = _name_token(ts, "an ontology name").text
            if any(l.name == name for l in links):
                raise ts.error(f"duplicate link {name!r}")
            links.append(EconnLink(name, src, dst))
        elif ts.accept("ident", "axiom"):
            index = _name_token(ts, "an ontology name").text
            ts.expect(":")
            lhs = _parse_concept(ts)
            ts.expect("ident", "subclassof")
            tok = ts.peek()
            if tok.kind == "ident" and tok.text in ("exists", "all", "atleast", "atmost"):
                restriction = ts.next().text
                bound = 0
                if restriction in ("atleast", "atmost"):
                    bound = int(ts.expect("number").text)
                    if bound < 1:
                        raise ts.error("cardinality bound must be at least 1")
                link = _name_token(ts, "a link name").text
                ts.expect(".")
                rhs = _parse_concept(ts)
                axioms.append(EconnAxiom(index, lhs, restriction, bound, link, rhs))
            else:
                local.append((index, lhs, _parse_concept(ts)))
        else:
            raise ts.error("expected ontology, link, or axiom")
    merged = list(blocks)
    position = {b.name: pos for pos, b in enumerate(merged)}
    for link in links:
        if link.src not in position or link.dst not in position:
            raise EncodeError(f"link {link.name} connects undeclared ontologies")
        if link.src == link.dst:
            raise EncodeError(f"link {link.name} must connect distinct ontologies")
    for index, lhs, rhs in local:
        if index not in position:
            raise EncodeError(f"unknown ontology {index!r}")
        b = merged[position[index]]
        merged[position[index]] = OntologyBlock(
            b.name, b.concepts, b.roles, b.individuals, b.axioms + ((lhs, rhs),)
        )
    spec = EconnSpec(tuple(merged), tuple(links), tuple(axioms))
    for ax in axioms:
        link = spec.link(ax.link)
        if ax.index not in position:
            raise EncodeError(f"unknown ontology {ax.index!r}")
        if ax.index != link.src:
            raise EncodeError(f"axiom at {ax.index} uses link {link.name} from {link.src}")
        _check_concept(ax.lhs, merged[position[ax.index]])
        _check_concept(ax.rhs, merged[position[link.dst]])
    return spec


def econn_axiom_rule(spec: EconnSpec, ax: EconnAxiom) -> str:
    """Bridge rule over the labelled relation r_ij@E for one link axiom."""
    link = spec.link(ax.link)
    i, j, label = link.src, link.dst, link.name
    if ax.restriction == "exists":
        prem = concept_formula(ax.lhs, Var("x"))
        conc = concept_formula(ax.rhs, ArrowVar("x", "<", i, label))
        return _bridge_line([(i, prem)], (j, conc))
    if ax.restriction == "all":
        prem = concept_formula(ax.lhs, ArrowVar("x", ">", j, label))
        conc = concept_formula(ax.rhs, Var("x"))
        return _bridge_line([(i, prem)], (j, conc))
    if ax.restriction == "atleast":
        # n premise copies; any n elements with >= n successors each admit
        # pairwise-distinct representatives, so the sweep stays sound.
        names = [f"x{k}" for k in range(1, ax.bound + 1)]
        premises = [(i, concept_formula(ax.lhs, Var(v))) for v in names]
        arrows = [ArrowVar(v, "<", i, label) for v in names]
        conjuncts: list[Formula] = [concept_formula(ax.rhs, a) for a in arrows]
        for p in range(len(arrows)):
            for q in range(p + 1, len(arrows)):
                conjuncts.append(Not(Eq(arrows[p], arrows[q])))
        conc = conjuncts[0]
        for extra in conjuncts[1:]:
            conc = And(conc, extra)
        return _bridge_line(premises, (j, conc))
    # atmost: sweep n+1 successors of one element; two must coincide.
    names = [f"x{k}" for k in range(1, ax.bound + 2)]
    premises = [(i, concept_formula(ax.lhs, Var("x")))]
    premises += [(i, Eq(Var("x"), ArrowVar(v, ">", j, label))) for v in names]
    disjuncts: list[Formula] = []
    for k, v in enumerate(names):
        others = [Eq(Var(w), Var(v)) for idx, w in enumerate(names) if idx != k]
        merged = others[0]
        for extra in others[1:]:
            merged = Or(merged, extra)
        disjuncts.append(Implies(concept_formula(ax.rhs, Var(v)), merged))
    conc = disjuncts[0]
    for extra in disjuncts[1:]:
        conc = Or(conc, extra)
    return _bridge_line(premises, (j, conc))


def encode_econn(spec: EconnSpec) -> EncodedTheory:
    lines = ["index " + ", ".join(b.name for b in spec.ontologies)]
    for block in spec.ontologies:
        lines.append(_block_sig_line(block))
    for block in spec.ontologies:
        lines.extend(_block_axiom_lines(block))
    for ax in spec.axioms:
        lines.append(econn_axiom_rule(spec, ax))
    return _assemble("econn", (), lines)


# ---------------------------------------------------------------------------
# pdl: packages importing foreign terms from their home package
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PdlImport:
    src: str
    term: str
    kind: str  # "concept" | "role" | "individual"
    dst: str


@dataclass(frozen=True)
class PdlSpec:
    packages: tuple[OntologyBlock, ...]
    imports: tuple[PdlImport, ...]


def parse_pdl(text: str) -> PdlSpec:
    ts = TokenStream(tokenize(text))
    blocks: list[OntologyBlock] = []
    imports: list[PdlImport] = []
    while not ts.at("eof"):
        if ts.accept("ident", "package"):
            block = _parse_block(ts)
            if any(b.name == block.name for b in blocks):
                raise ts.error(f"duplicate package {block.name!r}")
            blocks.append(block)
        elif ts.accept("ident", "import"):
            src = _name_token(ts, "a package name").text
            ts.expect(":")
            term = _name_token(ts, "a term name").text
            ts.expect("ident", "into")
            dst = _name_token(ts, "a package name").text
            imports.append(PdlImport(src, term, "", dst))
        else:
            raise ts.error("expected package or import")
    # Every term has a unique home package; imports must name it.
    home: dict[str, str] = {}
    kinds: dict[str, str] = {}
    for block in blocks:
        for name in block.concepts + block.roles + block.individuals:
            if name in home:
                raise EncodeError(f"{name!r} declared in packages {home[name]} and {block.name}")
            home[name] = block.name
            kinds[name] = block.kind_of(name) or ""
    names = {b.name for b in blocks}
    resolved = []
    for imp in imports:
        if imp.src not in names or imp.dst not in names:
            raise EncodeError(f"import between undeclared packages {imp.src!r}, {imp.dst!r}")
        if imp.src == imp.dst:
            raise EncodeError(f"import of {imp.term!r} into its own package")
        if home.get(imp.term) != imp.src:
            raise EncodeError(f"{imp.term!r} has home package {home.get(imp.term)}, not {imp.src}")
        resolved.append(PdlImport(imp.src, imp.term, kinds[imp.term], imp.dst))
    return PdlSpec(tuple(blocks), tuple(resolved))


def pdl_import_rules(imp: PdlImport) -> list[str]:
    """Importing rule plus its converse (individuals import one way)."""
    i, j, t = imp.src, imp.dst, imp.term
    if imp.kind == "individual":
        return [_bridge_line([(i, Eq(Var("x"), Const(t)))], (j, Eq(ArrowVar("x", ">", i), Const(t))))]
    if imp.kind == "concept":
        there = Atom(t, (ArrowVar("x", ">", j),))
        here = Atom(t, (Var("x"),))
    else:
        there = Atom(t, (ArrowVar("x", ">", j), ArrowVar("y", ">", j)))
        here = Atom(t, (Var("x"), Var("y")))
    return [_bridge_line([(i, there)], (j, here)), _bridge_line([(j, here)], (i, there))]


def encode_pdl(spec: PdlSpec) -> EncodedTheory:
    lines = ["index " + ", ".join(b.name for b in spec.packages)]
    # Imported symbols join the target signature so both rule sides parse.
    extra_preds: dict[str, list[tuple[str, int]]] = {b.name: [] for b in spec.packages}
    extra_consts: dict[str, list[str]] = {b.name: [] for b in spec.packages}
    for imp in spec.imports:
        if imp.kind == "concept":
            extra_preds[imp.dst].append((imp.term, 1))
        elif imp.kind == "role":
            extra_preds[imp.dst].append((imp.term, 2))
        else:
            extra_consts[imp.dst].append(imp.term)
    for block in spec.packages:
        preds = [(c, 1) for c in block.concepts] + [(r, 2) for r in block.roles]
        preds += extra_preds[block.name]
        lines.append(_sig_line(block.name, list(block.individuals) + extra_consts[block.name], [], preds))
    for block in spec.packages:
        lines.extend(_block_axiom_lines(block))
    for imp in spec.imports:
        lines.extend(pdl_import_rules(imp))
    pairs = []
    for imp in spec.imports:
        if (imp.src, imp.dst) not in pairs:
            pairs.append((imp.src, imp.dst))
    for i, j in pairs:
        lines.append(f"property inj {i} {j}")
    for i, j in pairs:
        for j2, k in pairs:
            if j2 == j and k != i:
                lines.append(f"property com {i} {j} {k}")
    return _assemble("pdl", (), lines)


# ---------------------------------------------------------------------------
# qml: one index per modal nesting level
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxF:
    """`box phi`, optionally with de-re bindings `box(x = t) phi`."""

    body: Formula
    bindings: tuple[tuple[str, Term], ...] = ()


@dataclass(frozen=True)
class QmlSpec:
    semantics: str  # "kripke" | "counterpart"
    domains: str  # "increasing" | "decreasing" | "constant" | "unconstrained"
    signature: Signature
    formulas: tuple[Formula, ...]  # Formula trees that may contain BoxF nodes
    sources: tuple[str, ...]


class _QmlParser:
    """Recursive-descent parser for the modal dialect formulas."""

    def __init__(self, sig: Signature, ts: TokenStream):
        self.sig = sig
        self.ts = ts

    def formula(self) -> Formula:
        f = self.or_level()
        if self.ts.accept("->"):
            return Implies(f, self.formula())  # right associative
        return f

    def or_level(self) -> Formula:
        f = self.and_level()
        while self.ts.accept("|"):
            f = Or(f, self.and_level())
        return f

    def and_level(self) -> Formula:
        f = self.unary()
        while self.ts.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        ts = self.ts
        if ts.accept("~"):
            return Not(self.unary())
        if ts.accept("ident", "forall"):
            name = _name_token(ts, "a variable").text
            ts.expect(".")
            return Forall(name, self.formula())
        if ts.accept("ident", "exists"):
            name = _name_token(ts, "a variable").text
            ts.expect(".")
            return Exists(name, self.formula())
        if ts.accept("ident", "box"):
            return self.box()
        if ts.accept("ident", "false"):
            return Falsum()
        if ts.accept("ident", "true"):
            return Not(Falsum())
        if ts.accept("("):
            f = self.formula()
            ts.expect(")")
            return f
        return self.atom()

    STATEMENT_WORDS = frozenset({"formula", "semantics", "domains", "signature", "contexts"})

    def box(self) -> Formula:
        ts = self.ts
        bindings: tuple[tuple[str, Term], ...] = ()
        if ts.at("("):
            saved = ts.pos
            parsed = self.try_bindings()
            tok = ts.peek()
            starts_formula = tok.kind in ("(", "~") or (
                tok.kind == "ident" and tok.text not in self.STATEMENT_WORDS
            )
            if parsed is None or not starts_formula:
                ts.pos = saved
            else:
                bindings = parsed
        return BoxF(self.unary(), bindings)

    def try_bindings(self) -> tuple[tuple[str, Term], ...] | None:
        ts = self.ts
        ts.expect("(")
        pairs: list[tuple[str, Term]] = []
        try:
            while True:
                name = _name_token(ts, "a variable").text
                ts.expect("=")
                pairs.append((name, self.term(as_atom_ok=False)))
                if ts.accept(")"):
                    return tuple(pairs)
                ts.expect(",")
        except SyntaxError_:
            return None

    def atom(self) -> Formula:
        lhs = self.term()
        if self.ts.accept("="):
            if isinstance(lhs, Atom):
                raise self.ts.error("left side of = must be a term")
            return Eq(lhs, self.term(as_atom_ok=False))
        if isinstance(lhs, Atom):
            return lhs
        raise self.ts.error("expected an atom or equation")

    def term(self, *, as_atom_ok: bool = True) -> Term:
        ts = self.ts
        name = _name_token(ts, "a term").text
        if ts.accept("("):
            args = [self.term(as_atom_ok=False)]
            while ts.accept(","):
                args.append(self.term(as_atom_ok=False))
            ts.expect(")")
            if self.sig.func_arity(name) == len(args):
                return App(name, tuple(args))
            if as_atom_ok and self.sig.pred_arity(name) == len(args):
                return Atom(name, tuple(args))  # type: ignore[return-value]
            raise ts.error(f"{name}/{len(args)} is not a declared function or predicate")
        if self.sig.is_const(name):
            return Const(name)
        if as_atom_ok and self.sig.pred_arity(name) == 0:
            return Atom(name)  # type: ignore[return-value]
        return Var(name)


def qml_depth(f) -> int:
    if isinstance(f, BoxF):
        return 1 + qml_depth(f.body)
    if isinstance(f, Not):
        return qml_depth(f.inner)
    if isinstance(f, (And, Or, Implies)):
        return max(qml_depth(f.lhs), qml_depth(f.rhs))
    if isinstance(f, (Forall, Exists)):
        return qml_depth(f.body)
    return 0


def parse_qml(text: str) -> QmlSpec:
    ts = TokenStream(tokenize(text))
    semantics = "kripke"
    domains: str | None = None
    sig = Signature()
    formulas: list[Formula] = []
    sources: list[str] = []
    lines = text.splitlines()
    while not ts.at("eof"):
        if ts.accept("ident", "semantics"):
            tok = ts.next()
            if tok.text not in ("kripke", "counterpart"):
                raise ts.error("expected kripke or counterpart")
            semantics = tok.text
        elif ts.accept("ident", "domains"):
            tok = ts.next()
            if tok.text not in ("increasing", "decreasing", "constant", "unconstrained"):
                raise ts.error("expected increasing, decreasing, constant, or unconstrained")
            domains = tok.text
        elif ts.at("ident", "signature"):
            ts.next()
            sig = _parse_signature_block(ts, sig)
        elif ts.accept("ident", "formula"):
            sources.append(lines[ts.peek().line - 1].strip())
            formulas.append(_QmlParser(sig, ts).formula())
        else:
            raise ts.error("expected semantics, domains, signature, or formula")
    if domains is None:
        domains = "increasing" if semantics == "kripke" else "unconstrained"
    return QmlSpec(semantics, domains, sig, tuple(formulas), tuple(sources))


class _BoxRegistry:
    """Fresh box predicates introduced during translation, per index."""

    def __init__(self) -> None:
        self.entries: dict[tuple[int, str], tuple[tuple[str, ...], Formula]] = {}

    def register(self, index: int, body: Formula) -> tuple[str, tuple[str, ...]]:
        params = tuple(sorted(free_plain_vars(body)))
        name = "Box_" + _hash8(render_formula(body) + "|" + ",".join(params))
        self.entries[(index, name)] = (params, body)
        return name, params


def qml_translate(f, index: int, registry: _BoxRegistry) -> Formula:
    """Replace each boxed subformula with a fresh atom one index up."""
    if isinstance(f, BoxF):
        if index == 0:
            raise EncodeError("box nesting exceeds the declared evaluation index")
        body = qml_translate(f.body, index - 1, registry)
        name, params = registry.register(index, body)
        bind = dict(f.bindings)
        for v in bind:
            if v not in params:
                raise EncodeError(f"binding for {v!r} which is not free in the box body")
        args = tuple(bind.get(v, Var(v)) for v in params)
        return Atom(name, args)
    if isinstance(f, Not):
        return Not(qml_translate(f.inner, index, registry))
    if isinstance(f, And):
        return And(qml_translate(f.lhs, index, registry), qml_translate(f.rhs, index, registry))
    if isinstance(f, Or):
        return Or(qml_translate(f.lhs, index, registry), qml_translate(f.rhs, index, registry))
    if isinstance(f, Implies):
        return Implies(qml_translate(f.lhs, index, registry), qml_translate(f.rhs, index, registry))
    if isinstance(f, Forall):
        return Forall(f.var, qml_translate(f.body, index, registry))
    if isinstance(f, Exists):
        return Exists(f.var, qml_translate(f.body, index, registry))
    return f


def _arrowed(f: Formula, params: tuple[str, ...], direction: str, foreign: str) -> Formula:
    for v in params:
        f = substitute(f, v, ArrowVar(v, direction, foreign))
    return f


def encode_qml(spec: QmlSpec) -> EncodedTheory:
    depth = max((qml_depth(f) for f in spec.formulas), default=0)
    indices = [str(i) for i in range(depth + 1)]
    registry = _BoxRegistry()
    axioms = [qml_translate(f, depth, registry) for f in spec.formulas]

    base_consts = list(spec.signature.consts)
    base_funcs = list(spec.signature.funcs)
    base_preds = list(spec.signature.preds)
    lines = ["index " + ", ".join(indices)]
    names: list[tuple[str, str]] = []
    per_index_preds: dict[str, list[tuple[str, int]]] = {i: [] for i in indices}
    for (i, name), (params, body) in sorted(registry.entries.items()):
        per_index_preds[str(i)].append((name, len(params)))
        names.append((name, f"box {render_formula(body)} (index {i})"))
    for i in indices:
        lines.append(_sig_line(i, base_consts, base_funcs, base_preds + per_index_preds[i]))
    for src, ax in zip(spec.sources, axioms):
        lines.append(f"# {src}")
        lines.append(_axiom_line(indices[-1], ax))

    for (i, name), (params, body) in sorted(registry.entries.items()):
        below = str(i - 1)
        box_up = Atom(name, tuple(ArrowVar(v, ">", below) for v in params))
        lines.append(_bridge_line([(str(i), box_up)], (below, body)))
        box_plain = Atom(name, tuple(Var(v) for v in params))
        lines.append(_bridge_line([(below, _arrowed(body, params, "<", str(i)))], (str(i), box_plain)))
    by_index: dict[int, list[tuple[str, tuple[str, ...], Formula]]] = {}
    for (i, name), (params, body) in sorted(registry.entries.items()):
        by_index.setdefault(i, []).append((name, params, body))
    for i, entries in sorted(by_index.items()):
        below = str(i - 1)
        for name_a, params_a, body_a in entries:
            for name_b, params_b, body_b in entries:
                if name_a == name_b:
                    continue
                joint = tuple(sorted(set(params_a) | set(params_b)))
                prem = _arrowed(Implies(body_a, body_b), joint, "<", str(i))
                conc = Implies(
                    Atom(name_a, tuple(Var(v) for v in params_a)),
                    Atom(name_b, tuple(Var(v) for v in params_b)),
                )
                lines.append(_bridge_line([(below, prem)], (str(i), conc)))

    for hi in range(depth, 0, -1):
        for lo in range(hi - 1, -1, -1):
            if spec.domains in ("increasing", "constant"):
                lines.append(f"property tot {hi} {lo}")
            if spec.domains in ("decreasing", "constant"):
                lines.append(f"property tot {lo} {hi}")
    if spec.semantics == "counterpart":
        for i in range(depth, 1, -1):
            for j in range(i - 1, 0, -1):
                for k in range(j - 1, -1, -1):
                    lines.append(f"property com {i} {j} {k}")
    return _assemble("qml", tuple(names), lines)


# ---------------------------------------------------------------------------
# qlc: contexts with an ist predicate over named formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IstF:
    """`ist(k, phi)`: phi holds in context k."""

    context: str
    body: Formula


@dataclass(frozen=True)
class QlcSpec:
    contexts: tuple[str, ...]
    signature: Signature
    formulas: tuple[tuple[str, Formula], ...]  # (home context, tree with IstF)
    sources: tuple[str, ...]


class _QlcParser(_QmlParser):
    """The modal-dialect parser with `ist(k, phi)` atoms instead of box."""

    def __init__(self, sig: Signature, ts: TokenStream, contexts: tuple[str, ...]):
        super().__init__(sig, ts)
        self.contexts = contexts

    def box(self) -> Formula:
        raise self.ts.error("box is not part of this dialect")

    def unary(self) -> Formula:
        ts = self.ts
        if ts.at("ident", "ist"):
            ts.next()
            ts.expect("(")
            ctx = _name_token(ts, "a context name").text
            if ctx not in self.contexts:
                raise ts.error(f"unknown context {ctx!r}")
            ts.expect(",")
            body = self.formula()
            ts.expect(")")
            return IstF(ctx, body)
        return super().unary()


def parse_qlc(text: str) -> QlcSpec:
    ts = TokenStream(tokenize(text))
    contexts: tuple[str, ...] = ()
    sig = Signature()
    formulas: list[tuple[str, Formula]] = []
    sources: list[str] = []
    lines = text.splitlines()
    while not ts.at("eof"):
        if ts.accept("ident", "contexts"):
            contexts = contexts + (_name_token(ts, "a context name").text,)
            while ts.accept(","):
                contexts = contexts + (_name_token(ts, "a context name").text,)
        elif ts.at("ident", "signature"):
            ts.next()
            sig = _parse_signature_block(ts, sig)
        elif ts.accept("ident", "formula"):
            home = _name_token(ts, "a context name").text
            if home not in contexts:
                raise ts.error(f"unknown context {home!r}")
            ts.expect(":")
            sources.append(lines[ts.peek().line - 1].strip())
            formulas.append((home, _QlcParser(sig, ts, contexts).formula()))
        else:
            raise ts.error("expected contexts, signature, or formula")
    if len(set(contexts)) != len(contexts):
        raise EncodeError("duplicate context name")
    for _, f in formulas:
        _check_prenex(f)
    return QlcSpec(contexts, sig, tuple(formulas), tuple(sources))


def _check_prenex(f: Formula) -> None:
    """Universal prefix over a quantifier-free matrix; no existentials."""
    while isinstance(f, Forall):
        f = f.body
    _check_matrix(f)


def _check_matrix(f) -> None:
    if isinstance(f, Exists):
        raise EncodeError("existential quantifier: Skolemize the input first")
    if isinstance(f, Forall):
        raise EncodeError("input formula is not in prenex form")
    if isinstance(f, Not):
        _check_matrix(f.inner)
    elif isinstance(f, (And, Or, Implies)):
        _check_matrix(f.lhs)
        _check_matrix(f.rhs)
    elif isinstance(f, IstF):
        _check_matrix(f.body)


class _WffRegistry:
    """Fresh term names for formulas appearing under ist."""

    def __init__(self) -> None:
        self.entries: dict[str, tuple[tuple[str, ...], Formula]] = {}
        self.uses: set[tuple[str, str]] = set()  # (wff name, context)

    def register(self, context: str, body: Formula) -> tuple[str, tuple[str, ...]]:
        params = tuple(sorted(free_plain_vars(body)))
        name = "wff_" + _hash8(render_formula(body) + "|" + ",".join(params))
        self.entries[name] = (params, body)
        self.uses.add((name, context))
        return name, params


def qlc_translate(f, registry: _WffRegistry) -> Formula:
    if isinstance(f, IstF):
        body = qlc_translate(f.body, registry)
        name, params = registry.register(f.context, body)
        wff: Term = Const(name) if not params else App(name, tuple(Var(v) for v in params))
        return Atom("ist", (Const(f.context), wff))
    if isinstance(f, Not):
        return Not(qlc_translate(f.inner, registry))
    if isinstance(f, And):
        return And(qlc_translate(f.lhs, registry), qlc_translate(f.rhs, registry))
    if isinstance(f, Or):
        return Or(qlc_translate(f.lhs, registry), qlc_translate(f.rhs, registry))
    if isinstance(f, Implies):
        return Implies(qlc_translate(f.lhs, registry), qlc_translate(f.rhs, registry))
    if isinstance(f, Forall):
        return Forall(f.var, qlc_translate(f.body, registry))
    if isinstance(f, Exists):
        return Exists(f.var, qlc_translate(f.body, registry))
    return f


def encode_qlc(spec: QlcSpec) -> EncodedTheory:
    if len(spec.contexts) < 2:
        raise EncodeError("need at least two contexts")
    registry = _WffRegistry()
    axioms = [(home, qlc_translate(f, registry)) for home, f in spec.formulas]

    names = [
        (name, f"names the formula {render_formula(body)}")
        for name, (params, body) in sorted(registry.entries.items())
    ]
    wff_consts = [n for n, (p, _) in sorted(registry.entries.items()) if not p]
    wff_funcs = [(n, len(p)) for n, (p, _) in sorted(registry.entries.items()) if p]
    consts = list(spec.signature.consts) + list(spec.contexts) + wff_consts
    funcs = list(spec.signature.funcs) + wff_funcs
    preds = list(spec.signature.preds)
    lines = ["index " + ", ".join(spec.contexts)]
    for ctx in spec.contexts:
        sig_line = _sig_line(ctx, consts, funcs, preds, complete_preds=[("ist", 2)])
        lines.append(sig_line)
    for src, (home, ax) in zip(spec.sources, axioms):
        lines.append(f"# {src}")
        lines.append(_axiom_line(home, ax))

    for name, k in sorted(registry.uses):
        params, body = registry.entries[name]
        for h in spec.contexts:
            if h == k:
                continue
            arrowed_args: Term = (
                Const(name) if not params else App(name, tuple(ArrowVar(v, ">", k) for v in params))
            )
            enter_prem = Atom("ist", (Const(k), arrowed_args))
            lines.append(_bridge_line([(h, enter_prem)], (k, body)))
            plain: Term = Const(name) if not params else App(name, tuple(Var(v) for v in params))
            exit_conc = Atom("ist", (Const(k), plain))
            lines.append(_bridge_line([(k, _arrowed(body, params, ">", h))], (h, exit_conc)))

    rigid_terms = list(spec.signature.consts) + list(spec.contexts)
    for k in spec.contexts:
        for h in spec.contexts:
            if h == k:
                continue
            for t in rigid_terms:
                lines.append(
                    _bridge_line([(k, Eq(Var("x"), Const(t)))], (h, Eq(ArrowVar("x", "<", k), Const(t))))
                )
    for k in spec.contexts:
        for h in spec.contexts:
            if h != k:
                lines.append(f"property fun {k} {h}")
                lines.append(f"property tot {k} {h}")
                lines.append(f"property inj {k} {h}")
    done = set()
    for k in spec.contexts:
        for h in spec.contexts:
            if h != k and (h, k) not in done:
                done.add((k, h))
                lines.append(f"property inv {k} {h}")
    return _assemble("qlc", tuple(names), lines)


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------


def encode_ddl_text(text: str) -> EncodedTheory:
    return encode_ddl(parse_ddl(text))


def encode_econn_text(text: str) -> EncodedTheory:
    return encode_econn(parse_econn(text))


def encode_pdl_text(text: str) -> EncodedTheory:
    return encode_pdl(parse_pdl(text))


def encode_qml_text(text: str) -> EncodedTheory:
    return encode_qml(parse_qml(text))


def encode_qlc_text(text: str) -> EncodedTheory:
    return encode_qlc(parse_qlc(text))


DIALECTS = {
    "ddl": encode_ddl_text,
    "econn": encode_econn_text,
    "pdl": encode_pdl_text,
    "qml": encode_qml_text,
    "qlc": encode_qlc_text,
}


def encode_text(dialect: str, text: str) -> EncodedTheory:
    if dialect not in DIALECTS:
        raise EncodeError(f"unknown dialect {dialect!r}; choose from {sorted(DIALECTS)}")
    return DIALECTS[dialect](text)
