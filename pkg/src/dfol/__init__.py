"""Distributed first-order logic toolkit.

A theory spreads over an index set: each index carries its own first-order
signature, local axioms see only one index at a time, and bridge rules relate
formulas at different indices through arrow variables (`x^>j`, `x^<j`) whose
values travel along directed domain relations.  The package parses such
theories, checks finite models against them, decides bounded logical
consequence and bridge-rule entailment, verifies natural-deduction proofs
under the arrow-variable restrictions, computes grounded equilibria of
propositional multi-context systems, and encodes several distributed
formalisms into this one.
"""

from __future__ import annotations

from .syntax import (
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
    Formula,
    Implies,
    LabeledFormula,
    Not,
    Or,
    RelationProperty,
    Signature,
    SyntaxError_,
    Term,
    Theory,
    Var,
    arrow_vars,
    free_plain_vars,
    classify_variables,
    is_closed,
    is_complete_formula,
    parse_bridge_rule_text,
    parse_formula,
    parse_labeled_formula,
    parse_theory,
    render,
    render_bridge_rule,
    render_formula,
    render_labeled,
    render_term,
    render_theory,
    substitute,
)
from .relations import (
    bridge_rules_for_property,
    inconsistency_propagation_rule,
    relation_has_property,
)
from .consequence import (
    SearchBound,
    Verdict,
    entails_bridge_rule,
    enumerate_models,
    logical_consequence,
)
from .calculus import (
    CheckConfig,
    CheckResult,
    ProofScript,
    ProofStep,
    ProofSyntaxError,
    RuleId,
    assumption_status,
    check_proof,
    existential_vars_of_step,
    load_proof_script,
    parse_proof_script,
    parse_rule_id,
)
from .mcs import (
    McsRule,
    PropFormatError,
    PropModelSet,
    PropSystem,
    equilibrium_json_text,
    equilibrium_to_json,
    fixpoint_steps,
    load_prop_system,
    local_reduction,
    minimal_model,
    parse_prop_system,
    render_equilibrium,
)
from .encodings import (
    DIALECTS,
    BoxF,
    CAnd,
    CName,
    CNot,
    COr,
    ConceptExpr,
    DdlMapping,
    DdlSpec,
    EconnAxiom,
    EconnLink,
    EconnSpec,
    EncodedTheory,
    EncodeError,
    IstF,
    OntologyBlock,
    PdlImport,
    PdlSpec,
    QlcSpec,
    QmlSpec,
    concept_formula,
    concept_names,
    ddl_mapping_rule,
    econn_axiom_rule,
    encode_ddl,
    encode_econn,
    encode_pdl,
    encode_qlc,
    encode_qml,
    encode_text,
    parse_ddl,
    parse_econn,
    parse_pdl,
    parse_qlc,
    parse_qml,
    pdl_import_rules,
    qlc_translate,
    qml_depth,
    qml_translate,
    render_concept,
)
from .prover import tableau_valid
from .semantics import (
    Assignment,
    DfolModel,
    LocalModel,
    ModelFormatError,
    UndefinedVariableError,
    check_theory,
    enumerate_admissible,
    eval_term,
    is_admissible,
    load_model,
    load_model_file,
    model_to_json,
    satisfies_axiom,
    satisfies_bridge_rule,
    satisfies_labeled,
    satisfies_local,
    validate_assignment,
    validate_model,
)

__version__ = "0.1.0"

__all__ = [
    "And",
    "App",
    "ArrowVar",
    "Assignment",
    "Atom",
    "BoxF",
    "BridgeRule",
    "CAnd",
    "CName",
    "CNot",
    "COr",
    "CheckConfig",
    "CheckResult",
    "ConceptExpr",
    "Const",
    "DIALECTS",
    "DdlMapping",
    "DdlSpec",
    "DfolModel",
    "EconnAxiom",
    "EconnLink",
    "EconnSpec",
    "EncodeError",
    "EncodedTheory",
    "Eq",
    "Exists",
    "Falsum",
    "Forall",
    "Formula",
    "Implies",
    "IstF",
    "LabeledFormula",
    "LocalModel",
    "McsRule",
    "ModelFormatError",
    "Not",
    "OntologyBlock",
    "Or",
    "PdlImport",
    "PdlSpec",
    "ProofScript",
    "ProofStep",
    "ProofSyntaxError",
    "PropFormatError",
    "PropModelSet",
    "PropSystem",
    "QlcSpec",
    "QmlSpec",
    "RelationProperty",
    "RuleId",
    "SearchBound",
    "Signature",
    "SyntaxError_",
    "Term",
    "Theory",
    "UndefinedVariableError",
    "Var",
    "Verdict",
    "__version__",
    "arrow_vars",
    "assumption_status",
    "bridge_rules_for_property",
    "check_proof",
    "check_theory",
    "classify_variables",
    "concept_formula",
    "concept_names",
    "ddl_mapping_rule",
    "econn_axiom_rule",
    "encode_ddl",
    "encode_econn",
    "encode_pdl",
    "encode_qlc",
    "encode_qml",
    "encode_text",
    "entails_bridge_rule",
    "enumerate_admissible",
    "enumerate_models",
    "equilibrium_json_text",
    "equilibrium_to_json",
    "eval_term",
    "existential_vars_of_step",
    "fixpoint_steps",
    "free_plain_vars",
    "inconsistency_propagation_rule",
    "is_admissible",
    "is_closed",
    "is_complete_formula",
    "load_model",
    "load_model_file",
    "load_proof_script",
    "load_prop_system",
    "local_reduction",
    "logical_consequence",
    "minimal_model",
    "model_to_json",
    "parse_bridge_rule_text",
    "parse_ddl",
    "parse_econn",
    "parse_formula",
    "parse_labeled_formula",
    "parse_pdl",
    "parse_proof_script",
    "parse_prop_system",
    "parse_qlc",
    "parse_qml",
    "parse_rule_id",
    "parse_theory",
    "pdl_import_rules",
    "qlc_translate",
    "qml_depth",
    "qml_translate",
    "relation_has_property",
    "render",
    "render_bridge_rule",
    "render_concept",
    "render_equilibrium",
    "render_formula",
    "render_labeled",
    "render_term",
    "render_theory",
    "satisfies_axiom",
    "satisfies_bridge_rule",
    "satisfies_labeled",
    "satisfies_local",
    "substitute",
    "tableau_valid",
    "validate_assignment",
    "validate_model",
]
