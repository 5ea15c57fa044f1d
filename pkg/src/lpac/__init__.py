"""Checker and compressor for linear algebraic proofs with reusable patterns."""

from .checker import Checker, Pattern, ProofState, Status, Verdict, check_pattern_body, run_check
from .format import (
    Axiom,
    Deletion,
    Ext,
    LinComb,
    PatternApply,
    PatternNew,
    ProofDocument,
    iter_steps,
    parse_axioms,
    parse_polynomial,
    parse_proof,
    parse_target,
    serialize,
)
from .polyalg import (
    Polynomial,
    equal_mod_boolean,
    evaluate,
    is_boolean_valued,
    linear_combination,
    normalize,
    substitute,
)

__all__ = [
    "Axiom",
    "Checker",
    "Deletion",
    "Ext",
    "LinComb",
    "Pattern",
    "PatternApply",
    "PatternNew",
    "Polynomial",
    "ProofDocument",
    "ProofState",
    "Status",
    "Verdict",
    "check_pattern_body",
    "equal_mod_boolean",
    "evaluate",
    "is_boolean_valued",
    "iter_steps",
    "linear_combination",
    "normalize",
    "parse_axioms",
    "parse_polynomial",
    "parse_proof",
    "parse_target",
    "run_check",
    "serialize",
    "substitute",
]

__version__ = "0.1.0"
