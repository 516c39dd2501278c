"""Parsing, evaluation and finite/cofinite classification of formulas."""
from .ast import And, Formula, GroupTerm, IsInf, Not, Or, Rm, ValueLeq, make_term, to_text
from .engine import (
    NotEventuallyConstantError,
    Reduction,
    SpecIntegrityError,
    Verdict,
    classify,
    eval_point,
    extension,
    extension_mask,
    reduce,
    rewrite_mismatches,
    verdict_mask,
)
from .parser import (
    FormulaSyntaxError,
    UnknownParameterError,
    parse,
    parse_element,
    parse_with_notes,
)

__all__ = [
    "And", "Formula", "FormulaSyntaxError", "GroupTerm", "IsInf", "Not",
    "NotEventuallyConstantError", "Or", "Reduction", "Rm", "SpecIntegrityError",
    "UnknownParameterError", "ValueLeq", "Verdict", "classify", "eval_point", "extension",
    "extension_mask", "make_term", "parse", "parse_element", "parse_with_notes", "reduce",
    "rewrite_mismatches", "to_text", "verdict_mask",
]
