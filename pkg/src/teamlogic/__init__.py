"""Team semantics workbench for two-variable dependence and IF logic."""

from .errors import (
    ArityError,
    EvaluationError,
    FormulaSyntaxError,
    FragmentError,
    StructureFormatError,
    TeamError,
    TeamLogicError,
    TeamTooLarge,
    TilingError,
    UnknownSymbolError,
)
from .parser import parse_formula, parse_so_sentence
from .satisfiability import finsat_direct, finsat_via_eso
from .semantics import eval_eso, eval_sentence, eval_team, explain
from .structures import Structure, Team, format_structure, parse_structure, parse_team
from .syntax import Formula, Fragment, SOSentence, Vocabulary, classify_fragment, print_formula, print_so_sentence
from .translate import d2_to_eso, d2_to_if2, eliminate_zeroary, if2_to_d3, to_scott_shape, wrap_sentence

__all__ = [
    "ArityError",
    "EvaluationError",
    "Formula",
    "FormulaSyntaxError",
    "Fragment",
    "FragmentError",
    "SOSentence",
    "Structure",
    "StructureFormatError",
    "Team",
    "TeamError",
    "TeamLogicError",
    "TeamTooLarge",
    "TilingError",
    "UnknownSymbolError",
    "Vocabulary",
    "classify_fragment",
    "d2_to_eso",
    "d2_to_if2",
    "eliminate_zeroary",
    "eval_eso",
    "eval_sentence",
    "eval_team",
    "explain",
    "finsat_direct",
    "finsat_via_eso",
    "format_structure",
    "if2_to_d3",
    "parse_formula",
    "parse_so_sentence",
    "parse_structure",
    "parse_team",
    "print_formula",
    "print_so_sentence",
    "to_scott_shape",
    "wrap_sentence",
]
