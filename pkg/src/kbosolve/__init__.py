"""Satisfiability of Knuth-Bendix ordering constraints over term algebras."""

from .chaining import Chain, Conn, chain_branches, flatten, normalize_chain
from .counting import SignatureStats, at_least, exists_system, stats, thresholds, tnt
from .dio import DioEquation, decode_witness, encode_dio, gadget_equal_weight, gadget_greater_weight
from .formulas import (
    And,
    ArithAtom,
    ArithRel,
    Formula,
    Not,
    Or,
    TermAtom,
    TermRel,
    eliminate_negations,
    evaluate,
    format_formula,
    parse_formula,
    parse_term,
    to_dnf_constraints,
)
from .isolation import (
    IsolatedForm,
    ResourceLimitError,
    Working,
    discharge_variables,
    eliminate_row_equalities,
    first_row_cleanup,
    guess_shapes,
    isolate,
    lex_decompose,
)
from .lia import LinAtom, LinExpr, LinRel, LinSystem, expand_to_systems, solve_system
from .oracle import EnumBound, brute_force_check, count_weight, enum_terms
from .solver import (
    Limits,
    Verdict,
    construct_witness,
    reduce_isolated,
    solve,
    solve_constants_only,
)
from .terms import (
    App,
    Comparison,
    KboParams,
    SigProblem,
    SignatureError,
    Symbol,
    Term,
    Var,
    WeightExpr,
    contents_of,
    f_metrics,
    format_term,
    kbo_compare,
    load_signature,
    parse_signature,
    validate_params,
    weight_of,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
