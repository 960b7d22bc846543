"""Restricted amalgamation Nim: closed-form classifier, brute-force oracle and verifier."""

from .engine import (
    AMALGAMATION,
    CLASSIC,
    RESTRICTED,
    Outcome,
    Position,
    PositionError,
    RuleKind,
    Ruleset,
    canonicalize,
    is_terminal,
    legal_moves,
    nim_sum,
    parse_position,
    total,
)
from .formula import Membership, Relation, Subset, classify, digit_relation, membership
from .solver import (
    BoundSpec,
    GrundySolver,
    GrundyTable,
    ResourceLimitError,
    grundy,
    load_table,
    mex,
    retrograde_fill,
    save_table,
    solve_outcome,
)

__all__ = [
    "AMALGAMATION",
    "BoundSpec",
    "CLASSIC",
    "GrundySolver",
    "GrundyTable",
    "Membership",
    "Outcome",
    "Position",
    "PositionError",
    "RESTRICTED",
    "Relation",
    "ResourceLimitError",
    "RuleKind",
    "Ruleset",
    "Subset",
    "canonicalize",
    "classify",
    "digit_relation",
    "grundy",
    "is_terminal",
    "legal_moves",
    "load_table",
    "membership",
    "mex",
    "nim_sum",
    "parse_position",
    "retrograde_fill",
    "save_table",
    "solve_outcome",
    "total",
]

__version__ = "0.1.0"
