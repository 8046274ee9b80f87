"""Formula-to-formula constructions."""

from .dagger import CORRECTED, PAPER_LITERAL, DaggerInfo, dagger, dagger_info, default_r_prime, weak_atoms
from .divfree import LiftProjection, divfree_lift
from .formats import (
    FormatCheck,
    FormatPrediction,
    divfree_bar_bound,
    predict_diagonal_format,
    predict_star_format,
    verify_format_bounds,
)
from .joins import fibered_join_formula, join_core, join_formula, join_point, thickened_diagonal, thickened_join_formula
from .layout import VariableLayout, join_layout, pair_list
from .limits import QuotientEntry, bar_construction, bar_core, limit_family_single, quotient_table_from_reprs
from .star import StarResult, star_formula

__all__ = [
    "CORRECTED",
    "PAPER_LITERAL",
    "DaggerInfo",
    "FormatCheck",
    "FormatPrediction",
    "LiftProjection",
    "QuotientEntry",
    "StarResult",
    "VariableLayout",
    "bar_construction",
    "bar_core",
    "dagger",
    "dagger_info",
    "default_r_prime",
    "divfree_bar_bound",
    "divfree_lift",
    "fibered_join_formula",
    "join_core",
    "join_formula",
    "join_layout",
    "join_point",
    "limit_family_single",
    "pair_list",
    "predict_diagonal_format",
    "predict_star_format",
    "quotient_table_from_reprs",
    "star_formula",
    "thickened_diagonal",
    "thickened_join_formula",
    "verify_format_bounds",
    "weak_atoms",
]
