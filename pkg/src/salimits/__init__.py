"""Additive representations, formula transformations and a sampling verifier
for Hausdorff limits of semi-algebraic families."""

__version__ = "0.1.0"

from . import kernels
from .addrepr import AdditiveRepr, AddStep, FinalStep, quotient_form, slp_eval, slp_expand, slp_validate
from .formula import FormulaDoc, eval_formula, load_doc, measure_format, parse_formula, save_doc
from .polycore import SparsePoly, parse_poly

__all__ = [
    "AddStep",
    "AdditiveRepr",
    "FinalStep",
    "FormulaDoc",
    "SparsePoly",
    "__version__",
    "eval_formula",
    "kernels",
    "load_doc",
    "measure_format",
    "parse_formula",
    "parse_poly",
    "quotient_form",
    "save_doc",
    "slp_eval",
    "slp_expand",
    "slp_validate",
]
