"""Closed-form format predictions and their check against measured formats."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from ..formula import FormulaDoc, measure_format

__all__ = [
    "FormatCheck",
    "FormatPrediction",
    "divfree_bar_bound",
    "predict_diagonal_format",
    "predict_star_format",
    "verify_format_bounds",
]


@dataclass(frozen=True)
class FormatPrediction:
    kind: str
    context: dict
    #: additive bound (division-free for the star construction)
    M: int
    #: ambient dimension
    N: int
    M_dense: int | None = None
    degree_bound: int | None = None
    breakdown: dict = field(default_factory=dict)
    variants: dict = field(default_factory=dict)
    #: True when the ambient dimension must equal N, False when N is an upper bound
    exact_dimension: bool = True
    require_divfree: bool = False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "context": self.context,
            "M": self.M,
            "N": self.N,
            "M_dense": self.M_dense,
            "degree_bound": self.degree_bound,
            "breakdown": self.breakdown,
            "variants": self.variants,
            "exact_dimension": self.exact_dimension,
        }


def _nonneg(**kw):
    for name, v in kw.items():
        if v < 0:
            raise ValueError(f"{name} must be non-negative")


def predict_diagonal_format(p: int, k: int, a: int, s: int, d: int) -> FormatPrediction:
    _nonneg(p=p, k=k, a=a, s=s, d=d)
    C = comb(p + 1, 2)
    M = (p + 1) * (k + a + 2) + 2 * k * C
    M_dense = (p + 1) * (s + 2) + 3 * C + 3
    N = (p + 1) * (k + 1) + C
    breakdown = {
        "M_Omega": (p + 1) * k + (p + 1),
        "M_Theta1": (p + 1) + C,
        "M_Theta2": (p + 1) * a,
        "M_Upsilon": 2 * k * C,
        "M'_Omega": (p + 1) + 1,
        "M'_Theta1": 2,
        "M'_Theta2": (p + 1) * (s + 1),
        "M'_Upsilon": 3 * C,
    }
    clause_sum = sum(v for key, v in breakdown.items() if not key.startswith("M'"))
    return FormatPrediction(
        "diagonal",
        {"p": p, "k": k, "a": a, "s": s, "d": d},
        M,
        N,
        M_dense,
        d + 1,
        breakdown,
        {"M_closed_form": M, "M_clause_sum": clause_sum},
    )


def divfree_bar_bound(k: int, a: int) -> int:
    """Division-free complexity bound after the bar construction: (k+a)(a+2)."""
    _nonneg(k=k, a=a)
    return (k + a) * (a + 2)


def predict_star_format(p: int, k: int, a: int) -> FormatPrediction:
    """Both readings of the star bound; the proposition variant is the headline."""
    _nonneg(p=p, k=k, a=a)
    C = comb(p + 1, 2)
    base = (p + 1) * (6 * k + 6 * a + 1)
    pair = 4 * k + 2 * a + 3
    M_prop = base + 2 * C * pair
    M_inline = base + C * pair
    N = (p + 1) * (2 * k + a + 3) + C
    variants = {
        "M_prop": M_prop,
        "M_inline": M_inline,
        "divfree_bound_prop": 5 * M_prop ** 2,
        "divfree_bound_inline": 5 * M_inline ** 2,
        "M_prime_inline": (p + 1) * (2 * k + a + 3) + (N + M_inline) * (M_inline + 2),
        "M_prime_prop": (p + 1) * (2 * k + a + 3) + (N + M_prop) * (M_prop + 2),
        "N": N,
        "arity": N + 1,
        "dagger_additive": 6 * (k + a),
        "dagger_arity": 2 * k + a + 2,
        "bar_bound": divfree_bar_bound(k, a),
    }
    return FormatPrediction(
        "star",
        {"p": p, "k": k, "a": a},
        5 * M_prop ** 2,
        N + 1,
        breakdown={"M": M_prop, "N": N},
        variants=variants,
        exact_dimension=False,
        require_divfree=True,
    )


@dataclass
class FormatCheck:
    passed: bool
    checks: list[dict]
    measured: dict
    prediction: dict

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": self.checks, "measured": self.measured, "prediction": self.prediction}


def verify_format_bounds(constructed: FormulaDoc, prediction: FormatPrediction) -> FormatCheck:
    rec = measure_format(constructed)
    checks = []

    def add(name, measured, bound, rel):
        ok = measured == bound if rel == "==" else measured <= bound
        checks.append({"check": name, "measured": measured, "bound": bound, "relation": rel, "ok": bool(ok)})

    add("additive", rec.a, prediction.M, "<=")
    if prediction.M_dense is not None:
        add("dense_s", rec.s, prediction.M_dense, "<=")
    if prediction.degree_bound is not None:
        d = rec.d if rec.d != float("-inf") else 0
        add("degree", d, prediction.degree_bound, "<=")
    add("ambient", constructed.arity, prediction.N, "==" if prediction.exact_dimension else "<=")
    if prediction.require_divfree:
        checks.append({"check": "division_free", "measured": rec.divfree, "bound": True, "relation": "==", "ok": rec.divfree})
    return FormatCheck(all(c["ok"] for c in checks), checks, rec.to_json(), prediction.to_json())
