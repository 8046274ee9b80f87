"""Semi-algebraic joins: plain, fibered over a map, thickened, and the thickened diagonal.

Every construction lives in the ambient space laid out by :func:`join_layout`:
copies X^0..X^p of the base variables, simplex coordinates T and one slack
variable A_ij per pair i<j.  The formula is a flat conjunction of the clauses

    Omega^R  = AND_i |X^i|^2 <= R^2  AND  |T|^2 <= 1
    Theta_1  = sum T = 1  AND  sum A^2 = 0          (thickened: sum A^2 <= eps)
    Theta_2  = AND_i (T_i = 0  OR  Phi(X^i))
    Theta_3  = AND_{i<j} (T_i = 0 OR T_j = 0 OR |f(X^i) - f(X^j)|^2 = A_ij)
    Upsilon  = the same with |X^i - X^j|^2.

With p = 0 there are no pairs, so the A constraint is omitted.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..addrepr import AdditiveRepr, FinalStep, SlpBuilder, naive_repr
from ..formula import And, Atom, DocBuilder, FormulaDoc, Or, attach_naive_reprs
from ..polycore import SparsePoly, as_rational
from .layout import VariableLayout, join_layout, pair_list

__all__ = [
    "fibered_join_formula",
    "join_formula",
    "thickened_diagonal",
    "thickened_join_formula",
]


def _unit(n: int, idx: int, e: int = 1) -> tuple[int, ...]:
    return tuple(e if i == idx else 0 for i in range(n))


def _sum_sq(n: int, idxs: Sequence[int], const) -> SparsePoly:
    p = SparsePoly.constant(n, const)
    for i in idxs:
        p = p + SparsePoly.monomial(n, _unit(n, i, 2))
    return p


def _sum_lin(n: int, idxs: Sequence[int], const) -> SparsePoly:
    p = SparsePoly.constant(n, const)
    for i in idxs:
        p = p + SparsePoly.variable(n, i)
    return p


def _pair_poly_and_repr(n: int, comps: list[tuple[SparsePoly, AdditiveRepr | None]], maps, a_idx: int):
    """|g(X^i) - g(X^j)|^2 - A_ij for components g given in base variables.

    ``maps`` = (var_map_i, var_map_j).  Constant components contribute zero
    and are skipped.
    """
    mi, mj = maps
    poly = -SparsePoly.variable(n, a_idx)
    b = SlpBuilder(n)
    squares = []
    for g, r in comps:
        if g.is_constant():
            continue
        gi, gj = g.rename(mi, n), g.rename(mj, n)
        poly = poly + (gi - gj) ** 2
        r = r if r is not None else naive_repr(g)
        ci, zi, ei = b.include(r, mi)
        cj, zj, ej = b.include(r, mj)
        d = b.add(ci, zi, ei, -cj, zj, ej)
        squares.append((1, (0,) * n, {d: 2}))
    terms = squares + [(-1, _unit(n, a_idx), {})]
    idx = b.sum_terms(terms)
    if idx is None:
        return poly, AdditiveRepr(n, (), FinalStep(-1, _unit(n, a_idx), ()))
    return poly, b.finish(1, (0,) * n, {idx: 1})


def _coordinate_components(k: int) -> list[SparsePoly]:
    return [SparsePoly.variable(k, l) for l in range(k)]


def _flat_or(first, other):
    if isinstance(other, Or):
        return Or((first,) + other.children)
    return Or((first, other))


def join_core(
    doc: FormulaDoc,
    p: int,
    R_sq,
    *,
    theta1: str = "exact",
    eps=None,
    pair_clause: str | None = None,
    f: Sequence[SparsePoly] | None = None,
) -> tuple[FormulaDoc, dict]:
    """Assemble the join-family formula; returns (doc, clause -> atom list)."""
    if p < 0:
        raise ValueError("p must be non-negative")
    R_sq = as_rational(R_sq)
    if R_sq <= 0:
        raise ValueError("R must be positive")
    k = doc.arity
    doc = attach_naive_reprs(doc)
    lay = join_layout(p, k, doc.names)
    n = lay.total
    b = DocBuilder(n)
    xs = [list(lay[f"X{i}"].indices) for i in range(p + 1)]
    ts = list(lay["T"].indices)
    pairs = pair_list(p)
    a_of = {pair: lay["A"].start + m for m, pair in enumerate(pairs)}
    clauses: dict[str, list] = {"omega": [], "theta1": [], "theta2": [], "pairs": []}

    for i in range(p + 1):
        clauses["omega"].append(b.atom(_sum_sq(n, xs[i], -R_sq), "<="))
    clauses["omega"].append(b.atom(_sum_sq(n, ts, -1), "<="))

    clauses["theta1"].append(b.atom(_sum_lin(n, ts, -1), "="))
    if pairs:
        a_idx = [a_of[pr] for pr in pairs]
        if theta1 == "exact":
            clauses["theta1"].append(b.atom(_sum_sq(n, a_idx, 0), "="))
        else:
            eps = as_rational(eps)
            clauses["theta1"].append(b.atom(_sum_sq(n, a_idx, -eps), "<="))

    t_zero = [b.atom(SparsePoly.variable(n, t), "=") for t in ts]
    for i in range(p + 1):
        phi_i = b.import_doc(doc, xs[i])
        clauses["theta2"].append(_flat_or(t_zero[i], phi_i))

    if pair_clause is not None:
        if pair_clause == "diagonal":
            comps = [(g, None) for g in _coordinate_components(k)]
        else:
            if f is None:
                raise ValueError("fibered join needs a map f")
            for g in f:
                if g.arity != k:
                    raise ValueError(f"map component has arity {g.arity}, expected {k}")
            comps = [(g, None) for g in f]
        for i, j in pairs:
            poly, rep = _pair_poly_and_repr(n, comps, (xs[i], xs[j]), a_of[(i, j)])
            clauses["pairs"].append(Or((t_zero[i], t_zero[j], b.atom(poly, "=", rep))))

    root = And(tuple(clauses["omega"] + clauses["theta1"] + clauses["theta2"] + clauses["pairs"]))
    out = attach_naive_reprs(b.build(root, names=tuple(lay.names), layout=lay.to_json()))
    return out, clauses


def _meta(out: FormulaDoc, **kw) -> FormulaDoc:
    out.meta = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in kw.items()}
    return out


def join_formula(doc: FormulaDoc, p: int, R) -> FormulaDoc:
    R = as_rational(R)
    if R <= 0:
        raise ValueError("R must be positive")
    out, _ = join_core(doc, p, R * R)
    return _meta(out, construction="join", p=p, R=R)


def fibered_join_formula(doc: FormulaDoc, f: Sequence[SparsePoly], p: int, R) -> FormulaDoc:
    R = as_rational(R)
    if R <= 0:
        raise ValueError("R must be positive")
    out, _ = join_core(doc, p, R * R, pair_clause="f", f=f)
    return _meta(out, construction="fibered-join", p=p, R=R, f=[g.to_string() for g in f])


def thickened_join_formula(doc: FormulaDoc, f: Sequence[SparsePoly], p: int, R, eps) -> FormulaDoc:
    R, eps = as_rational(R), as_rational(eps)
    if R <= 0:
        raise ValueError("R must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    out, _ = join_core(doc, p, R * R, theta1="thick", eps=eps, pair_clause="f", f=f)
    return _meta(out, construction="thickened-join", p=p, R=R, eps=eps, f=[g.to_string() for g in f])


def thickened_diagonal(doc: FormulaDoc, p: int, R, eps) -> FormulaDoc:
    R, eps = as_rational(R), as_rational(eps)
    if R <= 0:
        raise ValueError("R must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    out, _ = join_core(doc, p, R * R, theta1="thick", eps=eps, pair_clause="diagonal")
    return _meta(out, construction="thickened-diagonal", p=p, R=R, eps=eps)


def join_point(layout: dict, xs: Sequence[Sequence], t: Sequence, a: Sequence) -> tuple:
    """Pack block values into one ambient point (inverse of the layout)."""
    point = []
    for x in xs:
        point.extend(x)
    point.extend(t)
    point.extend(a)
    if len(point) != layout["total"]:
        raise ValueError("block sizes do not match the layout")
    return tuple(point)


__all__ += ["join_core", "join_point", "VariableLayout"]
