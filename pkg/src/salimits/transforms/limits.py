"""One-parameter families whose Hausdorff limit is a prescribed variety.

``limit_family_single`` builds, for F = P/Q,

    |x|^2 <= R^2  AND  P^2 - t (Q^2 - t^N) <= 0  AND  t > 0,   N = 2 deg(Q) + 1,

and ``bar_construction`` does the same for a negation-free formula of
equations F_i = 0, using the common products P_i * prod_{j != i} Q_j and
prod_j Q_j.  The parameter is always the last variable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from ..addrepr import (
    DIVISION_FREE,
    AdditiveRepr,
    SlpBuilder,
    constant_repr,
    naive_repr,
    quotient_form,
    random_generic_point,
    slp_expand,
)
from ..formula import And, Atom, DocBuilder, FormulaDoc, Not, attach_naive_reprs, iter_atoms, map_atoms
from ..polycore import SparsePoly, as_rational

__all__ = ["QuotientEntry", "bar_construction", "bar_core", "limit_family_single", "quotient_table_from_reprs"]


@dataclass(frozen=True)
class QuotientEntry:
    """F = P / Q with optional division-free programs for P and Q."""

    P: SparsePoly
    Q: SparsePoly
    num: AdditiveRepr | None = None
    den: AdditiveRepr | None = None

    def programs(self) -> tuple[AdditiveRepr, AdditiveRepr]:
        return (self.num or naive_repr(self.P), self.den or naive_repr(self.Q))


def _unit(n, idx, e=1):
    return tuple(e if i == idx else 0 for i in range(n))


def _ball(n: int, idxs, r_sq) -> SparsePoly:
    p = SparsePoly.constant(n, -r_sq)
    for i in idxs:
        p = p + SparsePoly.monomial(n, _unit(n, i, 2))
    return p


def _family_poly(P: SparsePoly, Q: SparsePoly, u: SparsePoly, N: int) -> SparsePoly:
    return P * P - u * (Q * Q - u ** N)


def _family_repr(n: int, u_idx: int, N: int, num_terms, den_terms, builder: SlpBuilder) -> AdditiveRepr:
    """Append P^2 - U Q^2 + U^(N+1) (two additions) to programs already in ``builder``."""
    cp, zp, rp = num_terms
    cq, zq, rq = den_terms
    u = _unit(n, u_idx)
    terms = [
        (cp * cp, tuple(2 * e for e in zp), {i: 2 * e for i, e in rp.items()}),
        (-cq * cq, tuple(2 * e + ue for e, ue in zip(zq, u)), {i: 2 * e for i, e in rq.items()}),
        (1, _unit(n, u_idx, N + 1), {}),
    ]
    idx = builder.sum_terms(terms)
    return builder.finish(1, (0,) * n, {idx: 1})


def _times(terms_list):
    c = Fraction(1)
    zeta = None
    refs: dict[int, int] = {}
    for ci, zi, ri in terms_list:
        c *= ci
        zeta = list(zi) if zeta is None else [a + b for a, b in zip(zeta, zi)]
        for i, e in ri.items():
            refs[i] = refs.get(i, 0) + e
    return c, tuple(zeta), refs


def limit_family_single(P: SparsePoly, Q: SparsePoly, R, param_name: str = "t") -> FormulaDoc:
    if P.arity != Q.arity:
        raise ValueError("P and Q must have the same arity")
    if Q.is_zero():
        raise ValueError("Q must not be the zero polynomial")
    R = as_rational(R)
    if R <= 0:
        raise ValueError("R must be positive")
    k = P.arity
    n = k + 1
    N = 2 * Q.degree + 1
    emb = list(range(k))
    Pn, Qn = P.rename(emb, n), Q.rename(emb, n)
    t = SparsePoly.variable(n, k)
    b = DocBuilder(n)
    ball = _ball(n, range(k), R * R)
    sb = SlpBuilder(n)
    num_t = sb.include(naive_repr(P), emb)
    den_t = sb.include(naive_repr(Q), emb)
    fam_repr = _family_repr(n, k, N, num_t, den_t, sb)
    root = And((
        b.atom(ball, "<=", naive_repr(ball)),
        b.atom(_family_poly(Pn, Qn, t, N), "<=", fam_repr),
        b.atom(t, ">", naive_repr(t)),
    ))
    names = tuple(f"x{i + 1}" for i in range(k)) + (param_name,)
    doc = b.build(root, names=names, parameter=k, layout={"total": n, "blocks": [["X", 0, k], ["U", k, 1]]})
    doc.meta = {"construction": "limit-family", "N": N, "R": str(R)}
    return doc


def _check_quotient(F: SparsePoly, e: QuotientEntry, rng: random.Random, trials: int = 3) -> None:
    for _ in range(trials):
        x = random_generic_point(rng, F.arity)
        if F.eval(x) * e.Q.eval(x) != e.P.eval(x):
            raise ValueError(f"F*Q != P at a test point for F = {F}")


def bar_core(doc: FormulaDoc, table: Mapping[int, QuotientEntry], seed: int = 0):
    """Substitute every atom F_i = 0 by P̄_i^2 - U (Q̄^2 - U^N) <= 0.

    Returns ``(builder, root, N, info)`` with the builder in k+1 variables.
    """
    k = doc.arity
    n = k + 1
    u_idx = k
    emb = list(range(k))
    refs = doc.referenced()

    def bad(node):
        if isinstance(node, Not):
            raise ValueError("bar construction needs a formula without negations")
        if isinstance(node, Atom):
            if node.rel != "=":
                raise ValueError(f"bar construction accepts only equations, found '{node.rel}'")
        else:
            for c in node.children:
                bad(c)

    bad(doc.root)
    rng = random.Random(seed)
    entries = {}
    for i in refs:
        e = table.get(i)
        if e is None:
            e = QuotientEntry(doc.polys[i], SparsePoly.constant(k, 1), doc.reprs[i] if doc.reprs[i] and doc.reprs[i].minimal_mode() == "division-free" else None, constant_repr(k))
        if e.Q.is_zero():
            raise ValueError("zero denominator in quotient table")
        _check_quotient(doc.polys[i], e, rng)
        entries[i] = e

    Qbar = SparsePoly.constant(k, 1)
    for i in refs:
        Qbar = Qbar * entries[i].Q
    N = 2 * Qbar.degree + 1
    u = SparsePoly.variable(n, u_idx)
    Qbar_n = Qbar.rename(emb, n)
    b = DocBuilder(n)
    new_atom = {}
    for i in refs:
        Pbar = entries[i].P
        for j in refs:
            if j != i:
                Pbar = Pbar * entries[j].Q
        poly = _family_poly(Pbar.rename(emb, n), Qbar_n, u, N)
        sb = SlpBuilder(n)
        num_prog, _ = entries[i].programs()
        num_t = sb.include(num_prog, emb)
        den_ts = {j: sb.include(entries[j].programs()[1], emb) for j in refs}
        p_term = _times([num_t] + [den_ts[j] for j in refs if j != i])
        q_term = _times([den_ts[j] for j in refs])
        rep = _family_repr(n, u_idx, N, p_term, q_term, sb)
        new_atom[i] = b.atom(poly, "<=", rep)
    root = map_atoms(doc.root, lambda a: new_atom[a.poly_ref])
    info = {"N": N, "deg_Qbar": Qbar.degree, "Qbar": Qbar.to_string(), "atoms": len(refs)}
    return b, root, N, info


def quotient_table_from_reprs(doc: FormulaDoc) -> dict[int, QuotientEntry]:
    """Quotient entries for every referenced polynomial whose program divides."""
    table = {}
    for i in doc.referenced():
        r = doc.reprs[i]
        if r is not None and r.minimal_mode() != DIVISION_FREE:
            pair = quotient_form(r)
            table[i] = QuotientEntry(slp_expand(pair.num), slp_expand(pair.den), pair.num, pair.den)
    return table


def bar_construction(
    doc: FormulaDoc,
    quotient_table: Mapping[int, QuotientEntry] | Sequence[QuotientEntry] | None = None,
    radii: Sequence | None = None,
    blocks: Sequence[int] | None = None,
) -> FormulaDoc:
    """Family in k+1 variables whose limit is Reali(doc) inside the product ball."""
    k = doc.arity
    if quotient_table is None:
        quotient_table = {}
    elif not isinstance(quotient_table, Mapping):
        quotient_table = dict(enumerate(quotient_table))
    blocks = list(blocks) if blocks else [k]
    if sum(blocks) != k:
        raise ValueError("block sizes must sum to the arity")
    if radii is None:
        raise ValueError("bar construction needs one radius per block")
    radii = [as_rational(r) for r in radii]
    if len(radii) != len(blocks) or any(r <= 0 for r in radii):
        raise ValueError("need one positive radius per block")
    b, root, N, info = bar_core(doc, quotient_table)
    n = k + 1
    balls = []
    start = 0
    for size, r in zip(blocks, radii):
        poly = _ball(n, range(start, start + size), r * r)
        balls.append(b.atom(poly, "<=", naive_repr(poly)))
        start += size
    u = SparsePoly.variable(n, k)
    parts = balls + (list(root.children) if isinstance(root, And) else [root]) + [b.atom(u, ">", naive_repr(u))]
    names = tuple(doc.var_names()) + ("U",)
    out = b.build(And(tuple(parts)), names=names, parameter=k, layout={"total": n, "blocks": [["X", 0, k], ["U", k, 1]]})
    out = attach_naive_reprs(out)
    out.meta = {"construction": "bar", **info, "radii": [str(r) for r in radii], "blocks": blocks}
    return out
