"""Slack-variable equational form of a closed formula.

Weak inequality atoms are traded for equations in fresh variables V:

    corrected:     F <= 0  ->  F + V^2 = 0       F >= 0  ->  F - V^2 = 0
    paper-literal: F <= 0  ->  F - V^2 = 0       F >= 0  -> -F - V^2 = 0

and the sphere conditions U1^2 + |X|^2 - R^2 = 0, U2^2 + |V|^2 - R'^2 = 0
are conjoined.  Variables are ordered X (k), V (one per distinct weak atom),
U1, U2.  Only the corrected convention makes the projection onto X equal to
Reali(Phi) inside the closed R-ball; the literal one is kept for auditing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..addrepr import SlpBuilder, naive_repr
from ..formula import And, Atom, DocBuilder, FormulaDoc, attach_naive_reprs, is_pclosed, iter_atoms, map_atoms
from ..polycore import SparsePoly, as_rational

CORRECTED = "corrected"
PAPER_LITERAL = "paper-literal"

__all__ = ["CORRECTED", "PAPER_LITERAL", "DaggerInfo", "dagger", "default_r_prime", "weak_atoms"]


def weak_atoms(doc: FormulaDoc) -> list[tuple[int, str]]:
    """Distinct (polynomial, relation) pairs with a weak inequality, in first-seen order."""
    seen = []
    for a in iter_atoms(doc.root):
        key = (a.poly_ref, a.rel)
        if a.rel in ("<=", ">=") and key not in seen:
            seen.append(key)
    return seen


@dataclass(frozen=True)
class DaggerInfo:
    k: int
    slack: tuple[tuple[int, str], ...]
    R: Fraction
    R_prime: Fraction
    mode: str

    @property
    def v_start(self) -> int:
        return self.k

    @property
    def u1(self) -> int:
        return self.k + len(self.slack)

    @property
    def u2(self) -> int:
        return self.k + len(self.slack) + 1

    @property
    def arity(self) -> int:
        return self.k + len(self.slack) + 2

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "slack_atoms": [[i, rel] for i, rel in self.slack],
            "R": str(self.R),
            "R_prime": str(self.R_prime),
            "mode": self.mode,
        }


def default_r_prime(doc: FormulaDoc, R, samples: int = 2000, seed: int = 0) -> Fraction:
    """10 R (1 + ceil(max slack magnitude over a sample of the R-ball))."""
    R = as_rational(R)
    weak = weak_atoms(doc)
    worst = 0.0
    if weak:
        rng = np.random.default_rng(seed)
        k = doc.arity
        pts = rng.normal(size=(samples, k))
        pts /= np.maximum(np.linalg.norm(pts, axis=1, keepdims=True), 1e-300)
        pts *= float(R) * rng.random((samples, 1)) ** (1.0 / k)
        for x in pts:
            total = sum(abs(float(doc.polys[i].eval(tuple(Fraction(float(v)) for v in x)))) for i, _ in weak)
            worst = max(worst, math.sqrt(total))
    return 10 * R * (1 + math.ceil(worst))


def dagger(doc: FormulaDoc, R, R_prime=None, mode: str = CORRECTED) -> FormulaDoc:
    if not is_pclosed(doc):
        raise ValueError("dagger needs a closed formula: no negations, only weak relations")
    if mode not in (CORRECTED, PAPER_LITERAL):
        raise ValueError(f"unknown dagger mode {mode!r}")
    R = as_rational(R)
    R_prime = default_r_prime(doc, R) if R_prime is None else as_rational(R_prime)
    if not 0 < R < R_prime:
        raise ValueError("need 0 < R < R'")
    k = doc.arity
    weak = weak_atoms(doc)
    info = DaggerInfo(k, tuple(weak), R, R_prime, mode)
    n = info.arity
    emb = list(range(k))
    b = DocBuilder(n)
    replacement = {}
    for m, (i, rel) in enumerate(weak):
        v_idx = k + m
        F = doc.polys[i].rename(emb, n)
        v2 = SparsePoly.variable(n, v_idx) ** 2
        if mode == CORRECTED:
            sign_f, sign_v = (1, 1) if rel == "<=" else (1, -1)
        else:
            sign_f, sign_v = (1, -1) if rel == "<=" else (-1, -1)
        poly = F.scale(sign_f) + v2.scale(sign_v)
        sb = SlpBuilder(n)
        src = doc.reprs[i]
        if src is None or src.minimal_mode() != "division-free":
            src = naive_repr(doc.polys[i])
        c, zeta, refs = sb.include(src, emb)
        v_exp = tuple(2 if j == v_idx else 0 for j in range(n))
        step = sb.add(sign_f * c, zeta, refs, sign_v, v_exp, {})
        replacement[(i, rel)] = b.atom(poly, "=", sb.finish(1, (0,) * n, {step: 1}))

    def swap(a: Atom):
        if a.rel == "=":
            r = doc.reprs[a.poly_ref]
            return b.atom(doc.polys[a.poly_ref].rename(emb, n), "=", r.rename(emb, n) if r else None)
        return replacement[(a.poly_ref, a.rel)]

    body = map_atoms(doc.root, swap)
    sq = lambda j: SparsePoly.monomial(n, tuple(2 if t == j else 0 for t in range(n)))
    sphere_x = sq(info.u1) - R * R
    for j in range(k):
        sphere_x = sphere_x + sq(j)
    sphere_v = sq(info.u2) - R_prime * R_prime
    for m in range(len(weak)):
        sphere_v = sphere_v + sq(k + m)
    parts = (list(body.children) if isinstance(body, And) else [body]) + [
        b.atom(sphere_x, "=", naive_repr(sphere_x)),
        b.atom(sphere_v, "=", naive_repr(sphere_v)),
    ]
    names = tuple(doc.var_names()) + tuple(f"v{m + 1}" for m in range(len(weak))) + ("u1", "u2")
    out = attach_naive_reprs(b.build(And(tuple(parts)), names=names, layout={
        "total": n,
        "blocks": [["X", 0, k], ["V", k, len(weak)], ["U1", info.u1, 1], ["U2", info.u2, 1]],
    }))
    out.meta = {"construction": "dagger", **info.to_json()}
    return out


def dagger_info(doc: FormulaDoc) -> DaggerInfo:
    m = doc.meta
    return DaggerInfo(
        int(m["k"]),
        tuple((int(i), rel) for i, rel in m["slack_atoms"]),
        Fraction(m["R"]),
        Fraction(m["R_prime"]),
        m["mode"],
    )


__all__.append("dagger_info")
