"""Division-free lift: one new variable per program step.

Each step Q_j of a polynomial's division-free program becomes a variable
Y_j constrained by the trinomial equation Y_j = u x^alpha Y^gamma + v x^beta Y^delta,
and each atom P REL 0 becomes the monomial atom c x^zeta Y^eta REL 0.  The
projection to the first k coordinates is a homeomorphism onto Reali(doc).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..addrepr import DIVISION_FREE, AdditiveRepr, slp_step_values
from ..formula import And, Atom, DocBuilder, FormulaDoc, map_atoms
from ..polycore import SparsePoly, as_rational

__all__ = ["LiftProjection", "divfree_lift"]


@dataclass(frozen=True)
class LiftProjection:
    """Which lifted coordinates belong to which program step."""

    base_arity: int
    arity: int
    #: (table index in the source doc, its program, first lifted variable index)
    segments: tuple[tuple[int, AdditiveRepr, int], ...]
    #: (source table index, lifted table index) for the rewritten atoms
    atom_polys: tuple[tuple[int, int], ...] = ()

    def lift(self, x: Sequence) -> tuple[Fraction, ...]:
        x = tuple(as_rational(v) for v in x)
        out = list(x) + [Fraction(0)] * (self.arity - self.base_arity)
        for _, r, start in self.segments:
            for off, val in enumerate(slp_step_values(r, x)):
                out[start + off] = val
        return tuple(out)

    def project(self, point: Sequence) -> tuple:
        return tuple(point[: self.base_arity])

    def to_json(self) -> dict:
        return {
            "base_arity": self.base_arity,
            "arity": self.arity,
            "segments": [[i, start, len(r.steps)] for i, r, start in self.segments],
            "atom_polys": [list(pair) for pair in self.atom_polys],
        }


def _term(n: int, k: int, c, xexp, yexp, ystart) -> SparsePoly:
    exp = list(xexp) + [0] * (n - k)
    for off, e in enumerate(yexp):
        exp[ystart + off] += e
    return SparsePoly.monomial(n, exp, c)


def divfree_lift(doc: FormulaDoc) -> tuple[FormulaDoc, LiftProjection]:
    k = doc.arity
    refs = doc.referenced()
    for i in refs:
        r = doc.reprs[i]
        if r is None:
            raise ValueError(f"polynomial {i} ({doc.polys[i]}) has no additive representation")
        if r.minimal_mode() != DIVISION_FREE:
            raise ValueError(f"polynomial {i} has a representation that is not division-free")
    segments = []
    start = k
    for i in refs:
        segments.append((i, doc.reprs[i], start))
        start += len(doc.reprs[i].steps)
    n = start
    if n == k:
        proj = LiftProjection(k, k, tuple(segments), tuple((i, i) for i in refs))
        return doc, proj

    b = DocBuilder(n)
    equations = []
    atom_poly = {}
    for i, r, ys in segments:
        for j, s in enumerate(r.steps):
            y = SparsePoly.variable(n, ys + j)
            rhs = _term(n, k, s.u, s.alpha, s.gamma, ys) + _term(n, k, s.v, s.beta, s.delta, ys)
            equations.append(b.atom(y - rhs, "="))
        f = r.final
        atom_poly[i] = b.poly(_term(n, k, f.c, f.zeta, f.eta, ys))
    root = map_atoms(doc.root, lambda a: Atom(atom_poly[a.poly_ref], a.rel))
    base_names = doc.var_names()
    names = tuple(base_names) + tuple(f"y{i}_{j + 1}" for i, r, _ in segments for j in range(len(r.steps)))
    body = list(root.children) if isinstance(root, And) else [root]
    lifted = b.build(And(tuple(equations + body)), names=names)
    pairs = tuple((i, lifted.polys.index(b.polys[j])) for i, j in atom_poly.items())
    proj = LiftProjection(k, n, tuple(segments), pairs)
    lifted.meta = {"construction": "divfree-lift", "projection": proj.to_json()}
    return lifted, proj
