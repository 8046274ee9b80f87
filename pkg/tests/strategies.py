"""Hypothesis strategies and seeded generators for polynomials, programs and docs."""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from salimits.addrepr import GENERAL, AdditiveRepr, AddStep, FinalStep
from salimits.formula import And, Atom, FormulaDoc, Or, attach_naive_reprs
from salimits.polycore import SparsePoly

small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw, arity=None, max_terms=5, max_exp=3):
    k = arity if arity is not None else draw(st.integers(1, 3))
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        exp = tuple(draw(st.integers(0, max_exp)) for _ in range(k))
        terms[exp] = draw(small_rationals)
    return SparsePoly(k, terms)


def points(k):
    return st.tuples(*[small_rationals] * k)


def random_general_slp(rng: random.Random, max_steps=5, max_vars=3, max_exp=2) -> AdditiveRepr:
    k = rng.randint(1, max_vars)
    a = rng.randint(0, max_steps)

    def e():
        return rng.randint(-max_exp, max_exp)

    def coeff(default):
        return Fraction(rng.randint(-3, 3)) or Fraction(default)

    steps = []
    for j in range(a):
        steps.append(
            AddStep(coeff(1), [e() for _ in range(k)], [e() for _ in range(j)], coeff(-1), [e() for _ in range(k)], [e() for _ in range(j)])
        )
    final = FinalStep(Fraction(rng.randint(1, 4)), [e() for _ in range(k)], [e() for _ in range(a)])
    return AdditiveRepr(k, steps, final, GENERAL)


def random_poly(rng: random.Random, k: int, terms: int, d: int) -> SparsePoly:
    """Exactly ``terms`` distinct monomials of total degree <= d (fewer if the space is small)."""
    pool = [e for e in _exponents(k, d)]
    rng.shuffle(pool)
    chosen = pool[:terms]
    return SparsePoly(k, {e: Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3)) for e in chosen})


def _exponents(k, d):
    if k == 0:
        yield ()
        return
    for first in range(d + 1):
        for rest in _exponents(k - 1, d - first):
            yield (first,) + rest


def random_doc(rng: random.Random, k: int, s: int, d: int, a_total: int, rels=("<=", ">=", "=")) -> FormulaDoc:
    """Doc with s distinct polynomials whose naive reprs add up to about a_total steps."""
    extra = [0] * s
    for _ in range(a_total):
        extra[rng.randrange(s)] += 1
    table = []
    for i in range(s):
        while True:
            p = random_poly(rng, k, extra[i] + 1, d)
            if p not in table and not p.is_zero():
                break
        table.append(p)
    atoms = [Atom(i, rng.choice(rels)) for i in range(s)]
    root = atoms[0]
    for at in atoms[1:]:
        root = And((root, at)) if rng.random() < 0.5 else Or((root, at))
    return attach_naive_reprs(FormulaDoc(k, tuple(table), (), root))
