"""Independent reference implementations used to cross-check the package.

Nothing here imports salimits internals: polynomials go through sympy,
distances through plain Python loops, components through networkx-free BFS.
"""

from __future__ import annotations

import math
import random
from collections import deque
from fractions import Fraction

import sympy


def sym_vars(k):
    return sympy.symbols(f"x1:{k + 1}")


def to_sympy(poly):
    """SparsePoly -> sympy expression, built from the raw term list only."""
    xs = sym_vars(poly.arity)
    expr = sympy.Integer(0)
    for exp, c in poly.terms():
        term = sympy.Rational(c.numerator, c.denominator)
        for x, e in zip(xs, exp):
            term *= x**e
        expr += term
    return sympy.expand(expr)


def slp_to_sympy(r):
    """Rational function computed by a straight-line program, step by step in sympy."""
    xs = sym_vars(r.arity)
    qs = []

    def mono(c, xe, qe):
        val = sympy.Rational(c.numerator, c.denominator)
        for x, e in zip(xs, xe):
            val *= x**e
        for q, e in zip(qs, qe):
            val *= q**e
        return val

    for s in r.steps:
        val = sympy.Integer(0)
        if s.u:
            val += mono(s.u, s.alpha, s.gamma)
        if s.v:
            val += mono(s.v, s.beta, s.delta)
        qs.append(sympy.cancel(val))
    f = r.final
    return sympy.cancel(mono(f.c, f.zeta, f.eta)) if f.c else sympy.Integer(0)


def sympy_eval(expr, k, point):
    xs = sym_vars(k)
    return Fraction(str(expr.subs(dict(zip(xs, [sympy.Rational(str(v)) for v in point])))))


def directed_hausdorff(A, B):
    best = 0.0
    for a in A:
        d = min(math.dist(a, b) for b in B)
        best = max(best, d)
    return best


def components(points, radius):
    n = len(points)
    seen = [False] * n
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        todo = deque([s])
        while todo:
            i = todo.popleft()
            for j in range(n):
                if not seen[j] and math.dist(points[i], points[j]) <= radius:
                    seen[j] = True
                    todo.append(j)
    return count


def pythagorean_points(n, seed=0):
    """Exact rational points on the unit circle."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        s = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
        out.append(((1 - s * s) / (1 + s * s), 2 * s / (1 + s * s)))
    return out


def eta_formula(p, R, m):
    return p * (p + 1) * (4 * R * m + 2 * m * m)
