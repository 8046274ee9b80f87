from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import sympy_eval, to_sympy
from salimits.polycore import NEG_INF, PolyParseError, SparsePoly, parse_poly, poly_arith, poly_degree, poly_eval
from strategies import points, polys

X = SparsePoly.variable(2, 0)
Y = SparsePoly.variable(2, 1)
F1 = X * (X**2 + Y**2 - 1)


def test_binomial_cube():
    x = SparsePoly.variable(1, 0)
    cube = poly_arith("pow", poly_arith("add", x, 1), 3)
    assert cube == parse_poly("x1^3 + 3*x1^2 + 3*x1 + 1")


def test_line_times_circle():
    assert poly_arith("mul", X, X**2 + Y**2 - 1) == parse_poly("x1^3 + x1*x2^2 - x1")


def test_eval_examples():
    assert poly_eval(X**2 + Y**2 - 1, (0, 1)) == 0
    assert poly_eval(F1, (Fraction(1, 2), Fraction(1, 2))) == Fraction(-1, 4)


def test_degree_examples():
    assert poly_degree(X) == 1
    assert poly_degree(SparsePoly.zero(2)) == NEG_INF
    assert poly_degree(X**2 * Y**3 + X**5) == 5


def test_errors():
    with pytest.raises(ValueError):
        X + SparsePoly.variable(3, 0)
    with pytest.raises(ValueError):
        X ** -1
    with pytest.raises(ValueError):
        poly_eval(X, (1,))


def test_zero_coefficients_dropped():
    p = SparsePoly(2, {(1, 0): 1, (0, 1): 0})
    assert len(p) == 1
    assert (X - X).is_zero()


def test_parse_error_location():
    with pytest.raises(PolyParseError) as info:
        parse_poly("x1 + * x2")
    assert info.value.column > 1


def test_diff_substitute_rename():
    assert F1.diff(0) == parse_poly("3*x1^2 + x2^2 - 1")
    assert F1.substitute(1, 0) == SparsePoly.variable(1, 0) ** 3 - SparsePoly.variable(1, 0)
    moved = X.rename([2, 0], 3)
    assert moved == SparsePoly.variable(3, 2)


def test_roundtrip_string():
    assert parse_poly(str(F1), 2) == F1


@given(polys(arity=2), polys(arity=2))
def test_arithmetic_matches_sympy(p, q):
    assert to_sympy(p + q) == (to_sympy(p) + to_sympy(q)).expand()
    assert to_sympy(p * q) == (to_sympy(p) * to_sympy(q)).expand()
    assert to_sympy(p - q) == (to_sympy(p) - to_sympy(q)).expand()


@given(polys(arity=2, max_terms=3, max_exp=2), st.integers(0, 3))
def test_pow_matches_sympy(p, n):
    assert to_sympy(p**n) == (to_sympy(p) ** n).expand()


@given(polys(arity=3), points(3))
def test_eval_matches_sympy(p, x):
    assert poly_eval(p, x) == sympy_eval(to_sympy(p), 3, x)


@given(polys(arity=2), polys(arity=2), polys(arity=2))
def test_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p


@given(polys(arity=2), polys(arity=2))
def test_degree_of_product(p, q):
    if p.is_zero() or q.is_zero():
        assert (p * q).degree == NEG_INF
    else:
        assert (p * q).degree == p.degree + q.degree


@given(polys())
def test_string_roundtrip(p):
    assert parse_poly(str(p), p.arity) == p
