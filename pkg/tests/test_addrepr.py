import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import slp_to_sympy, sympy_eval, to_sympy
from salimits.addrepr import (
    DIVISION_FREE,
    GENERAL,
    LEMMA31,
    AdditiveRepr,
    AddStep,
    DivisionByZero,
    FinalStep,
    RationalExpansion,
    SizeCapExceeded,
    SlpBuilder,
    additive_complexity_witness,
    format_slp,
    lemma31_normalize,
    naive_repr,
    parse_slp,
    quotient_form,
    random_generic_point,
    slp_eval,
    slp_expand,
    slp_validate,
)
from salimits.polycore import SparsePoly, parse_poly
from strategies import polys, random_general_slp

CUBE = parse_slp(
    """
    arity: 1
    step 1: 1 * x^[1] * q^[] + 1 * x^[0] * q^[]
    result: 1 * x^[0] * q^[3]
    """
)

# (X^5 - 1) / (X - 1) = X^4 + X^3 + X^2 + X + 1
GEOM = parse_slp(
    """
    arity: 1
    step 1: 1 * x^[5] * q^[] + -1 * x^[0] * q^[]
    step 2: 1 * x^[1] * q^[0] + -1 * x^[0] * q^[0]
    result: 1 * x^[0] * q^[1,-1]
    """
)


def test_cube_is_valid_division_free():
    rep = slp_validate(CUBE)
    assert rep.valid and rep.mode == DIVISION_FREE and rep.length == 1
    assert additive_complexity_witness(CUBE) == 1


def test_cube_expands_to_binomial():
    assert slp_expand(CUBE) == parse_poly("x1^3 + 3*x1^2 + 3*x1 + 1")


def test_forward_reference_rejected():
    bad = AdditiveRepr(
        1,
        (
            AddStep(1, (1,), (), 1, (0,), ()),
            AddStep(1, (1,), (0, 0, 1), 1, (0,), (0,)),
            AddStep(1, (1,), (1, 0), 1, (0,), (0, 0)),
        ),
        FinalStep(1, (0,), (0, 0, 1)),
        DIVISION_FREE,
    )
    rep = slp_validate(bad)
    assert not rep.valid
    assert any("forward reference" in e for e in rep.errors)


def test_lemma31_rejects_negative_step_exponent():
    bad = AdditiveRepr(
        1,
        (AddStep(1, (1,), (), 1, (0,), ()), AddStep(1, (0,), (-1,), 1, (0,), (0,))),
        FinalStep(1, (0,), (0, 1)),
        LEMMA31,
    )
    assert not slp_validate(bad).valid


def test_geometric_sum_eval():
    assert slp_eval(GEOM, (2,)) == 31
    with pytest.raises(DivisionByZero):
        slp_eval(GEOM, (1,))
    assert additive_complexity_witness(GEOM) == 2


def test_geometric_sum_expansion():
    exp = slp_expand(GEOM)
    assert isinstance(exp, RationalExpansion)
    assert exp.num == parse_poly("x1^5 - 1")
    assert exp.den == parse_poly("x1 - 1")


def test_geometric_sum_quotient():
    q = quotient_form(GEOM)
    assert slp_expand(q.num) == parse_poly("x1^5 - 1")
    assert slp_expand(q.den) == parse_poly("x1 - 1")
    assert q.total_length == 2


def test_lemma31_shape_of_geometric_sum():
    norm = lemma31_normalize(GEOM)
    assert norm.mode == LEMMA31
    assert len(norm.steps) == 2
    assert norm.final.eta == (1, -1)


def test_division_free_quotient_is_identity():
    q = quotient_form(CUBE)
    assert slp_expand(q.num) == slp_expand(CUBE)
    assert q.den.steps == () and slp_expand(q.den) == SparsePoly.constant(1, 1)


def test_division_free_normalize_is_unchanged():
    norm = lemma31_normalize(CUBE)
    assert norm.steps == CUBE.steps and norm.final == CUBE.final


def test_monomial_has_zero_length():
    r = naive_repr(parse_poly("3*x1^2*x2"))
    assert additive_complexity_witness(r) == 0


def test_size_cap():
    b = SlpBuilder(2)
    i = b.add(1, (1, 0), {}, 1, (0, 1), {})
    big = b.finish(1, (0, 0), {i: 40})
    with pytest.raises(SizeCapExceeded):
        slp_expand(big, size_cap=20)


def test_text_roundtrip():
    for r in (CUBE, GEOM):
        again = parse_slp(format_slp(r))
        assert again.steps == r.steps and again.final == r.final and again.mode == r.mode


def test_builder_include_renames():
    inner = naive_repr(parse_poly("x1 + 2"))
    b = SlpBuilder(2)
    c, z, e = b.include(inner, [1])
    r = b.finish(c, z, e)
    assert slp_expand(r) == parse_poly("x2 + 2", 2)


@given(polys(max_terms=6))
def test_naive_repr_expands_back(p):
    r = naive_repr(p)
    assert slp_validate(r).valid
    assert slp_expand(r) == p
    assert len(r.steps) == max(len(p) - 1, 0)


@given(st.integers(0, 10_000))
def test_expansion_matches_symbolic_oracle(seed):
    r = random_general_slp(random.Random(seed), max_steps=3, max_vars=2, max_exp=2)
    try:
        exp = slp_expand(r)
    except SizeCapExceeded:
        assume(False)
    want = slp_to_sympy(r)
    got = to_sympy(exp) if isinstance(exp, SparsePoly) else to_sympy(exp.num) / to_sympy(exp.den)
    assert sympy.simplify(got - want) == 0


@given(st.integers(0, 10_000))
def test_eval_matches_symbolic_oracle(seed):
    rng = random.Random(seed)
    r = random_general_slp(rng, max_steps=3, max_vars=2)
    want = slp_to_sympy(r)
    x = random_generic_point(rng, r.arity)
    try:
        got = slp_eval(r, x)
    except DivisionByZero:
        # some step vanishes identically: no generic point exists
        assume(False)
    assert got == sympy_eval(want, r.arity, x)


@given(st.integers(0, 10_000))
def test_quotient_parts_never_longer_than_program(seed):
    rng = random.Random(seed)
    r = random_general_slp(rng)
    q = quotient_form(r, check=False)
    assert len(q.num.steps) <= q.shared_length and len(q.den.steps) <= q.shared_length
    assert q.shared_length == len(r.steps)
    assert q.num.minimal_mode() == DIVISION_FREE and q.den.minimal_mode() == DIVISION_FREE


@given(st.integers(0, 10_000))
def test_normalized_program_agrees(seed):
    rng = random.Random(seed)
    r = random_general_slp(rng, max_steps=4)
    norm = lemma31_normalize(r)
    assert slp_validate(norm).valid
    x = random_generic_point(rng, r.arity)
    try:
        want = slp_eval(r, x)
    except DivisionByZero:
        assume(False)
    assert slp_eval(norm, x) == want


def test_general_mode_label():
    r = random_general_slp(random.Random(3))
    assert r.mode == GENERAL
    assert Fraction(1) == slp_eval(AdditiveRepr(1, (), FinalStep(1, (0,), ())), (5,))
