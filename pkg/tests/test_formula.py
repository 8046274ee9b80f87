import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from salimits.addrepr import naive_repr, parse_slp
from salimits.formula import (
    And,
    Atom,
    BatchEvaluator,
    FormulaDoc,
    FormulaParseError,
    Not,
    doc_from_json,
    doc_to_json,
    eval_formula,
    format_formula,
    is_pclosed,
    load_doc,
    measure_format,
    monomial_atom_rewrite,
    parse_formula,
    save_doc,
)
from salimits.polycore import SparsePoly, parse_poly
from strategies import points, random_doc

F1_TEXT = "x1*(x1^2+x2^2-1) = 0"


def test_parse_single_atom():
    doc = parse_formula(F1_TEXT)
    rec = measure_format(doc)
    assert len(list(doc.polys)) == 1
    assert rec.dense == (1, 3, 2)


def test_parse_structure():
    doc = parse_formula("x1 <= 0 & !(x2 > 0)")
    assert doc.root == And((Atom(0, "<="), Not(Atom(1, ">"))))


def test_parse_error_location():
    with pytest.raises(FormulaParseError) as info:
        parse_formula("x1 + = 0")
    assert info.value.line == 1 and info.value.column == 6


def test_arity_mismatch():
    with pytest.raises(ValueError):
        parse_formula("x3 = 0", arity=2)


def test_eval_examples():
    disk = parse_formula("x1^2 + x2^2 - 1 <= 0")
    assert eval_formula(disk, (0, 0))
    f1 = parse_formula(F1_TEXT)
    assert eval_formula(f1, (0, 1))
    with pytest.raises(ValueError):
        eval_formula(f1, (0,))


def test_eval_connectives():
    # F <= 0 and G = 0 both hold at (0, 1)
    doc = parse_formula(f"x1 - 1 <= 0 & {F1_TEXT}")
    assert eval_formula(doc, (0, 1))
    assert not eval_formula(parse_formula("x1 - 1 < 0 & x2 < 0"), (0, 1))
    assert not eval_formula(parse_formula("!(x1 - 1 <= 0)", 2), (0, 1))


def test_tau_relaxes_equalities_only():
    doc = parse_formula("x1 = 0 & x2 <= 0")
    assert not eval_formula(doc, (Fraction(1, 10), 0))
    assert eval_formula(doc, (Fraction(1, 10), 0), [Fraction(1, 5), Fraction(1, 5)])
    assert not eval_formula(doc, (0, Fraction(1, 10)), [Fraction(1, 5), Fraction(1, 5)])


def test_format_counts():
    doc = FormulaDoc(
        2,
        (parse_poly("x1*x2 - 1"), parse_poly("x1^2 - x2")),
        (),
        And((Atom(0, "<="), Atom(1, "="))),
    )
    rec = measure_format(doc)
    assert rec.dense == (2, 2, 2)
    assert rec.additive == (2, 2)
    assert rec.auto_derived == (0, 1)


def test_monomial_doc_has_zero_additive():
    assert measure_format(parse_formula("3*x1^2*x2 > 0 | x1 < 0")).a == 0


def test_geometric_sum_atom_format():
    r = parse_slp(
        """
        step 1: 1 * x^[5] * q^[] + -1 * x^[0] * q^[]
        step 2: 1 * x^[1] * q^[0] + -1 * x^[0] * q^[0]
        result: 1 * x^[0] * q^[1,-1]
        """
    )
    p = parse_poly("x1^4 + x1^3 + x1^2 + x1 + 1")
    doc = FormulaDoc(1, (p,), (r,), Atom(0, "="))
    rec = measure_format(doc)
    assert rec.additive == (2, 1)
    assert rec.dense == (1, 4, 1)
    assert not rec.divfree


def test_monomial_rewrite_examples():
    assert format_formula(monomial_atom_rewrite(parse_formula("3*x1^2*x2 > 0"))) == "(x1 < 0 | x1 > 0) & x2 > 0"
    assert format_formula(monomial_atom_rewrite(parse_formula("x1*x2 = 0"))) == "x1 = 0 | x2 = 0"


@given(
    st.integers(-3, 3).filter(bool),
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2)),
    st.sampled_from(["=", "<", ">", "<=", ">="]),
    points(3),
)
def test_monomial_rewrite_preserves_truth(c, exp, rel, x):
    p = SparsePoly.monomial(3, exp, c)
    doc = FormulaDoc(3, (p,), (), Atom(0, rel))
    out = monomial_atom_rewrite(doc)
    assert eval_formula(out, x) == eval_formula(doc, x)
    assert measure_format(out).a == 0


def test_pclosed():
    assert is_pclosed(parse_formula("x1 <= 0 & (x2 >= 1 | x1 = 0)"))
    assert not is_pclosed(parse_formula("x1 < 0"))
    assert not is_pclosed(parse_formula("!(x1 <= 0)"))


@given(st.integers(0, 5000))
def test_text_and_json_roundtrip(seed):
    rng = random.Random(seed)
    doc = random_doc(rng, rng.randint(1, 3), rng.randint(1, 3), 3, rng.randint(0, 4))
    again = parse_formula(format_formula(doc), doc.arity)
    x = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(doc.arity))
    assert eval_formula(again, x) == eval_formula(doc, x)
    js = doc_from_json(doc_to_json(doc))
    assert js.polys == doc.polys and js.root == doc.root
    assert [len(r.steps) for r in js.reprs] == [len(r.steps) for r in doc.reprs]


def test_file_roundtrip(tmp_path):
    doc = parse_formula(F1_TEXT)
    doc = FormulaDoc(2, doc.polys, (naive_repr(doc.polys[0]),), doc.root)
    for name in ("f.json", "f.sa"):
        path = str(tmp_path / name)
        save_doc(doc, path)
        back = load_doc(path)
        assert back.polys == doc.polys and back.root == doc.root


def test_arity_directive(tmp_path):
    path = tmp_path / "one.sa"
    path.write_text("# arity: 3\nx1 = 0\n")
    assert load_doc(str(path)).arity == 3


@given(st.integers(0, 5000))
def test_batch_evaluator_matches_exact(seed):
    rng = random.Random(seed)
    doc = random_doc(rng, 2, rng.randint(1, 3), 2, rng.randint(0, 3), rels=("<=", ">=", "<", ">"))
    grid = [Fraction(i, 4) for i in range(-6, 7)]
    pts = [(a, b) for a in grid for b in grid]
    got = BatchEvaluator(doc).evaluate(np.array(pts, dtype=float), pts)
    want = [eval_formula(doc, x) for x in pts]
    assert list(got) == want
