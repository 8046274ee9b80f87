"""End-to-end acceptance runs, one test per criterion.

Each test prints a single ``[n] name: PASS|FAIL (detail)`` line to the
terminal and then asserts the verdict.  Run alone with

    pytest tests/test_acceptance.py -v
"""

import math
import random
import time
from fractions import Fraction

import pytest

from salimits.addrepr import DivisionByZero, SizeCapExceeded, parse_slp, quotient_form, random_generic_point, slp_eval
from salimits.formula import measure_format, parse_formula
from salimits.polycore import SparsePoly, parse_poly
from salimits.transforms import dagger, divfree_lift, limit_family_single, predict_diagonal_format, thickened_diagonal, verify_format_bounds
from salimits.verifier import (
    connected_components,
    dagger_projection_check,
    estimate_eta,
    lift_consistency_check,
    limit_convergence_check,
    monotonicity_check,
    sample_realization,
    sandwich_check,
    zero_set_in_ball,
)
from oracles import pythagorean_points
from strategies import random_doc, random_general_slp

BOX = [(-2, 2), (-2, 2)]
SCHEDULE = ["1/10", "1/20", "1/100", "1/200"]
X = parse_poly("x1", 2)
CIRCLE = parse_poly("x1^2 + x2^2 - 1", 2)
F1 = X * CIRCLE


@pytest.fixture
def verdict(capsys):
    def emit(n, name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{n}] {name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        return ok

    return emit


def test_criterion_1_two_panel_limits(verdict):
    pairs = {"F1": (X * F1, X, F1), "F2": (X * CIRCLE, X, CIRCLE)}
    start = time.process_time()
    lines, ok = [], True
    for name, (P, Q, F) in pairs.items():
        rep = limit_convergence_check(limit_family_single(P, Q, 2), zero_set_in_ball(F, 2), SCHEDULE, BOX, 401)
        ok = ok and rep.passed
        dists = ", ".join(f"{d:.4f}" for d in rep.symmetric)
        lines.append(f"{name}: d_H=[{dists}] h={rep.grid_step:g} monotone={rep.monotone} final_ok={rep.final_ok}")
    elapsed = time.process_time() - start
    ok = ok and elapsed <= 60
    assert verdict(1, "two-panel limit convergence", ok, "; ".join(lines) + f"; cpu {elapsed:.1f}s")


def test_criterion_2_slab_closed_form(verdict):
    sched = ["1/10", "1/20", "1/100", "1/200"]
    h = 4 / 400
    fam = limit_family_single(X, SparsePoly.constant(2, 1), 2)
    rep = limit_convergence_check(fam, zero_set_in_ball(X, 2), sched, BOX, 401, tau=h / 2)
    errs = [abs(d - math.sqrt(float(Fraction(t)) * (1 - float(Fraction(t))))) for t, d in zip(sched, rep.symmetric)]
    ok = all(e <= rep.grid_step for e in errs)
    assert verdict(2, "slab closed-form distance", ok, "max error %.4f vs step %g" % (max(errs), rep.grid_step))


def test_criterion_3_diagonal_formats(verdict):
    rng = random.Random(2024)
    dim_bad, fmt_bad, failing = 0, 0, set()
    for _ in range(50):
        p, k = rng.randint(0, 3), rng.randint(1, 3)
        s, d = rng.randint(1, 3), rng.randint(1, 4)
        doc = random_doc(rng, k, s, d, rng.randint(0, 4))
        rec = measure_format(doc)
        out = thickened_diagonal(doc, p, 2, Fraction(1, 50))
        pr = predict_diagonal_format(p, rec.k, rec.a, rec.s, rec.d)
        check = verify_format_bounds(out, pr)
        dim_bad += out.arity != pr.N
        if not check.passed:
            fmt_bad += 1
            failing.update(c["check"] for c in check.checks if not c["ok"])
    ok = dim_bad == 0 and fmt_bad == 0
    assert verdict(3, "diagonal format exactness", ok, f"dimension violations {dim_bad}, bound violations {fmt_bad} {sorted(failing)}")


GEOM = parse_slp(
    """
    arity: 1
    step 1: 1 * x^[5] * q^[] + -1 * x^[0] * q^[]
    step 2: 1 * x^[1] * q^[0] + -1 * x^[0] * q^[0]
    result: 1 * x^[0] * q^[1,-1]
    """
)


def test_criterion_4_quotient_reduction(verdict):
    rng = random.Random(7)
    programs = discarded = length_bad = value_bad = 0
    while programs < 100:
        r = random_general_slp(rng)
        try:
            q = quotient_form(r, check=False)
            pts = [random_generic_point(rng, r.arity) for _ in range(100)]
            want = [slp_eval(r, x) for x in pts]
        except (DivisionByZero, SizeCapExceeded):
            # a step vanishes identically, so no point is generic for it
            discarded += 1
            continue
        programs += 1
        length_bad += q.num.length + q.den.length > r.length
        value_bad += any(q.eval(x) != w for x, w in zip(pts, want))
    geom = quotient_form(GEOM).total_length
    ok = length_bad == 0 and value_bad == 0 and geom == 2
    detail = f"length violations {length_bad}, value mismatches {value_bad}, discarded {discarded}, geometric total {geom}"
    assert verdict(4, "quotient reduction", ok, detail)


def test_criterion_5_lift_round_trip(verdict):
    bad, members = 0, 0
    for seed in range(20):
        doc = random_doc(random.Random(seed), 2, 2, 2, 2, rels=("<=", ">=", "<", ">"))
        lifted, proj = divfree_lift(doc)
        rep = lift_consistency_check(doc, lifted, proj, samples=200, seed=seed, resolution=41)
        bad += not rep.passed
        members += rep.members
    assert verdict(5, "division-free lift round trip", bad == 0, f"{bad}/20 docs disagree, {members} member samples")


def _sandwich_instances():
    yield parse_formula("x1^2 + x2^2 - 1 = 0")
    yield parse_formula("x1^2 + x2^2 - 1 <= 0")
    yield parse_formula("x1^2 + 4*x2^2 - 1 <= 0")
    yield parse_formula("x1*(x1^2 + x2^2 - 1) = 0")
    rng = random.Random(99)
    count = 0
    while count < 6:
        doc = random_doc(rng, 2, 2, 2, 2, rels=("<=", "<"))
        if sample_realization(doc, [(-1.5, 1.5)] * 2, "grid", 101).empty:
            continue
        count += 1
        yield doc


def test_criterion_6_sandwich_and_monotonicity(verdict):
    f = [X, SparsePoly.zero(2)]
    R, eps = Fraction(3, 2), Fraction(1, 20)
    failures, witnesses, infeasible = 0, 0, 0
    for i, doc in enumerate(_sandwich_instances()):
        base = sample_realization(doc, [(-R, R)] * 2, "grid", 101)
        eta = 2 * estimate_eta(1, R, f, base).eta
        rep = sandwich_check(doc, f, 1, R, eps, eta, samples=500, seed=i, base=base)
        mono = monotonicity_check(doc, f, 1, R, eps, eps + 2 * eta, samples=500, seed=i, base=base)
        infeasible += rep.infeasible
        failures += rep.j_in_d_failures + rep.d_in_j_failures + rep.monotone_failures + mono.failures
        witnesses += rep.j_witnesses + rep.d_witnesses + mono.witnesses
    ok = failures == 0 and infeasible == 0
    assert verdict(6, "sandwich and monotone inclusions", ok, f"{failures} counterexamples in {witnesses} witnesses, {infeasible} infeasible")


def test_criterion_7_dagger_audit(verdict):
    half = parse_formula("x1 <= 0")
    disk = parse_formula("x1^2 + x2^2 - 1 <= 0")
    curve = parse_formula("x1*(x1^2+x2^2-1) = 0 & x2 >= 0")
    curve_pts = [(0, Fraction(i, 7)) for i in range(-7, 8)] + pythagorean_points(30)
    results = {
        "half-plane": dagger_projection_check(half, dagger(half, 1), samples=500),
        "disk": dagger_projection_check(disk, dagger(disk, 1), samples=500),
        "curve": dagger_projection_check(curve, dagger(curve, 1), samples=500, points=curve_pts),
    }
    literal = dagger_projection_check(half, dagger(half, 1, mode="paper-literal"), samples=500)
    ok = all(r.passed for r in results.values()) and not literal.passed
    detail = ", ".join(f"{k} mismatches {r.mismatches}" for k, r in results.items())
    assert verdict(7, "dagger projection audit", ok, detail + f"; literal control mismatches {literal.mismatches}")


def test_criterion_8_component_counts(verdict):
    one = connected_components(sample_realization(zero_set_in_ball(F1, 2), BOX, "grid", 401))
    two_doc = parse_formula("(x1^2 + x2^2 - 1) * ((x1 - 10)^2 + x2^2 - 1) = 0")
    two = connected_components(sample_realization(two_doc, [(-2, 12), (-7, 7)], "grid", 701))
    assert verdict(8, "component counts", one == 1 and two == 2, f"line+circle {one}, two circles {two}")
