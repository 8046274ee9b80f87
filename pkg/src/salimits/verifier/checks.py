"""Sample-level checks of the limit, join and lift constructions."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..formula import And, Atom, DocBuilder, FormulaDoc, Not, _holds, iter_atoms
from ..polycore import SparsePoly, as_rational
from ..transforms.dagger import dagger_info
from ..transforms.divfree import LiftProjection
from ..transforms.joins import thickened_diagonal, thickened_join_formula
from ..transforms.layout import pair_list
from .metrics import connected_components, default_linking_radius, hausdorff_distance
from .sampling import EmptyCloudError, SampleCloud, exact_membership, fiber, inherited_tau, sample_realization

__all__ = [
    "ConvergenceReport",
    "DaggerReport",
    "EtaEstimate",
    "LiftReport",
    "MonotonicityReport",
    "SandwichReport",
    "cloud_to_csv",
    "dagger_projection_check",
    "estimate_eta",
    "eta_bound",
    "lift_consistency_check",
    "limit_convergence_check",
    "monotonicity_check",
    "sandwich_check",
    "write_report",
    "zero_set_in_ball",
]


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


_ROUND = 1e-9


class _Report:
    def to_json(self) -> dict:
        return _jsonable({"check": self.kind, **asdict(self)})


# ---------------------------------------------------------------------------
# limit convergence
# ---------------------------------------------------------------------------


def zero_set_in_ball(F: SparsePoly, R) -> FormulaDoc:
    """F = 0 together with |x|^2 <= R^2."""
    R = as_rational(R)
    k = F.arity
    ball = SparsePoly.constant(k, -R * R)
    for i in range(k):
        ball = ball + SparsePoly.variable(k, i) ** 2
    b = DocBuilder(k)
    return b.build(And((b.atom(F, "="), b.atom(ball, "<="))))


@dataclass
class ConvergenceReport(_Report):
    schedule: list
    forward: list
    backward: list
    symmetric: list
    beta0: list
    target_beta0: int
    target_points: int
    fiber_points: list
    grid_step: float
    tau: list
    linking_radius: float
    slack: float
    threshold: float
    monotone: bool
    final_ok: bool
    kind: str = "convergence"

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_ok


def limit_convergence_check(
    family: FormulaDoc,
    target: FormulaDoc,
    schedule: Sequence,
    box,
    resolution: int,
    tau="auto",
    slack_steps: float = 1,
    final_steps: float = 3,
    threads: int = 1,
    linking_radius: float | None = None,
) -> ConvergenceReport:
    """Sample the target once and each fiber of ``family``; compare by Hausdorff distance.

    The family's parameter is fixed at each scheduled value.  Verdicts: the
    symmetric distance never grows by more than ``slack_steps`` grid steps, and
    the last one is at most ``final_steps`` grid steps.
    """
    sched = [as_rational(t) for t in schedule]
    if not sched or any(t <= 0 for t in sched):
        raise ValueError("schedule values must be positive")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("schedule must be strictly decreasing")
    if family.parameter is None or family.arity != target.arity + 1:
        raise ValueError("family must have one parameter variable beyond the target's")
    tcloud = sample_realization(target, box, "grid", resolution, tau, threads=threads)
    if tcloud.empty:
        raise EmptyCloudError("target realization sampled empty")
    h = tcloud.step
    radius = linking_radius if linking_radius is not None else default_linking_radius(tcloud)
    fw, bw, sym, beta, sizes = [], [], [], [], []
    for t in sched:
        fdoc = fiber(family, t)
        cloud = sample_realization(fdoc, box, "grid", resolution, tau, threads=threads, param_value=t)
        sizes.append(len(cloud))
        if cloud.empty:
            fw.append(math.inf)
            bw.append(math.inf)
            sym.append(math.inf)
            beta.append(0)
            continue
        d = hausdorff_distance(cloud, tcloud)
        fw.append(d.forward)
        bw.append(d.backward)
        sym.append(d.symmetric)
        beta.append(connected_components(cloud, radius))
    slack = slack_steps * h
    threshold = final_steps * h
    # grid distances are h*sqrt(integer); absorb the rounding of that product
    fuzz = _ROUND * h
    monotone = all(b <= a + slack + fuzz for a, b in zip(sym, sym[1:]))
    return ConvergenceReport(
        [str(t) for t in sched],
        fw,
        bw,
        sym,
        beta,
        connected_components(tcloud, radius),
        len(tcloud),
        sizes,
        h,
        [float(v) for v in tcloud.tau],
        radius,
        slack,
        threshold,
        monotone,
        sym[-1] <= threshold + fuzz,
    )


# ---------------------------------------------------------------------------
# eta and the join inclusions
# ---------------------------------------------------------------------------


def eta_bound(p: int, R, m) -> Fraction:
    """p(p+1)(4 R m + 2 m^2)."""
    R, m = as_rational(R), as_rational(m)
    return p * (p + 1) * (4 * R * m + 2 * m * m)


@dataclass
class EtaEstimate:
    eta: Fraction
    m: float
    p: int
    R: Fraction
    points: int
    #: the maximum is over samples only, so this underestimates the true value
    lower_estimate: bool = True

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def _map_values(f, pts: np.ndarray) -> np.ndarray:
    if callable(f):
        return np.asarray(f(pts), dtype=np.float64)
    cols = []
    for g in f:
        val = np.zeros(pts.shape[0])
        for exp, c in g.terms():
            mono = np.full(pts.shape[0], float(c))
            for i, e in enumerate(exp):
                if e:
                    mono = mono * pts[:, i] ** e
            val += mono
        cols.append(val)
    return np.stack(cols, axis=1)


def estimate_eta(p: int, R, f, cloud: SampleCloud) -> EtaEstimate:
    """Sample version of eta_p: m = max |x - f(x)| over the cloud."""
    if cloud.empty:
        raise EmptyCloudError("eta estimate needs a nonempty cloud")
    pts = cloud.points
    fx = _map_values(f, pts)
    if fx.shape != pts.shape:
        raise ValueError("f must map the cloud's space to itself")
    m = float(np.sqrt(((pts - fx) ** 2).sum(axis=1)).max())
    return EtaEstimate(eta_bound(p, R, Fraction(m)), m, p, as_rational(R), len(cloud))


def _eval_map(f: Sequence[SparsePoly], x) -> tuple[Fraction, ...]:
    return tuple(g.eval(x) for g in f)


def _sq(u, v) -> Fraction:
    return sum(((a - b) ** 2 for a, b in zip(u, v)), Fraction(0))


def _identity(k: int) -> list[SparsePoly]:
    return [SparsePoly.variable(k, i) for i in range(k)]


def _block_maps(p: int, k: int) -> list[list[int]]:
    return [list(range(i * k, (i + 1) * k)) for i in range(p + 1)]


def _random_simplex(rng: np.random.Generator, size: int, zeros: bool) -> list[Fraction]:
    """Rational point on the standard simplex; optionally with some zero entries."""
    w = [int(v) for v in rng.integers(1, 64, size)]
    if zeros and size > 1:
        for i in rng.choice(size, size=int(rng.integers(1, size)), replace=False):
            w[int(i)] = 0
    total = sum(w)
    return [Fraction(v, total) for v in w]


def _pack(xs, t, a) -> tuple:
    out = [v for x in xs for v in x]
    return tuple(out + list(t) + list(a))


def _pair_values(xs, t, g: Callable) -> list[Fraction]:
    vals = []
    for i, j in pair_list(len(xs) - 1):
        vals.append(_sq(g(xs[i]), g(xs[j])) if t[i] and t[j] else Fraction(0))
    return vals


@dataclass
class SandwichReport(_Report):
    p: int
    R: str
    eps: str
    eta: str
    samples_requested: int
    j_witnesses: int
    d_witnesses: int
    j_in_d_failures: int
    d_in_j_failures: int
    monotone_failures: int
    skipped: int
    counterexamples: list = field(default_factory=list)
    infeasible: bool = False
    kind: str = "sandwich"

    @property
    def passed(self) -> bool:
        return not self.infeasible and self.j_in_d_failures == 0 and self.d_in_j_failures == 0 and self.monotone_failures == 0


def _base_points(doc: FormulaDoc, R, base: SampleCloud | None, resolution: int):
    R = as_rational(R)
    if base is None:
        base = sample_realization(doc, [(-R, R)] * doc.arity, "grid", resolution)
    pts, exact = [], []
    for i in range(len(base)):
        x = base.exact_point(i)
        if _sq(x, (0,) * len(x)) <= R * R:
            pts.append(base.points[i])
            exact.append(x)
    return base, np.array(pts).reshape(-1, doc.arity), exact


def _witnesses(rng, pts, exact, p, C, eps, g_float, count, zeros_every=5):
    """Tuples of base points whose pairwise g-distances keep sum A^2 within eps."""
    n = len(exact)
    gvals = g_float(pts)
    radius = 0.5 * (float(eps) / max(C, 1)) ** 0.25
    out = []
    for s in range(count):
        i0 = int(rng.integers(n))
        near = np.nonzero(((gvals - gvals[i0]) ** 2).sum(axis=1) <= radius * radius)[0]
        picks = [i0] + [int(near[rng.integers(len(near))]) for _ in range(p)]
        t = _random_simplex(rng, p + 1, zeros=(s % zeros_every == zeros_every - 1))
        out.append(([exact[i] for i in picks], t))
    return out


def sandwich_check(
    doc: FormulaDoc,
    f: Sequence[SparsePoly],
    p: int,
    R,
    eps,
    eta,
    samples: int = 500,
    seed: int = 0,
    base: SampleCloud | None = None,
    resolution: int = 201,
) -> SandwichReport:
    """Membership-level test of  J_{f,eps} ⊆ D_{eps+eta} ⊆ J_{f,eps+2 eta}.

    Witnesses are assembled from exact base points: blocks X^i from the base
    cloud, T on the simplex, and A filled so that every pair equation holds
    exactly.  The three sets share the X and T coordinates but not A, so a
    point is carried from one set to the next by recomputing A from the
    target's pair equation (|f(X^i) - f(X^j)|^2 for joins, |X^i - X^j|^2 for
    the diagonal).  Monotonicity J_{f,eps} ⊆ J_{f,eps+2 eta} is checked on the
    same witnesses without any transport.
    """
    eps, eta, R = as_rational(eps), as_rational(eta), as_rational(R)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    k = doc.arity
    C = len(pair_list(p))
    J1 = thickened_join_formula(doc, f, p, R, eps)
    D = thickened_diagonal(doc, p, R, eps + eta)
    J2 = thickened_join_formula(doc, f, p, R, eps + 2 * eta)
    base, pts, exact = _base_points(doc, R, base, resolution)
    report = SandwichReport(p, str(R), str(eps), str(eta), samples, 0, 0, 0, 0, 0, 0)
    if not exact:
        report.infeasible = True
        return report
    maps = _block_maps(p, k)
    taus = {id(d): inherited_tau(doc, base.tau, d, maps) for d in (J1, D, J2)}
    member = lambda d, x: exact_membership(d, x, taus[id(d)])
    fmap = lambda x: _eval_map(f, x)
    ident = lambda x: x
    rng = np.random.default_rng(seed)

    for xs, t in _witnesses(rng, pts, exact, p, C, eps, lambda P: _map_values(f, P), samples):
        point = _pack(xs, t, _pair_values(xs, t, fmap))
        if not member(J1, point):
            report.skipped += 1
            continue
        report.j_witnesses += 1
        moved = _pack(xs, t, _pair_values(xs, t, ident))
        if not member(D, moved):
            report.j_in_d_failures += 1
            report.counterexamples.append({"from": "J", "to": "D", "point": [str(v) for v in moved]})
        if not member(J2, point):
            report.monotone_failures += 1
            report.counterexamples.append({"from": "J", "to": "J'", "point": [str(v) for v in point]})

    for xs, t in _witnesses(rng, pts, exact, p, C, eps + eta, lambda P: P, samples):
        point = _pack(xs, t, _pair_values(xs, t, ident))
        if not member(D, point):
            report.skipped += 1
            continue
        report.d_witnesses += 1
        moved = _pack(xs, t, _pair_values(xs, t, fmap))
        if not member(J2, moved):
            report.d_in_j_failures += 1
            report.counterexamples.append({"from": "D", "to": "J'", "point": [str(v) for v in moved]})
    if report.j_witnesses == 0 and report.d_witnesses == 0:
        report.infeasible = True
    return report


@dataclass
class MonotonicityReport(_Report):
    eps: str
    eps2: str
    witnesses: int
    failures: int
    skipped: int
    kind: str = "monotonicity"

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.witnesses > 0


def monotonicity_check(
    doc: FormulaDoc,
    f: Sequence[SparsePoly],
    p: int,
    R,
    eps,
    eps2,
    samples: int = 500,
    seed: int = 0,
    base: SampleCloud | None = None,
    resolution: int = 201,
) -> MonotonicityReport:
    """Every sampled point of J_{f,eps} is a point of J_{f,eps2} (eps <= eps2)."""
    eps, eps2 = as_rational(eps), as_rational(eps2)
    if not 0 < eps <= eps2:
        raise ValueError("need 0 < eps <= eps2")
    k = doc.arity
    C = len(pair_list(p))
    J1 = thickened_join_formula(doc, f, p, R, eps)
    J2 = thickened_join_formula(doc, f, p, R, eps2)
    base, pts, exact = _base_points(doc, R, base, resolution)
    report = MonotonicityReport(str(eps), str(eps2), 0, 0, 0)
    if not exact:
        return report
    maps = _block_maps(p, k)
    tau1 = inherited_tau(doc, base.tau, J1, maps)
    tau2 = inherited_tau(doc, base.tau, J2, maps)
    rng = np.random.default_rng(seed)
    fmap = lambda x: _eval_map(f, x)
    # draw with the larger thickness so that some witnesses sit outside J1
    for xs, t in _witnesses(rng, pts, exact, p, C, eps2, lambda P: _map_values(f, P), samples):
        point = _pack(xs, t, _pair_values(xs, t, fmap))
        if not exact_membership(J1, point, tau1):
            report.skipped += 1
            continue
        report.witnesses += 1
        if not exact_membership(J2, point, tau2):
            report.failures += 1
    return report


# ---------------------------------------------------------------------------
# division-free lift
# ---------------------------------------------------------------------------


@dataclass
class LiftReport(_Report):
    samples: int
    members: int
    forward_failures: int
    backward_failures: int
    uniqueness_failures: int
    agreement: float
    kind: str = "lift"

    @property
    def passed(self) -> bool:
        return self.forward_failures == 0 and self.backward_failures == 0 and self.uniqueness_failures == 0


def lift_consistency_check(
    doc: FormulaDoc,
    lifted: FormulaDoc,
    projection: LiftProjection,
    samples: int = 200,
    seed: int = 0,
    box=None,
    cloud: SampleCloud | None = None,
    resolution: int = 101,
) -> LiftReport:
    """Sample-level bijection between Reali(doc) and Reali(lifted).

    Half of the points come from a sampled realization of ``doc`` (members),
    half uniformly from the box.  Each point x must satisfy doc exactly when
    lift(x) satisfies ``lifted``; a perturbed lift of every member must be
    rejected, so the lift is unique.
    """
    k = doc.arity
    box = box if box is not None else [(-2, 2)] * k
    if cloud is None:
        cloud = sample_realization(doc, box, "grid", resolution)
    tau_doc = list(cloud.tau)
    tau_lift = [0.0] * len(lifted.polys)
    for i, j in projection.atom_polys:
        tau_lift[j] = max(tau_lift[j], float(tau_doc[i]))
    rng = np.random.default_rng(seed)
    points = []
    if len(cloud):
        for i in rng.choice(len(cloud), size=min(samples // 2, len(cloud)), replace=False):
            points.append(cloud.exact_point(int(i)))
    lo = np.array([float(as_rational(a)) for a, _ in box])
    hi = np.array([float(as_rational(b)) for _, b in box])
    for x in lo + (hi - lo) * rng.random((samples - len(points), k)):
        points.append(tuple(Fraction(float(v)) for v in x))
    fwd = bwd = uniq = members = agree = 0
    extra = projection.arity - projection.base_arity
    for x in points:
        in_doc = exact_membership(doc, x, tau_doc)
        y = projection.lift(x)
        in_lift = exact_membership(lifted, y, tau_lift)
        members += in_doc
        if in_doc and not in_lift:
            fwd += 1
        if in_lift and not exact_membership(doc, projection.project(y), tau_doc):
            bwd += 1
        ok = in_doc == in_lift
        if in_lift and extra:
            j = k + int(rng.integers(extra))
            bumped = list(y)
            bumped[j] += Fraction(1, int(rng.integers(2, 1000)))
            if exact_membership(lifted, tuple(bumped), tau_lift):
                uniq += 1
                ok = False
        agree += ok
    return LiftReport(len(points), members, fwd, bwd, uniq, agree / max(len(points), 1))


# ---------------------------------------------------------------------------
# dagger projection identity
# ---------------------------------------------------------------------------


@dataclass
class DaggerReport(_Report):
    mode: str
    samples: int
    members: int
    mismatches: int
    missing: int
    spurious: int
    examples: list = field(default_factory=list)
    kind: str = "dagger-projection"

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def _eval_squared(p: SparsePoly, x, sq: dict[int, Fraction]) -> Fraction:
    """Evaluate ``p`` when variables in ``sq`` are known only through their squares."""
    total = Fraction(0)
    for exp, c in p.terms():
        term = c
        for i, e in enumerate(exp):
            if not e:
                continue
            if i in sq:
                if e % 2:
                    raise ValueError("odd power of a slack or sphere variable")
                term *= sq[i] ** (e // 2)
            else:
                term *= x[i] ** e
        total += term
    return total


def _truth(node, values, rel_tau) -> bool:
    if isinstance(node, Atom):
        return _holds(values[node.poly_ref], node.rel, rel_tau[node.poly_ref])
    if isinstance(node, Not):
        return not _truth(node.child, values, rel_tau)
    if isinstance(node, And):
        return all(_truth(c, values, rel_tau) for c in node.children)
    return any(_truth(c, values, rel_tau) for c in node.children)


def dagger_projection_check(
    doc: FormulaDoc,
    dag: FormulaDoc,
    samples: int = 500,
    seed: int = 0,
    points: Sequence | None = None,
    tau: Sequence[float] | None = None,
) -> DaggerReport:
    """x is in Reali(doc) ∩ closed R-ball exactly when some lift of x is in Reali(dag).

    Each slack equation is linear in V^2, so V^2 is solved for directly, and
    U1^2, U2^2 follow from the spheres; a lift exists iff all these squares are
    non-negative and the dagger formula holds on them.  ``points`` adds exact
    test points (use them for formulas with equalities); ``tau`` relaxes the
    source's equalities and is carried over to their copies in ``dag``.
    """
    info = dagger_info(dag)
    k = info.k
    R = info.R
    rng = np.random.default_rng(seed)
    pts = [tuple(as_rational(v) for v in x) for x in (points or [])]
    span = 1.5 * float(R)
    for x in rng.uniform(-span, span, size=(samples, k)):
        pts.append(tuple(Fraction(float(v)) for v in x))
    tau_doc = [Fraction(float(t)) for t in tau] if tau is not None else [Fraction(0)] * len(doc.polys)
    tau_dag = [Fraction(float(t)) for t in inherited_tau(doc, [float(t) for t in tau_doc], dag, [list(range(k))])]
    v_idx = list(range(k, k + len(info.slack)))
    sq_vars = v_idx + [info.u1, info.u2]
    slack_poly = {}
    for j, p in enumerate(dag.polys):
        vs = [v for v in v_idx if v in p.variables()]
        if len(vs) == 1 and info.u2 not in p.variables():
            slack_poly[vs[0]] = j
    members = mismatches = missing = spurious = 0
    examples = []
    for x in pts:
        full = tuple(x) + (Fraction(0),) * (dag.arity - k)
        sq: dict[int, Fraction] = {}
        for v in v_idx:
            p = dag.polys[slack_poly[v]]
            base = _eval_squared(p, full, {u: Fraction(0) for u in sq_vars})
            coef = p.coefficient(tuple(2 if i == v else 0 for i in range(dag.arity)))
            sq[v] = -base / coef
        sq[info.u1] = R * R - sum((c * c for c in x), Fraction(0))
        sq[info.u2] = info.R_prime ** 2 - sum((sq[v] for v in v_idx), Fraction(0))
        lifts = all(s >= 0 for s in sq.values())
        if lifts:
            values = [_eval_squared(p, full, sq) for p in dag.polys]
            lifts = _truth(dag.root, values, tau_dag)
        expected = exact_membership(doc, x, tau_doc) and sum((c * c for c in x), Fraction(0)) <= R * R
        members += expected
        if lifts != expected:
            mismatches += 1
            if expected:
                missing += 1
            else:
                spurious += 1
            if len(examples) < 5:
                examples.append({"x": [str(c) for c in x], "in_source": expected, "lifts": lifts})
    return DaggerReport(info.mode, len(pts), members, mismatches, missing, spurious, examples)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def cloud_to_csv(cloud: SampleCloud, path=None, names: Sequence[str] | None = None) -> str:
    """CSV text with ``#`` metadata lines; written to ``path`` when given."""
    buf = io.StringIO()
    for key, val in cloud.describe().items():
        buf.write(f"# {key}: {json.dumps(_jsonable(val))}\n")
    names = list(names) if names else list(cloud.source.var_names())[: cloud.dim]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in cloud.points:
        w.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def write_report(report, path=None) -> str:
    data = report.to_json() if hasattr(report, "to_json") else _jsonable(report)
    if hasattr(report, "passed"):
        data["passed"] = bool(report.passed)
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
