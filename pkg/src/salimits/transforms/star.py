"""The star family: dagger, fibered join over the projection, then the bar construction.

Pipeline for a closed formula Phi in k variables:

1. Phi† in k + |V| + 2 variables (corrected sign convention);
2. fibered join of Phi† over the projection onto the first k coordinates;
3. bar construction applied to the equational clauses Theta_1, Theta_2, Theta_3,
   with Omega kept outside;
4. conjoin U > 0 (U is the last variable).

Every point of Reali(Phi†) has |X|^2 + U1^2 = R^2 and |V|^2 + U2^2 = R'^2, so
each block lies on the sphere of radius sqrt(R^2 + R'^2); that is the radius
used for the Omega balls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..formula import And, FormulaDoc, attach_naive_reprs, is_pclosed, measure_format
from ..polycore import SparsePoly, as_rational
from .dagger import CORRECTED, dagger, dagger_info
from .joins import join_core
from .limits import bar_core, quotient_table_from_reprs

__all__ = ["StarResult", "star_formula"]

OMEGA_ASSUMPTION = (
    "Omega^R is kept outside the bar, as in the displayed star formula; "
    "block radius squared is R^2 + R'^2 because dagger points lie on that sphere"
)


@dataclass
class StarResult:
    doc: FormulaDoc
    dagger_doc: FormulaDoc
    join_doc: FormulaDoc
    trace: list[dict] = field(default_factory=list)


def star_formula(doc: FormulaDoc, p: int, R, R_prime=None) -> StarResult:
    if not is_pclosed(doc):
        raise ValueError("star construction needs a closed formula")
    R = as_rational(R)
    trace: list[dict] = []

    dag = dagger(doc, R, R_prime, mode=CORRECTED)
    info = dagger_info(dag)
    rec = measure_format(dag)
    trace.append({
        "stage": "dagger",
        "arity": dag.arity,
        "format": rec.to_json(),
        "slack_variables": len(info.slack),
        "sphere_equations": 2,
        "R": str(info.R),
        "R_prime": str(info.R_prime),
        "mode": info.mode,
    })

    k = doc.arity
    m = dag.arity
    proj = [SparsePoly.variable(m, i) for i in range(k)]
    r_sq = info.R ** 2 + info.R_prime ** 2
    join_doc, _ = join_core(dag, p, r_sq, pair_clause="f", f=proj)
    trace.append({
        "stage": "fibered-join",
        "arity": join_doc.arity,
        "format": measure_format(join_doc).to_json(),
        "p": p,
        "map": "projection onto the first %d coordinates" % k,
        "omega_radius_sq": str(r_sq),
    })

    children = list(join_doc.root.children)
    n_omega = p + 2
    omega, equational = children[:n_omega], children[n_omega:]
    eq_doc = join_doc.with_root(And(tuple(equational)))
    table = quotient_table_from_reprs(eq_doc)
    b, bar_root, N, bar_info = bar_core(eq_doc, table)
    n = join_doc.arity + 1
    emb = list(range(join_doc.arity))
    omega_atoms = []
    for a in omega:
        r = join_doc.reprs[a.poly_ref]
        omega_atoms.append(b.atom(join_doc.polys[a.poly_ref].rename(emb, n), a.rel, r.rename(emb, n) if r else None))
    u = SparsePoly.variable(n, n - 1)
    bar_parts = list(bar_root.children) if isinstance(bar_root, And) else [bar_root]
    root = And(tuple(omega_atoms + bar_parts + [b.atom(u, ">")]))
    names = tuple(join_doc.var_names()) + ("U",)
    layout = dict(join_doc.layout or {})
    layout = {"total": n, "blocks": list(layout.get("blocks", [])) + [["U", n - 1, 1]]}
    out = attach_naive_reprs(b.build(root, names=names, parameter=n - 1, layout=layout))
    trace.append({
        "stage": "bar",
        "arity": out.arity,
        "format": measure_format(out).to_json(),
        "N_exponent": N,
        "deg_Qbar": bar_info["deg_Qbar"],
        "substituted_atoms": bar_info["atoms"],
        "assumption": OMEGA_ASSUMPTION,
    })
    out.meta = {"construction": "star", "p": p, "R": str(info.R), "R_prime": str(info.R_prime), "provenance": trace}
    return StarResult(out, dag, join_doc, trace)
