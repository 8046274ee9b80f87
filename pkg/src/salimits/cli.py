"""Command-line front end: ``salimits inspect | transform | predict-format | verify | export``.

Exit codes: 0 pass, 1 verification failure, 2 usage or parse error,
3 sampling infeasible (an empty cloud where points were needed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction
from typing import Sequence

from . import __version__
from .addrepr import format_slp, parse_slp, quotient_form, slp_expand
from .formula import (
    FormulaDoc,
    FormulaParseError,
    attach_naive_reprs,
    format_formula,
    is_pclosed,
    iter_atoms,
    load_doc,
    measure_format,
    save_doc,
)
from .polycore import PolyParseError, SparsePoly, as_rational, parse_poly
from .transforms import (
    CORRECTED,
    PAPER_LITERAL,
    QuotientEntry,
    bar_construction,
    dagger,
    divfree_lift,
    fibered_join_formula,
    join_formula,
    limit_family_single,
    predict_diagonal_format,
    predict_star_format,
    quotient_table_from_reprs,
    star_formula,
    thickened_diagonal,
    thickened_join_formula,
    verify_format_bounds,
)
from .verifier import (
    EmptyCloudError,
    cloud_to_csv,
    dagger_projection_check,
    estimate_eta,
    fiber,
    lift_consistency_check,
    limit_convergence_check,
    sample_realization,
    sandwich_check,
    write_report,
    zero_set_in_ball,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3

TRANSFORMS = (
    "divfree-lift",
    "quotient",
    "limit-family",
    "bar",
    "join",
    "fibered-join",
    "thickened-join",
    "diagonal",
    "dagger",
    "star",
)
CHECKS = ("convergence", "sandwich", "lift", "formats", "dagger")

# fallbacks applied after the config file; flags left at None take these
DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "tau": "auto",
    "resolution": 201,
    "R": "2",
    "p": 1,
    "eps": "1/100",
    "mode": CORRECTED,
    "samples": 500,
    "schedule": "0.1,0.05,0.01,0.005",
    "slack_steps": 1.0,
    "final_steps": 3.0,
    "eta_factor": "2",
    "bound_variant": "closed-form",
    "sampling": "grid",
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _global(p: argparse.ArgumentParser, top: bool = False) -> None:
    # accepted before or after the subcommand; the subcommand copy only sets what it sees
    g = p.add_argument_group("global", argument_default=None if top else argparse.SUPPRESS)
    g.add_argument("--config", help="JSON file of parameters; explicit flags win")
    g.add_argument("--seed", type=int, help="64-bit seed for every random choice (default 0)")
    g.add_argument("--threads", type=int, help="worker cap for sampling (default 1)")
    g.add_argument("--tau", help="equality relaxation: 'auto' or a positive number")
    g.add_argument("--box", help="sampling box, e.g. '-2,2' (every axis) or '-2,2;-1,1'")
    g.add_argument("--resolution", type=int, help="grid points per axis (default 201)")
    g.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salimits", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="print formats and a formula summary")
    p.add_argument("path")
    _global(p)

    p = sub.add_parser("transform", help="apply a construction and write the result")
    p.add_argument("kind", choices=TRANSFORMS)
    p.add_argument("input", nargs="?", help="input formula (.json or .saf), or an SLP file for 'quotient'")
    p.add_argument("-o", "--output", help="output path (.json or .saf); sidecar goes to <output>.prov.json")
    p.add_argument("--p", type=int, dest="p")
    p.add_argument("--R")
    p.add_argument("--R-prime", dest="R_prime")
    p.add_argument("--eps")
    p.add_argument("--f", help="map components separated by ';' or ',', e.g. 'x1,0'")
    p.add_argument("--mode", choices=(CORRECTED, PAPER_LITERAL))
    p.add_argument("--P", dest="P", help="numerator polynomial for limit-family")
    p.add_argument("--Q", dest="Q", help="denominator polynomial for limit-family")
    p.add_argument("--arity", type=int)
    p.add_argument("--quotients", help="JSON {index: [P, Q]} for bar; default derives them from the programs")
    p.add_argument("--radii", help="comma-separated radii, one per block (bar)")
    p.add_argument("--blocks", help="comma-separated block sizes (bar)")
    p.add_argument("--bound-variant", dest="bound_variant", choices=("closed-form", "clause-sum"))
    _global(p)

    p = sub.add_parser("predict-format", help="closed-form format bounds")
    p.add_argument("kind", choices=("diagonal", "star"))
    p.add_argument("--p", type=int, dest="p")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--d", type=int, default=0)
    _global(p)

    p = sub.add_parser("verify", help="run a sampling or format check")
    p.add_argument("kind", choices=CHECKS)
    p.add_argument("input", nargs="?", help="formula under test")
    p.add_argument("-o", "--output", help="report path (JSON)")
    p.add_argument("--family", help="family document (convergence)")
    p.add_argument("--target", help="target document (convergence)")
    p.add_argument("--P", dest="P")
    p.add_argument("--Q", dest="Q")
    p.add_argument("--F", dest="F", help="limit polynomial; target is F=0 in the closed R-ball")
    p.add_argument("--arity", type=int)
    p.add_argument("--schedule")
    p.add_argument("--slack-steps", dest="slack_steps", type=float)
    p.add_argument("--final-steps", dest="final_steps", type=float)
    p.add_argument("--p", type=int, dest="p")
    p.add_argument("--R")
    p.add_argument("--eps")
    p.add_argument("--eta", help="explicit eta; default is the sample estimate times --eta-factor")
    p.add_argument("--eta-factor", dest="eta_factor")
    p.add_argument("--f")
    p.add_argument("--samples", type=int)
    p.add_argument("--mode", choices=(CORRECTED, PAPER_LITERAL))
    p.add_argument("--source", help="source formula for 'formats' (measures k, a, s, d)")
    p.add_argument("--construction", choices=("diagonal", "star"))
    p.add_argument("--bound-M", dest="bound_M", type=int, help="override the additive bound (negative controls)")
    p.add_argument("--bound-variant", dest="bound_variant", choices=("closed-form", "clause-sum"))
    _global(p)

    p = sub.add_parser("export", help="write sampled point clouds as CSV")
    p.add_argument("inputs", nargs="+", help="formula or family documents")
    p.add_argument("--t", action="append", dest="t", help="parameter value for family fibers (repeatable)")
    p.add_argument("--outdir", default=".")
    p.add_argument("--sampling", choices=("grid", "random"))
    p.add_argument("--count", type=int, help="number of random points (random sampling)")
    _global(p)
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        for key, val in cfg.items():
            key = key.replace("-", "_")
            if getattr(args, key, None) is None:
                setattr(args, key, val)
    for key, val in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if args.resolution is not None and args.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    return args


# ---------------------------------------------------------------------------
# parameter helpers
# ---------------------------------------------------------------------------


def _rational(name: str, value, positive: bool = True) -> Fraction:
    try:
        v = as_rational(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise UsageError(f"--{name}: not a rational number: {value!r}") from None
    if positive and v <= 0:
        raise UsageError(f"--{name} must be positive")
    return v


def _tau(args):
    if isinstance(args.tau, str) and args.tau == "auto":
        return "auto"
    return float(_rational("tau", args.tau))


def _box(args, k: int, R=None):
    if args.box is None:
        r = R if R is not None else Fraction(2)
        return [(-r, r)] * k
    spec = args.box if isinstance(args.box, str) else ";".join(",".join(map(str, b)) for b in args.box)
    out = []
    for part in spec.split(";"):
        lo, hi = part.split(",")
        out.append((_rational("box", lo, False), _rational("box", hi, False)))
    if len(out) == 1:
        out = out * k
    if len(out) != k or any(lo >= hi for lo, hi in out):
        raise UsageError(f"--box needs {k} nondegenerate intervals")
    return out


def _schedule(text) -> list[Fraction]:
    items = text if isinstance(text, list) else str(text).split(",")
    sched = [_rational("schedule", t) for t in items]
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise UsageError("--schedule must be strictly decreasing")
    return sched


def _poly(name: str, text: str, arity: int | None) -> SparsePoly:
    if text is None:
        raise UsageError(f"--{name} is required")
    return parse_poly(str(text), arity)


def _map(text: str | None, k: int) -> list[SparsePoly]:
    if text is None:
        raise UsageError("--f is required")
    sep = ";" if ";" in text else ","
    comps = [parse_poly(c, k) for c in text.split(sep)]
    if len(comps) != k:
        raise UsageError(f"--f needs {k} components for a {k}-variable formula")
    return comps


def _load(path: str | None) -> FormulaDoc:
    if path is None:
        raise UsageError("an input formula is required")
    return load_doc(path)


def _sha256(path: str | None) -> str | None:
    if path is None or not os.path.exists(path):
        return None
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _params(args) -> dict:
    skip = {"command", "json"}
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, data: dict, text: str | None = None) -> None:
    if args.json or text is None:
        print(json.dumps(data, indent=2, sort_keys=True, default=str))
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _format_lines(doc: FormulaDoc) -> dict:
    rec = measure_format(doc)
    return {
        "arity": doc.arity,
        "dense": rec.to_json()["dense"],
        "additive": rec.to_json()["additive"],
        "divfree": rec.divfree,
        "pclosed": is_pclosed(doc),
        "auto_derived": list(rec.auto_derived),
        "atoms": sum(1 for _ in iter_atoms(doc.root)),
        "polynomials": [p.to_string(doc.var_names()) for p in doc.polys],
        "formula": format_formula(doc),
    }


def cmd_inspect(args) -> int:
    doc = attach_naive_reprs(_load(args.path))
    info = _format_lines(doc)
    d = info["dense"]
    text = "\n".join([
        f"dense format     (s,d,k) = ({d['s']},{d['d']},{d['k']})",
        f"additive format  (a,k)   = ({info['additive']['a']},{info['additive']['k']})",
        f"division-free    {info['divfree']}",
        f"P-closed         {info['pclosed']}",
        f"atoms            {info['atoms']}",
        f"formula          {info['formula']}",
    ] + [f"  F{i} = {p}" for i, p in enumerate(info["polynomials"])])
    _emit(args, info, text)
    return EXIT_PASS


def _quotient_table(doc: FormulaDoc, path: str | None) -> dict:
    if path is None:
        return quotient_table_from_reprs(doc)
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    table = {}
    for key, (P, Q) in raw.items():
        Pp, Qp = parse_poly(P, doc.arity), parse_poly(Q, doc.arity)
        table[int(key)] = QuotientEntry(Pp, Qp, None, None)
    return table


def _run_transform(args):
    """Returns (output document or None, extra sidecar fields, prediction or None, source doc)."""
    kind = args.kind
    extra: dict = {}
    if kind == "quotient":
        if args.input is None:
            raise UsageError("quotient needs an SLP file")
        with open(args.input, encoding="utf-8") as fh:
            r = parse_slp(fh.read())
        pair = quotient_form(r)
        num, den = slp_expand(pair.num), slp_expand(pair.den)
        extra["quotient"] = {
            "input_length": r.length,
            "num_length": pair.num.length,
            "den_length": pair.den.length,
            "shared_length": pair.shared_length,
            "num": num.to_string(),
            "den": den.to_string(),
            "num_slp": format_slp(pair.num),
            "den_slp": format_slp(pair.den),
        }
        return None, extra, None, None
    if kind == "limit-family":
        P = _poly("P", args.P, args.arity)
        Q = _poly("Q", args.Q, P.arity)
        if P.arity != Q.arity:
            Q = parse_poly(str(args.Q), P.arity)
        out = limit_family_single(P, Q, _rational("R", args.R))
        return out, {"N": out.meta["N"]}, None, None

    src = _load(args.input)
    if kind == "divfree-lift":
        out, proj = divfree_lift(attach_naive_reprs(src))
        return out, {"projection": proj.to_json()}, None, src
    if kind == "bar":
        radii = [_rational("radii", r) for r in str(args.radii or args.R).split(",")]
        blocks = [int(b) for b in args.blocks.split(",")] if args.blocks else None
        out = bar_construction(src, _quotient_table(src, args.quotients), radii, blocks)
        return out, {"N": out.meta["N"]}, None, src
    R = _rational("R", args.R)
    p = args.p
    if p < 0:
        raise UsageError("--p must be non-negative")
    if kind == "join":
        return join_formula(src, p, R), {}, None, src
    if kind == "fibered-join":
        return fibered_join_formula(src, _map(args.f, src.arity), p, R), {}, None, src
    if kind == "thickened-join":
        eps = _rational("eps", args.eps)
        return thickened_join_formula(src, _map(args.f, src.arity), p, R, eps), {}, None, src
    if kind == "diagonal":
        eps = _rational("eps", args.eps)
        out = thickened_diagonal(src, p, R, eps)
        rec = measure_format(attach_naive_reprs(src))
        d = rec.d if rec.d != float("-inf") else 0
        pred = predict_diagonal_format(p, rec.k, rec.a, rec.s, d)
        return out, {}, pred, src
    if kind == "dagger":
        R_prime = _rational("R-prime", args.R_prime) if args.R_prime is not None else None
        out = dagger(src, R, R_prime, mode=args.mode)
        extra = {"mode": args.mode}
        if args.mode == PAPER_LITERAL:
            extra["note"] = "paper-literal sign convention: projection identity is not expected to hold"
        return out, extra, None, src
    if kind == "star":
        R_prime = _rational("R-prime", args.R_prime) if args.R_prime is not None else None
        res = star_formula(src, p, R, R_prime)
        rec = measure_format(attach_naive_reprs(src))
        pred = predict_star_format(p, rec.k, rec.a)
        return res.doc, {"stages": res.trace}, pred, src
    raise UsageError(f"unknown transform {kind}")


def _bound_check(out: FormulaDoc, pred, variant: str):
    if pred is None:
        return None
    if pred.kind == "diagonal" and variant == "clause-sum":
        pred = replace(pred, M=pred.variants["M_clause_sum"])
    return verify_format_bounds(out, pred)


def cmd_transform(args) -> int:
    if args.kind != "quotient" and args.output is None:
        raise UsageError("-o/--output is required")
    out, extra, pred, src = _run_transform(args)
    check = _bound_check(out, pred, args.bound_variant) if out is not None else None
    sidecar = {
        "tool": "salimits",
        "version": __version__,
        "command": "transform",
        "transform": args.kind,
        "argv": list(sys.argv[1:]),
        "params": _params(args),
        "input_sha256": _sha256(args.input),
        **extra,
    }
    if src is not None:
        sidecar["source_format"] = measure_format(attach_naive_reprs(src)).to_json()
    if out is not None:
        sidecar["measured_format"] = measure_format(out).to_json()
        sidecar["arity"] = out.arity
    if pred is not None:
        sidecar["prediction"] = pred.to_json()
        sidecar["bound_variant"] = args.bound_variant
        sidecar["bound_check"] = check.to_json()
    if out is not None:
        save_doc(out, args.output)
        with open(args.output + ".prov.json", "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    elif args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(extra, fh, indent=2, sort_keys=True)
            fh.write("\n")
    summary = {k: sidecar[k] for k in ("transform", "arity", "measured_format", "bound_check") if k in sidecar}
    summary.update({k: v for k, v in extra.items() if k != "stages"})
    _emit(args, summary)
    if check is not None and not check.passed:
        return EXIT_FAIL
    return EXIT_PASS


def cmd_predict(args) -> int:
    if args.kind == "diagonal":
        pred = predict_diagonal_format(args.p, args.k, args.a, args.s, args.d)
    else:
        pred = predict_star_format(args.p, args.k, args.a)
    _emit(args, pred.to_json())
    return EXIT_PASS


def _finish(args, report, extra: dict | None = None) -> int:
    data = json.loads(write_report(report))
    if extra:
        data.update(extra)
    data["params"] = _params(args)
    text = json.dumps(data, indent=2, sort_keys=True, default=str) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    if getattr(report, "infeasible", False):
        return EXIT_INFEASIBLE
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    kind = args.kind
    if kind == "convergence":
        R = _rational("R", args.R)
        if args.family:
            family = load_doc(args.family)
        else:
            P = _poly("P", args.P, args.arity)
            family = limit_family_single(P, _poly("Q", args.Q, P.arity), R)
        k = family.arity - 1
        if args.target:
            target = load_doc(args.target)
        else:
            target = zero_set_in_ball(_poly("F", args.F, k), R)
        report = limit_convergence_check(
            family,
            target,
            _schedule(args.schedule),
            _box(args, k, R),
            args.resolution,
            _tau(args),
            args.slack_steps,
            args.final_steps,
            args.threads,
        )
        return _finish(args, report)

    doc = _load(args.input)
    if kind == "lift":
        doc = attach_naive_reprs(doc)
        lifted, proj = divfree_lift(doc)
        report = lift_consistency_check(doc, lifted, proj, args.samples, args.seed, _box(args, doc.arity), resolution=args.resolution)
        return _finish(args, report)
    if kind == "dagger":
        R = _rational("R", args.R)
        dag = dagger(doc, R, mode=args.mode)
        report = dagger_projection_check(doc, dag, args.samples, args.seed)
        return _finish(args, report)
    if kind == "sandwich":
        R = _rational("R", args.R)
        f = _map(args.f, doc.arity)
        eps = _rational("eps", args.eps)
        base = sample_realization(doc, _box(args, doc.arity, R), "grid", args.resolution, _tau(args), args.seed, args.threads)
        if base.empty:
            raise EmptyCloudError("base realization sampled empty")
        extra = {}
        if args.eta is not None:
            eta = _rational("eta", args.eta, positive=False)
        else:
            est = estimate_eta(args.p, R, f, base)
            eta = est.eta * _rational("eta-factor", args.eta_factor)
            extra["eta_estimate"] = est.to_json()
        report = sandwich_check(doc, f, args.p, R, eps, eta, args.samples, args.seed, base=base)
        return _finish(args, report, extra)
    if kind == "formats":
        construction = args.construction or _construction_of(doc)
        if args.source is None:
            raise UsageError("verify formats needs --source (the formula the construction was applied to)")
        src = attach_naive_reprs(load_doc(args.source))
        rec = measure_format(src)
        p = int(doc.meta.get("p", args.p))
        if construction == "diagonal":
            d = rec.d if rec.d != float("-inf") else 0
            pred = predict_diagonal_format(p, rec.k, rec.a, rec.s, d)
            if args.bound_variant == "clause-sum":
                pred = replace(pred, M=pred.variants["M_clause_sum"])
        else:
            pred = predict_star_format(p, rec.k, rec.a)
        if args.bound_M is not None:
                pred = replace(pred, M=args.bound_M)
        check = verify_format_bounds(doc, pred)
        data = {"check": "formats", "construction": construction, **check.to_json(), "params": _params(args)}
        text = json.dumps(data, indent=2, sort_keys=True, default=str) + "\n"
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        print(text, end="")
        return EXIT_PASS if check.passed else EXIT_FAIL
    raise UsageError(f"unknown check {kind}")


def _construction_of(doc: FormulaDoc) -> str:
    c = (doc.meta or {}).get("construction")
    if c == "thickened-diagonal":
        return "diagonal"
    if c == "star":
        return "star"
    raise UsageError("cannot tell which construction produced this file; pass --construction")


def _slug(value: Fraction) -> str:
    return str(value).replace("/", "_").replace("-", "m")


def cmd_export(args) -> int:
    if args.sampling == "random":
        if args.count is None or args.count <= 0:
            raise UsageError("--count must be a positive integer for random sampling")
        if args.tau == "auto":
            raise UsageError("random sampling needs an explicit --tau")
    elif args.count is not None and args.count <= 0:
        raise UsageError("--count must be positive")
    os.makedirs(args.outdir, exist_ok=True)
    written = []
    warnings = []
    for path in args.inputs:
        doc = load_doc(path)
        stem = os.path.splitext(os.path.basename(path))[0]
        jobs = []
        if doc.parameter is not None:
            if not args.t:
                raise UsageError(f"{path} is a family; pass --t")
            for t in args.t:
                tv = _rational("t", t)
                jobs.append((fiber(doc, tv), tv, f"{stem}_t{_slug(tv)}.csv"))
        else:
            jobs.append((doc, None, f"{stem}.csv"))
        for d, tv, name in jobs:
            size = args.count if args.sampling == "random" else args.resolution
            cloud = sample_realization(d, _box(args, d.arity), args.sampling, size, _tau(args), args.seed, args.threads, tv)
            cloud.meta["source_file"] = os.path.basename(path)
            out = os.path.join(args.outdir, name)
            cloud_to_csv(cloud, out)
            written.append({"file": out, "points": len(cloud)})
            if cloud.empty:
                warnings.append(f"warning: {out}: empty cloud")
    for w in warnings:
        print(w, file=sys.stderr)
    _emit(args, {"written": written})
    return EXIT_PASS


COMMANDS = {
    "inspect": cmd_inspect,
    "transform": cmd_transform,
    "predict-format": cmd_predict,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except (UsageError, FormulaParseError, PolyParseError) as exc:
        print(f"salimits: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmptyCloudError as exc:
        print(f"salimits: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, ZeroDivisionError, OSError, KeyError) as exc:
        stage = getattr(args, "kind", args.command)
        print(f"salimits: error in {stage}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
