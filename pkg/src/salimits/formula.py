"""Quantifier-free formulas over polynomial sign conditions.

A :class:`FormulaDoc` couples a deduplicated polynomial table (each entry may
carry an additive representation) with a Boolean tree of atoms ``P_i REL 0``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .addrepr import DIVISION_FREE, AdditiveRepr, format_slp, naive_repr, parse_slp
from .polycore import (
    PolyExprParser,
    PolyParseError,
    SparsePoly,
    as_rational,
    tokenize,
)

RELATIONS = ("=", "<", ">", "<=", ">=")
WEAK = ("=", "<=", ">=")
STRICT = ("<", ">")
FORMAT_TAG = "salimits.formula/1"

__all__ = [
    "And",
    "Atom",
    "BatchEvaluator",
    "DocBuilder",
    "FormatRecord",
    "FormulaDoc",
    "FormulaParseError",
    "Not",
    "Or",
    "doc_from_json",
    "doc_to_json",
    "eval_formula",
    "format_formula",
    "is_pclosed",
    "load_doc",
    "measure_format",
    "monomial_atom_rewrite",
    "parse_formula",
    "save_doc",
]


class FormulaParseError(PolyParseError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    poly_ref: int
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("And needs at least one child")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("Or needs at least one child")


@dataclass(frozen=True)
class Not:
    child: object


Formula = Atom | And | Or | Not


def conj(items: Iterable) -> Formula:
    items = list(items)
    return items[0] if len(items) == 1 else And(tuple(items))


def disj(items: Iterable) -> Formula:
    items = list(items)
    return items[0] if len(items) == 1 else Or(tuple(items))


def iter_atoms(node) -> Iterable[Atom]:
    if isinstance(node, Atom):
        yield node
    elif isinstance(node, Not):
        yield from iter_atoms(node.child)
    else:
        for c in node.children:
            yield from iter_atoms(c)


def map_atoms(node, fn):
    """Rebuild ``node`` with every atom replaced by ``fn(atom)``."""
    if isinstance(node, Atom):
        return fn(node)
    if isinstance(node, Not):
        return Not(map_atoms(node.child, fn))
    return type(node)(tuple(map_atoms(c, fn) for c in node.children))


@dataclass
class FormulaDoc:
    """Formula plus its polynomial table.  Treated as immutable."""

    arity: int
    polys: tuple[SparsePoly, ...]
    reprs: tuple[AdditiveRepr | None, ...]
    root: Formula
    names: tuple[str, ...] | None = None
    parameter: int | None = None
    layout: dict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.polys = tuple(self.polys)
        self.reprs = tuple(self.reprs) if self.reprs else (None,) * len(self.polys)
        if len(self.reprs) != len(self.polys):
            raise ValueError("reprs and polys differ in length")
        for p in self.polys:
            if p.arity != self.arity:
                raise ValueError(f"polynomial of arity {p.arity} in a doc of arity {self.arity}")
        for a in iter_atoms(self.root):
            if not 0 <= a.poly_ref < len(self.polys):
                raise ValueError(f"atom references missing polynomial {a.poly_ref}")

    def referenced(self) -> list[int]:
        return sorted({a.poly_ref for a in iter_atoms(self.root)})

    def var_names(self) -> list[str]:
        return list(self.names) if self.names else [f"x{i + 1}" for i in range(self.arity)]

    def with_root(self, root) -> "FormulaDoc":
        return replace(self, root=root)


class DocBuilder:
    """Accumulates a deduplicated polynomial table while a formula is assembled."""

    def __init__(self, arity: int):
        self.arity = arity
        self.polys: list[SparsePoly] = []
        self.reprs: list[AdditiveRepr | None] = []
        self._index: dict[SparsePoly, int] = {}

    def poly(self, p: SparsePoly, r: AdditiveRepr | None = None) -> int:
        if p.arity != self.arity:
            raise ValueError(f"polynomial arity {p.arity} differs from {self.arity}")
        idx = self._index.get(p)
        if idx is None:
            idx = len(self.polys)
            self._index[p] = idx
            self.polys.append(p)
            self.reprs.append(r)
        elif r is not None:
            old = self.reprs[idx]
            if old is None or len(r.steps) < len(old.steps):
                self.reprs[idx] = r
        return idx

    def atom(self, p: SparsePoly, rel: str, r: AdditiveRepr | None = None) -> Atom:
        return Atom(self.poly(p, r), rel)

    def import_doc(self, doc: FormulaDoc, var_map: Sequence[int]):
        """Copy ``doc``'s formula into this ambient space; return the new root."""
        mapping = {}
        for i, p in enumerate(doc.polys):
            r = doc.reprs[i]
            mapping[i] = self.poly(p.rename(var_map, self.arity), r.rename(var_map, self.arity) if r else None)
        return map_atoms(doc.root, lambda a: Atom(mapping[a.poly_ref], a.rel))

    def build(self, root, **kwargs) -> FormulaDoc:
        # drop table entries the final formula does not reference
        used = sorted({a.poly_ref for a in iter_atoms(root)})
        remap = {old: new for new, old in enumerate(used)}
        root = map_atoms(root, lambda a: Atom(remap[a.poly_ref], a.rel))
        return FormulaDoc(
            self.arity,
            tuple(self.polys[i] for i in used),
            tuple(self.reprs[i] for i in used),
            root,
            **kwargs,
        )


# ---------------------------------------------------------------------------
# DSL parsing and serialisation
# ---------------------------------------------------------------------------


class _FormulaParser(PolyExprParser):
    def formula(self):
        node = self.conjunction()
        items = [node]
        while self.tok.text == "|":
            self.advance()
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else ("or", items)

    def conjunction(self):
        items = [self.negation()]
        while self.tok.text == "&":
            self.advance()
            items.append(self.negation())
        return items[0] if len(items) == 1 else ("and", items)

    def negation(self):
        if self.tok.text == "!":
            self.advance()
            return ("not", self.negation())
        return self.primary_formula()

    def primary_formula(self):
        if self.tok.text == "(":
            start = self.pos
            try:
                self.advance()
                node = self.formula()
                self.expect(")")
                if self.tok.kind == "rel" or self.tok.text in ("+", "-", "*", "/", "^"):
                    raise self.error("parenthesised formula used as a term")
                return node
            except PolyParseError as first:
                furthest = self.pos
                self.pos = start
                try:
                    return self.atom()
                except PolyParseError as second:
                    raise (first if furthest > self.pos else second)
        return self.atom()

    def atom(self):
        lhs = self.expr()
        t = self.tok
        if t.kind != "rel":
            raise self.error("expected a relation (=, <, >, <=, >=)")
        self.advance()
        rhs = self.expr()
        rel = "=" if t.text == "==" else t.text
        return ("atom", lhs, rel, rhs)


def parse_formula(text: str, arity: int | None = None) -> FormulaDoc:
    """Parse the formula DSL, e.g. ``"x1 <= 0 & !(x2 > 0)"``."""
    try:
        parser = _FormulaParser(tokenize(text))
        tree = parser.formula()
        if parser.tok.kind != "eof":
            raise parser.error("unexpected trailing input")
    except PolyParseError as exc:
        raise FormulaParseError(str(exc).rsplit(" (line", 1)[0], exc.line, exc.column) from None

    def max_var(node):
        if node[0] == "atom":
            return max(node[1].max_var(), node[3].max_var())
        if node[0] == "not":
            return max_var(node[1])
        return max(max_var(c) for c in node[1])

    needed = max_var(tree)
    if arity is None:
        arity = max(needed, 1)
    elif needed > arity:
        raise FormulaParseError(f"formula uses x{needed} but arity is {arity}", 1, 1)
    builder = DocBuilder(arity)

    def build(node):
        kind = node[0]
        if kind == "atom":
            try:
                p = node[1].build(arity) - node[3].build(arity)
            except ZeroDivisionError as exc:
                raise FormulaParseError(str(exc), 1, 1) from None
            return builder.atom(p, node[2])
        if kind == "not":
            return Not(build(node[1]))
        children = tuple(build(c) for c in node[1])
        return And(children) if kind == "and" else Or(children)

    return builder.build(build(tree))


def _format_node(node, doc: FormulaDoc, names, parent: str) -> str:
    if isinstance(node, Atom):
        return f"{doc.polys[node.poly_ref].to_string(names)} {node.rel} 0"
    if isinstance(node, Not):
        return "!(" + _format_node(node.child, doc, names, "not") + ")"
    if isinstance(node, And):
        text = " & ".join(_format_node(c, doc, names, "and") for c in node.children)
        return f"({text})" if parent == "not" else text
    text = " | ".join(_format_node(c, doc, names, "or") for c in node.children)
    return f"({text})" if parent in ("and", "not") else text


def format_formula(doc: FormulaDoc) -> str:
    """DSL text for ``doc``; variables are always written ``x1..xk``."""
    names = [f"x{i + 1}" for i in range(doc.arity)]
    return _format_node(doc.root, doc, names, "top")


def _node_to_json(node):
    if isinstance(node, Atom):
        return {"atom": node.poly_ref, "rel": node.rel}
    if isinstance(node, Not):
        return {"not": _node_to_json(node.child)}
    key = "and" if isinstance(node, And) else "or"
    return {key: [_node_to_json(c) for c in node.children]}


def _node_from_json(obj):
    if "atom" in obj:
        return Atom(int(obj["atom"]), obj["rel"])
    if "not" in obj:
        return Not(_node_from_json(obj["not"]))
    if "and" in obj:
        return And(tuple(_node_from_json(c) for c in obj["and"]))
    if "or" in obj:
        return Or(tuple(_node_from_json(c) for c in obj["or"]))
    raise ValueError(f"unrecognised formula node {obj!r}")


def _rat_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def doc_to_json(doc: FormulaDoc) -> dict:
    polys = []
    for p, r in zip(doc.polys, doc.reprs):
        entry = {"terms": [[list(e), _rat_str(c)] for e, c in p.terms()], "text": p.to_string()}
        if r is not None:
            entry["slp"] = format_slp(r)
        polys.append(entry)
    out = {
        "format": FORMAT_TAG,
        "arity": doc.arity,
        "polynomials": polys,
        "formula": _node_to_json(doc.root),
    }
    if doc.names:
        out["names"] = list(doc.names)
    if doc.parameter is not None:
        out["parameter"] = doc.parameter
    if doc.layout:
        out["layout"] = doc.layout
    if doc.meta:
        out["meta"] = doc.meta
    return out


def doc_from_json(obj: dict) -> FormulaDoc:
    if obj.get("format") != FORMAT_TAG:
        raise ValueError(f"not a {FORMAT_TAG} document")
    k = int(obj["arity"])
    polys, reprs = [], []
    for entry in obj["polynomials"]:
        polys.append(SparsePoly(k, {tuple(e): Fraction(c) for e, c in entry["terms"]}))
        reprs.append(parse_slp(entry["slp"]) if entry.get("slp") else None)
    return FormulaDoc(
        k,
        tuple(polys),
        tuple(reprs),
        _node_from_json(obj["formula"]),
        names=tuple(obj["names"]) if obj.get("names") else None,
        parameter=obj.get("parameter"),
        layout=obj.get("layout"),
        meta=obj.get("meta") or {},
    )


def load_doc(path: str) -> FormulaDoc:
    """Read a ``.json`` document or a ``.saf`` DSL file.

    A DSL file may fix its ambient dimension with a ``# arity: k`` comment line.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return doc_from_json(json.loads(text))
    m = _ARITY_LINE.search(text)
    return parse_formula(text, int(m.group(1)) if m else None)


_ARITY_LINE = re.compile(r"^\s*#\s*arity\s*:\s*(\d+)\s*$", re.MULTILINE)


def save_doc(doc: FormulaDoc, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if path.endswith(".saf"):
            fh.write(format_formula(doc) + "\n")
        else:
            json.dump(doc_to_json(doc), fh, indent=1, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _holds(value, rel: str, tau) -> bool:
    if rel == "=":
        return value == 0 if not tau else abs(value) <= tau
    if rel == "<":
        return value < 0
    if rel == ">":
        return value > 0
    if rel == "<=":
        return value <= 0
    return value >= 0


def _tau_for(tau, i):
    if tau is None:
        return None
    if isinstance(tau, (list, tuple, np.ndarray)):
        return as_rational(float(tau[i])) if not isinstance(tau[i], Fraction) else tau[i]
    return as_rational(tau) if not isinstance(tau, Fraction) else tau


def eval_formula(doc: FormulaDoc, x: Sequence, tau=None) -> bool:
    """Exact truth of the formula at ``x``.

    With ``tau`` (scalar or one value per polynomial) equalities are relaxed
    to ``|F| <= tau``; inequalities stay exact.
    """
    if len(x) != doc.arity:
        raise ValueError(f"point has {len(x)} coordinates, expected {doc.arity}")
    point = tuple(v if isinstance(v, (int, Fraction)) else as_rational(v) for v in x)
    cache: dict[int, Fraction] = {}

    def value(i):
        if i not in cache:
            cache[i] = doc.polys[i].eval(point)
        return cache[i]

    def walk(node) -> bool:
        if isinstance(node, Atom):
            return _holds(value(node.poly_ref), node.rel, _tau_for(tau, node.poly_ref))
        if isinstance(node, Not):
            return not walk(node.child)
        if isinstance(node, And):
            return all(walk(c) for c in node.children)
        return any(walk(c) for c in node.children)

    return walk(doc.root)


class _CompiledPoly:
    __slots__ = ("exps", "coeffs", "poly")

    def __init__(self, p: SparsePoly):
        self.poly = p
        terms = p.terms()
        self.exps = np.array([e for e, _ in terms], dtype=np.int64).reshape(len(terms), p.arity)
        self.coeffs = np.array([float(c) for _, c in terms], dtype=np.float64)

    def values(self, pts: np.ndarray, powers) -> tuple[np.ndarray, np.ndarray]:
        n = pts.shape[0]
        val = np.zeros(n)
        scale = np.zeros(n)
        for exp, c in zip(self.exps, self.coeffs):
            mono = np.full(n, c)
            for i, e in enumerate(exp):
                if e:
                    mono = mono * powers(i, int(e))
            val += mono
            scale += np.abs(mono)
        return val, scale


class BatchEvaluator:
    """Vectorised τ-relaxed membership with an exact recheck near boundaries.

    A point whose floating value lies within ``10 * eps * (sum of |terms|)`` of
    an atom boundary is re-evaluated in rational arithmetic, using
    ``exact_points`` when supplied or the exact binary value of the float.
    """

    def __init__(self, doc: FormulaDoc, tau=None):
        self.doc = doc
        self.compiled = [_CompiledPoly(p) for p in doc.polys]
        if tau is None:
            self.tau = np.zeros(len(doc.polys))
        else:
            self.tau = np.broadcast_to(np.asarray(tau, dtype=np.float64), (len(doc.polys),)).copy()

    def _atom_masks(self, pts: np.ndarray, exact_points):
        n = pts.shape[0]
        cache: dict[tuple[int, int], np.ndarray] = {}

        def powers(i, e):
            key = (i, e)
            if key not in cache:
                cache[key] = pts[:, i] ** e
            return cache[key]

        eps = np.finfo(np.float64).eps
        needed = sorted({(a.poly_ref, a.rel) for a in iter_atoms(self.doc.root)})
        values = {}
        for ref in {r for r, _ in needed}:
            values[ref] = self.compiled[ref].values(pts, powers)
        masks = {}
        for ref, rel in needed:
            val, scale = values[ref]
            tau = self.tau[ref]
            margin = 10 * eps * scale + 1e-300
            if rel == "=":
                mask = np.abs(val) <= tau
                near = np.abs(np.abs(val) - tau) <= margin
            else:
                if rel == "<":
                    mask = val < 0
                elif rel == ">":
                    mask = val > 0
                elif rel == "<=":
                    mask = val <= 0
                else:
                    mask = val >= 0
                near = np.abs(val) <= margin
            idx = np.nonzero(near)[0]
            if idx.size:
                poly = self.compiled[ref].poly
                exact_tau = Fraction(float(tau))
                mask = mask.copy()
                for j in idx:
                    if exact_points is not None:
                        point = exact_points[j]
                    else:
                        point = tuple(Fraction(float(v)) for v in pts[j])
                    mask[j] = _holds(poly.eval(point), rel, exact_tau)
            masks[(ref, rel)] = mask
        return masks, n

    def evaluate(self, pts: np.ndarray, exact_points=None) -> np.ndarray:
        pts = np.ascontiguousarray(pts, dtype=np.float64).reshape(-1, self.doc.arity)
        masks, n = self._atom_masks(pts, exact_points)

        def walk(node):
            if isinstance(node, Atom):
                return masks[(node.poly_ref, node.rel)]
            if isinstance(node, Not):
                return ~walk(node.child)
            out = walk(node.children[0]).copy()
            for c in node.children[1:]:
                if isinstance(node, And):
                    out &= walk(c)
                else:
                    out |= walk(c)
            return out

        if n == 0:
            return np.zeros(0, dtype=bool)
        return walk(self.doc.root)


# ---------------------------------------------------------------------------
# format accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FormatRecord:
    dense: tuple[int, object, int]
    additive: tuple[int, int]
    divfree: bool
    #: table indices whose representation was derived automatically (not optimal)
    auto_derived: tuple[int, ...] = ()

    @property
    def s(self) -> int:
        return self.dense[0]

    @property
    def d(self):
        return self.dense[1]

    @property
    def k(self) -> int:
        return self.dense[2]

    @property
    def a(self) -> int:
        return self.additive[0]

    def to_json(self) -> dict:
        d = self.dense[1]
        return {
            "dense": {"s": self.dense[0], "d": d if d != float("-inf") else None, "k": self.dense[2]},
            "additive": {"a": self.additive[0], "k": self.additive[1]},
            "divfree": self.divfree,
            "auto_derived": list(self.auto_derived),
        }


def measure_format(doc: FormulaDoc) -> FormatRecord:
    refs = doc.referenced()
    degrees = [doc.polys[i].degree for i in refs]
    d = max(degrees) if degrees else float("-inf")
    a = 0
    divfree = True
    auto = []
    for i in refs:
        r = doc.reprs[i]
        if r is None:
            r = naive_repr(doc.polys[i])
            auto.append(i)
        elif r.minimal_mode() != DIVISION_FREE:
            divfree = False
        a += len(r.steps)
    return FormatRecord((len(refs), d, doc.arity), (a, doc.arity), divfree, tuple(auto))


def attach_naive_reprs(doc: FormulaDoc) -> FormulaDoc:
    reprs = tuple(r if r is not None else naive_repr(p) for p, r in zip(doc.polys, doc.reprs))
    return replace(doc, reprs=reprs)


def is_pclosed(doc: FormulaDoc) -> bool:
    def walk(node) -> bool:
        if isinstance(node, Atom):
            return node.rel in WEAK
        if isinstance(node, Not):
            return False
        return all(walk(c) for c in node.children)

    return walk(doc.root)


# ---------------------------------------------------------------------------
# monomial atoms -> sign conditions on bare variables
# ---------------------------------------------------------------------------


def monomial_atom_rewrite(doc: FormulaDoc) -> FormulaDoc:
    """Replace every single-term atom by a sign pattern over the variables.

    ``c * x^e REL 0`` depends only on the signs of the variables: it vanishes
    iff some variable with positive exponent vanishes, and otherwise its sign
    is ``sign(c)`` times the parity of the negative odd-exponent variables.
    Constant atoms are kept as they are (they are already variable-free).
    """
    k = doc.arity
    b = DocBuilder(k)
    var = [SparsePoly.variable(k, i) for i in range(k)]
    one = SparsePoly.constant(k, 1)

    def true_():
        return b.atom(one, ">")

    def false_():
        return b.atom(one, "<")

    def nonzero(i):
        return Or((b.atom(var[i], "<"), b.atom(var[i], ">")))

    def signed(want_positive: bool, c_positive: bool, odd, even):
        # all variables nonzero and the odd ones carry the right parity of signs
        parts = [nonzero(i) for i in even]
        need_neg_parity = 0 if want_positive == c_positive else 1
        if odd:
            patterns = []
            for signs in product((False, True), repeat=len(odd)):
                if sum(signs) % 2 == need_neg_parity:
                    patterns.append(conj(b.atom(var[i], "<" if neg else ">") for i, neg in zip(odd, signs)))
            parts.append(disj(patterns))
        elif need_neg_parity:
            return false_()
        return conj(parts) if parts else true_()

    def rewrite(a: Atom):
        p = doc.polys[a.poly_ref]
        if not p.is_monomial() or p.is_constant():
            return b.atom(p, a.rel, doc.reprs[a.poly_ref])
        (exp, c), = p.terms()
        used = [i for i, e in enumerate(exp) if e]
        odd = [i for i in used if exp[i] % 2]
        even = [i for i in used if exp[i] % 2 == 0]
        zero = disj(b.atom(var[i], "=") for i in used)
        if a.rel == "=":
            return zero
        pos, neg = signed(True, c > 0, odd, even), signed(False, c > 0, odd, even)
        if a.rel == ">":
            return pos
        if a.rel == "<":
            return neg
        if a.rel == ">=":
            return Or((zero, pos))
        return Or((zero, neg))

    root = map_atoms(doc.root, rewrite)
    return b.build(root, names=doc.names, parameter=doc.parameter, layout=doc.layout)
