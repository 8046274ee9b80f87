"""Straight-line additive representations of polynomials.

A representation of length ``a`` is a sequence of binomial steps

    Q_j = u_j * x^alpha_j * prod_{i<j} Q_i^gamma_ji + v_j * x^beta_j * prod_{i<j} Q_i^delta_ji

followed by a final product ``P = c * x^zeta * prod_j Q_j^eta_j``.  Each step
costs exactly one addition, so the length is an upper-bound witness for the
additive complexity.  Three modes are recognised:

* ``division-free``: every exponent is a natural number;
* ``lemma31``: steps use natural exponents, the final product may use integers;
* ``general``: integer exponents everywhere.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .polycore import SparsePoly, as_rational

DIVISION_FREE = "division-free"
LEMMA31 = "lemma31"
GENERAL = "general"
MODES = (DIVISION_FREE, LEMMA31, GENERAL)

DEFAULT_SIZE_CAP = 10**6

__all__ = [
    "AddStep",
    "AdditiveRepr",
    "DegenerateDenominator",
    "DivisionByZero",
    "FinalStep",
    "RationalExpansion",
    "RationalFunctionPair",
    "SizeCapExceeded",
    "SlpBuilder",
    "SlpParseError",
    "ValidationReport",
    "additive_complexity_witness",
    "constant_repr",
    "format_slp",
    "lemma31_normalize",
    "naive_repr",
    "parse_slp",
    "quotient_form",
    "random_generic_point",
    "slp_eval",
    "slp_expand",
    "slp_validate",
]


class DivisionByZero(ZeroDivisionError):
    """A step raised to a negative power vanishes at the evaluation point."""


class SizeCapExceeded(RuntimeError):
    pass


class DegenerateDenominator(ArithmeticError):
    pass


class SlpParseError(ValueError):
    pass


def _vec(values: Iterable[int]) -> tuple[int, ...]:
    return tuple(int(v) for v in values)


@dataclass(frozen=True)
class AddStep:
    u: Fraction
    alpha: tuple[int, ...]
    gamma: tuple[int, ...]
    v: Fraction
    beta: tuple[int, ...]
    delta: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", as_rational(self.u))
        object.__setattr__(self, "v", as_rational(self.v))
        for name in ("alpha", "gamma", "beta", "delta"):
            object.__setattr__(self, name, _vec(getattr(self, name)))

    def exponents(self) -> Iterable[int]:
        yield from self.alpha
        yield from self.gamma
        yield from self.beta
        yield from self.delta


@dataclass(frozen=True)
class FinalStep:
    c: Fraction
    zeta: tuple[int, ...]
    eta: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", as_rational(self.c))
        object.__setattr__(self, "zeta", _vec(self.zeta))
        object.__setattr__(self, "eta", _vec(self.eta))


@dataclass(frozen=True)
class AdditiveRepr:
    arity: int
    steps: tuple[AddStep, ...]
    final: FinalStep
    mode: str = DIVISION_FREE

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")

    @property
    def length(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def minimal_mode(self) -> str:
        """The most restrictive mode whose sign rules this program satisfies."""
        steps_nat = all(e >= 0 for s in self.steps for e in s.exponents())
        final_nat = all(e >= 0 for e in self.final.zeta + self.final.eta)
        if steps_nat and final_nat:
            return DIVISION_FREE
        if steps_nat:
            return LEMMA31
        return GENERAL

    def with_mode(self, mode: str) -> "AdditiveRepr":
        return AdditiveRepr(self.arity, self.steps, self.final, mode)

    def rename(self, var_map: Sequence[int], arity: int) -> "AdditiveRepr":
        """Re-embed the program in a ring of ``arity`` variables (variable i -> var_map[i])."""
        if len(var_map) != self.arity:
            raise ValueError("var_map length must equal arity")

        def move(vec):
            out = [0] * arity
            for i, e in enumerate(vec):
                out[var_map[i]] += e
            return tuple(out)

        steps = tuple(
            AddStep(s.u, move(s.alpha), s.gamma, s.v, move(s.beta), s.delta) for s in self.steps
        )
        final = FinalStep(self.final.c, move(self.final.zeta), self.final.eta)
        return AdditiveRepr(arity, steps, final, self.mode)


@dataclass
class ValidationReport:
    valid: bool
    mode: str
    length: int
    errors: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid


def slp_validate(r: AdditiveRepr) -> ValidationReport:
    errors: list[str] = []
    k = r.arity
    for j, s in enumerate(r.steps, start=1):
        for name in ("alpha", "beta"):
            vec = getattr(s, name)
            if len(vec) != k:
                errors.append(f"step {j}: {name} has length {len(vec)}, expected {k}")
        for name in ("gamma", "delta"):
            vec = getattr(s, name)
            if len(vec) > j - 1:
                extra = [i + 1 for i in range(j - 1, len(vec)) if vec[i]]
                if extra:
                    errors.append(f"step {j}: {name} forward reference to step(s) {extra}")
                else:
                    errors.append(f"step {j}: {name} has length {len(vec)}, expected {j - 1}")
            elif len(vec) < j - 1:
                errors.append(f"step {j}: {name} has length {len(vec)}, expected {j - 1}")
        if r.mode in (DIVISION_FREE, LEMMA31):
            neg = [name for name in ("alpha", "gamma", "beta", "delta") if any(e < 0 for e in getattr(s, name))]
            if neg:
                errors.append(f"step {j}: negative exponent in {', '.join(neg)} not allowed in {r.mode} mode")
    f = r.final
    if len(f.zeta) != k:
        errors.append(f"final: zeta has length {len(f.zeta)}, expected {k}")
    if len(f.eta) != len(r.steps):
        errors.append(f"final: eta has length {len(f.eta)}, expected {len(r.steps)}")
    if r.mode == DIVISION_FREE and any(e < 0 for e in f.zeta + f.eta):
        errors.append("final: negative exponent not allowed in division-free mode")
    return ValidationReport(not errors, r.mode, len(r.steps), errors)


def _require_valid(r: AdditiveRepr) -> None:
    report = slp_validate(r)
    if not report.valid:
        raise ValueError("invalid additive representation: " + "; ".join(report.errors))


def _monomial_value(coeff, x, xexp, qvals, qexp):
    value = coeff
    for xi, e in zip(x, xexp):
        if e:
            if e < 0 and xi == 0:
                raise DivisionByZero("variable with negative exponent vanishes")
            value = value * xi ** e
    for qi, e in zip(qvals, qexp):
        if e:
            if e < 0 and qi == 0:
                raise DivisionByZero("step with negative exponent vanishes")
            value = value * qi ** e
    return value


def slp_eval(r: AdditiveRepr, x: Sequence) -> Fraction:
    """Evaluate step by step; exact for rational inputs."""
    if len(x) != r.arity:
        raise ValueError(f"point has {len(x)} coordinates, expected {r.arity}")
    x = [as_rational(v) if not isinstance(v, (int, Fraction)) else v for v in x]
    return _eval_steps(r, x)[1]


def _eval_steps(r: AdditiveRepr, x):
    q: list = []
    for s in r.steps:
        val = 0
        # a zero coefficient kills its term, even if the term would divide by zero
        if s.u:
            val = val + _monomial_value(s.u, x, s.alpha, q, s.gamma)
        if s.v:
            val = val + _monomial_value(s.v, x, s.beta, q, s.delta)
        q.append(val)
    f = r.final
    result = _monomial_value(f.c, x, f.zeta, q, f.eta) if f.c else Fraction(0)
    return q, Fraction(result)


def slp_step_values(r: AdditiveRepr, x: Sequence) -> list[Fraction]:
    """Values of Q_1..Q_a at ``x`` (used by the division-free lift)."""
    x = [as_rational(v) for v in x]
    return [Fraction(v) for v in _eval_steps(r, x)[0]]


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalExpansion:
    num: SparsePoly
    den: SparsePoly


def _check_cap(p: SparsePoly, cap: int) -> SparsePoly:
    if len(p) > cap:
        raise SizeCapExceeded(f"intermediate polynomial has {len(p)} terms (cap {cap})")
    return p


def _capped_pow(base: SparsePoly, n: int, cap: int) -> SparsePoly:
    result = SparsePoly.constant(base.arity, 1)
    while n:
        if n & 1:
            result = _check_cap(result * base, cap)
        n >>= 1
        if n:
            base = _check_cap(base * base, cap)
    return result


def _expand_monomial(coeff, k, xexp, polys, qexp, cap) -> SparsePoly:
    term = SparsePoly.monomial(k, xexp, coeff)
    for p, e in zip(polys, qexp):
        if e:
            term = _check_cap(term * _capped_pow(p, e, cap), cap)
    return term


def _expand_divfree(r: AdditiveRepr, cap: int) -> SparsePoly:
    k = r.arity
    polys: list[SparsePoly] = []
    for s in r.steps:
        total = SparsePoly.zero(k)
        if s.u:
            total = total + _expand_monomial(s.u, k, s.alpha, polys, s.gamma, cap)
        if s.v:
            total = total + _expand_monomial(s.v, k, s.beta, polys, s.delta, cap)
        polys.append(_check_cap(total, cap))
    f = r.final
    if not f.c:
        return SparsePoly.zero(k)
    return _expand_monomial(f.c, k, f.zeta, polys, f.eta, cap)


def slp_expand(r: AdditiveRepr, size_cap: int = DEFAULT_SIZE_CAP):
    """Expand to a SparsePoly (division-free) or a :class:`RationalExpansion`."""
    _require_valid(r)
    if r.minimal_mode() == DIVISION_FREE:
        return _expand_divfree(r, size_cap)
    pair = quotient_form(r, size_cap=size_cap, check=False)
    num = _expand_divfree(pair.num, size_cap)
    den = _expand_divfree(pair.den, size_cap)
    if den.is_zero():
        raise DegenerateDenominator("denominator expands to the zero polynomial")
    return RationalExpansion(num, den)


def additive_complexity_witness(r: AdditiveRepr) -> int:
    """Length of the program: an upper bound on the additive complexity."""
    _require_valid(r)
    return len(r.steps)


# ---------------------------------------------------------------------------
# normalisation (common-denominator propagation) and quotient form
# ---------------------------------------------------------------------------


def lemma31_normalize(r: AdditiveRepr) -> AdditiveRepr:
    """Rewrite ``r`` so every step has natural exponents; only the final may divide.

    Each Q_j is tracked as N_j * L_j with N_j a new binomial step and L_j a
    Laurent monomial in (x, N_1, ..., N_{j-1}).  For a step, both terms are
    written as Laurent monomials over (x, N); their elementwise minimum G is
    pulled out, leaving N_j = u * T1/G + v * T2/G with natural exponents, and
    L_j = G.  The final product absorbs all the L's.  Length is preserved.
    """
    _require_valid(r)
    if r.minimal_mode() in (DIVISION_FREE, LEMMA31):
        return r.with_mode(LEMMA31)
    k, a = r.arity, len(r.steps)
    width = k + a
    laurent: list[list[int]] = []
    new_steps: list[AddStep] = []

    def term_vector(xexp, qexp):
        vec = list(xexp) + [0] * a
        for i, e in enumerate(qexp):
            if e:
                vec[k + i] += e
                for pos, le in enumerate(laurent[i]):
                    vec[pos] += e * le
        return vec

    for j, s in enumerate(r.steps):
        t1 = term_vector(s.alpha, s.gamma)
        t2 = term_vector(s.beta, s.delta)
        if not s.u:
            g = t2
        elif not s.v:
            g = t1
        else:
            g = [min(p, q) for p, q in zip(t1, t2)]
        d1 = [p - q for p, q in zip(t1, g)] if s.u else [0] * width
        d2 = [p - q for p, q in zip(t2, g)] if s.v else [0] * width
        new_steps.append(AddStep(s.u, d1[:k], d1[k:k + j], s.v, d2[:k], d2[k:k + j]))
        laurent.append(g)
    f = r.final
    fvec = term_vector(f.zeta, f.eta)
    final = FinalStep(f.c, fvec[:k], fvec[k:])
    return AdditiveRepr(k, tuple(new_steps), final, LEMMA31)


@dataclass(frozen=True)
class RationalFunctionPair:
    num: AdditiveRepr
    den: AdditiveRepr
    #: length of the common lemma31 program both halves were cut from
    shared_length: int

    @property
    def total_length(self) -> int:
        return len(self.num.steps) + len(self.den.steps)

    def eval(self, x: Sequence) -> Fraction:
        d = slp_eval(self.den, x)
        if d == 0:
            raise DivisionByZero("denominator vanishes")
        return slp_eval(self.num, x) / d


def _closure(r: AdditiveRepr, roots: Iterable[int]) -> list[int]:
    needed = set()
    stack = [i for i in roots]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        s = r.steps[i]
        for vec, coeff in ((s.gamma, s.u), (s.delta, s.v)):
            if coeff:
                stack.extend(t for t, e in enumerate(vec) if e)
    return sorted(needed)


def _extract(r: AdditiveRepr, c, zeta, eta) -> AdditiveRepr:
    """Sub-program computing c * x^zeta * prod Q^eta, pruned to what it uses."""
    keep = _closure(r, [i for i, e in enumerate(eta) if e])
    index = {old: new for new, old in enumerate(keep)}
    steps = []
    for old in keep:
        s = r.steps[old]
        n = index[old]
        gamma = [0] * n
        delta = [0] * n
        for t, e in enumerate(s.gamma):
            if e and s.u:
                gamma[index[t]] = e
        for t, e in enumerate(s.delta):
            if e and s.v:
                delta[index[t]] = e
        steps.append(AddStep(s.u, s.alpha, gamma, s.v, s.beta, delta))
    new_eta = [0] * len(keep)
    for t, e in enumerate(eta):
        if e:
            new_eta[index[t]] = e
    return AdditiveRepr(r.arity, tuple(steps), FinalStep(c, zeta, new_eta), DIVISION_FREE)


def quotient_form(r: AdditiveRepr, size_cap: int = DEFAULT_SIZE_CAP, check: bool = True) -> RationalFunctionPair:
    """Split ``r`` into division-free numerator and denominator programs."""
    _require_valid(r)
    norm = lemma31_normalize(r)
    f = norm.final
    num = _extract(norm, f.c, [max(e, 0) for e in f.zeta], [max(e, 0) for e in f.eta])
    den = _extract(norm, 1, [max(-e, 0) for e in f.zeta], [max(-e, 0) for e in f.eta])
    if check and den.steps:
        if _expand_divfree(den, size_cap).is_zero():
            raise DegenerateDenominator("denominator expands to the zero polynomial")
    return RationalFunctionPair(num, den, len(norm.steps))


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------


def constant_repr(arity: int, c=1) -> AdditiveRepr:
    return AdditiveRepr(arity, (), FinalStep(c, (0,) * arity, ()), DIVISION_FREE)


def naive_repr(p: SparsePoly) -> AdditiveRepr:
    """Left-to-right sum of the terms: one addition per additional term."""
    k = p.arity
    terms = p.terms()
    if not terms:
        return constant_repr(k, 0)
    if len(terms) == 1:
        exp, c = terms[0]
        return AdditiveRepr(k, (), FinalStep(c, exp, ()), DIVISION_FREE)
    b = SlpBuilder(k)
    idx = b.sum_terms([(c, exp, {}) for exp, c in terms])
    return b.finish(1, (0,) * k, {idx: 1})


class SlpBuilder:
    """Incrementally assemble a division-free program.

    Step references are 0-based indices returned by :meth:`add`; exponents on
    earlier steps are given as ``{index: exponent}`` dicts.
    """

    def __init__(self, arity: int):
        self.arity = arity
        self._steps: list[AddStep] = []

    def __len__(self) -> int:
        return len(self._steps)

    def _dense(self, refs: Mapping[int, int], n: int) -> list[int]:
        vec = [0] * n
        for i, e in refs.items():
            if not 0 <= i < n:
                raise IndexError(f"step reference {i} out of range")
            vec[i] += e
        return vec

    def add(self, u, alpha, gamma: Mapping[int, int], v, beta, delta: Mapping[int, int]) -> int:
        n = len(self._steps)
        self._steps.append(
            AddStep(u, tuple(alpha), self._dense(gamma, n), v, tuple(beta), self._dense(delta, n))
        )
        return n

    def sum_terms(self, terms: Sequence[tuple]) -> int | None:
        """Chain ``len(terms) - 1`` additions over (coeff, x-exponent, step-refs) terms.

        Returns the index of the last step, or ``None`` for fewer than two terms.
        """
        if len(terms) < 2:
            return None
        zero = (0,) * self.arity
        (c1, e1, r1), (c2, e2, r2) = terms[0], terms[1]
        idx = self.add(c1, e1, r1, c2, e2, r2)
        for c, e, refs in terms[2:]:
            idx = self.add(1, zero, {idx: 1}, c, e, refs)
        return idx

    def include(self, r: AdditiveRepr, var_map: Sequence[int] | None = None) -> tuple[Fraction, tuple[int, ...], dict[int, int]]:
        """Copy the steps of a division-free ``r``; return its final as a term."""
        if r.minimal_mode() != DIVISION_FREE:
            raise ValueError("only division-free programs can be included")
        if var_map is not None:
            r = r.rename(var_map, self.arity)
        elif r.arity != self.arity:
            raise ValueError("arity mismatch")
        offset = len(self._steps)
        for s in r.steps:
            gamma = {offset + i: e for i, e in enumerate(s.gamma) if e}
            delta = {offset + i: e for i, e in enumerate(s.delta) if e}
            self.add(s.u, s.alpha, gamma, s.v, s.beta, delta)
        f = r.final
        return f.c, f.zeta, {offset + i: e for i, e in enumerate(f.eta) if e}

    def finish(self, c, zeta, eta: Mapping[int, int]) -> AdditiveRepr:
        n = len(self._steps)
        return AdditiveRepr(self.arity, tuple(self._steps), FinalStep(c, tuple(zeta), self._dense(eta, n)), DIVISION_FREE)


def random_generic_point(rng: random.Random, k: int) -> tuple[Fraction, ...]:
    """Rational point with random 32-bit numerators (generic-point testing)."""
    return tuple(Fraction(rng.randint(-(2**31), 2**31 - 1), rng.randint(1, 2**31 - 1)) for _ in range(k))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------
#
#   # comment
#   arity: 2
#   mode: general                      (optional; defaults to the minimal mode)
#   step 1: 1 * x^[5] * q^[] + -1 * x^[0] * q^[]
#   step 2: 1 * x^[1] * q^[0] + -1 * x^[0] * q^[0]
#   result: 1 * x^[0] * q^[1,-1]
#
# Coefficients are integer, rational (a/b) or decimal literals.  Step j must
# list j-1 entries in its q-vectors; the result lists one per step.

_NUM = r"[-+]?(?:\d+/\d+|\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?"
_VEC = r"\[\s*(?:-?\d+(?:\s*,\s*-?\d+)*)?\s*\]"
_TERM = rf"({_NUM})\s*\*\s*x\^({_VEC})\s*\*\s*q\^({_VEC})"
_STEP_RE = re.compile(rf"^step\s+(\d+)\s*:\s*{_TERM}\s*\+\s*{_TERM}\s*$")
_RESULT_RE = re.compile(rf"^result\s*:\s*{_TERM}\s*$")


def _parse_vec(text: str) -> tuple[int, ...]:
    inner = text.strip()[1:-1].strip()
    return tuple(int(t) for t in inner.split(",")) if inner else ()


def parse_slp(text: str) -> AdditiveRepr:
    arity = None
    mode = None
    steps: list[AddStep] = []
    final = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("arity:"):
            arity = int(line.split(":", 1)[1])
            continue
        if line.startswith("mode:"):
            mode = line.split(":", 1)[1].strip()
            if mode not in MODES:
                raise SlpParseError(f"line {lineno}: unknown mode {mode!r}")
            continue
        m = _STEP_RE.match(line)
        if m:
            j = int(m.group(1))
            if j != len(steps) + 1:
                raise SlpParseError(f"line {lineno}: expected step {len(steps) + 1}, got step {j}")
            u, a, g, v, b, d = m.groups()[1:]
            steps.append(AddStep(Fraction(u), _parse_vec(a), _parse_vec(g), Fraction(v), _parse_vec(b), _parse_vec(d)))
            continue
        m = _RESULT_RE.match(line)
        if m:
            if final is not None:
                raise SlpParseError(f"line {lineno}: duplicate result line")
            c, z, e = m.groups()
            final = FinalStep(Fraction(c), _parse_vec(z), _parse_vec(e))
            continue
        raise SlpParseError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if final is None:
        raise SlpParseError("missing result line")
    if arity is None:
        arity = len(final.zeta)
    r = AdditiveRepr(arity, tuple(steps), final, GENERAL)
    return r.with_mode(mode or r.minimal_mode())


def _fmt_num(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_vec(vec) -> str:
    return "[" + ",".join(str(e) for e in vec) + "]"


def format_slp(r: AdditiveRepr) -> str:
    lines = [f"arity: {r.arity}", f"mode: {r.mode}"]
    for j, s in enumerate(r.steps, start=1):
        lines.append(
            f"step {j}: {_fmt_num(s.u)} * x^{_fmt_vec(s.alpha)} * q^{_fmt_vec(s.gamma)}"
            f" + {_fmt_num(s.v)} * x^{_fmt_vec(s.beta)} * q^{_fmt_vec(s.delta)}"
        )
    f = r.final
    lines.append(f"result: {_fmt_num(f.c)} * x^{_fmt_vec(f.zeta)} * q^{_fmt_vec(f.eta)}")
    return "\n".join(lines) + "\n"
