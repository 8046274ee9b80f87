"""Exact rational arithmetic and sparse multivariate polynomials.

Coefficients are :class:`fractions.Fraction`; exponent vectors are tuples of
ints whose length is the arity of the ambient polynomial ring.  Polynomials
are immutable and hashable, so they can be used as dictionary keys (the
formula layer deduplicates its polynomial table this way).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Iterator, Mapping, Sequence

Rational = Fraction
Exponent = tuple[int, ...]

#: Degree of the zero polynomial.  Never use -1 for this: N = 2*deg(Q) + 1
#: would silently become -1.
NEG_INF = float("-inf")

__all__ = [
    "NEG_INF",
    "PolyParseError",
    "Rational",
    "SparsePoly",
    "as_rational",
    "grlex_key",
    "parse_poly",
    "poly_arith",
    "poly_degree",
    "poly_eval",
    "tokenize",
]


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions, decimal strings and floats to an exact Fraction.

    Floats are converted exactly (binary expansion), strings through the
    decimal/rational literal syntax, so ``as_rational("0.005") == Fraction(1, 200)``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational number")
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def grlex_key(exp: Exponent) -> tuple[int, Exponent]:
    """Sort key for graded lexicographic order (use with ``reverse=True``)."""
    return (sum(exp), exp)


def _format_rational(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class SparsePoly:
    """Polynomial over Q in ``arity`` variables, stored as ``{exponent: coeff}``."""

    __slots__ = ("arity", "_terms", "_hash")

    def __init__(self, arity: int, terms: Mapping[Sequence[int], object] | None = None):
        if not isinstance(arity, int) or arity < 0:
            raise ValueError(f"arity must be a non-negative int, got {arity!r}")
        self.arity = arity
        clean: dict[Exponent, Fraction] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != arity:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {arity}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = as_rational(coeff)
            if c:
                c = clean.get(exp, 0) + c
                if c:
                    clean[exp] = c
                else:
                    clean.pop(exp, None)
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, arity: int, terms: dict[Exponent, Fraction]) -> "SparsePoly":
        # trusted constructor: terms already normalized, no zero coefficients
        obj = cls.__new__(cls)
        obj.arity = arity
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors --------------------------------------------------
    @classmethod
    def zero(cls, arity: int) -> "SparsePoly":
        return cls._raw(arity, {})

    @classmethod
    def constant(cls, arity: int, c) -> "SparsePoly":
        c = as_rational(c)
        return cls._raw(arity, {(0,) * arity: c} if c else {})

    @classmethod
    def variable(cls, arity: int, index: int) -> "SparsePoly":
        if not 0 <= index < arity:
            raise IndexError(f"variable index {index} out of range for arity {arity}")
        exp = tuple(1 if i == index else 0 for i in range(arity))
        return cls._raw(arity, {exp: Fraction(1)})

    @classmethod
    def monomial(cls, arity: int, exp: Sequence[int], c=1) -> "SparsePoly":
        return cls(arity, {tuple(exp): c})

    # -- inspection ----------------------------------------------------
    @property
    def degree(self):
        if not self._terms:
            return NEG_INF
        return max(sum(e) for e in self._terms)

    def terms(self) -> list[tuple[Exponent, Fraction]]:
        """Terms in graded lexicographic order, leading term first."""
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[Exponent, Fraction]]:
        return iter(self.terms())

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get((0,) * self.arity, Fraction(0))

    def variables(self) -> set[int]:
        return {i for exp in self._terms for i, e in enumerate(exp) if e}

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.arity != self.arity:
                raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")
            return other
        try:
            return SparsePoly.constant(self.arity, as_rational(other))
        except TypeError:
            return NotImplemented

    def __add__(self, other) -> "SparsePoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for exp, c in other._terms.items():
            s = out.get(exp, 0) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return SparsePoly._raw(self.arity, out)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        return SparsePoly._raw(self.arity, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "SparsePoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "SparsePoly":
        return (-self) + other

    def __mul__(self, other) -> "SparsePoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return SparsePoly._raw(self.arity, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SparsePoly":
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError("polynomial exponent must be an int")
        if n < 0:
            raise ValueError("negative exponent for a polynomial")
        result = SparsePoly.constant(self.arity, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c) -> "SparsePoly":
        c = as_rational(c)
        if not c:
            return SparsePoly.zero(self.arity)
        return SparsePoly._raw(self.arity, {e: v * c for e, v in self._terms.items()})

    def __truediv__(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError("can only divide by a nonzero constant")
            other = other.constant_value()
        c = as_rational(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return self.scale(1 / c)

    # -- calculus and substitution ---------------------------------------
    def diff(self, index: int) -> "SparsePoly":
        out: dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            e = exp[index]
            if e:
                new = exp[:index] + (e - 1,) + exp[index + 1:]
                out[new] = c * e
        return SparsePoly._raw(self.arity, out)

    def substitute(self, index: int, value) -> "SparsePoly":
        """Fix variable ``index`` to ``value`` and drop it from the ring."""
        value = as_rational(value)
        out: dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            new = exp[:index] + exp[index + 1:]
            v = c * value ** exp[index]
            s = out.get(new, 0) + v
            if s:
                out[new] = s
            else:
                out.pop(new, None)
        return SparsePoly._raw(self.arity - 1, out)

    def rename(self, var_map: Sequence[int], arity: int) -> "SparsePoly":
        """Move variable ``i`` to position ``var_map[i]`` in a ring of ``arity`` variables."""
        if len(var_map) != self.arity:
            raise ValueError("var_map length must equal arity")
        out: dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            new = [0] * arity
            for i, e in enumerate(exp):
                if e:
                    new[var_map[i]] += e
            out[tuple(new)] = c
        return SparsePoly._raw(arity, out)

    def eval(self, point: Sequence):
        """Evaluate at ``point``; exact when the coordinates are ints/Fractions."""
        if len(point) != self.arity:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.arity}")
        total = Fraction(0)
        for exp, c in self._terms.items():
            term = c
            for x, e in zip(point, exp):
                if e:
                    term = term * x ** e
            total = total + term
        return total

    # -- comparison / hashing ----------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return self.arity == other.arity and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == SparsePoly.constant(self.arity, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self.arity)]
        if not self._terms:
            return "0"
        parts: list[str] = []
        for exp, c in self.terms():
            factors = []
            for name, e in zip(names, exp):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = _format_rational(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _format_rational(mag) + "*" + "*".join(factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"SparsePoly({self.arity}, {self.to_string()!r})"


def poly_arith(op: str, lhs: SparsePoly, rhs) -> SparsePoly:
    """Dispatch ``add|sub|mul|pow|scale`` on sparse polynomials."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "pow":
        return lhs ** rhs
    if op == "scale":
        return lhs.scale(rhs)
    raise ValueError(f"unknown polynomial operation {op!r}")


def poly_eval(p: SparsePoly, x: Sequence) -> Fraction:
    return p.eval(tuple(as_rational(v) if not isinstance(v, (int, Fraction)) else v for v in x))


def poly_degree(p: SparsePoly):
    return p.degree


# ---------------------------------------------------------------------------
# text syntax: variables x1..xk, literals, + - * / ^, parentheses
# ---------------------------------------------------------------------------


class PolyParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)
  | (?P<var>x(?P<index>\d+))
  | (?P<rel><=|>=|==|=|<|>)
  | (?P<op>[-+*/^()&|!])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PolyParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "index":
            kind = "var"
        col = pos - line_start + 1
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Expr:
    # intermediate tree so the arity can be fixed after the whole text is read
    __slots__ = ("kind", "args", "value")

    def __init__(self, kind, args=(), value=None):
        self.kind = kind
        self.args = args
        self.value = value

    def max_var(self) -> int:
        if self.kind == "var":
            return self.value + 1
        return max((a.max_var() for a in self.args), default=0)

    def build(self, arity: int) -> SparsePoly:
        k = self.kind
        if k == "num":
            return SparsePoly.constant(arity, self.value)
        if k == "var":
            return SparsePoly.variable(arity, self.value)
        if k == "neg":
            return -self.args[0].build(arity)
        if k == "pow":
            return self.args[0].build(arity) ** self.value
        a, b = (x.build(arity) for x in self.args)
        if k == "+":
            return a + b
        if k == "-":
            return a - b
        if k == "*":
            return a * b
        if k == "/":
            return a / b
        raise AssertionError(k)


class PolyExprParser:
    """Recursive-descent parser over a token list; shared with the formula DSL."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> PolyParseError:
        tok = tok or self.tok
        shown = tok.text or "end of input"
        return PolyParseError(f"{message}, found {shown!r}", tok.line, tok.column)

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expr(self) -> _Expr:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = _Expr(op, (node, self.term()))
        return node

    def term(self) -> _Expr:
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = _Expr(op, (node, self.unary()))
        return node

    def unary(self) -> _Expr:
        if self.tok.text == "-":
            self.advance()
            return _Expr("neg", (self.unary(),))
        if self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> _Expr:
        base = self.primary()
        if self.tok.text == "^":
            self.advance()
            t = self.tok
            if t.kind != "number" or not t.text.isdigit():
                raise self.error("exponent must be a non-negative integer literal")
            self.advance()
            return _Expr("pow", (base,), int(t.text))
        return base

    def primary(self) -> _Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return _Expr("num", value=Fraction(t.text))
        if t.kind == "var":
            self.advance()
            idx = int(t.text[1:])
            if idx < 1:
                raise self.error("variables are numbered from x1", t)
            return _Expr("var", value=idx - 1)
        if t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise self.error("expected a number, variable or '('")


def parse_poly(text: str, arity: int | None = None) -> SparsePoly:
    """Parse ``text`` such as ``"x1*(x1^2 + x2^2 - 1)"``.

    The arity defaults to the largest variable index that occurs.
    """
    parser = PolyExprParser(tokenize(text))
    node = parser.expr()
    if parser.tok.kind != "eof":
        raise parser.error("unexpected trailing input")
    needed = node.max_var()
    if arity is None:
        arity = max(needed, 1)
    elif needed > arity:
        raise ValueError(f"polynomial uses x{needed} but arity is {arity}")
    try:
        return node.build(arity)
    except ZeroDivisionError as exc:
        raise PolyParseError(str(exc), 1, 1) from exc


def polys_from_iter(items: Iterable[str], arity: int) -> list[SparsePoly]:
    return [parse_poly(s, arity) for s in items]
