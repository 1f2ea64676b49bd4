"""Exact univariate polynomials over the rationals and real-root counting.

Sturm sequences give the ground truth for every real-root claim in the
package.  Arithmetic on the chains is delegated to FLINT (``fmpq_poly``); the
chain construction, sign-variation counting and squarefree splitting are
done here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from flint import fmpq, fmpq_poly, fmpz

from .numeric import format_rational, parse_rational

__all__ = [
    "Polynomial",
    "RootCount",
    "ParseError",
    "parse_polynomial",
    "sturm_count",
    "sturm_count_interval",
    "descartes_counts",
    "sign_variations",
    "rolle_operator",
    "compose_scale",
    "squarefree_decomposition",
]


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


def _sgn(q) -> int:
    return (q > 0) - (q < 0)


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial ``sum(coeffs[k] * x**k)`` with rational coefficients."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [Fraction(0)]
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable) -> Polynomial:
        return cls(tuple(parse_rational(c) if isinstance(c, str) else Fraction(c) for c in coeffs))

    @classmethod
    def from_terms(cls, terms: Mapping[int, object] | Iterable[tuple[int, object]]) -> Polynomial:
        items = terms.items() if isinstance(terms, Mapping) else terms
        cs: dict[int, Fraction] = {}
        for e, c in items:
            if e < 0:
                raise ValueError("negative exponent")
            cs[e] = cs.get(e, Fraction(0)) + (parse_rational(c) if isinstance(c, str) else Fraction(c))
        if not cs:
            return cls((Fraction(0),))
        out = [Fraction(0)] * (max(cs) + 1)
        for e, c in cs.items():
            out[e] = c
        return cls(tuple(out))

    @classmethod
    def monomial(cls, k: int, c=1) -> Polynomial:
        return cls((Fraction(0),) * k + (Fraction(c),))

    @classmethod
    def parse(cls, text: str) -> Polynomial:
        return parse_polynomial(text)

    # -- basic structure
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1]

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def signs(self) -> tuple[int, ...]:
        return tuple(_sgn(c) for c in self.coeffs)

    def support(self) -> list[int]:
        return [k for k, c in enumerate(self.coeffs) if c]

    def low_order(self) -> int:
        """Multiplicity of the root at zero."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        raise ValueError("zero polynomial")

    def __call__(self, x) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    # -- arithmetic
    def __add__(self, other: Polynomial) -> Polynomial:
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(tuple(self[k] + other[k] for k in range(n)))

    def __neg__(self) -> Polynomial:
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if not isinstance(other, Polynomial):
            q = Fraction(other)
            return Polynomial(tuple(c * q for c in self.coeffs))
        if self.is_zero or other.is_zero:
            return Polynomial((Fraction(0),))
        return Polynomial.from_flint(self.flint * other.flint)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        return Polynomial.from_flint(self.flint**n)

    def derivative(self) -> Polynomial:
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs))[1:] or (Fraction(0),))

    def shift(self, k: int) -> Polynomial:
        """Multiply by ``x**k``."""
        if self.is_zero:
            return self
        return Polynomial((Fraction(0),) * k + self.coeffs)

    def divide_by_x_power(self, k: int) -> Polynomial:
        if any(self.coeffs[:k]):
            raise ValueError("not divisible by x^k")
        return Polynomial(self.coeffs[k:])

    def reflect(self) -> Polynomial:
        """``p(-x)``."""
        return Polynomial(tuple(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs)))

    def substitute_power(self, n: int) -> Polynomial:
        """``p(x**n)``."""
        if n < 1:
            raise ValueError("n must be positive")
        out = [Fraction(0)] * (self.degree * n + 1)
        for k, c in enumerate(self.coeffs):
            out[k * n] = c
        return Polynomial(tuple(out))

    def scale_argument(self, r) -> Polynomial:
        """``p(r*x)``."""
        r = Fraction(r)
        out, power = [], Fraction(1)
        for c in self.coeffs:
            out.append(c * power)
            power *= r
        return Polynomial(tuple(out))

    # -- FLINT bridge
    @cached_property
    def flint(self) -> fmpq_poly:
        return fmpq_poly([fmpq(c.numerator, c.denominator) for c in self.coeffs])

    @classmethod
    def from_flint(cls, f: fmpq_poly) -> Polynomial:
        cs = f.coeffs()
        if not cs:
            return cls((Fraction(0),))
        return cls(tuple(Fraction(int(c.p), int(c.q)) for c in cs))

    # -- serialization
    def to_json(self) -> dict:
        return {"coeffs": [format_rational(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: Mapping) -> Polynomial:
        if "coeffs" in data:
            return cls.from_coeffs(data["coeffs"])
        if "terms" in data:
            return cls.from_terms((int(t["exp"]), t["coef"]) for t in data["terms"])
        raise ValueError("polynomial JSON needs 'coeffs' or 'terms'")

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            coef = format_rational(mag)
            if k == 0:
                body = coef
            else:
                mono = "x" if k == 1 else f"x^{k}"
                if mag == 1:
                    body = mono
                elif mag.denominator == 1:
                    body = f"{coef}*{mono}"
                else:
                    body = f"{mag.numerator}*{mono}/{mag.denominator}" if mag.numerator != 1 else f"{mono}/{mag.denominator}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


@dataclass(frozen=True)
class RootCount:
    positive: int
    negative: int
    zero_multiplicity: int
    with_multiplicity: bool = True

    @property
    def nonzero(self) -> int:
        return self.positive + self.negative

    def to_json(self) -> dict:
        return {
            "positive": self.positive,
            "negative": self.negative,
            "zero_multiplicity": self.zero_multiplicity,
            "with_multiplicity": self.with_multiplicity,
        }


# -- inline parsing ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(x)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        while text[pos].isspace():
            pos += 1
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", m.group(1), start))
        elif m.group(2):
            tokens.append(("x", "x", start))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(("op", op, start))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        tok = self.take()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}", tok[2])

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise ParseError("empty polynomial", 0)
        p = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", pos)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while True:
            kind, val, pos = self.peek()
            if val == "*":
                self.take()
                p = p * self.unary()
            elif val == "/":
                self.take()
                q = self.unary()
                if q.degree > 0 or q.is_zero:
                    raise ParseError("division by a non-constant or zero", pos)
                p = p * (1 / q.coeffs[0])
            elif kind in ("num", "x") or val == "(":
                p = p * self.unary()
            else:
                return p

    def unary(self) -> Polynomial:
        val = self.peek()[1]
        if val in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if val == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be a non-negative integer", pos)
            return base ** int(val)
        return base

    def atom(self) -> Polynomial:
        kind, val, pos = self.take()
        if kind == "num":
            return Polynomial((parse_rational(val),))
        if kind == "x":
            return Polynomial((Fraction(0), Fraction(1)))
        if val == "(":
            p = self.expr()
            self.expect(")")
            return p
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse_polynomial(text: str) -> Polynomial:
    """Parse inline syntax such as ``"1 + x + x^2/4"`` or ``"(1+x)^2 - 3/2*x"``."""
    return _Parser(text).parse()


# -- root counting -------------------------------------------------------------


def sign_variations(values: Iterable) -> int:
    count, last = 0, 0
    for v in values:
        s = _sgn(v)
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def descartes_counts(p: Polynomial) -> tuple[int, int]:
    if p.is_zero:
        raise ValueError("undefined root count")
    return sign_variations(p.coeffs), sign_variations(p.reflect().coeffs)


def _primitive(p: fmpq_poly) -> fmpq_poly:
    """Positive rescaling of ``p`` to a primitive integer polynomial."""
    num = p.numer()
    content = fmpz(0)
    for c in num.coeffs():
        content = content.gcd(c)
    return fmpq_poly(num) / content


def _sturm_chain(f: fmpq_poly) -> list[fmpq_poly]:
    # primitive remainders: positive rescaling keeps every sign and the
    # coefficients integral, which is far cheaper than monic normalisation
    chain = [_primitive(f)]
    d = f.derivative()
    if d.is_zero():
        return chain
    chain.append(_primitive(d))
    while chain[-1].degree() > 0:
        r = chain[-2] % chain[-1]
        if r.is_zero():
            break
        chain.append(-_primitive(r))
    return chain


def _variations_at(chain: Sequence[fmpq_poly], x) -> int:
    if x == "+inf":
        return sign_variations(int(_sgn(c.coeffs()[-1])) for c in chain)
    if x == "-inf":
        return sign_variations(
            _sgn(c.coeffs()[-1]) * (-1 if c.degree() % 2 else 1) for c in chain
        )
    xq = fmpq(x.numerator, x.denominator)
    return sign_variations(_sgn(c(xq)) for c in chain)


def squarefree_decomposition(p: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun's algorithm: ``p = c * prod(f_i ** i)`` with squarefree coprime ``f_i``."""
    f = p.flint
    if f.degree() < 1:
        return []
    out = []
    fp = f.derivative()
    a = f.gcd(fp)
    b = f / a
    c = fp / a
    d = c - b.derivative()
    i = 1
    while b.degree() > 0:
        a = b.gcd(d)
        b = b / a
        c = d / a
        d = c - b.derivative()
        if a.degree() > 0:
            out.append((Polynomial.from_flint(a), i))
        i += 1
    return out


def _count_flint(f: fmpq_poly, lo, hi) -> int:
    """Distinct roots of squarefree ``f`` in the half-open interval ``(lo, hi]``."""
    chain = _sturm_chain(f)
    return _variations_at(chain, lo) - _variations_at(chain, hi)


def _split_counts(f: fmpq_poly) -> tuple[int, int]:
    """Distinct (positive, negative) roots of squarefree ``f`` with ``f(0) != 0``."""
    chain = _sturm_chain(f)
    at_zero = _variations_at(chain, Fraction(0))
    return at_zero - _variations_at(chain, "+inf"), _variations_at(chain, "-inf") - at_zero


def sturm_count(p: Polynomial, mode: str = "with-multiplicity") -> RootCount:
    """Exact positive / negative / zero root counts.

    ``mode`` is ``"with-multiplicity"`` (default) or ``"distinct"``.
    """
    if p.is_zero:
        raise ValueError("undefined root count")
    m = p.low_order()
    q = p.divide_by_x_power(m)
    if mode == "distinct":
        f = q.flint
        if f.degree() > 0:
            f = f / f.gcd(f.derivative())
        pos, neg = _split_counts(f) if f.degree() > 0 else (0, 0)
        return RootCount(pos, neg, 1 if m else 0, with_multiplicity=False)
    if mode != "with-multiplicity":
        raise ValueError(f"unknown mode {mode!r}")
    pos = neg = 0
    for factor, mult in squarefree_decomposition(q):
        fp, fn = _split_counts(factor.flint)
        pos += mult * fp
        neg += mult * fn
    return RootCount(pos, neg, m, with_multiplicity=True)


def sturm_count_interval(p: Polynomial, lo, hi, with_multiplicity: bool = False) -> int:
    """Real roots of ``p`` in the open interval ``(lo, hi)``.

    Endpoints may be roots: the half-open Sturm count on ``(lo, hi]`` is
    corrected by the exact value at ``hi``, so no nudging is needed.
    """
    if p.is_zero:
        raise ValueError("undefined root count")
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    if p.degree == 0:
        return 0
    if with_multiplicity:
        pieces = squarefree_decomposition(p)
    else:
        f = p.flint
        pieces = [(Polynomial.from_flint(f / f.gcd(f.derivative())), 1)]
    total = 0
    for factor, mult in pieces:
        n = _count_flint(factor.flint, lo, hi)
        if factor(hi) == 0:
            n -= 1
        total += mult * n
    return total


# -- operators -------------------------------------------------------------


def rolle_operator(p: Polynomial, k: int) -> Polynomial:
    """``L_k(p) = sum((j - k) * a_j * x**j) = x**(k+1) * (x**-k * p)'``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return Polynomial(tuple((j - k) * c for j, c in enumerate(p.coeffs)))


def compose_scale(p: Polynomial, op: str, arg=None) -> Polynomial:
    """Coefficient-level transforms: ``substitute`` (x -> x^n), ``shift`` (times x^k),
    ``multiply`` (times a polynomial), ``reflect`` (x -> -x), ``scale`` (x -> r*x)."""
    if op == "substitute":
        return p.substitute_power(int(arg))
    if op == "shift":
        return p.shift(int(arg))
    if op == "multiply":
        return p * arg
    if op == "reflect":
        return p.reflect()
    if op == "scale":
        return p.scale_argument(arg)
    raise ValueError(f"unknown operation {op!r}")
