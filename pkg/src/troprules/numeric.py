"""Exact log-domain scalars and certified comparisons.

A :class:`LogValue` is a number of the form ``q0 + q1*ln(r)`` with rational
``q0``, ``q1`` and positive rational ``r``.  Internally the logarithmic part is
kept as ``sum(c_i * ln(b_i))`` over a pairwise-coprime basis of integers
``b_i > 1`` that are not perfect powers.  Such bases are multiplicatively
independent, so a value is zero exactly when its affine part and every
coefficient vanish (Lindemann rules out ``q0 + ln(algebraic) = 0`` for
``q0 != 0``).  Every comparison therefore terminates: equal values cancel
syntactically and unequal ones are separated by interval evaluation at
increasing precision.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Callable, Iterable, Mapping

import gmpy2

__all__ = [
    "LogValue",
    "BracketedReal",
    "PrecisionExhausted",
    "parse_rational",
    "format_rational",
    "precision_cap",
    "logvalue_add",
    "logvalue_cmp",
    "logvalue_approx",
    "exp_bounds",
]

DEFAULT_PRECISION_CAP = 1 << 20
START_BITS = 64


class PrecisionExhausted(ArithmeticError):
    """Raised when a comparison is still undecided at the precision cap."""


def precision_cap() -> int:
    env = os.environ.get("TROPRULES_PRECISION_CAP")
    if env:
        return int(env)
    return DEFAULT_PRECISION_CAP


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"``, integers and decimal strings (exactly)."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# -- coprime basis maintenance ------------------------------------------------


@lru_cache(maxsize=65536)
def _perfect_power(n: int) -> tuple[int, int]:
    """Return ``(s, k)`` with ``n == s**k`` and ``k`` maximal."""
    if n < 4 or not gmpy2.is_power(n):
        return n, 1
    k = 2
    while k <= n.bit_length():
        if gmpy2.is_prime(k):
            root, exact = gmpy2.iroot(n, k)
            if exact:
                s, j = _perfect_power(int(root))
                return s, k * j
        k += 1
    return n, 1


def _normalize(terms: Iterable[tuple[int, Fraction]]) -> tuple[tuple[int, Fraction], ...]:
    acc: dict[int, Fraction] = {}
    for b, c in terms:
        if b > 1 and c:
            acc[b] = acc.get(b, Fraction(0)) + c
    bases = list(acc)
    if all(math.gcd(x, y) == 1 for i, x in enumerate(bases) for y in bases[i + 1 :]):
        # already coprime (the usual case when merging normalized values)
        out: dict[int, Fraction] = {}
        for b, c in acc.items():
            if c:
                r, k = _perfect_power(b)
                out[r] = out.get(r, Fraction(0)) + c * k
        return tuple(sorted((b, c) for b, c in out.items() if c))
    queue = list(acc.items())
    basis: dict[int, Fraction] = {}
    while queue:
        b, c = queue.pop()
        if b == 1 or not c:
            continue
        for r in basis:
            g = math.gcd(b, r)
            if g > 1:
                cr = basis.pop(r)
                queue.append((b // g, c))
                queue.append((r // g, cr))
                queue.append((g, c + cr))
                break
        else:
            basis[b] = c
    out: dict[int, Fraction] = {}
    for b, c in basis.items():
        if not c:
            continue
        s, k = _perfect_power(b)
        out[s] = out.get(s, Fraction(0)) + c * k
    return tuple(sorted((b, c) for b, c in out.items() if c))


@lru_cache(maxsize=65536)
def _log_terms_of(num: int, den: int) -> tuple[tuple[int, Fraction], ...]:
    return _normalize([(num, Fraction(1)), (den, Fraction(-1))])


@lru_cache(maxsize=65536)
def _ln_bounds(base: int, prec: int) -> tuple[Fraction, Fraction]:
    with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
        lo = gmpy2.log(base)
    with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
        hi = gmpy2.log(base)
    return _mpfr_to_fraction(lo), _mpfr_to_fraction(hi)


def _floor_dyadic(q: Fraction, s: int) -> Fraction:
    return Fraction((q.numerator << s) // q.denominator, 1 << s)


def _ceil_dyadic(q: Fraction, s: int) -> Fraction:
    return Fraction(-((-q.numerator << s) // q.denominator), 1 << s)


@total_ordering
class LogValue:
    """Exact scalar ``affine + sum(c_i * ln(b_i))``."""

    __slots__ = ("affine", "terms", "_hash", "_estimate")

    def __init__(self, affine: Fraction | int = 0, terms: Iterable[tuple[int, Fraction]] = ()):
        self.affine = Fraction(affine)
        self.terms = tuple(terms)
        self._hash = None
        self._estimate = None

    # -- constructors
    @classmethod
    def rational(cls, q) -> LogValue:
        return cls(Fraction(q))

    @classmethod
    def ln(cls, r) -> LogValue:
        r = Fraction(r)
        if r <= 0:
            raise ValueError("logarithm of a non-positive number")
        return cls(0, _log_terms_of(r.numerator, r.denominator))

    @classmethod
    def make(cls, affine, scale, arg) -> LogValue:
        """Build ``affine + scale*ln(arg)``."""
        scale = Fraction(scale)
        arg = Fraction(arg)
        if arg <= 0:
            raise ValueError("arg must be positive")
        if not scale:
            return cls(Fraction(affine))
        base = _log_terms_of(arg.numerator, arg.denominator)
        return cls(Fraction(affine), tuple((b, c * scale) for b, c in base))

    @classmethod
    def from_factors(cls, affine, factors: Iterable[tuple[int, Fraction]]) -> LogValue:
        return cls(Fraction(affine), _normalize((int(b), Fraction(c)) for b, c in factors))

    # -- structure
    def is_rational(self) -> bool:
        return not self.terms

    def is_zero(self) -> bool:
        return not self.terms and not self.affine

    @property
    def scale(self) -> Fraction:
        """``q1`` of the single-ln form; positive unless the value is rational."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for _, c in self.terms:
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    @property
    def arg(self) -> Fraction:
        """``r`` of the single-ln form (1 for rational values)."""
        if not self.terms:
            return Fraction(1)
        s = self.scale
        num = den = 1
        for b, c in self.terms:
            e = c / s
            assert e.denominator == 1
            if e > 0:
                num *= b ** e.numerator
            else:
                den *= b ** (-e.numerator)
        return Fraction(num, den)

    # -- arithmetic
    def _combine(self, other: LogValue, sign: int) -> LogValue:
        if not other.terms:
            return LogValue(self.affine + sign * other.affine, self.terms)
        if not self.terms and sign > 0:
            return LogValue(self.affine + other.affine, other.terms)
        if sign > 0:
            merged = list(self.terms) + list(other.terms)
        else:
            merged = list(self.terms) + [(b, -c) for b, c in other.terms]
        return LogValue(self.affine + sign * other.affine, _normalize(merged))

    def __add__(self, other) -> LogValue:
        if not isinstance(other, LogValue):
            other = LogValue(Fraction(other))
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other) -> LogValue:
        if not isinstance(other, LogValue):
            other = LogValue(Fraction(other))
        return self._combine(other, -1)

    def __rsub__(self, other) -> LogValue:
        return LogValue(Fraction(other)) - self

    def __neg__(self) -> LogValue:
        return LogValue(-self.affine, tuple((b, -c) for b, c in self.terms))

    def __mul__(self, q) -> LogValue:
        if isinstance(q, LogValue):
            if q.terms and self.terms:
                raise TypeError("product of two transcendental LogValues leaves the single-ln form")
            if q.terms:
                return q * self.affine
            q = q.affine
        q = Fraction(q)
        if not q:
            return LogValue()
        return LogValue(self.affine * q, tuple((b, c * q) for b, c in self.terms))

    __rmul__ = __mul__

    def __truediv__(self, q) -> LogValue:
        return self * (1 / Fraction(q))

    # -- comparison
    def __eq__(self, other) -> bool:
        if not isinstance(other, LogValue):
            try:
                other = LogValue(Fraction(other))
            except (TypeError, ValueError):
                return NotImplemented
        return (self - other).is_zero()

    def __lt__(self, other) -> bool:
        if not isinstance(other, LogValue):
            other = LogValue(Fraction(other))
        return logvalue_cmp(self, other) < 0

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.affine, self.scale, self.arg))
        return self._hash

    def sign(self, cap: int | None = None) -> int:
        """Exact sign (-1, 0, 1)."""
        if not self.terms:
            return (self.affine > 0) - (self.affine < 0)
        cap = precision_cap() if cap is None else cap
        bits = START_BITS
        while True:
            lo, hi = self._bounds(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            if bits >= cap:
                raise PrecisionExhausted(f"sign of {self!r} undecided at {bits} bits")
            bits = min(2 * bits, cap)

    # -- enclosures
    def _magnitude_bits(self) -> int:
        total = sum(abs(c) * (b.bit_length()) for b, c in self.terms)
        return int(math.ceil(total)).bit_length() + 1

    def _bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        prec = bits + 3 + self._magnitude_bits()
        lo = hi = self.affine
        for b, c in self.terms:
            l, h = _ln_bounds(b, prec)
            if c > 0:
                lo += c * l
                hi += c * h
            else:
                lo += c * h
                hi += c * l
        return lo, hi

    def approx(self, bits: int = 64) -> tuple[Fraction, Fraction]:
        """Dyadic enclosure of width at most ``2**(1-bits) * max(1, |value|)``."""
        if bits < 8:
            raise ValueError("bits must be at least 8")
        if not self.terms:
            a = self.affine
            if a.denominator & (a.denominator - 1) == 0:
                return a, a
            s = bits + 2
            return _floor_dyadic(a, s), _ceil_dyadic(a, s)
        lo, hi = self._bounds(bits)
        s = bits + 2
        return _floor_dyadic(lo, s), _ceil_dyadic(hi, s)

    def __float__(self) -> float:
        lo, hi = self.approx(64)
        return float((lo + hi) / 2)

    def estimate(self) -> tuple[float, float]:
        """Float value and a generous bound on its absolute error (filters only)."""
        if self._estimate is None:
            try:
                v = float(self.affine)
                mag = abs(v)
                for b, c in self.terms:
                    t = float(c) * math.log(b)
                    v += t
                    mag += abs(t)
                self._estimate = (v, 1e-12 * (mag + 1))
            except OverflowError:
                self._estimate = (0.0, math.inf)
        return self._estimate

    def decimal(self, digits: int = 12) -> str:
        """Midpoint of a certified enclosure, ``digits`` significant digits."""
        bits = max(64, int(digits * 3.33) + 16)
        lo, hi = self.approx(bits)
        mid = (lo + hi) / 2
        if not mid:
            return "0"
        if Fraction(1, 10**300) < abs(mid) < 10**300:
            return f"{float(mid):.{digits}g}"
        return _big_decimal(mid, digits)

    def __repr__(self) -> str:
        if not self.terms:
            return f"LogValue({format_rational(self.affine)})"
        return f"LogValue({format_rational(self.affine)} + {format_rational(self.scale)}*ln({format_rational(self.arg)}))"

    def __str__(self) -> str:
        parts = []
        if self.affine or not self.terms:
            parts.append(format_rational(self.affine))
        for b, c in self.terms:
            parts.append(f"{format_rational(c)}*ln({b})")
        return " + ".join(parts)

    # -- serialization
    def to_json(self, factors: bool = True) -> dict:
        out = {
            "affine": format_rational(self.affine),
            "scale": format_rational(self.scale),
            "arg": format_rational(self.arg),
        }
        if factors and self.terms:
            out["factors"] = [[str(b), format_rational(c)] for b, c in self.terms]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> LogValue:
        affine = parse_rational(data.get("affine", "0"))
        if "factors" in data:
            return cls.from_factors(affine, ((int(b), parse_rational(c)) for b, c in data["factors"]))
        return cls.make(affine, parse_rational(data.get("scale", "0")), parse_rational(data.get("arg", "1")))


def _big_decimal(q: Fraction, digits: int) -> str:
    sign = "-" if q < 0 else ""
    q = abs(q)
    e = len(str(q.numerator)) - len(str(q.denominator))
    scaled = q / Fraction(10) ** (e - digits + 1)
    m = round(scaled)
    s = str(m)
    e += len(s) - digits
    return f"{sign}{s[0]}.{s[1:digits]}e{e:+d}"


def logvalue_add(a: LogValue, b: LogValue) -> LogValue:
    return a + b


def logvalue_cmp(a: LogValue, b: LogValue, cap: int | None = None) -> int:
    """Three-way exact comparison: -1, 0 or 1."""
    return (a - b).sign(cap)


def logvalue_approx(a: LogValue, bits: int) -> tuple[Fraction, Fraction]:
    return a.approx(bits)


# -- exponentials -------------------------------------------------------------


def _mpfr_to_fraction(x) -> Fraction:
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))


def exp_bounds(value: LogValue | Fraction, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational enclosure of ``exp(value)`` with roughly ``bits`` relative bits."""
    if not isinstance(value, LogValue):
        value = LogValue(Fraction(value))
    if not value.affine and value.terms:
        # exp of a pure log is algebraic; exact when the exponents are integral
        exact = all(c.denominator == 1 for _, c in value.terms)
        if exact:
            num = den = 1
            for b, c in value.terms:
                if c > 0:
                    num *= b ** c.numerator
                else:
                    den *= b ** (-c.numerator)
            r = Fraction(num, den)
            return r, r
    if value.is_zero():
        return Fraction(1), Fraction(1)
    lo, hi = value.approx(bits + 8)
    prec = bits + 8
    with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
        elo = gmpy2.exp(gmpy2.mpfr(gmpy2.mpq(lo.numerator, lo.denominator)))
    with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
        ehi = gmpy2.exp(gmpy2.mpfr(gmpy2.mpq(hi.numerator, hi.denominator)))
    return _mpfr_to_fraction(elo), _mpfr_to_fraction(ehi)


class BracketedReal:
    """Real number known only through certified enclosures.

    ``enclose(bits)`` must return rational bounds whose width shrinks as
    ``bits`` grows.  No exact equality is available: comparisons that stay
    ambiguous up to the cap report ``None``.
    """

    __slots__ = ("enclose",)

    def __init__(self, enclose: Callable[[int], tuple[Fraction, Fraction]]):
        self.enclose = enclose

    @classmethod
    def of(cls, value) -> BracketedReal:
        if isinstance(value, BracketedReal):
            return value
        if isinstance(value, LogValue):
            return cls(value.approx)
        q = Fraction(value)
        return cls(lambda bits: (q, q))

    @classmethod
    def power(cls, k: int, alpha: Fraction) -> BracketedReal:
        """``k ** alpha`` for a non-negative integer ``k`` and rational ``alpha > 0``."""
        alpha = Fraction(alpha)
        if k in (0, 1) or alpha.denominator == 1:
            return cls.of(Fraction(k) ** alpha)
        log_k = LogValue.ln(k) * alpha
        return cls(lambda bits: exp_bounds(log_k, bits))

    def __add__(self, other) -> BracketedReal:
        other = BracketedReal.of(other)
        f, g = self.enclose, other.enclose

        def enc(bits):
            a, b = f(bits + 2)
            c, d = g(bits + 2)
            return a + c, b + d

        return BracketedReal(enc)

    __radd__ = __add__

    def __neg__(self) -> BracketedReal:
        f = self.enclose
        return BracketedReal(lambda bits: tuple(-x for x in reversed(f(bits))))

    def __sub__(self, other) -> BracketedReal:
        return self + (-BracketedReal.of(other))

    def __rsub__(self, other) -> BracketedReal:
        return BracketedReal.of(other) - self

    def __mul__(self, q) -> BracketedReal:
        q = Fraction(q)
        f = self.enclose

        def enc(bits):
            a, b = f(bits)
            return (a * q, b * q) if q >= 0 else (b * q, a * q)

        return BracketedReal(enc)

    __rmul__ = __mul__

    def sign(self, cap: int | None = None) -> int | None:
        """-1 or 1 when certified; ``None`` when still ambiguous at ``cap`` bits."""
        cap = min(precision_cap() if cap is None else cap, 1 << 14)
        bits = START_BITS
        while True:
            lo, hi = self.enclose(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            if lo == hi == 0:
                return 0
            if bits >= cap:
                return None
            bits = min(2 * bits, cap)

    def __float__(self) -> float:
        lo, hi = self.enclose(64)
        return float((lo + hi) / 2)
