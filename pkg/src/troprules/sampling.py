"""Seeded random polynomials and multiplier sequences for fuzzing.

Coefficient magnitudes are ``e^u`` with ``u`` uniform on ``[-30, 30]``,
realized as dyadic rationals with a 20-bit mantissa; signs are independent
and uniform.  The mixture is 70% dense, 20% sparse and 10% near-double-root.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .numeric import LogValue
from .poly import Polynomial

LOG_SPAN = 30.0
MANTISSA_BITS = 20

DISTRIBUTIONS = ("dense", "sparse", "double-root")
WEIGHTS = (0.7, 0.2, 0.1)


def trial_rng(seed: int, index: int) -> random.Random:
    """Independent stream for trial ``index`` of a run seeded with ``seed``."""
    return random.Random(f"troprules:{seed}:{index}")


def dyadic_exp(u: float) -> Fraction:
    """A dyadic rational within a relative ``2^-20`` of ``e^u``."""
    m, e = math.frexp(math.exp(u))
    mant = round(m * (1 << MANTISSA_BITS))
    shift = e - MANTISSA_BITS
    return Fraction(mant << shift) if shift >= 0 else Fraction(mant, 1 << -shift)


def random_magnitude(rng: random.Random, span: float = LOG_SPAN) -> Fraction:
    return dyadic_exp(rng.uniform(-span, span))


def random_coefficient(rng: random.Random, span: float = LOG_SPAN) -> Fraction:
    c = random_magnitude(rng, span)
    return c if rng.random() < 0.5 else -c


def _dense(rng: random.Random, d: int) -> Polynomial:
    return Polynomial.from_coeffs([random_coefficient(rng) for _ in range(d + 1)])


def _sparse(rng: random.Random, d: int) -> Polynomial:
    coeffs = [random_coefficient(rng) if rng.random() < 0.5 else Fraction(0) for _ in range(d)]
    coeffs.append(random_coefficient(rng))
    return Polynomial.from_coeffs(coeffs)


def _double_root(rng: random.Random, d: int) -> Polynomial:
    if d < 2:
        return _dense(rng, d)
    if d >= 4 and rng.random() < 0.5:
        if rng.random() < 0.5:
            r1, r2 = random_coefficient(rng, 3.0), random_coefficient(rng, 3.0)
            quad = Polynomial.from_coeffs([r1 * r2, -(r1 + r2), 1])
        else:
            quad = Polynomial.from_coeffs([random_coefficient(rng, 3.0), random_coefficient(rng, 3.0), 1])
        square, rest = quad * quad, d - 4
    else:
        r = random_coefficient(rng, 3.0)
        lin = Polynomial.from_coeffs([-r, 1])
        square, rest = lin * lin, d - 2
    p = square * Polynomial.from_coeffs([random_coefficient(rng, 3.0) for _ in range(rest + 1)])
    if rng.random() < 0.5:
        # nudge off the double root; the result may gain or lose a real pair
        eps = Fraction(1, 1 << rng.randrange(20, 60))
        p = p + Polynomial.from_coeffs([eps * random_coefficient(rng, 3.0) for _ in range(d + 1)])
    return p


_SAMPLERS = {"dense": _dense, "sparse": _sparse, "double-root": _double_root}


def random_polynomial(rng: random.Random, d: int, distribution: str | None = None) -> Polynomial:
    """Degree-``d`` polynomial from the named distribution, or from the mixture."""
    if distribution is None:
        distribution = rng.choices(DISTRIBUTIONS, WEIGHTS)[0]
    p = _SAMPLERS[distribution](rng, d)
    while p.degree != d:  # perturbation cannot cancel the leading 1 but stay defensive
        p = _dense(rng, d)
    return p


def random_full_support(rng: random.Random, d: int, span: float = LOG_SPAN) -> Polynomial:
    return Polynomial.from_coeffs([random_coefficient(rng, span) for _ in range(d + 1)])


def _random_slope(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-40, 40), rng.choice((1, 2, 3, 4, 8)))


def random_log_concave(rng: random.Random, d: int) -> list[LogValue]:
    """Log-entries of a random log-concave sequence of length ``d + 1``.

    Rational concave part plus a random ``k*ln(q)`` tilt; repeated slopes
    make collinear stretches common.
    """
    slopes = sorted((_random_slope(rng) for _ in range(d)), reverse=True)
    if d >= 2 and rng.random() < 0.3:
        j = rng.randrange(1, d)
        slopes[j] = slopes[j - 1]
    tilt = LogValue.ln(Fraction(rng.randint(1, 30), rng.randint(1, 30)))
    level = Fraction(rng.randint(-20, 20))
    out = [LogValue(level)]
    for s in slopes:
        level += s
        out.append(LogValue(level))
    return [v + tilt * k for k, v in enumerate(out)]


def random_log_sequence(rng: random.Random, d: int) -> list[LogValue]:
    """Log-entries with unconstrained random slopes and occasional ln terms."""
    out = [LogValue(Fraction(rng.randint(-20, 20)))]
    for _ in range(d):
        step = LogValue(_random_slope(rng))
        if rng.random() < 0.3:
            step = step + LogValue.ln(Fraction(rng.randint(1, 12), rng.randint(1, 12)))
        out.append(out[-1] + step)
    return out
