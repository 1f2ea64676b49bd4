"""Independent reference implementations used to cross-check the library.

Nothing here touches FLINT or the library's hull code: polynomial arithmetic
is plain Python integers and Fractions, and real roots are isolated by
Descartes-rule bisection (Vincent-Collins-Akritas) on ``(0, 1)`` after
scaling by a Cauchy bound.
"""

from __future__ import annotations

import math
from fractions import Fraction


# -- dense Fraction polynomials (lowest degree first) ------------------------


def trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def deriv(p):
    return trim([k * c for k, c in enumerate(p)][1:] or [Fraction(0)])


def divmod_poly(a, b):
    a = [Fraction(c) for c in trim(a)]
    b = trim(b)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        f = a[-1] / b[-1]
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a = trim(a)
        if len(a) == 1 and a[0] == 0:
            break
    return trim(q), a


def gcd_poly(a, b):
    a, b = trim(a), trim(b)
    while any(b):
        _, r = divmod_poly(a, b)
        a, b = b, r
    lead = a[-1]
    return [c / lead for c in a]


def yun(p):
    """Squarefree factors ``[(f_i, i)]`` of ``p`` (Yun's algorithm)."""
    p = trim([Fraction(c) for c in p])
    if len(p) == 1:
        return []
    dp = deriv(p)
    a = gcd_poly(p, dp)
    b, _ = divmod_poly(p, a)
    c, _ = divmod_poly(dp, a)
    d = trim([x - y for x, y in _pad(c, deriv(b))])
    out, i = [], 1
    while len(b) > 1:
        a = gcd_poly(b, d)
        if len(a) > 1:
            out.append((a, i))
        b, _ = divmod_poly(b, a)
        c, _ = divmod_poly(d, a)
        d = trim([x - y for x, y in _pad(c, deriv(b))])
        i += 1
    return out


def _pad(a, b):
    n = max(len(a), len(b))
    return list(zip(list(a) + [0] * (n - len(a)), list(b) + [0] * (n - len(b))))


# -- Descartes bisection on integer polynomials ------------------------------


def _integer(p):
    den = 1
    for c in p:
        den = den * Fraction(c).denominator // math.gcd(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in p]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return [c // g for c in ints] if g else ints


def _variations(cs):
    signs = [c > 0 for c in cs if c]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _taylor_shift_one(p):
    p = list(p)
    n = len(p)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            p[j] += p[j + 1]
    return p


def _descartes_01(p):
    """Sign variations of ``(x+1)^n p(1/(x+1))``: a bound on roots in ``(0, 1)``."""
    return _variations(_taylor_shift_one(list(reversed(p))))


def _roots_01(p):
    """Number of roots of squarefree integer ``p`` in the open interval ``(0, 1)``."""
    while len(p) > 1 and p[0] == 0:
        p = p[1:]
    if len(p) == 1:
        return 0
    v = _descartes_01(p)
    if v <= 1:
        return v
    n = len(p) - 1
    # p1(x) = 2^n p(x/2) covers (0, 1/2); p2(x) = p1(x + 1) covers (1/2, 1)
    p1 = [c << (n - k) for k, c in enumerate(p)]
    mid = 1 if p1 and sum(p1) == 0 else 0  # p1(1) = 2^n p(1/2)
    p2 = _taylor_shift_one(p1)
    return _roots_01(p1) + mid + _roots_01(p2)


def positive_roots_squarefree(p):
    p = trim([Fraction(c) for c in p])
    while len(p) > 1 and p[0] == 0:
        p = p[1:]
    if len(p) == 1:
        return 0
    bound = 1 + max(abs(c / p[-1]) for c in p[:-1])
    bound = Fraction(math.ceil(bound))
    scaled = [c * bound**k for k, c in enumerate(p)]  # roots now in (0, 1)
    return _roots_01(_integer(scaled))


def real_root_counts(coeffs):
    """``(positive, negative, zero)`` real roots with multiplicity."""
    p = trim([Fraction(c) for c in coeffs])
    if len(p) == 1 and p[0] == 0:
        raise ValueError("zero polynomial")
    zero = 0
    while len(p) > 1 and p[0] == 0:
        p = p[1:]
        zero += 1
    pos = neg = 0
    for f, mult in yun(p):
        pos += mult * positive_roots_squarefree(f)
        refl = [c if k % 2 == 0 else -c for k, c in enumerate(f)]
        neg += mult * positive_roots_squarefree(refl)
    return pos, neg, zero


# -- tropical indices by pairwise slope dominance ------------------------------


def tropical_indices_bruteforce(logs):
    """Finite ``L_k`` is tropical iff it lies on or above every chord over it:
    ``max_{i<k} (L_i - L_k)/(k - i) <= min_{j>k} (L_k - L_j)/(j - k)``.

    Each pair is compared exactly by cross-multiplication and ``LogValue.sign``.
    """
    finite = [k for k, v in enumerate(logs) if v is not None]
    out = []
    for k in finite:
        ok = True
        for i in (i for i in finite if i < k):
            for j in (j for j in finite if j > k):
                lhs = (logs[i] - logs[k]) * (j - k)
                rhs = (logs[k] - logs[j]) * (k - i)
                if (lhs - rhs).sign() > 0:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(k)
    return out
