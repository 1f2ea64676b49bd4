"""Archimedean tropicalization of real univariate polynomials.

The tropicalization ``max_k(k*xi + ln|a_k| + ln(lam_k))`` is encoded by its
point set ``(k, ln|a_k| + ln(lam_k))``; tropical indices are the points on
the upper concave hull (collinear points included) and tropical roots are the
``xi`` where two hull vertices tie.  All decisions are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
import mpmath

from .numeric import LogValue, format_rational
from .poly import Polynomial, sturm_count

__all__ = [
    "TropicalPolynomial",
    "TropicalRoot",
    "TropicalAnalysis",
    "CentralIndexVerdict",
    "SignIndependence",
    "tropicalize",
    "upper_hull",
    "tropical_indices",
    "tropical_roots",
    "analyze",
    "classify_pair",
    "dominant_index",
    "central_index_check",
    "central_index_check_bracketed",
    "sign_independently_real_rooted",
    "slopes_central_promotion",
    "LN3",
]

LN3 = LogValue.ln(3)

POSITIVE = "positive"
NEGATIVE = "negative"
POSITIVE_NEGATIVE = "positive-negative"
NON_ESSENTIAL = "non-essential"


def _log_entries(lam) -> Sequence[LogValue]:
    return lam.log_entries if hasattr(lam, "log_entries") else lam


@dataclass(frozen=True)
class TropicalPolynomial:
    """Log-coefficients indexed by exponent; ``None`` marks a ``-inf`` term."""

    logcoefs: tuple[LogValue | None, ...]

    @property
    def degree(self) -> int:
        return len(self.logcoefs) - 1

    def points(self) -> list[tuple[int, LogValue]]:
        return [(k, v) for k, v in enumerate(self.logcoefs) if v is not None]

    def value_at(self, xi: LogValue) -> LogValue:
        return max(k * xi + v for k, v in self.points())


def tropicalize(p: Polynomial, lam=None) -> TropicalPolynomial:
    if p.is_zero:
        raise ValueError("zero polynomial has no tropicalization")
    logs = _log_entries(lam) if lam is not None else None
    if logs is not None and len(logs) < p.degree + 1:
        raise ValueError(f"multiplier sequence has length {len(logs)}, need {p.degree + 1}")
    out = []
    for k, c in enumerate(p.coeffs):
        if not c:
            out.append(None)
            continue
        v = LogValue.ln(abs(c))
        if logs is not None:
            v = v + logs[k]
        out.append(v)
    return TropicalPolynomial(tuple(out))


def _strictly_below(a: tuple[int, LogValue], b: tuple[int, LogValue], c: tuple[int, LogValue]) -> bool:
    """Is ``b`` strictly below the chord from ``a`` to ``c``?"""
    (i, la), (j, lb), (k, lc) = a, b, c
    # float filter; the exact comparison runs only when the margin is thin
    (fa, ea), (fb, eb), (fc, ec) = la.estimate(), lb.estimate(), lc.estimate()
    diff = (fb - fa) * (k - i) - (fc - fa) * (j - i)
    err = (ea + eb) * (k - i) + (ea + ec) * (j - i) + 1e-12 * (abs(fb - fa) * (k - i) + abs(fc - fa) * (j - i))
    if diff < -err:
        return True
    if diff > err:
        return False
    return (lb - la) * (k - i) < (lc - la) * (j - i)


def upper_hull(points: Sequence[tuple[int, LogValue]]) -> list[tuple[int, LogValue]]:
    """Boundary points of the upper concave hull, collinear points kept."""
    hull: list[tuple[int, LogValue]] = []
    for pt in sorted(points, key=lambda q: q[0]):
        while len(hull) >= 2 and _strictly_below(hull[-2], hull[-1], pt):
            hull.pop()
        hull.append(pt)
    return hull


def tropical_indices(t: TropicalPolynomial) -> list[int]:
    pts = t.points()
    if not pts:
        raise ValueError("no finite terms")
    return [k for k, _ in upper_hull(pts)]


def classify_pair(k0: int, k1: int, s0: int, s1: int) -> str:
    """Class of the tropical root between consecutive tropical indices ``k0 < k1``."""
    odd = (k1 - k0) % 2 == 1
    if odd:
        return POSITIVE if s0 != s1 else NEGATIVE
    return POSITIVE_NEGATIVE if s0 != s1 else NON_ESSENTIAL


@dataclass(frozen=True)
class TropicalRoot:
    """A corner of the tropical polynomial.

    ``indices`` lists every hull point attaining the maximum at ``value``;
    ``classes`` has one entry per consecutive pair among them.
    """

    value: LogValue
    indices: tuple[int, ...]
    classes: tuple[str, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.indices) - 1

    @property
    def root_class(self) -> str:
        distinct = sorted(set(self.classes))
        return distinct[0] if len(distinct) == 1 else ",".join(self.classes)

    @property
    def positive(self) -> int:
        return sum(c in (POSITIVE, POSITIVE_NEGATIVE) for c in self.classes)

    @property
    def negative(self) -> int:
        return sum(c in (NEGATIVE, POSITIVE_NEGATIVE) for c in self.classes)

    def to_json(self) -> dict:
        return {
            "xi": self.value.to_json(),
            "approx": self.value.decimal(),
            "mult": self.multiplicity,
            "class": self.root_class,
            "indices": list(self.indices),
        }


@dataclass(frozen=True)
class TropicalAnalysis:
    tropical_indices: tuple[int, ...]
    roots: tuple[TropicalRoot, ...]
    degree: int
    zero_roots: int = 0

    @property
    def essential_positive(self) -> int:
        return sum(r.positive for r in self.roots)

    @property
    def essential_negative(self) -> int:
        return sum(r.negative for r in self.roots)

    @property
    def essential_total(self) -> int:
        return self.essential_positive + self.essential_negative

    @property
    def root_count(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def class_counts(self) -> dict[str, int]:
        out = {POSITIVE: 0, NEGATIVE: 0, POSITIVE_NEGATIVE: 0, NON_ESSENTIAL: 0}
        for r in self.roots:
            for c in r.classes:
                out[c] += 1
        return out

    def to_json(self) -> dict:
        return {
            "tropical_indices": list(self.tropical_indices),
            "zero_roots": self.zero_roots,
            "roots": [r.to_json() for r in self.roots],
            "counts": {
                "essential_positive": self.essential_positive,
                "essential_negative": self.essential_negative,
                "essential_total": self.essential_total,
                **self.class_counts(),
            },
        }


def tropical_roots(t: TropicalPolynomial, signs: Sequence[int]) -> TropicalAnalysis:
    if len(signs) != len(t.logcoefs):
        raise ValueError("sign sequence length mismatch")
    for k, v in enumerate(t.logcoefs):
        if (v is None) != (signs[k] == 0):
            raise ValueError(f"sign at exponent {k} inconsistent with the -inf pattern")
    hull = upper_hull(t.points())
    roots: list[TropicalRoot] = []
    run_idx: list[int] = []
    run_cls: list[str] = []
    run_val: LogValue | None = None
    for (k0, l0), (k1, l1) in zip(hull, hull[1:]):
        xi = (l0 - l1) / (k1 - k0)
        cls = classify_pair(k0, k1, signs[k0], signs[k1])
        if run_val is not None and xi == run_val:
            run_idx.append(k1)
            run_cls.append(cls)
            continue
        if run_val is not None:
            roots.append(TropicalRoot(run_val, tuple(run_idx), tuple(run_cls)))
        run_val, run_idx, run_cls = xi, [k0, k1], [cls]
    if run_val is not None:
        roots.append(TropicalRoot(run_val, tuple(run_idx), tuple(run_cls)))
    return TropicalAnalysis(tuple(k for k, _ in hull), tuple(roots), t.degree, hull[0][0])


def analyze(p: Polynomial, lam=None) -> TropicalAnalysis:
    """Tropical indices, roots and essential counts of ``tr^lam_p``."""
    return tropical_roots(tropicalize(p, lam), p.signs())


def dominant_index(t: TropicalPolynomial, xi: LogValue) -> list[int]:
    """Exponents attaining the maximum of the tropical polynomial at ``xi``."""
    vals = [(k, k * xi + v) for k, v in t.points()]
    best = max(v for _, v in vals)
    return [k for k, v in vals if v == best]


# -- central indices ---------------------------------------------------------


@dataclass(frozen=True)
class CentralIndexVerdict:
    index: int
    status: str  # certified-yes | certified-no | undecided
    witness: Fraction | None = None
    precision_used: int = 53

    @property
    def is_central(self) -> bool | None:
        return {"certified-yes": True, "certified-no": False}.get(self.status)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "witness": format_rational(self.witness) if self.witness is not None else None,
            "precision_used": self.precision_used,
        }


def _ln_fraction(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def _fraction_from_exp(t: float) -> Fraction:
    n = math.floor(t / math.log(2))
    r = Fraction(math.exp(t - n * math.log(2)))
    return r * 2**n if n >= 0 else r / 2 ** (-n)


def _dominates(ck: Fraction, others: dict[int, Fraction], k: int, x: Fraction) -> bool:
    # |a_k| x^k >= sum |a_i| x^i, divided through by x^min to stay polynomial
    # gmpy2 rationals: coefficients can carry 10^5-bit denominators
    lo = min([k, *others])
    xq = gmpy2.mpq(x.numerator, x.denominator)
    total = sum(gmpy2.mpq(c.numerator, c.denominator) * xq ** (i - lo) for i, c in others.items())
    return gmpy2.mpq(ck.numerator, ck.denominator) * xq ** (k - lo) >= total


def _lse(values: list[float]) -> float:
    if not values:
        return -math.inf
    m = max(values)
    return m + math.log(sum(math.exp(v - m) for v in values))


def _float_minimizer(lw: dict[int, float], k: int) -> float:
    """Minimizer of ``t -> sum(exp(lw_i + (i-k) t))`` (both sides present)."""

    def slope_sign(t: float) -> float:
        up = _lse([lw[i] + math.log(i - k) + (i - k) * t for i in lw if i > k])
        down = _lse([lw[i] + math.log(k - i) + (i - k) * t for i in lw if i < k])
        return up - down

    lo, hi = -1.0, 1.0
    while slope_sign(lo) > 0:
        lo *= 2
    while slope_sign(hi) < 0:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if mid in (lo, hi) or hi - lo < 1e-14 * max(1.0, abs(mid)):
            break
        if slope_sign(mid) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def _mp_minimizer(lw: dict[int, mpmath.mpf], k: int, prec: int, guess: float) -> mpmath.mpf:
    with mpmath.workprec(prec):

        def slope(t):
            return mpmath.fsum((i - k) * mpmath.exp(lw[i] + (i - k) * t) for i in lw)

        lo, hi = mpmath.mpf(guess) - 1, mpmath.mpf(guess) + 1
        while slope(lo) > 0:
            lo -= 2 * (hi - lo)
        while slope(hi) < 0:
            hi += 2 * (hi - lo)
        for _ in range(prec + 8):
            mid = (lo + hi) / 2
            if slope(mid) > 0:
                hi = mid
            else:
                lo = mid
        return (lo + hi) / 2


def _mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    man = int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


def _pair_dominates(ck: Fraction, others: dict[int, Fraction], k: int) -> bool:
    """Some ``i < k < j`` with ``c_k^{j-i} <= c_i^{j-k} c_j^{k-i}``.

    Then ``c_i x^i + c_j x^j > c_k x^k`` for every ``x > 0``, so ``k`` is not
    central.  Floats pick the most promising pair; the check itself is exact.
    """
    lck = _ln_fraction(ck)
    lw = {i: _ln_fraction(c) - lck for i, c in others.items()}
    best, pair = -math.inf, None
    for i in (i for i in lw if i < k):
        for j in (j for j in lw if j > k):
            excess = ((j - k) * lw[i] + (k - i) * lw[j]) / (j - i)
            if excess > best:
                best, pair = excess, (i, j)
    if pair is None or best < -1e-9:
        return False
    i, j = pair
    return ck ** (j - i) <= others[i] ** (j - k) * others[j] ** (k - i)


def _tangent_bound(ck: Fraction, others: dict[int, Fraction], k: int, xa: Fraction, xb: Fraction) -> LogValue | None:
    """Certified lower bound of ``min_t f(t)`` from tangents at ``ln xa < ln xb``.

    ``f(t) = sum((c_i/c_k) e^{(i-k)t})`` is convex; two tangents with slopes of
    opposite sign bound it from below by the value where they cross.
    """
    fa = sum(c / ck * xa ** (i - k) for i, c in others.items())
    fb = sum(c / ck * xb ** (i - k) for i, c in others.items())
    da = sum((i - k) * c / ck * xa ** (i - k) for i, c in others.items())
    db = sum((i - k) * c / ck * xb ** (i - k) for i, c in others.items())
    if da == 0:
        return LogValue(fa)
    if db == 0:
        return LogValue(fb)
    if not (da < 0 < db):
        return None
    w = LogValue.ln(xb / xa)
    return LogValue(fa + da * (fb - fa) / (da - db)) + w * (-da * db / (da - db))


def _central_core(
    k: int,
    yes_ck: Fraction,
    yes_others: dict[int, Fraction],
    no_ck: Fraction,
    no_others: dict[int, Fraction],
    budget: int,
) -> CentralIndexVerdict:
    """Decide Eq.-(1) dominance given pessimistic data for each verdict.

    ``yes_*`` must be the data on which a witness is validated (``c_k`` small,
    others large); ``no_*`` the data on which the lower bound is certified.
    """
    if not yes_others:
        return CentralIndexVerdict(k, "certified-yes", Fraction(1))
    lower = [i for i in yes_others if i < k]
    upper = [i for i in yes_others if i > k]
    if not lower or not upper:
        # monotone: dominance holds near 0 (only higher terms) or near infinity;
        # start where each of the m other terms is at most a_k x^k / m
        m = len(yes_others)
        lck = _ln_fraction(yes_ck)
        if upper:
            t = min((lck - math.log(m) - _ln_fraction(c)) / (i - k) for i, c in yes_others.items())
            x, step = Fraction(2) ** math.floor(t / math.log(2) - 1), Fraction(1, 2)
        else:
            t = max((math.log(m) + _ln_fraction(c) - lck) / (k - i) for i, c in yes_others.items())
            x, step = Fraction(2) ** math.ceil(t / math.log(2) + 1), Fraction(2)
        for _ in range(budget):
            if _dominates(yes_ck, yes_others, k, x):
                return CentralIndexVerdict(k, "certified-yes", x)
            x *= step
        return CentralIndexVerdict(k, "undecided", None, budget)

    if _pair_dominates(no_ck, no_others, k):
        return CentralIndexVerdict(k, "certified-no", None, 53)
    lw = {i: _ln_fraction(c) - _ln_fraction(yes_ck) for i, c in yes_others.items()}
    t_star = _float_minimizer(lw, k)
    x_star = _fraction_from_exp(t_star)
    candidates = [x_star.limit_denominator(q) for q in (1, 100, 10**6)] + [x_star]
    for x in candidates:
        if x > 0 and _dominates(yes_ck, yes_others, k, x):
            return CentralIndexVerdict(k, "certified-yes", x, 53)
    h = 1e-6 * max(1.0, abs(t_star))
    for _ in range(8):
        xa, xb = _fraction_from_exp(t_star - h), _fraction_from_exp(t_star + h)
        bound = _tangent_bound(no_ck, no_others, k, xa, xb)
        if bound is not None:
            if bound > 1:
                return CentralIndexVerdict(k, "certified-no", None, 53)
            break
        h *= 16

    prec = 128
    while prec <= budget:
        with mpmath.workprec(prec + 32):
            lwm = {i: mpmath.log(mpmath.mpf(c.numerator) / c.denominator) - mpmath.log(mpmath.mpf(yes_ck.numerator) / yes_ck.denominator) for i, c in yes_others.items()}
            t = _mp_minimizer(lwm, k, prec, t_star)
            xm = mpmath.exp(t)
            x_star = _mpf_to_fraction(xm)
            cands = [x_star, x_star.limit_denominator(2 ** (prec // 4))]
            for x in cands:
                if x > 0 and _dominates(yes_ck, yes_others, k, x):
                    return CentralIndexVerdict(k, "certified-yes", x, prec)
            h = mpmath.mpf(2) ** (-(prec // 2)) * max(1, abs(t))
            xa, xb = _mpf_to_fraction(mpmath.exp(t - h)), _mpf_to_fraction(mpmath.exp(t + h))
        bound = _tangent_bound(no_ck, no_others, k, xa, xb)
        if bound is not None and bound > 1:
            return CentralIndexVerdict(k, "certified-no", None, prec)
        prec *= 2
    return CentralIndexVerdict(k, "undecided", None, budget)


def central_index_check(p: Polynomial, k: int, budget: int = 1024) -> CentralIndexVerdict:
    """Is ``k`` a central index of ``p`` (some ``x >= 0`` with ``|a_k|x^k >= sum_{i!=k}|a_i|x^i``)?"""
    if not 0 <= k <= p.degree or not p[k]:
        raise ValueError("central index needs a nonzero coefficient a_k")
    ck = abs(p[k])
    others = {i: abs(c) for i, c in enumerate(p.coeffs) if c and i != k}
    verdict = _central_core(k, ck, others, ck, others, budget)
    if verdict.status == "undecided":
        return _central_exact(k, ck, others)
    return verdict


def _central_exact(k: int, ck: Fraction, others: dict[int, Fraction]) -> CentralIndexVerdict:
    """Exact fallback near equality.

    With terms on both sides of ``k``, ``g(x) = |a_k|x^k - sum |a_i|x^i`` is
    negative near ``0`` and near infinity, so ``k`` is central exactly when
    ``g`` has a positive root.  A rational repeated root is returned as the
    witness; an irrational touching point leaves the witness empty.
    """
    if all(i > k for i in others) or all(i < k for i in others):
        return CentralIndexVerdict(k, "certified-yes", None, 0)
    lo = min([k, *others])
    g = Polynomial.from_terms({k - lo: ck, **{i - lo: -c for i, c in others.items()}})
    if not sturm_count(g, "distinct").positive:
        return CentralIndexVerdict(k, "certified-no", None, 0)
    gf = g.flint
    for factor, _ in gf.gcd(gf.derivative()).factor()[1]:
        if factor.degree() == 1:
            x = -Fraction(int(factor[0].p), int(factor[0].q)) / Fraction(int(factor[1].p), int(factor[1].q))
            if x > 0 and _dominates(ck, others, k, x):
                return CentralIndexVerdict(k, "certified-yes", x, 0)
    return CentralIndexVerdict(k, "certified-yes", None, 0)


def central_index_check_bracketed(
    lows: Sequence[Fraction], highs: Sequence[Fraction], k: int, budget: int = 1024
) -> CentralIndexVerdict:
    """Central-index test for magnitudes known only as ``lows[i] <= |a_i| <= highs[i]``.

    A ``certified`` verdict holds for every polynomial inside the bracket.
    """
    yes_others = {i: h for i, h in enumerate(highs) if h and i != k}
    no_others = {i: lo for i, lo in enumerate(lows) if lo and i != k}
    if not lows[k]:
        raise ValueError("bracket for a_k must exclude zero")
    return _central_core(k, Fraction(lows[k]), yes_others, Fraction(highs[k]), no_others, budget)


@dataclass(frozen=True)
class SignIndependence:
    status: bool | None  # None = some index undecided
    verdicts: tuple[CentralIndexVerdict, ...] = field(default=())

    def __bool__(self) -> bool:
        return bool(self.status)


def sign_independently_real_rooted(p: Polynomial, budget: int = 1024) -> SignIndependence:
    """Every index central, i.e. real-rooted under every sign pattern."""
    if any(c == 0 for c in p.coeffs) or p.is_zero:
        raise ValueError("sign-independent real-rootedness needs full support")
    verdicts = tuple(central_index_check(p, k, budget) for k in range(p.degree + 1))
    if any(v.status == "certified-no" for v in verdicts):
        return SignIndependence(False, verdicts)
    if any(v.status == "undecided" for v in verdicts):
        return SignIndependence(None, verdicts)
    return SignIndependence(True, verdicts)


def slopes_central_promotion(p: Polynomial, x) -> tuple[int, bool]:
    """Dominating tropical index at ``ln|x|`` and whether it is central there.

    Requires every tropical root of ``tr_p`` to be more than ``ln 3`` from
    ``ln|x|``; under that hypothesis dominance always holds.
    """
    x = abs(Fraction(x))
    if not x:
        raise ValueError("x must be nonzero")
    t = tropicalize(p)
    xi = LogValue.ln(x)
    for root in analyze(p).roots:
        d = root.value - xi
        if (d if d.sign() >= 0 else -d) <= LN3:
            raise ValueError("x too close to a tropical root")
    (k,) = dominant_index(t, xi)
    ck = abs(p[k])
    others = {i: abs(c) for i, c in enumerate(p.coeffs) if c and i != k}
    lo = min([k, *others])
    total = sum(c * x ** (i - lo) for i, c in others.items())
    return k, ck * x ** (k - lo) > total
