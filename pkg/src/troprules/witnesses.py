"""Explicit witnesses: the degree-100 polynomial R, the flat-multiplier
counterexample built from it, and the seeded fuzzer for the conjectured
tropical Descartes bound, with a self-verifying JSON-lines corpus."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .numeric import format_rational
from .poly import Polynomial, RootCount, _split_counts, squarefree_decomposition, sturm_count
from .preservers import MultiplierSeq, dagger_seq
from .sampling import DISTRIBUTIONS, random_polynomial, trial_rng
from .tropical import analyze

__all__ = [
    "RBuild",
    "build_R",
    "build_R_details",
    "CounterexampleRecord",
    "build_counterexample",
    "FuzzResult",
    "conjecture_fuzz",
    "check_conjecture",
    "append_corpus",
    "load_corpus",
    "CorpusError",
]


class CorpusError(ValueError):
    """A corpus line failed to parse or to re-verify."""


# -- the polynomial R ----------------------------------------------------------


def _q_chain(levels: int = 4) -> Polynomial:
    """``Q_1 = x + 1``, ``Q_{k+1} = Q_k (x^n + 1)`` with ``n`` the least odd number above ``deg Q_k``."""
    q = Polynomial.from_coeffs([1, 1])
    for _ in range(levels - 1):
        n = q.degree + 1
        if n % 2 == 0:
            n += 1
        q = q * Polynomial.from_terms({0: 1, n: 1})
    return q


def _negative_profile(p: Polynomial) -> tuple[int, int, int]:
    """(negative roots with multiplicity, distinct negative roots, positive roots)."""
    neg = distinct = pos = 0
    for factor, mult in squarefree_decomposition(p.divide_by_x_power(p.low_order())):
        fp, fn = _split_counts(factor.flint)
        neg += mult * fn
        distinct += fn
        pos += mult * fp
    return neg, distinct, pos


@dataclass(frozen=True)
class RBuild:
    polynomial: Polynomial
    eps: tuple[Fraction, Fraction, Fraction]  # (eps1, eps2, eps3)
    scale: Fraction  # r with r^100 equal to the perturbed constant term

    def to_json(self) -> dict:
        return {
            "eps1": format_rational(self.eps[0]),
            "eps2": format_rational(self.eps[1]),
            "eps3": format_rational(self.eps[2]),
            "r": format_rational(self.scale),
        }


def _first_split(
    base: Polynomial, bump: Polynomial, start: Fraction, want_distinct: int, cap: Fraction | None = None, max_halvings: int = 200
):
    """First ``start * 2^-t`` (t >= 1, at most ``cap``) at which ``base + eps*bump`` has ``want_distinct`` of its 4 negative roots apart."""
    eps = start
    for _ in range(max_halvings):
        eps /= 2
        if cap is not None and eps > cap:
            continue
        neg, distinct, pos = _negative_profile(base + bump * eps)
        if neg == 4 and distinct == want_distinct and pos == 0:
            return eps
    raise RuntimeError(f"no perturbation splits off root number {want_distinct - 1}")


def _scale_for(eps3: Fraction, degree: int = 100) -> Fraction:
    """``r = (n+1)/n`` with the largest ``r^degree - 1`` not exceeding ``eps3``."""
    n = max(1, int(degree / math.log1p(eps3)))
    while (Fraction(n + 1, n) ** degree) - 1 > eps3:
        n += 1
    return Fraction(n + 1, n)


@lru_cache(maxsize=1)
def build_R_details() -> RBuild:
    """Degree-100 ``R`` with four simple negative roots, ``a_0 = a_100 = 1`` and other coefficients in ``[0, 1)``.

    ``Q_4(x^5)`` has a fourfold root at ``-1``; adding ``eps3 (x+1)^3``,
    ``eps2 (x+1)^2`` and ``eps1 (x+1)`` splits it into four simple roots.
    ``eps3`` is then replaced by ``r^100 - 1 - eps2 - eps1`` for a rational
    ``r = (n+1)/n`` so that ``R(x) = Q(rx) / r^100`` is exact.
    """
    base = _q_chain(4).substitute_power(5)
    y = Polynomial.from_coeffs([1, 1])
    # the cap keeps the low coefficients 3*eps3 + ... of R below 1
    eps3 = _first_split(base, y**3, Fraction(2), 2, cap=Fraction(1, 6))
    stage = base + (y**3) * eps3
    eps2 = _first_split(stage, y**2, eps3, 3)
    stage = stage + (y**2) * eps2
    eps1 = _first_split(stage, y, eps2, 4)
    # swap the dyadic eps3 for the nearby value that makes the scaling exact
    r = _scale_for(eps3)
    while True:
        e3 = r**100 - 1 - eps2 - eps1
        tilde = base + (y**3) * e3 + (y**2) * eps2 + y * eps1
        if _negative_profile(tilde) == (4, 4, 0):
            break
        eps1 /= 2
    r_poly = tilde.scale_argument(r) * (1 / r**100)
    coeffs = r_poly.coeffs
    if not (r_poly.degree == 100 and coeffs[0] == 1 and coeffs[100] == 1 and all(0 <= c < 1 for c in coeffs[1:100])):
        raise RuntimeError("normalised R violates its coefficient bounds")
    if _negative_profile(r_poly) != (4, 4, 0):
        raise RuntimeError("normalised R lost a simple negative root")
    return RBuild(r_poly, (eps1, eps2, e3), r)


def build_R() -> Polynomial:
    return build_R_details().polynomial


# -- counterexample records ---------------------------------------------------


@dataclass
class CounterexampleRecord:
    """A polynomial whose real roots outnumber the essential tropical roots of ``tr^lam``.

    Stored claims are re-derived by :meth:`verify`.
    """

    polynomial: Polynomial
    lam: MultiplierSeq
    real_root_count: RootCount
    distinct_negative: int
    tropical_root_count: int
    essential_counts: tuple[int, int, int]
    kind: str = "fuzz"
    provenance: dict = field(default_factory=dict)

    @classmethod
    def measure(cls, p: Polynomial, lam: MultiplierSeq, kind: str, provenance: dict) -> CounterexampleRecord:
        rc = sturm_count(p)
        distinct = sturm_count(p, "distinct").negative
        ta = analyze(p, lam)
        return cls(
            p,
            lam,
            rc,
            distinct,
            ta.root_count,
            (ta.essential_positive, ta.essential_negative, ta.essential_total),
            kind,
            provenance,
        )

    @property
    def is_violation(self) -> bool:
        pos, neg, _ = self.essential_counts
        return self.real_root_count.positive > pos or self.real_root_count.negative > neg

    def verify(self) -> bool:
        fresh = CounterexampleRecord.measure(self.polynomial, self.lam, self.kind, self.provenance)
        return (
            fresh.real_root_count == self.real_root_count
            and fresh.distinct_negative == self.distinct_negative
            and fresh.tropical_root_count == self.tropical_root_count
            and fresh.essential_counts == self.essential_counts
        )

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "polynomial": self.polynomial.to_json(),
            "lam": self.lam.to_json(),
            "real_root_count": self.real_root_count.to_json(),
            "distinct_negative": self.distinct_negative,
            "tropical_root_count": self.tropical_root_count,
            "essential_counts": {
                "positive": self.essential_counts[0],
                "negative": self.essential_counts[1],
                "total": self.essential_counts[2],
            },
            "violation": self.is_violation,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, data: dict) -> CounterexampleRecord:
        rc = data["real_root_count"]
        ess = data["essential_counts"]
        return cls(
            Polynomial.from_json(data["polynomial"]),
            MultiplierSeq.from_json(data["lam"]),
            RootCount(int(rc["positive"]), int(rc["negative"]), int(rc["zero_multiplicity"]), bool(rc.get("with_multiplicity", True))),
            int(data["distinct_negative"]),
            int(data["tropical_root_count"]),
            (int(ess["positive"]), int(ess["negative"]), int(ess["total"])),
            data.get("kind", "fuzz"),
            data.get("provenance", {}),
        )


def _max_gap(lam: MultiplierSeq, lo: int, hi: int) -> Fraction:
    """Upper bound for the largest log-concavity gap of ``lam`` at interior ``j`` in ``[lo, hi]``."""
    e = lam.log_entries
    gaps = [2 * e[j] - e[j - 1] - e[j + 1] for j in range(max(lo, 1), min(hi, len(e) - 2) + 1)]
    return max((g.approx(32)[1] for g in gaps), default=Fraction(0))


def _first_delta(ends: Polynomial, core: Polynomial, first: int = 8, last: int = 4096) -> Fraction:
    """First ``2^-t`` (``t >= first``) keeping four simple negative roots.

    Adding the positive even term ``delta (x^d + 1)`` only lifts the graph on
    the negative axis, so admissibility is monotone in ``delta``; galloping then
    bisecting over ``t`` finds the same ``t`` as plain halving.
    """

    def ok(t: int) -> bool:
        wm, distinct, _ = _negative_profile(ends * Fraction(1, 1 << t) + core)
        return wm == 4 and distinct == 4

    if ok(first):
        return Fraction(1, 1 << first)
    bad, t = first, 2 * first
    while not ok(t):
        bad, t = t, 2 * t
        if t > last:
            raise RuntimeError(f"no admissible delta down to 2^-{last}")
    good = t
    while good - bad > 1:
        mid = (good + bad) // 2
        if ok(mid):
            good = mid
        else:
            bad = mid
    return Fraction(1, 1 << good)


def build_counterexample(k: int, d: int, lam: MultiplierSeq | None = None, delta=None) -> CounterexampleRecord:
    """``P = delta (x^d + 1) + x^k R`` with four simple negative roots and at most three tropical roots."""
    if k < 0 or k + 100 > d:
        raise ValueError("need 0 <= k and k + 100 <= d")
    lam = MultiplierSeq.flat(d) if lam is None else lam
    if len(lam) < d + 1:
        raise ValueError("multiplier sequence shorter than d + 1")
    rb = build_R_details()
    shifted = rb.polynomial.shift(k)
    ends = Polynomial.from_terms({0: 1, d: 1})
    if delta not in (None, "auto"):
        dl = Fraction(delta)
        wm, distinct, _ = _negative_profile(ends * dl + shifted)
        if not (wm == 4 and distinct == 4):
            raise ValueError(f"delta = {dl} leaves {wm} negative roots ({distinct} distinct)")
    else:
        dl = _first_delta(ends, shifted)
    p = ends * dl + shifted
    provenance = {
        "construction": "delta*(x^d + 1) + x^k*R",
        "k": k,
        "d": d,
        "delta": format_rational(dl),
        **rb.to_json(),
        "max_log_concavity_gap_upper": format_rational(_max_gap(lam, k, k + 100)),
        "strict_index_bound_k_lt_d_minus_100": k < d - 100,
    }
    rec = CounterexampleRecord.measure(p, lam, "counterexample", provenance)
    if rec.tropical_root_count > 3:
        raise ValueError(
            f"tr^lam has {rec.tropical_root_count} tropical roots; lam is not flat enough on [{k}, {k + 100}]"
        )
    return rec


# -- conjecture fuzzing -------------------------------------------------------


def check_conjecture(p: Polynomial, lam: MultiplierSeq) -> tuple[RootCount, tuple[int, int], bool]:
    """Real root counts, essential (positive, negative) counts, and whether both bounds hold."""
    rc = sturm_count(p)
    ta = analyze(p, lam)
    ok = rc.positive <= ta.essential_positive and rc.negative <= ta.essential_negative
    return rc, (ta.essential_positive, ta.essential_negative), ok


@dataclass
class FuzzResult:
    degree: int
    trials: int
    seed: int
    lam: MultiplierSeq
    violations: list[CounterexampleRecord]
    by_distribution: dict[str, int]

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "trials": self.trials,
            "seed": self.seed,
            "lam": self.lam.to_json(),
            "by_distribution": self.by_distribution,
            "violations": [v.to_json() for v in self.violations],
        }


def conjecture_fuzz(
    d: int, trials: int, seed: int, lam: MultiplierSeq | None = None, distribution: str | None = None
) -> FuzzResult:
    """Compare Sturm counts with essential tropical counts on ``trials`` seeded random polynomials."""
    if d < 1:
        raise ValueError("degree must be at least 1")
    lam = dagger_seq(d) if lam is None else lam
    if len(lam) < d + 1:
        raise ValueError("multiplier sequence shorter than d + 1")
    violations = []
    seen = {name: 0 for name in DISTRIBUTIONS}
    for i in range(trials):
        rng = trial_rng(seed, i)
        dist = distribution or rng.choices(DISTRIBUTIONS, (0.7, 0.2, 0.1))[0]
        seen[dist] += 1
        p = random_polynomial(rng, d, dist)
        _, _, ok = check_conjecture(p, lam)
        if not ok:
            rec = CounterexampleRecord.measure(
                p, lam, "fuzz", {"seed": seed, "trial": i, "degree": d, "distribution": dist}
            )
            if not rec.verify() or not rec.is_violation:
                raise AssertionError(f"violation at trial {i} did not re-verify")
            violations.append(rec)
    return FuzzResult(d, trials, seed, lam, violations, seen)


# -- corpus -------------------------------------------------------------------


def append_corpus(path: str | os.PathLike, records: Iterable[CounterexampleRecord]) -> int:
    n = 0
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
            n += 1
    return n


def load_corpus(path: str | os.PathLike, verify: bool = True) -> list[CounterexampleRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = CounterexampleRecord.from_json(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
            if verify and not rec.verify():
                raise CorpusError(f"line {lineno}: stored counts do not re-verify")
            out.append(rec)
    return out
