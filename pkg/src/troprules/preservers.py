"""Multiplier sequences and the checks that relate them to root preservation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2

from .numeric import LogValue, PrecisionExhausted, exp_bounds
from .poly import Polynomial, sturm_count
from .sampling import random_polynomial, trial_rng
from .tropical import (
    analyze,
    central_index_check,
    central_index_check_bracketed,
    tropical_indices,
    tropicalize,
    upper_hull,
)

__all__ = [
    "MultiplierSeq",
    "DEFAULT_EPSILON",
    "dagger_seq",
    "delta_seq",
    "delta_gap",
    "is_log_concave",
    "is_strictly_log_concave",
    "truncation_tropically_real_rooted",
    "PreserverTrial",
    "index_preserver_trial",
    "witness_family_trials",
    "lambda2_member",
    "lambda4_member",
    "root_preservation_violation",
    "SPowerResult",
    "s_power_search",
]

DEFAULT_EPSILON = Fraction(1, 1 << 20)


@dataclass(frozen=True)
class MultiplierSeq:
    """Positive sequence stored as exact natural logarithms ``ln(lam_k)``."""

    log_entries: tuple[LogValue, ...]
    label: str = field(default="custom", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "log_entries", tuple(self.log_entries))
        if not self.log_entries:
            raise ValueError("empty multiplier sequence")

    @classmethod
    def from_values(cls, values: Iterable) -> MultiplierSeq:
        return cls(tuple(LogValue.ln(Fraction(v)) for v in values))

    @classmethod
    def from_logs(cls, logs: Iterable, label: str = "custom") -> MultiplierSeq:
        return cls(tuple(v if isinstance(v, LogValue) else LogValue(Fraction(v)) for v in logs), label)

    @classmethod
    def flat(cls, d: int) -> MultiplierSeq:
        return cls(tuple(LogValue() for _ in range(d + 1)), "flat")

    @property
    def degree(self) -> int:
        return len(self.log_entries) - 1

    def __len__(self) -> int:
        return len(self.log_entries)

    def power(self, s) -> MultiplierSeq:
        s = Fraction(s)
        return MultiplierSeq(tuple(v * s for v in self.log_entries), f"{self.label}^{s}")

    def truncate(self, d: int) -> MultiplierSeq:
        if d + 1 > len(self):
            raise ValueError("truncation longer than the sequence")
        return MultiplierSeq(self.log_entries[: d + 1], self.label)

    def gaps(self) -> list[LogValue]:
        """``2 ln lam_k - ln lam_{k-1} - ln lam_{k+1}`` for interior ``k``."""
        e = self.log_entries
        return [2 * e[k] - e[k - 1] - e[k + 1] for k in range(1, len(e) - 1)]

    def apply(self, p: Polynomial) -> Polynomial:
        """``T_lam[p]``; only defined when every used entry is rational."""
        out = []
        for k, c in enumerate(p.coeffs):
            if not c:
                out.append(c)
                continue
            lo, hi = exp_bounds(self.log_entries[k], 64)
            if lo != hi:
                raise ValueError(f"lam_{k} is irrational; use tropical or bracketed routines")
            out.append(c * lo)
        return Polynomial.from_coeffs(out)

    def to_json(self) -> dict:
        if self.label in ("dagger", "delta", "flat"):
            return {"preset": self.label, "degree": self.degree}
        return {"log_entries": [v.to_json() for v in self.log_entries]}

    @classmethod
    def from_json(cls, data: Mapping) -> MultiplierSeq:
        if "preset" in data:
            return preset(data["preset"], int(data["degree"]))
        return cls(tuple(LogValue.from_json(v) for v in data["log_entries"]))


def dagger_seq(d: int) -> MultiplierSeq:
    """``lam_k = e^{-k^2}``."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    return MultiplierSeq(tuple(LogValue(-k * k) for k in range(d + 1)), "dagger")


def delta_gap(d: int, epsilon: Fraction = Fraction(0)) -> LogValue:
    """``2*Delta_d*(1 + epsilon)`` with ``2*Delta_d = (d^2/4) ln 36d + (d+1) ln d + ln 4``."""
    scale = 1 + Fraction(epsilon)
    factors = [(36 * d, Fraction(d * d, 4) * scale), (2, 2 * scale)]
    if d > 1:
        factors.append((d, (d + 1) * scale))
    return LogValue.from_factors(0, factors)


def delta_seq(d: int, epsilon: Fraction = DEFAULT_EPSILON) -> MultiplierSeq:
    """``ln lam_k = -Delta_d (1 + epsilon) k^2``; every log-concavity gap is ``2 Delta_d (1 + epsilon)``."""
    if d < 1:
        raise ValueError("degree must be positive")
    half = delta_gap(d, epsilon) / 2
    return MultiplierSeq(tuple(half * (-k * k) for k in range(d + 1)), "delta")


def flat_seq(d: int) -> MultiplierSeq:
    return MultiplierSeq.flat(d)


def preset(name: str, d: int) -> MultiplierSeq:
    try:
        return {"dagger": dagger_seq, "delta": delta_seq, "flat": flat_seq}[name](d)
    except KeyError:
        raise ValueError(f"unknown multiplier preset {name!r}") from None


def _as_seq(lam) -> MultiplierSeq:
    if isinstance(lam, MultiplierSeq):
        return lam
    return MultiplierSeq.from_values(lam)


def is_log_concave(lam) -> bool:
    return all(g.sign() >= 0 for g in _as_seq(lam).gaps())


def is_strictly_log_concave(lam) -> bool:
    return all(g.sign() > 0 for g in _as_seq(lam).gaps())


def truncation_tropically_real_rooted(lam) -> bool:
    """Every index of ``sum lam_k x^k`` is a tropical index."""
    lam = _as_seq(lam)
    return len(upper_hull(list(enumerate(lam.log_entries)))) == len(lam)


# -- preserver trials --------------------------------------------------------


@dataclass(frozen=True)
class PreserverTrial:
    kind: str
    status: str  # pass | violation | undecided
    lost_indices: tuple[int, ...] = ()
    undecided_indices: tuple[int, ...] = ()

    @property
    def violated(self) -> bool:
        return self.status == "violation"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "status": self.status,
            "lost_indices": list(self.lost_indices),
            "undecided_indices": list(self.undecided_indices),
        }


def _scaled_brackets(lam: MultiplierSeq, p: Polynomial, bits: int) -> tuple[list[Fraction], list[Fraction]]:
    lows, highs = [], []
    for k, c in enumerate(p.coeffs):
        if not c:
            lows.append(Fraction(0))
            highs.append(Fraction(0))
            continue
        lo, hi = exp_bounds(lam.log_entries[k], bits)
        lows.append(abs(c) * lo)
        highs.append(abs(c) * hi)
    return lows, highs


def _exact_exp(v: LogValue) -> Fraction | None:
    """``e^v`` when it is rational: no affine part and integer log coefficients."""
    if v.affine or any(c.denominator != 1 for _, c in v.terms):
        return None
    out = Fraction(1)
    for b, c in v.terms:
        out *= Fraction(b) ** int(c)
    return out


def _rational_reduction(lam: MultiplierSeq, p: Polynomial) -> Polynomial | None:
    """Rational ``q`` with ``T_lam[p](x) = C q(r x)`` for constants ``C, r > 0``, if one exists.

    Strip the affine part ``A + B k`` through the first two support points;
    when what is left exponentiates to rationals, central indices of
    ``T_lam[p]`` are exactly those of ``q``.
    """
    support = p.support()
    if len(support) < 2:
        return None
    e = lam.log_entries
    k0, k1 = support[0], support[1]
    slope = (e[k1] - e[k0]) / (k1 - k0)
    out = [Fraction(0)] * (p.degree + 1)
    for k in support:
        factor = _exact_exp(e[k] - e[k0] - slope * (k - k0))
        if factor is None:
            return None
        out[k] = p[k] * factor
    return Polynomial.from_coeffs(out)


class _ScaledCentral:
    """Central-index verdicts for the indices of one ``T_lam[p]``, sharing the setup."""

    def __init__(self, lam: MultiplierSeq, p: Polynomial, max_bits: int = 1024):
        self.lam, self.p, self.max_bits = lam, p, max_bits
        self.q = _rational_reduction(lam, p)
        self._brackets: dict[int, tuple[list[Fraction], list[Fraction]]] = {}

    def brackets(self, bits: int):
        if bits not in self._brackets:
            self._brackets[bits] = _scaled_brackets(self.lam, self.p, bits)
        return self._brackets[bits]

    def check(self, k: int):
        if self.q is not None:
            return central_index_check(self.q, k)
        bits = 64
        while True:
            lows, highs = self.brackets(bits)
            v = central_index_check_bracketed(lows, highs, k, budget=max(bits, 256))
            if v.status != "undecided" or bits >= self.max_bits:
                return v
            bits *= 2


def scaled_central_check(lam: MultiplierSeq, p: Polynomial, k: int, max_bits: int = 1024):
    """Central-index verdict for index ``k`` of ``T_lam[p]``.

    Exact when ``lam`` is rational up to a geometric factor on the support of
    ``p``; otherwise decided on rational brackets of increasing precision.
    """
    return _ScaledCentral(lam, p, max_bits).check(k)


def index_preserver_trial(lam, p: Polynomial, kind: str = "tropical") -> PreserverTrial:
    """Does ``T_lam`` keep every tropical (or certified central) index of ``p``?"""
    lam = _as_seq(lam)
    if len(lam) < p.degree + 1:
        raise ValueError("multiplier sequence shorter than deg(p) + 1")
    if kind == "tropical":
        before = tropical_indices(tropicalize(p))
        after = set(tropical_indices(tropicalize(p, lam)))
        lost = tuple(k for k in before if k not in after)
        return PreserverTrial(kind, "violation" if lost else "pass", lost)
    if kind != "central":
        raise ValueError(f"unknown trial kind {kind!r}")
    lost, undecided = [], []
    scaled = None
    for k in p.support():
        v = central_index_check(p, k)
        if v.status == "certified-no":
            continue
        if v.status == "undecided":
            undecided.append(k)
            continue
        scaled = scaled or _ScaledCentral(lam, p)
        w = scaled.check(k)
        if w.status == "certified-no":
            lost.append(k)
        elif w.status == "undecided":
            undecided.append(k)
    status = "violation" if lost else ("undecided" if undecided else "pass")
    return PreserverTrial(kind, status, tuple(lost), tuple(undecided))


def witness_family_trials(lam) -> list[tuple[Polynomial, PreserverTrial]]:
    """Trials on ``1 + x + ... + x^d`` and on ``x^{m-1} + 2x^m + x^{m+1}`` at each interior ``m``."""
    lam = _as_seq(lam)
    d = lam.degree
    out = [(Polynomial.from_coeffs([1] * (d + 1)), None)]
    for m in range(1, d):
        out.append((Polynomial.from_terms({m - 1: 1, m: 2, m + 1: 1}), None))
    results = []
    for i, (p, _) in enumerate(out):
        results.append((p, index_preserver_trial(lam, p, "tropical" if i == 0 else "central")))
    return results


# -- explicit membership tests ----------------------------------------------

_LN2 = LogValue.ln(2)


def lambda2_member(lam) -> bool:
    """``4 lam_1^2 >= lam_0 lam_2``."""
    e = _as_seq(lam).log_entries
    if len(e) != 3:
        raise ValueError("lambda2_member needs a sequence of length 3")
    return (2 * _LN2 + 2 * e[1] - e[0] - e[2]).sign() >= 0


def _surd_bound_holds(log_ratio: LogValue, cap: int = 1 << 14) -> bool:
    """Decide ``R <= 2 - 2*3^{-1/4}`` for ``R = exp(log_ratio)``.

    With ``R`` rational the surd is isolated and raised to the 4th power:
    ``R <= K  <=>  2 - R > 0 and 3(2 - R)^4 >= 16``.  Otherwise ``R`` is
    transcendental or an irrational algebraic, and rational brackets of both
    sides separate them.
    """
    lo, hi = exp_bounds(log_ratio, 64)
    if lo == hi:
        r = lo
        return r < 2 and 3 * (2 - r) ** 4 >= 16
    bits = 64
    while bits <= cap:
        lo, hi = exp_bounds(log_ratio, bits)
        # 3^{1/4} in [s/2^bits, (s+1)/2^bits] from an exact integer root
        s = int(gmpy2.iroot(gmpy2.mpz(3) << (4 * bits), 4)[0])
        scale = Fraction(1 << bits)
        k_lo = 2 - 2 * scale / s
        k_hi = 2 - 2 * scale / (s + 1)
        if hi <= k_lo:
            return True
        if lo > k_hi:
            return False
        bits *= 2
    raise PrecisionExhausted("surd comparison undecided at the cap")


def lambda4_member(lam) -> bool:
    """Sufficient system of five inequalities for positive degree-4 preservers."""
    e = _as_seq(lam).log_entries
    if len(e) != 5:
        raise ValueError("lambda4_member needs a sequence of length 5")
    ln9_4 = LogValue.ln(Fraction(9, 4))
    pairs = [
        _LN2 + 2 * e[1] - e[0] - e[2],
        ln9_4 + 2 * e[2] - e[1] - e[3],
        _LN2 + 2 * e[3] - e[2] - e[4],
    ]
    if any(g.sign() < 0 for g in pairs):
        return False
    return _surd_bound_holds(3 * e[0] + e[4] - 4 * e[1]) and _surd_bound_holds(e[0] + 3 * e[4] - 4 * e[3])


# -- empirical s-power search -------------------------------------------------


def root_preservation_violation(lam: MultiplierSeq, p: Polynomial) -> dict | None:
    """Compare real roots (with multiplicity) against essential tropical roots, per sign."""
    rc = sturm_count(p)
    ta = analyze(p, lam)
    if rc.positive > ta.essential_positive or rc.negative > ta.essential_negative:
        return {
            "polynomial": p.to_json(),
            "real": rc.to_json(),
            "essential_positive": ta.essential_positive,
            "essential_negative": ta.essential_negative,
        }
    return None


@dataclass(frozen=True)
class SPowerResult:
    s_star: Fraction
    degree: int
    trials: int
    seed: int
    tested: tuple[tuple[Fraction, int], ...]  # (s, violations)
    witness: dict | None = None
    witness_s: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "s_star": str(self.s_star),
            "degree": self.degree,
            "trials": self.trials,
            "seed": self.seed,
            "distribution": "mixture dense/sparse/double-root, ln|a_k| uniform on [-30, 30]",
            "empirical": True,
            "tested": [[str(s), n] for s, n in self.tested],
            "witness": self.witness,
            "witness_s": str(self.witness_s) if self.witness_s is not None else None,
        }


def _violations(lam: MultiplierSeq, d: int, s: Fraction, polys: Sequence[Polynomial]):
    scaled = lam.power(s)
    bad = [w for p in polys if (w := root_preservation_violation(scaled, p)) is not None]
    return len(bad), (bad[0] if bad else None)


def s_power_search(
    base, d: int, trials: int, seed: int, s_max: Fraction = Fraction(1 << 12), resolution: Fraction = Fraction(1, 64)
) -> SPowerResult:
    """Smallest tested ``s`` for which ``base^s`` shows no violation on ``trials`` random inputs.

    Doubling from ``s = 1`` (after trying ``s = 0``), then bisection down to
    ``resolution``.  The answer is an empirical estimate only.
    """
    base = _as_seq(base).truncate(d)
    if not is_strictly_log_concave(base) and d >= 2:
        raise ValueError("base must be strictly log-concave")
    if trials < 1:
        raise ValueError("need at least one trial")
    polys = [random_polynomial(trial_rng(seed, i), d) for i in range(trials)]
    tested: list[tuple[Fraction, int]] = []
    witness, witness_s = None, None

    def probe(s: Fraction) -> bool:
        nonlocal witness, witness_s
        n, w = _violations(base, d, s, polys)
        tested.append((s, n))
        if n and (witness_s is None or s > witness_s):
            witness, witness_s = w, s
        return n == 0

    if probe(Fraction(0)):
        return SPowerResult(Fraction(0), d, trials, seed, tuple(tested))
    lo, hi = Fraction(0), Fraction(1)
    while not probe(hi):
        lo, hi = hi, hi * 2
        if hi > s_max:
            raise RuntimeError(f"no violation-free s up to {s_max}")
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return SPowerResult(hi, d, trials, seed, tuple(tested), witness, witness_s)
