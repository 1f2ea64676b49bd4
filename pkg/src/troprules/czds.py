"""Complex-zero-decreasing certificates for sequences ``e^{-k^alpha}``.

Given a candidate ``lam`` and a reference sequence ``lam_star`` assumed to
preserve real-to-tropical root counts, the polynomial
``Q_d(x) = sum (lam_k / lam_star_k) x^k`` being sign-independently real-rooted
certifies ``lam`` in degree ``d``.  Two routes decide that property: a
separation test on the tropical roots of ``Q_d`` (all indices tropical, roots
more than ``2 ln 3`` apart) and a direct central-index test.  Every
certificate is conditional on the assumption about ``lam_star``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .numeric import BracketedReal, LogValue, exp_bounds, format_rational
from .preservers import MultiplierSeq, dagger_seq
from .tropical import central_index_check_bracketed, upper_hull

__all__ = [
    "CONDITIONAL_NOTE",
    "BracketedSeq",
    "CzdsCertificate",
    "power_sequence",
    "czds_check",
    "alpha_scan",
    "separation_threshold",
]

CONDITIONAL_NOTE = (
    "conditional: certifies a complex-zero-decreasing sequence in this degree only if "
    "lam_star is a real-to-tropical root preserver, which is open for lam_star = e^(-k^2)"
)

TWO_LN3 = 2 * LogValue.ln(3)

LogEntry = Union[LogValue, BracketedReal]


@dataclass(frozen=True)
class BracketedSeq:
    """Log-entries known only through certified enclosures."""

    log_entries: tuple[BracketedReal, ...]
    label: str = "custom"

    def __len__(self) -> int:
        return len(self.log_entries)


def power_sequence(alpha, d: int):
    """``ln lam_k = -k^alpha``: exact for integer ``alpha``, bracketed otherwise."""
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    label = f"exp(-k^{format_rational(alpha)})"
    if alpha.denominator == 1:
        return MultiplierSeq(tuple(LogValue(-Fraction(k) ** int(alpha)) for k in range(d + 1)), label)
    return BracketedSeq(tuple(-BracketedReal.power(k, alpha) for k in range(d + 1)), label)


def separation_threshold() -> float:
    """Smallest ``alpha`` with the ``k = 1`` gap ``2^alpha - 4`` above ``2 ln 3`` (reference value)."""
    return math.log2(4 + 2 * math.log(3))


@dataclass
class CzdsCertificate:
    lam_label: str
    lam_star_label: str
    degree: int
    method: str
    status: str  # certified | failed-at-index k | undecided
    q_logcoefs: tuple[LogEntry, ...]
    failed_index: int | None = None
    gaps: tuple[float, ...] = ()
    details: dict = field(default_factory=dict)
    note: str = CONDITIONAL_NOTE

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_json(self) -> dict:
        coefs = []
        for v in self.q_logcoefs:
            if isinstance(v, LogValue):
                coefs.append(v.to_json())
            else:
                lo, hi = v.enclose(64)
                coefs.append({"lo": format_rational(lo), "hi": format_rational(hi)})
        return {
            "lam": self.lam_label,
            "lam_star": self.lam_star_label,
            "degree": self.degree,
            "method": self.method,
            "status": self.status,
            "failed_index": self.failed_index,
            "min_gap": min(self.gaps) if self.gaps else None,
            "gaps_approx": list(self.gaps),
            "q_logcoefs": coefs,
            "details": self.details,
            "conditional": self.note,
        }


def _q_logs(lam, lam_star, d: int) -> tuple[tuple[LogEntry, ...], bool]:
    if len(lam) < d + 1 or len(lam_star) < d + 1:
        raise ValueError("sequences must have length at least d + 1")
    exact = isinstance(lam, MultiplierSeq) and isinstance(lam_star, MultiplierSeq)
    out = []
    for k in range(d + 1):
        a, b = lam.log_entries[k], lam_star.log_entries[k]
        out.append(a - b if exact else BracketedReal.of(a) - BracketedReal.of(b))
    return tuple(out), exact


def _separation_exact(logs: Sequence[LogValue], d: int) -> tuple[str, int | None, list[float]]:
    hull = upper_hull(list(enumerate(logs)))
    on_hull = {k for k, _ in hull}
    missing = [k for k in range(d + 1) if k not in on_hull]
    roots = [logs[k - 1] - logs[k] for k in range(1, d + 1)]
    gaps = [roots[i + 1] - roots[i] for i in range(d - 1)]
    approx = [float(g) for g in gaps]
    if missing:
        return f"failed-at-index {missing[0]}", missing[0], approx
    for i, g in enumerate(gaps):
        if not g > TWO_LN3:
            return f"failed-at-index {i + 1}", i + 1, approx
    return "certified", None, approx


def _separation_bracketed(logs: Sequence[BracketedReal], d: int) -> tuple[str, int | None, list[float]]:
    # gap at interior k is 2 L_k - L_{k-1} - L_{k+1}; it is the distance
    # between consecutive tropical roots when every index is tropical
    gaps = [2 * logs[k] - logs[k - 1] - logs[k + 1] for k in range(1, d)]
    approx = [float(g) for g in gaps]
    undecided = None
    for i, g in enumerate(gaps):
        s = (g - BracketedReal.of(TWO_LN3)).sign()
        if s is None:
            undecided = i + 1 if undecided is None else undecided
        elif s <= 0:
            return f"failed-at-index {i + 1}", i + 1, approx
    if undecided is not None:
        return "undecided", undecided, approx
    return "certified", None, approx


# terms whose log sits this far below the pivot are enclosed by [0, e^FLOOR]
FLOOR = Fraction(-200)


def _log_bounds(v: LogEntry, bits: int) -> tuple[Fraction, Fraction]:
    return v.approx(bits) if isinstance(v, LogValue) else v.enclose(bits)


def _enclose_exp(v: LogEntry, bits: int) -> tuple[Fraction, Fraction]:
    if isinstance(v, LogValue):
        return exp_bounds(v, bits)
    lo, hi = v.enclose(bits + 8)
    return exp_bounds(lo, bits)[0], exp_bounds(hi, bits)[1]


def _pivot_slope(logs: Sequence[LogEntry], k: int) -> Fraction:
    """A rational slope near the local slope of the log-coefficients at ``k``."""
    d = len(logs) - 1
    mids = {j: sum(_log_bounds(logs[j], 32)) / 2 for j in (k - 1, k, k + 1) if 0 <= j <= d}
    if d == 0:
        return Fraction(0)
    if k == 0:
        slope = mids[1] - mids[0] + 1
    elif k == d:
        slope = mids[d] - mids[d - 1] - 1
    else:
        slope = (mids[k + 1] - mids[k - 1]) / 2
    return Fraction(round(slope * 1024), 1024)


def _local_brackets(logs: Sequence[LogEntry], k: int, bits: int) -> tuple[list[Fraction], list[Fraction]]:
    """Brackets for the coefficients of ``c Q(r x)`` with ``c, r > 0`` chosen so ``a_k = 1``.

    The rescaling keeps central indices.  Terms far below the pivot get the
    enclosure ``[0, e^FLOOR]``, which keeps the rationals small when the raw
    log-coefficients span millions of units.
    """
    s = _pivot_slope(logs, k)
    lows, highs = [], []
    for j, v in enumerate(logs):
        w = v - logs[k] - s * (j - k)
        if j != k and _log_bounds(w, 32)[1] < FLOOR:
            lows.append(Fraction(0))
            highs.append(exp_bounds(FLOOR, bits)[1])
            continue
        lo, hi = _enclose_exp(w, bits)
        lows.append(lo)
        highs.append(hi)
    return lows, highs


def _central(logs: Sequence[LogEntry], d: int, bits: int = 64) -> tuple[str, int | None, dict]:
    def verdicts(b: int):
        out = []
        for k in range(d + 1):
            lows, highs = _local_brackets(logs, k, b)
            out.append(central_index_check_bracketed(lows, highs, k, budget=512).status)
        return out

    first, second = verdicts(bits), verdicts(2 * bits)
    for k, (a, b) in enumerate(zip(first, second)):
        if a != b or a == "undecided":
            return "undecided", k, {"verdicts": second}
        if a == "certified-no":
            return f"failed-at-index {k}", k, {"verdicts": second}
    return "certified", None, {"verdicts": second}


def czds_check(lam, lam_star=None, d: int | None = None, method: str = "separation") -> CzdsCertificate:
    """Sign-independent real-rootedness of ``Q_d`` by tropical separation or central indices."""
    d = (len(lam) - 1) if d is None else d
    lam_star = dagger_seq(d) if lam_star is None else lam_star
    logs, exact = _q_logs(lam, lam_star, d)
    lam_label = getattr(lam, "label", "custom")
    star_label = getattr(lam_star, "label", "custom")
    if method == "separation":
        if exact:
            status, idx, gaps = _separation_exact(logs, d)
        else:
            status, idx, gaps = _separation_bracketed(logs, d)
        return CzdsCertificate(lam_label, star_label, d, method, status, logs, idx, tuple(gaps))
    if method == "central":
        status, idx, details = _central(logs, d)
        return CzdsCertificate(lam_label, star_label, d, method, status, logs, idx, (), details)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ScanRow:
    alpha: Fraction
    status: str
    failed_index: int | None
    min_gap: float | None

    def to_json(self) -> dict:
        return {
            "alpha": format_rational(self.alpha),
            "alpha_approx": float(self.alpha),
            "status": self.status,
            "failed_index": self.failed_index,
            "min_gap": self.min_gap,
        }


def alpha_scan(alpha_lo, alpha_hi, d: int, step) -> dict:
    """Separation verdicts for ``lam_k = e^{-k^alpha}`` on an ``alpha`` grid, with the first certified ``alpha``."""
    alpha_lo, alpha_hi, step = Fraction(alpha_lo), Fraction(alpha_hi), Fraction(step)
    if not (2 < alpha_lo < alpha_hi) or step <= 0:
        raise ValueError("need 2 < alpha_lo < alpha_hi and step > 0")
    rows = []
    alpha = alpha_lo
    star = dagger_seq(d)
    while alpha <= alpha_hi:
        cert = czds_check(power_sequence(alpha, d), star, d, "separation")
        rows.append(ScanRow(alpha, cert.status, cert.failed_index, min(cert.gaps) if cert.gaps else None))
        alpha += step
    first = next((r.alpha for r in rows if r.status == "certified"), None)
    return {
        "degree": d,
        "rows": [r.to_json() for r in rows],
        "first_certified_alpha": format_rational(first) if first is not None else None,
        "k1_gap_threshold": separation_threshold(),
        "conditional": CONDITIONAL_NOTE,
    }
