"""Per-cluster root bounds from tropical data, checked hypothesis by hypothesis.

Positive roots are bounded cluster by cluster.  Tropical roots of the
unweighted tropicalization are grouped into components of their
``ln(36d)``-neighbourhood; inside each window the sign changes among the
``lam``-hull vertices give a budget ``M``, a cascade of weighted derivatives
``L_k`` removes them, and the resulting polynomial is shown root-free on the
window by a dominance argument.  Every hypothesis is decided exactly and every
conclusion is re-counted with Sturm sequences.  Negative roots are handled by
running the same procedure on ``p(-x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence

from .numeric import LogValue, exp_bounds
from .poly import Polynomial, rolle_operator, sturm_count, sturm_count_interval
from .tropical import LN3, analyze, slopes_central_promotion, tropicalize, upper_hull

__all__ = [
    "WindowCheck",
    "Cluster",
    "ClusterCertificate",
    "CertificateReport",
    "binomial_window_check",
    "build_clusters",
    "certify_cluster_bound",
    "certify_both_signs",
    "apply_sign_ops",
    "sign_changes",
    "satisfies_delta_condition",
]

LN4 = LogValue.ln(4)
WINDOW_BITS = 64


def cluster_radius(d: int) -> LogValue:
    return LogValue.ln(36 * d)


def sign_changes(signs: Sequence[int]) -> int:
    nz = [s for s in signs if s]
    return sum(a != b for a, b in zip(nz, nz[1:]))


def apply_sign_ops(positions: Sequence[int], signs: Sequence[int], ops: Sequence[int]) -> list[int]:
    """Tropical shadow of ``L_{ops}``: multiply the sign at ``j`` by ``sgn(j - k)`` per op ``k``."""
    out = list(signs)
    for k in ops:
        out = [s * ((j > k) - (j < k)) for j, s in zip(positions, out)]
    return out


def _outer_bracket(lo: LogValue, hi: LogValue) -> tuple[Fraction, Fraction]:
    return exp_bounds(lo, WINDOW_BITS)[0], exp_bounds(hi, WINDOW_BITS)[1]


def _fmt(v: LogValue) -> str:
    return v.decimal(8)


@dataclass(frozen=True)
class WindowCheck:
    passed: bool
    mode: str
    failed_condition: str | None = None
    detail: str = ""
    roots: int | None = None

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "mode": self.mode,
            "failed_condition": self.failed_condition,
            "detail": self.detail,
            "roots": self.roots,
        }


def _hull_roots(p: Polynomial) -> tuple[list[tuple[int, LogValue]], list[LogValue]]:
    hull = upper_hull(tropicalize(p).points())
    roots = [(l0 - l1) / (k1 - k0) for (k0, l0), (k1, l1) in zip(hull, hull[1:])]
    return hull, roots


def _chord_margin_ok(p: Polynomial, m: int, n: int, d: int, allow_positive: bool) -> tuple[bool, str]:
    """Interior terms lie ``ln d + ln 4`` below the chord through ``m`` and ``n`` (or are positive)."""
    lm, ln_ = LogValue.ln(abs(p[m])), LogValue.ln(abs(p[n]))
    margin = LogValue.ln(d) + LN4 if d > 1 else LN4
    for l in range(m + 1, n):
        c = p[l]
        if not c or (allow_positive and c > 0):
            continue
        chord = lm + (ln_ - lm) * Fraction(l - m, n - m)
        if LogValue.ln(abs(c)) > chord - margin:
            return False, f"interior term {l} within ln d + ln 4 of the chord"
    return True, ""


def binomial_window_check(
    p: Polynomial, m: int, n: int, window: tuple[LogValue, LogValue], mode: str = "strict-roots", d: int | None = None
) -> WindowCheck:
    """Perturbed-binomial hypotheses for ``p`` on ``x in [e^lo, e^hi]``.

    ``strict-roots``: the only tropical root that may sit in the window is the
    one of edge ``(m, n)``, the window ends are more than ``ln 4`` from every
    tropical root and interior terms are small; then ``p`` and
    ``a_m x^m + a_n x^n`` have equally many roots on the window and on its
    mirror image, which is confirmed by Sturm.

    ``no-roots-positive``: ``a_m, a_n > 0`` are tropical indices, hull edges
    outside ``[m, n]`` have roots more than ``ln 4`` beyond the window, and
    interior terms are positive or small; then ``p`` has no root on the window.
    """
    lo, hi = window
    d = p.degree if d is None else d
    if not (m < n and p[m] and p[n]):
        raise ValueError("need m < n with a_m, a_n nonzero")
    if lo > hi:
        raise ValueError("empty window")
    hull, roots = _hull_roots(p)
    vertices = [k for k, _ in hull]
    if mode == "strict-roots":
        # m..n must span a single tropical root (a collinear run counts as one)
        if m not in vertices or n not in vertices:
            return WindowCheck(False, mode, "condition (1)", f"{m} or {n} is not a tropical index")
        i_m, i_n = vertices.index(m), vertices.index(n)
        alpha = roots[i_m]
        if any(r != alpha for r in roots[i_m:i_n]):
            return WindowCheck(False, mode, "condition (1)", f"{m} and {n} do not bound a single tropical root")
        for r in roots[:i_m] + roots[i_n:]:
            if lo <= r <= hi:
                return WindowCheck(False, mode, "condition (1)", f"second tropical root {_fmt(r)} inside the window")
        for r in roots:
            for end in (lo, hi):
                dist = r - end
                if (dist if dist.sign() >= 0 else -dist) <= LN4:
                    return WindowCheck(
                        False, mode, "condition (2)", f"window endpoint within log 4 of a tropical root {_fmt(r)}"
                    )
        ok, why = _chord_margin_ok(p, m, n, d, allow_positive=False)
        if not ok:
            return WindowCheck(False, mode, "condition (3)", why)
        a, b = _outer_bracket(lo, hi)
        binom = Polynomial.from_terms({m: p[m], n: p[n]})
        got = sturm_count_interval(p, a, b, True) + sturm_count_interval(p, -b, -a, True)
        want = sturm_count_interval(binom, a, b, True) + sturm_count_interval(binom, -b, -a, True)
        if got != want:
            return WindowCheck(False, mode, "conclusion", f"Sturm: {got} roots vs binomial {want}", got)
        return WindowCheck(True, mode, None, "", sturm_count_interval(p, a, b, True))
    if mode != "no-roots-positive":
        raise ValueError(f"unknown mode {mode!r}")
    if p[m] < 0 or p[n] < 0:
        return WindowCheck(False, mode, "signs", "a_m and a_n must be positive")
    if m not in vertices or n not in vertices:
        return WindowCheck(False, mode, "condition (1)", f"{m} or {n} is not a tropical index")
    i_m, i_n = vertices.index(m), vertices.index(n)
    if i_m > 0 and not roots[i_m - 1] < lo - LN4:
        return WindowCheck(False, mode, "condition (1)", f"left tropical root {_fmt(roots[i_m - 1])} within log 4 of the window")
    if i_n < len(roots) and not roots[i_n] > hi + LN4:
        return WindowCheck(False, mode, "condition (1)", f"right tropical root {_fmt(roots[i_n])} within log 4 of the window")
    ok, why = _chord_margin_ok(p, m, n, d, allow_positive=True)
    if not ok:
        return WindowCheck(False, mode, "condition (2)", why)
    a, b = _outer_bracket(lo, hi)
    got = sturm_count_interval(p, a, b, True)
    if got:
        return WindowCheck(False, mode, "conclusion", f"Sturm finds {got} roots on the window", got)
    return WindowCheck(True, mode, roots=0)


@dataclass(frozen=True)
class Cluster:
    window: tuple[LogValue, LogValue]
    index_range: tuple[int, int]
    vertices: tuple[int, ...]  # lam-hull vertices in [m, n]
    signs: tuple[int, ...]
    selected_ops: tuple[int, ...]
    roots: tuple[LogValue, ...]
    exhaustive: bool = False

    @property
    def budget(self) -> int:
        return sign_changes(self.signs)

    def to_json(self) -> dict:
        return {
            "window": [self.window[0].to_json(), self.window[1].to_json()],
            "window_approx": [self.window[0].decimal(8), self.window[1].decimal(8)],
            "index_range": list(self.index_range),
            "vertices": list(self.vertices),
            "signs": list(self.signs),
            "selected_ops": list(self.selected_ops),
            "M": self.budget,
            "exhaustive_ops": self.exhaustive,
        }


def _select_ops(vertices: Sequence[int], signs: Sequence[int]) -> tuple[tuple[int, ...], bool]:
    m, n = vertices[0], vertices[-1]
    interior = list(vertices[1:-1])
    ops = []
    for (va, sa), (vb, sb) in zip(zip(vertices, signs), zip(vertices[1:], signs[1:])):
        if sa != sb:
            ops.append(vb if vb < n else va)
    ops.sort(reverse=True)
    target = len(ops)
    # a two-vertex cluster has no interior; it is certified by the binomial window check
    interior_ok = len(vertices) == 2 or all(m < k < n for k in ops)
    if interior_ok and sign_changes(apply_sign_ops(vertices, signs, ops)) == 0:
        return tuple(ops), False
    for combo in combinations_with_replacement(sorted(interior, reverse=True), target):
        if sign_changes(apply_sign_ops(vertices, signs, combo)) == 0:
            return tuple(combo), True
    return tuple(ops), True


def build_clusters(p: Polynomial, lam) -> list[Cluster]:
    """Clusters of the tropical roots of ``p`` (positive side) with their ``lam`` data."""
    if p.degree < 1:
        raise ValueError("need degree at least 1")
    d = p.degree
    rho = cluster_radius(d)
    hull, roots = _hull_roots(p)
    hv = [k for k, _ in hull]
    lam_vertices = set(analyze(p, lam).tropical_indices)
    groups: list[list[int]] = []
    for i, r in enumerate(roots):
        if groups and r - roots[groups[-1][-1]] <= 2 * rho:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in groups:
        m, n = hv[g[0]], hv[g[-1] + 1]
        verts = [k for k in range(m, n + 1) if k in lam_vertices]
        signs = [1 if p[k] > 0 else -1 for k in verts]
        ops, exhaustive = _select_ops(verts, signs)
        window = (roots[g[0]] - rho, roots[g[-1]] + rho)
        out.append(Cluster(window, (m, n), tuple(verts), tuple(signs), ops, tuple(roots[i] for i in g), exhaustive))
    return out


@dataclass(frozen=True)
class ClusterCertificate:
    cluster: Cluster
    method: str
    check: WindowCheck
    sturm_roots: int
    cascade_roots: int | None = None

    @property
    def passed(self) -> bool:
        return self.check.passed and self.sturm_roots <= self.cluster.budget and not self.cascade_roots

    def to_json(self) -> dict:
        return {
            **self.cluster.to_json(),
            "method": self.method,
            "dominance_check": self.check.to_json(),
            "sturm_roots_in_window": self.sturm_roots,
            "cascade_roots_in_window": self.cascade_roots,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class CertificateReport:
    side: str
    clusters: tuple[ClusterCertificate, ...]
    outside_passed: bool
    outside_detail: str
    real_roots: int
    essential_bound: int
    delta_condition: bool
    extras: dict = field(default_factory=dict)

    @property
    def total_bound(self) -> int:
        return sum(c.cluster.budget for c in self.clusters)

    @property
    def passed(self) -> bool:
        return self.outside_passed and all(c.passed for c in self.clusters)

    def failures(self) -> list[str]:
        out = []
        for i, c in enumerate(self.clusters):
            if not c.passed:
                out.append(f"cluster {i} {c.cluster.index_range}: {c.check.failed_condition or 'root budget'}: {c.check.detail}")
        if not self.outside_passed:
            out.append(f"outside: {self.outside_detail}")
        return out

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "clusters": [c.to_json() for c in self.clusters],
            "outside_check": {"passed": self.outside_passed, "detail": self.outside_detail},
            "total_bound": self.total_bound,
            "real_roots": self.real_roots,
            "essential_tropical_roots": self.essential_bound,
            "lam_satisfies_delta_condition": self.delta_condition,
            "passed": self.passed,
            "failures": self.failures(),
        }


def satisfies_delta_condition(lam, d: int) -> bool:
    """Every log-concavity gap of ``lam`` on ``0..d`` strictly exceeds ``2 Delta_d``."""
    from .preservers import delta_gap

    entries = lam.log_entries[: d + 1]
    bound = delta_gap(d)
    return all(2 * entries[k] - entries[k - 1] - entries[k + 1] > bound for k in range(1, d))


def _certify_cluster(p: Polynomial, c: Cluster) -> ClusterCertificate:
    d = p.degree
    m, n = c.index_range
    a, b = _outer_bracket(*c.window)
    sturm = sturm_count_interval(p, a, b, True)
    if len(c.vertices) == 2 and c.budget == 1:
        check = binomial_window_check(p, m, n, c.window, "strict-roots", d)
        return ClusterCertificate(c, "binomial", check, sturm)
    q = p
    for k in c.selected_ops:
        q = rolle_operator(q, k)
    if q[n] < 0:
        q = -q
    if not q[m] or not q[n]:
        check = WindowCheck(False, "no-roots-positive", "signs", "cascade annihilated an endpoint coefficient")
        return ClusterCertificate(c, "cascade", check, sturm)
    check = binomial_window_check(q, m, n, c.window, "no-roots-positive", d)
    cascade_roots = sturm_count_interval(q, a, b, True)
    return ClusterCertificate(c, "cascade", check, sturm, cascade_roots)


def _outside(p: Polynomial, clusters: Sequence[Cluster], window_roots: int, total: int) -> tuple[bool, str]:
    d = p.degree
    if not cluster_radius(d) > LN3:
        return False, "cluster radius does not exceed ln 3"
    # one promotion spot check per gap between windows, plus both tails
    probes = []
    for left, right in zip(clusters, clusters[1:]):
        lo_x = exp_bounds(left.window[1], WINDOW_BITS)[1]
        hi_x = exp_bounds(right.window[0], WINDOW_BITS)[0]
        if lo_x < hi_x:
            probes.append((lo_x + hi_x) / 2)
    if clusters:
        probes.append(exp_bounds(clusters[0].window[0], WINDOW_BITS)[0] / 2)
        probes.append(exp_bounds(clusters[-1].window[1], WINDOW_BITS)[1] * 2)
    for x in probes:
        try:
            _, central = slopes_central_promotion(p, x)
        except ValueError as exc:
            return False, f"promotion precondition at x={x}: {exc}"
        if not central:
            return False, f"dominance fails at x={x}"
    outside = total - window_roots
    if outside:
        return False, f"Sturm finds {outside} roots outside the cluster windows"
    return True, f"{len(probes)} promotion probes, 0 roots outside windows"


def certify_cluster_bound(p: Polynomial, lam, side: str = "positive") -> CertificateReport:
    """Certificate that ``p`` has at most ``total_bound`` roots on the chosen half-line."""
    if side == "negative":
        q = p.reflect()
    elif side == "positive":
        q = p
    else:
        raise ValueError("side must be 'positive' or 'negative'")
    if len(lam.log_entries) < p.degree + 1:
        raise ValueError("multiplier sequence shorter than deg(p) + 1")
    rc = sturm_count(q)
    if q.degree < 1 or len(q.support()) == 1:
        return CertificateReport(side, (), True, "monomial", rc.positive, 0, satisfies_delta_condition(lam, max(p.degree, 1)))
    clusters = build_clusters(q, lam)
    certs = tuple(_certify_cluster(q, c) for c in clusters)
    inside = sum(c.sturm_roots for c in certs)
    ok, detail = _outside(q, clusters, inside, rc.positive)
    essential = analyze(q, lam).essential_positive
    return CertificateReport(side, certs, ok, detail, rc.positive, essential, satisfies_delta_condition(lam, p.degree))


def certify_both_signs(p: Polynomial, lam) -> tuple[CertificateReport, CertificateReport]:
    return certify_cluster_bound(p, lam, "positive"), certify_cluster_bound(p, lam, "negative")
