from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import tropical_indices_bruteforce
from troprules.numeric import LogValue
from troprules.poly import Polynomial, sturm_count
from troprules.preservers import dagger_seq
from troprules.tropical import (
    LN3,
    analyze,
    central_index_check,
    central_index_check_bracketed,
    classify_pair,
    sign_independently_real_rooted,
    slopes_central_promotion,
    tropical_indices,
    tropicalize,
)

# coefficients spread over many orders of magnitude, zeros allowed
magnitudes = st.integers(-12, 12).map(lambda e: Fraction(3) ** e)
coefs = st.one_of(
    st.just(Fraction(0)),
    st.tuples(st.sampled_from([-1, 1]), magnitudes, st.integers(1, 7)).map(lambda t: t[0] * t[1] * t[2]),
)
polys = st.lists(coefs, min_size=2, max_size=10).map(Polynomial.from_coeffs).filter(lambda p: p.degree >= 1)
nonzero = st.tuples(st.sampled_from([-1, 1]), magnitudes, st.integers(1, 7)).map(lambda t: t[0] * t[1] * t[2])
full_support = st.lists(nonzero, min_size=2, max_size=6).map(Polynomial.from_coeffs)


def test_tropicalize_examples():
    assert tropicalize(Polynomial.parse("1 + x^2")).logcoefs == (LogValue(0), None, LogValue(0))
    t = tropicalize(Polynomial.parse("1 + x + x^2/4"), dagger_seq(2))
    assert t.logcoefs == (LogValue(0), LogValue(-1), LogValue.ln(Fraction(1, 4)) - 4)
    assert tropicalize(Polynomial.parse("3x")).logcoefs == (None, LogValue.ln(3))


@pytest.mark.parametrize(
    "text,lam,indices",
    [("1 + x^2", None, [0, 2]), ("1 + x + 8x^2", None, [0, 2]), ("1 + x + x^2/4", "dagger", [0, 1, 2])],
)
def test_tropical_index_examples(text, lam, indices):
    p = Polynomial.parse(text)
    assert tropical_indices(tropicalize(p, dagger_seq(p.degree) if lam else None)) == indices


def test_worked_examples():
    a = analyze(Polynomial.parse("1 + x^2"))
    assert len(a.roots) == 1 and a.roots[0].value == 0 and a.roots[0].multiplicity == 1
    assert a.roots[0].root_class == "non-essential" and a.essential_total == 0
    b = analyze(Polynomial.parse("1 - x^2"))
    assert b.roots[0].root_class == "positive-negative" and b.essential_total == 2
    c = analyze(Polynomial.parse("1 + x + x^2/4"), dagger_seq(2))
    assert [r.root_class for r in c.roots] == ["negative", "negative"]
    assert c.essential_negative == 2 and c.essential_positive == 0


def test_classification_table():
    assert classify_pair(0, 1, 1, -1) == "positive"
    assert classify_pair(0, 1, 1, 1) == "negative"
    assert classify_pair(0, 2, 1, -1) == "positive-negative"
    assert classify_pair(0, 2, 1, 1) == "non-essential"
    assert classify_pair(1, 4, -1, -1) == "negative"


def test_collinear_run_is_one_root():
    # 1 + 2x + 4x^2 + 8x^3: all points on one line, a triple root at -ln 2
    a = analyze(Polynomial.parse("1 - 2x + 4x^2 + 8x^3"))
    assert a.tropical_indices == (0, 1, 2, 3)
    (root,) = a.roots
    assert root.multiplicity == 3 and root.value == -LogValue.ln(2)
    assert root.classes == ("positive", "positive", "negative")
    assert (a.essential_positive, a.essential_negative) == (2, 1)


@given(polys)
def test_hull_matches_bruteforce(p):
    t = tropicalize(p)
    assert tropical_indices(t) == tropical_indices_bruteforce(t.logcoefs)


@given(polys)
def test_root_structure(p):
    a = analyze(p)
    values = [r.value for r in a.roots]
    assert all(x < y for x, y in zip(values, values[1:]))
    idx = a.tropical_indices
    assert a.root_count == len(idx) - 1
    assert a.zero_roots == p.low_order()


@given(polys)
def test_reflection_swaps_essential_counts(p):
    a, b = analyze(p), analyze(p.reflect())
    assert (a.essential_positive, a.essential_negative) == (b.essential_negative, b.essential_positive)


@given(polys, st.integers(1, 4))
def test_monomial_shift_keeps_roots(p, k):
    a, b = analyze(p), analyze(p.shift(k))
    assert [r.value for r in a.roots] == [r.value for r in b.roots]
    assert b.tropical_indices == tuple(i + k for i in a.tropical_indices)


@given(polys)
def test_central_indices_are_tropical(p):
    trop = set(analyze(p).tropical_indices)
    for k in p.support():
        v = central_index_check(p, k)
        assert v.status != "undecided"
        if v.is_central:
            assert k in trop
            if v.witness is not None:
                x = v.witness
                assert abs(p[k]) * x**k >= sum(abs(c) * x**i for i, c in enumerate(p.coeffs) if i != k)


def test_central_examples():
    v = central_index_check(Polynomial.parse("x + 2x^2 + x^3"), 2)
    assert v.status == "certified-yes" and v.witness == 1
    assert central_index_check(Polynomial.parse("1 + x + x^2"), 1).status == "certified-no"
    v = central_index_check(Polynomial.parse("1 + 100x + x^2"), 1)
    assert v.status == "certified-yes" and v.witness == 1


def test_central_quadratic_discriminant():
    # index 1 of a + bx + cx^2 is central iff b^2 >= 4ac
    assert central_index_check(Polynomial.from_coeffs([1, 4, 2]), 1).is_central
    assert central_index_check(Polynomial.from_coeffs([1, 2, 2]), 1).status == "certified-no"
    touch = central_index_check(Polynomial.from_coeffs([2, 4, 2]), 1)
    assert touch.status == "certified-yes" and touch.witness == 1
    half = central_index_check(Polynomial.from_coeffs([1, 4, 4]), 1)
    assert half.status == "certified-yes" and half.witness == Fraction(1, 2)
    assert central_index_check(Polynomial.from_coeffs([1, 4, 8]), 1).status == "certified-no"


def test_central_equality_at_rational_double_root():
    # (x - 3/7)^2 (x + 5): index 1 touches equality exactly at x = 3/7
    p = Polynomial.parse("(x - 3/7)^2 * (x + 5)")
    v = central_index_check(p, 1)
    assert v.is_central


def test_central_bracketed_is_conservative():
    lows = [Fraction(1), Fraction(2), Fraction(1)]
    assert central_index_check_bracketed(lows, lows, 1).status == "certified-yes"
    highs = [Fraction(1), Fraction(2) + Fraction(1, 10**9), Fraction(1)]
    low_mid = [Fraction(1), Fraction(2) - Fraction(1, 10**9), Fraction(1)]
    # the bracket straddles the equality case: neither verdict can be certified
    assert central_index_check_bracketed(low_mid, highs, 1, budget=256).status == "undecided"


def test_sign_independence_examples():
    assert sign_independently_real_rooted(Polynomial.parse("(1 + x)^2")).status is True
    assert sign_independently_real_rooted(Polynomial.parse("1 + x + x^2")).status is False


def test_cubic_binomial_is_not_sign_independent():
    p = Polynomial.parse("(1 + x)^3")
    res = sign_independently_real_rooted(p)
    assert res.status is False
    assert [v.is_central for v in res.verdicts] == [True, False, False, True]
    # the verdict is confirmed by an explicit sign pattern with a missing real root
    flipped = Polynomial.from_coeffs([1, 3, -3, 1])
    rc = sturm_count(flipped)
    assert rc.positive + rc.negative < 3


@given(full_support)
def test_sign_independence_implies_real_rooted_under_all_signs(p):
    res = sign_independently_real_rooted(p)
    if res.status:
        for mask in range(1 << (p.degree + 1)):
            q = Polynomial.from_coeffs(
                [c if (mask >> k) & 1 else -c for k, c in enumerate(p.coeffs)]
            )
            assert sturm_count(q).nonzero == p.degree


def test_slopes_promotion_examples():
    assert slopes_central_promotion(Polynomial.parse("1 + 100x + x^2"), 1) == (1, True)
    with pytest.raises(ValueError):
        slopes_central_promotion(Polynomial.parse("1 + x^2"), 1)
    assert slopes_central_promotion(Polynomial.parse("1 + x"), 100) == (1, True)


@given(polys, st.integers(-20, 20))
def test_promotion_whenever_far_from_roots(p, e):
    x = Fraction(2) ** e
    xi = LogValue.ln(x)
    assume(all(abs(float(r.value - xi)) > float(LN3) + 1e-6 for r in analyze(p).roots))
    _, central = slopes_central_promotion(p, x)
    assert central
