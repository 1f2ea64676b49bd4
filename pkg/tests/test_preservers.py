from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from troprules.numeric import LogValue
from troprules.poly import Polynomial, sturm_count
from troprules.preservers import (
    MultiplierSeq,
    dagger_seq,
    delta_gap,
    delta_seq,
    index_preserver_trial,
    is_log_concave,
    is_strictly_log_concave,
    lambda2_member,
    lambda4_member,
    root_preservation_violation,
    s_power_search,
    truncation_tropically_real_rooted,
    witness_family_trials,
)
from troprules.sampling import random_log_concave, random_log_sequence, random_polynomial, trial_rng
from troprules.tropical import sign_independently_real_rooted

# 40 digits of 4 ln 144 + 6 ln 4, evaluated with mpmath at 40 decimal places
TWO_DELTA_4 = Fraction("28.19701936502334619484446129620914954329")


def test_log_concavity_examples():
    assert is_log_concave([1, 1, 1])
    assert not is_log_concave([1, 1, 3])
    assert is_log_concave(dagger_seq(4))
    assert all(g == 2 for g in dagger_seq(4).gaps())
    assert is_log_concave([1, 5])


def test_truncation_examples():
    assert truncation_tropically_real_rooted([1, 1, 1])
    assert not truncation_tropically_real_rooted([1, 1, 3])
    assert truncation_tropically_real_rooted([1, 3, 3, 1])


def test_dagger_entries():
    assert dagger_seq(4).log_entries == tuple(LogValue(v) for v in (0, -1, -4, -9, -16))


def test_two_delta_four():
    g = delta_gap(4)
    assert g == 28 * LogValue.ln(2) + 8 * LogValue.ln(3)
    lo, hi = g.approx(80)
    assert abs(lo - TWO_DELTA_4) < Fraction(1, 10**20) and abs(hi - TWO_DELTA_4) < Fraction(1, 10**20)
    assert abs(float(lo) - 28.19702) < 1e-5


@pytest.mark.parametrize("d", [1, 2, 3, 4, 8, 20])
def test_delta_seq_gaps_equal_and_strict(d):
    lam = delta_seq(d)
    gaps = lam.gaps()
    assert all(g == gaps[0] for g in gaps)
    bound = delta_gap(d)
    assert all(g > bound for g in gaps)
    # a rational multiple of a single logarithm
    v = lam.log_entries[1]
    assert v.affine == 0 and v.scale * LogValue.ln(v.arg) == v


def test_tropical_witness_for_non_log_concave():
    lam = MultiplierSeq.from_values([1, 1, 3])
    t = index_preserver_trial(lam, Polynomial.parse("1 + x + x^2"), "tropical")
    assert t.violated and t.lost_indices == (1,)


def test_central_witness_for_non_log_concave():
    # T_lam maps the trinomial to x + 2x^2 + 3x^3, where index 2 is no longer central
    lam = MultiplierSeq.from_values([1, 1, 1, 3])
    t = index_preserver_trial(lam, Polynomial.parse("x + 2x^2 + x^3"), "central")
    assert t.violated and t.lost_indices == (2,)


def test_short_sequence_rejected():
    with pytest.raises(ValueError):
        index_preserver_trial([1, 1], Polynomial.parse("1 + x + x^2"))


@pytest.mark.parametrize("kind", ["tropical", "central"])
def test_log_concave_passes_random_inputs(kind):
    lam = MultiplierSeq.from_values([1, 2, 2, 1])
    for i in range(60):
        p = random_polynomial(trial_rng(11, i), 3)
        assert index_preserver_trial(lam, p, kind).status == "pass"


def test_witness_families_catch_each_bad_index():
    # bump the middle of an otherwise log-concave sequence down
    lam = MultiplierSeq.from_values([1, 1, Fraction(1, 2), 1, 1])
    results = witness_family_trials(lam)
    assert any(t.violated for _, t in results)
    assert not any(t.violated for _, t in witness_family_trials(dagger_seq(4)))


def test_lambda_membership_examples():
    assert lambda2_member([1, 1, 1])
    assert not lambda2_member([1, 1, 5])
    assert lambda2_member([1, 1, 4])  # equality
    assert lambda2_member(dagger_seq(2))
    assert lambda4_member(dagger_seq(4))
    assert not lambda4_member(MultiplierSeq.flat(4))
    with pytest.raises(ValueError):
        lambda4_member([1, 1, 1])


def test_lambda4_surd_boundary():
    # with (1, 1, 1, 1, c) only c <= 2 - 2*3^{-1/4} = 0.48029... binds
    assert lambda4_member([1, 1, 1, 1, Fraction(48, 100)])
    assert not lambda4_member([1, 1, 1, 1, Fraction(481, 1000)])
    # irrational ratio e^{-3/4} = 0.4723... sits just below the surd bound
    e = [LogValue(0)] * 4 + [LogValue(Fraction(-3, 4))]
    assert lambda4_member(MultiplierSeq(tuple(e)))
    e[4] = LogValue(Fraction(-7, 10))  # 0.4965...
    assert not lambda4_member(MultiplierSeq(tuple(e)))


def test_s_power_search_degree_one():
    r = s_power_search([1, 1], 1, 40, seed=5)
    assert r.s_star == 0 and r.witness is None


def test_s_power_search_degree_two_matches_lambda2():
    r = s_power_search([1, 2, 1], 2, 200, seed=2)
    base = MultiplierSeq.from_values([1, 2, 1])
    assert lambda2_member(base.power(r.s_star))
    assert r.to_json()["empirical"] is True and r.to_json()["seed"] == 2


def test_s_power_search_needs_strict_base():
    with pytest.raises(ValueError):
        s_power_search([1, 1, 1], 2, 10, seed=0)


def test_violation_report_is_sturm_backed():
    # (1 + x)^4 times 1/2 under a sharply non-log-concave lam loses real roots tropically
    lam = MultiplierSeq.from_values([1, Fraction(1, 10**6), 1, Fraction(1, 10**6), 1])
    p = Polynomial.parse("(1 + x)^4")
    w = root_preservation_violation(lam, p)
    assert w is not None
    assert sturm_count(Polynomial.from_json(w["polynomial"])).negative == 4
    assert w["essential_negative"] < 4


@given(st.integers(0, 10**6), st.integers(2, 7))
def test_log_concave_iff_truncation_real_rooted(seed, d):
    rng = trial_rng(seed, d)
    lam = MultiplierSeq(tuple(random_log_sequence(rng, d)))
    assert is_log_concave(lam) == truncation_tropically_real_rooted(lam)
    lc = MultiplierSeq(tuple(random_log_concave(rng, d)))
    assert is_log_concave(lc) and truncation_tropically_real_rooted(lc)


@given(st.integers(0, 10**6), st.integers(2, 6))
def test_log_concave_preserves_indices(seed, d):
    rng = trial_rng(seed, 0)
    lam = MultiplierSeq(tuple(random_log_concave(rng, d)))
    for i in range(3):
        p = random_polynomial(trial_rng(seed, i + 1), d)
        assert index_preserver_trial(lam, p, "tropical").status == "pass"
        assert index_preserver_trial(lam, p, "central").status == "pass"


@given(st.integers(0, 10**6), st.integers(2, 6))
def test_non_log_concave_fails_a_witness_family(seed, d):
    rng = trial_rng(seed, 0)
    lam = MultiplierSeq(tuple(random_log_sequence(rng, d)))
    if not is_log_concave(lam):
        assert any(t.violated for _, t in witness_family_trials(lam))


small_int = st.integers(1, 9)


@given(st.lists(small_int, min_size=2, max_size=5), st.integers(0, 10**6))
def test_sign_independence_is_preserved(coeffs, seed):
    p = Polynomial.from_coeffs(coeffs)
    if sign_independently_real_rooted(p).status is not True:
        return
    rng = trial_rng(seed, 0)
    # rational log-concave multipliers: integer concave logs in base 2
    slopes = sorted((rng.randint(-4, 4) for _ in range(p.degree)), reverse=True)
    vals, v = [Fraction(1)], Fraction(1)
    for s in slopes:
        v *= Fraction(2) ** s
        vals.append(v)
    lam = MultiplierSeq.from_values(vals)
    assert is_log_concave(lam)
    q = lam.apply(p)
    for mask in range(1 << (q.degree + 1)):
        flipped = Polynomial.from_coeffs([c if (mask >> k) & 1 else -c for k, c in enumerate(q.coeffs)])
        assert sturm_count(flipped).nonzero == q.degree


def test_json_roundtrip():
    for lam in (dagger_seq(3), delta_seq(3), MultiplierSeq.from_values([1, 2, 3])):
        back = MultiplierSeq.from_json(lam.to_json())
        assert back.log_entries == lam.log_entries
