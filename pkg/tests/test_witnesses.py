import json

import pytest

from oracles import divmod_poly
from troprules.certificates import certify_cluster_bound
from troprules.poly import Polynomial, sturm_count
from troprules.preservers import MultiplierSeq, dagger_seq
from troprules.witnesses import (
    CorpusError,
    CounterexampleRecord,
    _q_chain,
    append_corpus,
    build_counterexample,
    build_R,
    build_R_details,
    check_conjecture,
    conjecture_fuzz,
    load_corpus,
)


@pytest.fixture(scope="module")
def counterexample():
    return build_counterexample(0, 102)


def test_q_chain_degrees():
    assert _q_chain(2) == Polynomial.parse("1 + x + x^3 + x^4")
    assert [_q_chain(n).degree for n in (1, 2, 3, 4)] == [1, 4, 9, 20]
    assert _q_chain(4).substitute_power(5).degree == 100


def test_q_chain_has_fourfold_root_at_minus_one():
    q = _q_chain(4).substitute_power(5)
    _, rem4 = divmod_poly(q.coeffs, (Polynomial.parse("1 + x") ** 4).coeffs)
    _, rem5 = divmod_poly(q.coeffs, (Polynomial.parse("1 + x") ** 5).coeffs)
    assert not any(rem4) and any(rem5)


def test_build_R_coefficient_bounds():
    r = build_R()
    c = r.coeffs
    assert r.degree == 100 and c[0] == 1 and c[100] == 1
    assert all(0 <= a < 1 for a in c[1:100])


def test_build_R_roots():
    r = build_R()
    rc = sturm_count(r)
    assert (rc.positive, rc.negative, rc.zero_multiplicity) == (0, 4, 0)
    assert sturm_count(r, "distinct").negative == 4
    eps1, eps2, eps3 = build_R_details().eps
    assert 0 < eps1 < eps2 < eps3


def test_counterexample_record(counterexample):
    rec = counterexample
    assert rec.real_root_count.negative == 4 and rec.distinct_negative == 4
    assert rec.tropical_root_count <= 3
    assert rec.essential_counts[2] < 4 and rec.is_violation
    assert rec.provenance["k"] == 0 and rec.provenance["d"] == 102
    assert rec.verify()


def test_counterexample_pinpoints_failed_dominance(counterexample):
    report = certify_cluster_bound(counterexample.polynomial, counterexample.lam, "negative")
    assert not report.delta_condition and not report.passed
    assert report.real_roots == 4 > report.total_bound
    assert any("condition" in f for f in report.failures())


def test_counterexample_preconditions():
    with pytest.raises(ValueError):
        build_counterexample(5, 102)
    with pytest.raises(ValueError):
        build_counterexample(0, 102, delta=1)


def test_worked_conjecture_example():
    rc, (pos, neg), ok = check_conjecture(Polynomial.parse("1 + x + x^2/4"), dagger_seq(2))
    assert (rc.positive, pos) == (0, 0) and (rc.negative, neg) == (2, 2) and ok


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_fuzz_small_run_is_clean(d):
    res = conjecture_fuzz(d, 300, seed=7)
    assert res.violations == []
    assert sum(res.by_distribution.values()) == 300


@pytest.mark.parametrize("dist", ["dense", "sparse", "double-root"])
def test_fuzz_each_distribution(dist):
    res = conjecture_fuzz(4, 200, seed=3, distribution=dist)
    assert res.violations == [] and res.by_distribution[dist] == 200


def test_fuzz_is_deterministic():
    a = conjecture_fuzz(3, 50, seed=9, lam=MultiplierSeq.flat(3))
    b = conjecture_fuzz(3, 50, seed=9, lam=MultiplierSeq.flat(3))
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)


def _record():
    lam = MultiplierSeq.from_values([1, 1, 3])
    return CounterexampleRecord.measure(Polynomial.parse("1 - x + x^2/2"), lam, "fuzz", {"seed": 1})


def test_corpus_roundtrip(tmp_path):
    path = tmp_path / "corpus.jsonl"
    rec = _record()
    assert append_corpus(path, [rec, rec]) == 2
    back = load_corpus(path)
    assert len(back) == 2
    assert back[0].to_json() == rec.to_json()


def test_corpus_detects_tampering(tmp_path):
    path = tmp_path / "corpus.jsonl"
    data = _record().to_json()
    data["real_root_count"]["negative"] += 1
    path.write_text(json.dumps(data) + "\n")
    with pytest.raises(CorpusError):
        load_corpus(path)
    assert len(load_corpus(path, verify=False)) == 1
    path.write_text("{not json\n")
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_counterexample_roundtrips_through_corpus(tmp_path, counterexample):
    path = tmp_path / "c.jsonl"
    append_corpus(path, [counterexample])
    (back,) = load_corpus(path)
    assert back.polynomial == counterexample.polynomial
