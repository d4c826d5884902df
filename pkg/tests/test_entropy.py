import math

import pytest
from hypothesis import given, strategies as st

from polarproxy.entropy import (
    effective_number_of_parties,
    province_entropies,
    shannon_entropy,
    weighted_entropy,
)
from polarproxy.errors import (
    InvalidDistribution,
    LengthMismatch,
    MissingProfile,
    WeightOutOfRange,
)
from polarproxy.ingest import ElectionTable, PartyProfile, VoteShares, WeightTable

# 50-digit references computed with mpmath
H_532 = 1.0296530140645737
H_WEIGHTED_64 = 0.68307942378460087


def test_uniform_four():
    assert shannon_entropy([0.25] * 4) == pytest.approx(1.3862943611198906, abs=1e-15)


def test_degenerate():
    assert shannon_entropy([1.0, 0.0, 0.0]) == 0.0


def test_three_party_value():
    assert shannon_entropy([0.5, 0.3, 0.2]) == pytest.approx(H_532, rel=1e-15)


def test_weighted_example():
    got = weighted_entropy([0.6, 0.4], [0.5, 0.5])
    assert got == pytest.approx(H_WEIGHTED_64, rel=1e-15)
    assert got == pytest.approx(-(0.3 * math.log(0.3) + 0.2 * math.log(0.2)), rel=1e-15)


def test_weighted_zero_terms():
    assert weighted_entropy([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert weighted_entropy([0.2, 0.8], [0.0, 0.0]) == 0.0


def test_weighted_is_not_renormalized():
    # renormalizing q = (0.3, 0.2) would give the entropy of (0.6, 0.4)
    renormalized = shannon_entropy([0.6, 0.4])
    assert abs(weighted_entropy([0.6, 0.4], [0.5, 0.5]) - renormalized) > 1e-3


@pytest.mark.parametrize("shares", [[0.5, -0.1, 0.6], [0.5, 0.4], [0.7, 0.7], [math.nan, 1.0]])
def test_invalid_distribution(shares):
    with pytest.raises(InvalidDistribution):
        shannon_entropy(shares)


def test_weight_errors():
    with pytest.raises(LengthMismatch):
        weighted_entropy([0.5, 0.5], [1.0])
    with pytest.raises(WeightOutOfRange):
        weighted_entropy([0.5, 0.5], [1.0, 1.2])


def test_enp():
    assert effective_number_of_parties([0.25] * 4) == pytest.approx(4.0)


shares_st = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=20).filter(
    lambda v: sum(v) > 0).map(lambda v: [x / math.fsum(v) for x in v]).filter(
    lambda v: abs(math.fsum(v) - 1) <= 1e-9)


@given(shares_st)
def test_bounds(p):
    h = shannon_entropy(p)
    assert -1e-15 <= h <= math.log(len(p)) + 1e-12


@given(shares_st, st.data())
def test_zero_share_party_changes_nothing(p, data):
    w = data.draw(st.lists(st.floats(0, 1), min_size=len(p), max_size=len(p)))
    i = data.draw(st.integers(0, len(p)))
    assert shannon_entropy(p[:i] + [0.0] + p[i:]) == shannon_entropy(p)
    assert weighted_entropy(p[:i] + [0.0] + p[i:], w[:i] + [0.7] + w[i:]) == \
        weighted_entropy(p, w)


@given(shares_st, st.randoms())
def test_permutation_invariance(p, r):
    q = list(p)
    r.shuffle(q)
    assert shannon_entropy(q) == shannon_entropy(p)


@given(shares_st)
def test_weight_collapse_bitwise(p):
    assert weighted_entropy(p, [1.0] * len(p)) == shannon_entropy(p)
    assert weighted_entropy(p, [0.0] * len(p)) == 0.0


def _tables(rows, profiles):
    elec = ElectionTable(election_id="t", rows={k: VoteShares(tuple(v.items()))
                                                for k, v in rows.items()})
    return elec, WeightTable(rows={k: PartyProfile(*v) for k, v in profiles.items()})


@pytest.mark.parametrize("r,s", [(0.0, 1.0), (1.0, 1.0), (0.0, 0.0)])
def test_province_entropies_single_party(r, s):
    e, w = _tables({"ankara": {"a": 1.0}}, {"a": (r, s)})
    m = province_entropies(e, w)["ankara"]
    assert (m.h_unweighted, m.h_religiosity, m.h_political) == (0.0, 0.0, 0.0)


def test_single_party_fractional_weight_is_literal():
    # without renormalization a lone party keeps -r log r
    e, w = _tables({"ankara": {"a": 1.0}}, {"a": (0.3, 0.9)})
    m = province_entropies(e, w)["ankara"]
    assert m.h_unweighted == 0.0
    assert m.h_religiosity == pytest.approx(-0.3 * math.log(0.3), rel=1e-15)
    assert m.h_political == pytest.approx(-0.9 * math.log(0.9), rel=1e-15)


def test_province_entropies_uniform_twelve():
    parties = {f"p{i:02d}": 1 / 12 for i in range(12)}
    e, w = _tables({"izmir": parties}, {p: (1.0, 1.0) for p in parties})
    m = province_entropies(e, w)["izmir"]
    assert m.h_unweighted == pytest.approx(2.4849066497880003, abs=1e-12)
    assert m.h_religiosity == m.h_unweighted == m.h_political


def test_province_entropies_order_and_missing_profile():
    e, w = _tables({"van": {"b": 0.5, "a": 0.5}, "adana": {"a": 0.2, "b": 0.8}},
                   {"a": (0.1, 0.2), "b": (0.3, 0.4)})
    assert list(province_entropies(e, w)) == ["adana", "van"]
    e, w = _tables({"van": {"a": 0.5, "c": 0.5}}, {"a": (0.1, 0.2)})
    with pytest.raises(MissingProfile):
        province_entropies(e, w)
    e, w = _tables({"van": {"a": 1.0, "c": 0.0}}, {"a": (0.1, 0.2)})
    assert province_entropies(e, w)["van"].h_unweighted == 0.0
