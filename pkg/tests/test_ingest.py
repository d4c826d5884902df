import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarproxy import ingest
from polarproxy.entropy import EntropyMeasures
from polarproxy.errors import (
    DuplicateKey,
    MalformedHeader,
    UnmatchedProvince,
    ValueOutOfRange,
)
from polarproxy.ingest import (
    ControlRecord,
    DistanceRecord,
    join_province,
    parse_table,
    serialize,
)
from polarproxy.provinces import (
    N_PROVINCES,
    PROVINCE_REGION,
    PROVINCES,
    REGIONS,
    canonicalize,
    region_of,
    resolve,
)

CONTROL_HEADER = ("province,year,num_mosques,gdp_per_capita,agriculture_gdp,"
                  "manufacturing_gdp,industry_gdp,services_gdp,finance_gdp,total_gdp,"
                  "poverty_rate\n")


def test_province_table_is_total():
    assert len(PROVINCES) == N_PROVINCES == 81
    assert set(PROVINCE_REGION.values()) == set(REGIONS)
    assert region_of("İstanbul") == "marmara"
    assert region_of("Diyarbakır") == "southeast"
    assert resolve("  Afyon ") == "afyonkarahisar"


@given(st.text())
def test_canonicalization_idempotent(s):
    assert canonicalize(canonicalize(s)) == canonicalize(s)


@pytest.mark.parametrize("raw,canon", [
    ("ŞANLIURFA", "sanliurfa"), (" Çanakkale\t", "canakkale"), ("Muğla", "mugla"),
    ("Gümüşhane", "gumushane"), ("Kırıkkale", "kirikkale"), ("Iğdır", "igdir"),
])
def test_turkish_folding(raw, canon):
    assert canonicalize(raw) == canon


def test_election_direct_mapping():
    t = parse_table("province,party_a,party_b\nankara,0.6,0.4\n", "election")
    assert t.rows["ankara"].shares == (("party_a", 0.6), ("party_b", 0.4))


def test_election_renormalizes_with_warning():
    t = parse_table("province,a,b,c\nankara,0.5,0.3,0.13\n", "election")
    p = t.rows["ankara"].as_dict()
    total = math.fsum([0.5, 0.3, 0.13])
    assert p == {"a": 0.5 / total, "b": 0.3 / total, "c": 0.13 / total}
    assert math.fsum(p.values()) == pytest.approx(1.0, abs=1e-12)
    assert [w.kind for w in t.warnings] == ["Renormalized"]


@pytest.mark.parametrize("row", ["ankara,0.6,-0.1", "ankara,0.5,0.3", "ankara,0.7,0.4"])
def test_election_bad_row_reports_line(row):
    with pytest.raises(ValueOutOfRange) as exc:
        parse_table(f"province,a,b\nizmir,0.5,0.5\n{row}\n", "election", name="votes.csv")
    assert exc.value.line == 3
    assert "votes.csv:3" in str(exc.value)


def test_election_duplicate_and_header():
    with pytest.raises(DuplicateKey):
        parse_table("province,a,b\nankara,0.5,0.5\nAnkara,0.5,0.5\n", "election")
    with pytest.raises(MalformedHeader):
        parse_table("city,a,b\nankara,0.5,0.5\n", "election")
    with pytest.raises(MalformedHeader):
        parse_table("", "election")


def test_lenient_mode_collects_rows():
    t = parse_table("province,a,b\nankara,0.5,0.5\nvan,0.6,-0.1\nnowhere,0.5,0.5\n",
                    "election", strict=False)
    assert list(t.rows) == ["ankara"]
    assert [r.line for r in t.rejected] == [3, 4]


def test_weights_range():
    with pytest.raises(ValueOutOfRange):
        parse_table("party,r,s\nx,1.2,0.5\n", "weights")


def test_distance_missing_is_none_not_zero():
    t = parse_table("frame_id,province,NRP_vs_NRP,RP_vs_RP,NRP_vs_RP,daynight,is_summer\n"
                    "f1,van,1.5,,2.0,1,0\n", "distance")
    assert t.records[0].RP_vs_RP is None
    assert t.records[0].NRP_vs_NRP == 1.5


def test_distance_rules():
    head = "frame_id,province,NRP_vs_NRP,RP_vs_RP,NRP_vs_RP,daynight,is_summer\n"
    with pytest.raises(ValueOutOfRange):
        parse_table(head + "f1,van,,,,1,0\n", "distance")
    with pytest.raises(ValueOutOfRange):
        parse_table(head + "f1,van,1,1,1,2,0\n", "distance")
    with pytest.raises(DuplicateKey):
        parse_table(head + "f1,van,1,,1,1,0\nf1,van,2,,1,1,0\n", "distance")


def test_publish_month_derivation_is_flagged():
    t = parse_table("frame_id,province,NRP_vs_NRP,RP_vs_RP,NRP_vs_RP,daynight,publish_month\n"
                    "a,van,1,,1,1,5\nb,van,1,,1,1,10\nc,van,1,,1,1,9\n", "distance")
    assert [r.is_summer for r in t.records] == [1, 0, 1]
    assert t.flags["is_summer_derived_from_publish_month"]


def test_controls_without_manufacturing():
    text = ("province,year,num_mosques,gdp_per_capita,agriculture_gdp,industry_gdp,"
            "services_gdp,finance_gdp,total_gdp\nankara,2018,100,5000,10,30,40,5,100\n")
    t = parse_table(text, "controls")
    assert t.records[0].manufacturing_gdp == 0.0
    assert not t.flags["manufacturing_column_present"]
    assert t.warnings


def test_controls_invariants():
    with pytest.raises(ValueOutOfRange):
        parse_table(CONTROL_HEADER + "ankara,2018,1,10,200,0,0,0,0,100,\n", "controls")
    with pytest.raises(ValueOutOfRange):
        parse_table(CONTROL_HEADER + "ankara,2018,1,10,0,0,0,0,0,0,\n", "controls")
    with pytest.raises(DuplicateKey):
        parse_table(CONTROL_HEADER + "ankara,2018,1,10,1,1,1,1,1,100,\n" * 2, "controls")


def test_tab_delimiter_and_bytes():
    t = parse_table(b"\xef\xbb\xbfprovince\ta\tb\nankara\t0.6\t0.4\n", "election",
                    delimiter="\t")
    assert t.rows["ankara"].as_dict() == {"a": 0.6, "b": 0.4}


# -- round trips ---------------------------------------------------------------

finite = st.floats(0.0, 1e6, allow_nan=False, allow_infinity=False)
provinces = st.sampled_from(PROVINCES)


@st.composite
def election_text(draw):
    n = draw(st.integers(1, 6))
    provs = draw(st.lists(provinces, min_size=1, max_size=10, unique=True))
    lines = ["province," + ",".join(f"p{i}" for i in range(n))]
    for prov in provs:
        raw = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(
            lambda v: sum(v) > 0))
        total = math.fsum(raw)
        lines.append(",".join([prov, *(repr(x / total) for x in raw)]))
    return "\n".join(lines) + "\n"


@st.composite
def distance_table(draw):
    recs = []
    for i in range(draw(st.integers(1, 8))):
        vals = draw(st.lists(st.one_of(st.none(), finite), min_size=3, max_size=3).filter(
            lambda v: any(x is not None for x in v)))
        recs.append(DistanceRecord(
            frame_id=f"f{i}", province=draw(provinces),
            NRP_vs_NRP=vals[0], RP_vs_RP=vals[1], NRP_vs_RP=vals[2],
            daynight=draw(st.integers(0, 1)), is_summer=draw(st.integers(0, 1))))
    return ingest.DistanceTable(records=tuple(recs))


@st.composite
def control_table(draw):
    recs = []
    for prov in draw(st.lists(provinces, min_size=1, max_size=6, unique=True)):
        total = draw(st.floats(1.0, 1e9))
        parts = [draw(st.floats(0.0, 1.0)) * total for _ in range(5)]
        recs.append(ControlRecord(
            province=prov, year=draw(st.integers(2000, 2030)),
            num_mosques=draw(st.integers(0, 10_000)),
            gdp_per_capita=draw(st.floats(1.0, 1e6)),
            agriculture_gdp=parts[0], manufacturing_gdp=parts[1], industry_gdp=parts[2],
            services_gdp=parts[3], finance_gdp=parts[4], total_gdp=total,
            poverty_rate=draw(st.one_of(st.none(), st.floats(0.0, 1e5))),
            region=draw(st.one_of(st.none(), st.sampled_from(REGIONS)))))
    return ingest.ControlTable(records=tuple(recs))


@given(election_text())
def test_election_round_trip(text):
    t = parse_table(text, "election")
    again = parse_table(serialize(t), "election")
    assert again == t
    assert serialize(again) == serialize(t)


@given(distance_table(), st.sampled_from([",", "\t", ";"]))
def test_distance_round_trip(t, delim):
    parsed = parse_table(serialize(t, delim), "distance", delimiter=delim)
    assert parsed == t
    assert parse_table(serialize(parsed, delim), "distance", delimiter=delim) == parsed


@given(control_table())
def test_controls_round_trip(t):
    parsed = parse_table(serialize(t), "controls")
    assert parsed == t


@given(st.dictionaries(st.text("abcdefgh_", min_size=1, max_size=6),
                       st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1))
def test_weights_round_trip(rows):
    t = ingest.WeightTable(rows={k: ingest.PartyProfile(*v) for k, v in rows.items()})
    assert parse_table(serialize(t), "weights") == t


# -- join ------------------------------------------------------------------------

def _control(prov, year=2018, **kw):
    base = dict(num_mosques=100, gdp_per_capita=1000.0, agriculture_gdp=10.0,
                manufacturing_gdp=5.0, industry_gdp=5.0, services_gdp=30.0,
                finance_gdp=5.0, total_gdp=100.0, poverty_rate=0.2)
    base.update(kw)
    return ControlRecord(province=prov, year=year, **base)


def _dist(fid, prov, v=1.0):
    return DistanceRecord(frame_id=fid, province=prov, NRP_vs_NRP=v, RP_vs_RP=None,
                          NRP_vs_RP=2 * v, daynight=1, is_summer=0)


ENT = {"ankara": EntropyMeasures(1.0, 0.5, 0.4), "van": EntropyMeasures(1.2, 0.6, 0.3)}


def test_join_replicates_province_values():
    t = join_province(ENT, [_dist(f"a{i}", "ankara", i + 1.0) for i in range(3)],
                      [_control("ankara"), _control("van")], 2018)
    assert len(t) == 3
    prov_cols = ["h_unweighted", "num_mosques", "industry_prop", "region"]
    assert (t.frame[prov_cols].nunique() == 1).all()
    assert t.frame["region"].iloc[0] == "central"
    assert t.frame["industry_prop"].iloc[0] == 0.1
    assert t.frame["RP_vs_RP"].isna().all()
    assert t.columns[:4] == ("frame_id", "province", "region", "year")


def test_join_reports_typo():
    recs = [_dist("a", "ankara"), _dist("b", "vann"), _dist("c", "vann")]
    t = join_province(ENT, recs, [_control("ankara"), _control("van")], 2018)
    assert len(t) == 1
    assert t.report.unmatched["vann"]["frames"] == 2
    assert t.report.n_dropped == 2
    assert '"vann"' in t.report.to_json()


def test_join_all_fail_and_missing_year():
    with pytest.raises(UnmatchedProvince):
        join_province(ENT, [_dist("b", "vann")], [_control("ankara")], 2018)
    with pytest.raises(UnmatchedProvince):
        join_province(ENT, [_dist("a", "ankara")], [_control("ankara", 2019)], 2018)


def test_join_bookkeeping_large():
    rng = np.random.default_rng(0)
    provs = list(PROVINCES) + ["vann", "istanbull"]
    chosen = rng.choice(len(provs), size=16_833)
    recs = [_dist(f"f{i}", provs[j]) for i, j in enumerate(chosen)]
    have_ctl = PROVINCES[:70]
    have_ent = {p: EntropyMeasures(1.0, 0.5, 0.5) for p in PROVINCES[5:]}
    t = join_province(have_ent, recs, [_control(p) for p in have_ctl], 2018)
    # independent tally
    ok = set(have_ctl) & set(have_ent)
    expected = sum(1 for j in chosen if provs[j] in ok)
    assert len(t) == expected
    assert len(t) + t.report.n_dropped == 16_833
    assert sum(v["frames"] for v in t.report.unmatched.values()) == t.report.n_dropped


def test_province_level_join():
    recs = [_dist("a", "ankara", 1.0), _dist("b", "ankara", 3.0), _dist("c", "van", 2.0)]
    t = join_province(ENT, recs, [_control("ankara"), _control("van")], 2018,
                      level="province")
    assert list(t.frame["province"]) == ["ankara", "van"]
    assert list(t.frame["NRP_vs_NRP"]) == [2.0, 2.0]
    assert list(t.frame["n_frames"]) == [2, 1]


@settings(max_examples=30)
@given(st.lists(st.tuples(st.sampled_from(["ankara", "van", "vann", "izmir"]),
                          st.floats(0, 10)), min_size=1, max_size=40))
def test_join_count_invariant(rows):
    recs = [_dist(f"f{i}", p, v) for i, (p, v) in enumerate(rows)]
    try:
        t = join_province(ENT, recs, [_control("ankara"), _control("van")], 2018)
    except UnmatchedProvince:
        assert all(p not in ENT for p, _ in rows)
        return
    assert len(t) + t.report.n_dropped == len(recs)


def test_analysis_table_csv_round_trip(synth_table):
    table, _ = synth_table
    again = ingest.AnalysisTable.from_csv(table.to_csv())
    assert again.frame.equals(table.frame)
    same = again.to_csv() == table.to_csv()
    assert same
