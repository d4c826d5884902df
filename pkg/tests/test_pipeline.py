import json
from dataclasses import replace

import pytest

from polarproxy import pipeline
from polarproxy.errors import InvalidConfig
from polarproxy.regress import ModelSpec


def make_config(bundle_dir, out, **kw):
    d = bundle_dir
    cfg = pipeline.PipelineConfig(
        elections={y: (d / f"election_{y}.csv", d / f"weights_{y}.csv") for y in (2018, 2019)},
        distances=d / "distances.csv", controls=d / "controls.csv",
        models=pipeline.default_models((2018, 2019)), output_dir=out,
    )
    return replace(cfg, **kw)


def test_missing_input_named(bundle_dir, tmp_path):
    cfg = make_config(bundle_dir, tmp_path, controls=bundle_dir / "nope.csv")
    with pytest.raises(InvalidConfig, match="nope.csv"):
        pipeline.run_pipeline(cfg)


def test_no_models(bundle_dir, tmp_path):
    with pytest.raises(InvalidConfig):
        pipeline.run_pipeline(make_config(bundle_dir, tmp_path, models=()))


def test_model_year_without_election(bundle_dir, tmp_path):
    runs = (pipeline.ModelRun(2020, ModelSpec(outcome="h_unweighted")),)
    with pytest.raises(InvalidConfig, match="2020"):
        pipeline.run_pipeline(make_config(bundle_dir, tmp_path, models=runs))


def test_rerun_is_byte_identical(bundle_dir, tmp_path):
    a = pipeline.run_pipeline(make_config(bundle_dir, tmp_path / "a"))
    b = pipeline.run_pipeline(make_config(bundle_dir, tmp_path / "b"))
    assert sorted(a.files) == sorted(b.files)
    for name in a.files:
        if name != "manifest.json":
            assert a.files[name].read_bytes() == b.files[name].read_bytes(), name
    assert len(a.results) == 6 and not a.failures


def test_manifest_contents(bundle_dir, tmp_path):
    b = pipeline.run_pipeline(make_config(bundle_dir, tmp_path, baseline_region="east"))
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["flags"]["log_base"] == "e"
    assert m["flags"]["weighted_entropy_renormalized"] is False
    assert m["flags"]["baseline_region"] == "east"
    assert len(m["inputs"]) == 6
    assert all(len(h) == 64 for h in m["inputs"].values())
    assert {"regression_tables.txt", "coefficients.csv", "results.json",
            "vif.csv"} <= set(m["outputs"])
    assert b.manifest == m


def test_failing_model_does_not_stop_others(bundle_dir, tmp_path):
    runs = (*pipeline.default_models((2018,)),
            pipeline.ModelRun(2018, ModelSpec(outcome="h_unweighted", name="broken",
                                              regressors=("no_such_column",))))
    b = pipeline.run_pipeline(make_config(bundle_dir, tmp_path, models=runs))
    assert set(b.failures) == {"broken"}
    assert "MissingColumn" in b.failures["broken"]
    assert len(b.results) == 3
    assert "broken" in (tmp_path / "regression_tables.txt").read_text()


def test_pooled_models(bundle_dir, tmp_path):
    b = pipeline.run_pipeline(make_config(bundle_dir, tmp_path, pooled=True,
                                          formats=("json",)))
    assert "h_unweighted_pooled" in b.results
    res = b.results["h_unweighted_pooled"]
    assert "year_2019" in res.names
    assert set(b.files) >= {"results.json", "manifest.json"}
    assert "regression_tables.txt" not in b.files


def test_config_round_trip(bundle_dir, tmp_path):
    cfg = make_config(bundle_dir, tmp_path / "out", delimiter=",", pooled=True)
    ini = tmp_path / "p.ini"
    pipeline.write_config(cfg, ini)
    back = pipeline.load_config(ini)
    assert back.pooled and back.output_dir.resolve() == (tmp_path / "out").resolve()
    assert [m.spec for m in back.models] == [m.spec for m in cfg.models]
    assert {y: tuple(p.resolve() for p in v) for y, v in back.elections.items()} == \
        {y: tuple(p.resolve() for p in v) for y, v in cfg.elections.items()}
    assert pipeline.load_config(ini, baseline_region="west").baseline_region == "west"


def test_config_errors(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[pipeline]\nformats = csv\n")
    with pytest.raises(InvalidConfig, match="inputs"):
        pipeline.load_config(p)
    p.write_text("[inputs]\ndistances = d.csv\ncontrols = c.csv\n[model.x]\noutcome = h\n")
    with pytest.raises(InvalidConfig, match="year"):
        pipeline.load_config(p)
