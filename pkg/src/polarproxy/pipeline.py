"""End-to-end pipeline: ingest, entropy, controls, join, regress, diagnostics.

Configuration is an INI file::

    [pipeline]
    output_dir = out               ; relative to the config file
    formats = csv, json, table
    baseline_region = central
    vif = yes
    auxiliary = yes                ; refit with poverty_rate appended
    auxiliary_column = poverty_rate
    pooled = no                    ; also fit stacked years with year dummies
    delimiter = ,
    default_models = yes           ; six headline models when no [model.*]

    [inputs]
    distances = distances.csv
    controls = controls.csv

    [election.2018]
    votes = election_2018.csv
    weights = weights_2018.csv     ; omit to use the bundled table

    [model.unweighted_2018]        ; optional, repeatable
    year = 2018
    outcome = h_unweighted
    regressors = NRP_vs_RP, NRP_vs_NRP, num_mosques, gdp_per_capita,
                 economic_sophistication_proxy, daynight, is_summer
    categorical = region           ; "none" disables fixed effects
    baseline = central
    intercept = yes

Everything written under ``output_dir`` is a pure function of the inputs and
the configuration except ``manifest.json``, which also records a timestamp.
"""

import configparser
import datetime
import hashlib
import os
import platform
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import entropy as _entropy
from . import ingest, report
from .controls import temples_distance_scatter
from .data import builtin_weights
from .errors import DataError, InvalidConfig, NumericalError
from .regress import (
    OUTCOMES,
    DEFAULT_REGRESSORS,
    ModelSpec,
    auxiliary_ovb,
    build_design,
    ols_fit,
    pool_tables,
    vif,
)

FORMATS = ("csv", "json", "table")


@dataclass(frozen=True)
class ModelRun:
    year: int
    spec: ModelSpec

    @property
    def name(self):
        return self.spec.label


@dataclass(frozen=True)
class PipelineConfig:
    elections: dict                  # year -> (votes path, weights path | None)
    distances: Path
    controls: Path
    models: tuple = ()
    output_dir: Path = Path("out")
    formats: tuple = FORMATS
    baseline_region: str = "central"
    run_vif: bool = True
    auxiliary: bool = True
    auxiliary_column: str = "poverty_rate"
    pooled: bool = False
    delimiter: str = ","

    def validate(self):
        if not self.models:
            raise InvalidConfig("no models configured")
        for p in self.input_paths():
            if not Path(p).is_file():
                raise InvalidConfig(f"input file not found: {p}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise InvalidConfig(f"unknown report format(s) {bad}")
        for m in self.models:
            if m.year not in self.elections:
                raise InvalidConfig(
                    f"model {m.name!r} needs election year {m.year}, "
                    f"configured years are {sorted(self.elections)}")
        return self

    def input_paths(self):
        paths = [self.distances, self.controls]
        for y in sorted(self.elections):
            votes, weights = self.elections[y]
            paths.append(votes)
            if weights is not None:
                paths.append(weights)
        return [Path(p) for p in paths]


def default_models(years, baseline="central"):
    return tuple(
        ModelRun(y, ModelSpec(outcome=o, baseline=baseline, name=f"{o}_{y}"))
        for y in sorted(years) for o in OUTCOMES
    )


def _bool(section, key, default):
    return section.getboolean(key, fallback=default)


def _list(text):
    return tuple(x.strip() for x in text.replace("\n", ",").split(",") if x.strip())


def load_config(path, baseline_region: Optional[str] = None) -> PipelineConfig:
    """Read a pipeline INI file; relative paths resolve against its folder."""
    path = Path(path)
    if not path.is_file():
        raise InvalidConfig(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    root = path.parent

    def rel(p):
        p = Path(p)
        return p if p.is_absolute() else root / p

    pipe = cp["pipeline"] if cp.has_section("pipeline") else cp[cp.default_section]
    baseline = baseline_region or pipe.get("baseline_region", "central")
    if not cp.has_section("inputs"):
        raise InvalidConfig(f"{path}: missing [inputs] section")
    inputs = cp["inputs"]
    for key in ("distances", "controls"):
        if key not in inputs:
            raise InvalidConfig(f"{path}: [inputs] needs '{key}'")
    elections = {}
    models = []
    for sec in cp.sections():
        if sec.startswith("election."):
            try:
                year = int(sec.split(".", 1)[1])
            except ValueError:
                raise InvalidConfig(f"{path}: bad section name [{sec}]") from None
            s = cp[sec]
            if "votes" not in s:
                raise InvalidConfig(f"{path}: [{sec}] needs 'votes'")
            elections[year] = (rel(s["votes"]),
                               rel(s["weights"]) if s.get("weights") else None)
    for sec in cp.sections():
        if sec.startswith("model."):
            s = cp[sec]
            try:
                year = int(s["year"])
                outcome = s["outcome"]
            except (KeyError, ValueError):
                raise InvalidConfig(f"{path}: [{sec}] needs integer 'year' and 'outcome'") from None
            cat = s.get("categorical", "region")
            models.append(ModelRun(year, ModelSpec(
                outcome=outcome,
                regressors=_list(s.get("regressors", ",".join(DEFAULT_REGRESSORS))),
                categorical=None if cat.lower() == "none" else cat,
                baseline=baseline_region or s.get("baseline", baseline),
                include_intercept=_bool(s, "intercept", True),
                name=sec.split(".", 1)[1],
            )))
    if not models and _bool(pipe, "default_models", True):
        models = list(default_models(elections, baseline))
    formats = _list(pipe.get("formats", ",".join(FORMATS)))
    delim = pipe.get("delimiter", ",")
    if delim.lower() in ("tab", "\\t"):
        delim = "\t"
    return PipelineConfig(
        elections=elections,
        distances=rel(inputs["distances"]),
        controls=rel(inputs["controls"]),
        models=tuple(models),
        output_dir=rel(pipe.get("output_dir", "out")),
        formats=formats,
        baseline_region=baseline,
        run_vif=_bool(pipe, "vif", True),
        auxiliary=_bool(pipe, "auxiliary", True),
        auxiliary_column=pipe.get("auxiliary_column", "poverty_rate"),
        pooled=_bool(pipe, "pooled", False),
        delimiter=delim,
    )


def write_config(cfg: PipelineConfig, path) -> None:
    """Serialize a config so that :func:`load_config` reads it back."""
    path = Path(path)
    root = path.parent.resolve()

    def rel(p):
        p = Path(p).resolve()
        try:
            return p.relative_to(root).as_posix()
        except ValueError:
            return str(p)

    cp = configparser.ConfigParser()
    cp["pipeline"] = {
        "output_dir": rel(cfg.output_dir),
        "formats": ", ".join(cfg.formats),
        "baseline_region": cfg.baseline_region,
        "vif": "yes" if cfg.run_vif else "no",
        "auxiliary": "yes" if cfg.auxiliary else "no",
        "auxiliary_column": cfg.auxiliary_column,
        "pooled": "yes" if cfg.pooled else "no",
        "delimiter": "tab" if cfg.delimiter == "\t" else cfg.delimiter,
    }
    cp["inputs"] = {"distances": rel(cfg.distances), "controls": rel(cfg.controls)}
    for y in sorted(cfg.elections):
        votes, weights = cfg.elections[y]
        sec = {"votes": rel(votes)}
        if weights is not None:
            sec["weights"] = rel(weights)
        cp[f"election.{y}"] = sec
    for m in cfg.models:
        s = m.spec
        cp[f"model.{m.name}"] = {
            "year": str(m.year), "outcome": s.outcome,
            "regressors": ", ".join(s.regressors),
            "categorical": s.categorical or "none",
            "baseline": s.baseline,
            "intercept": "yes" if s.include_intercept else "no",
        }
    with open(path, "w", encoding="utf-8") as fh:
        cp.write(fh)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class ReportBundle:
    results: dict = field(default_factory=dict)      # model name -> RegressionResult
    failures: dict = field(default_factory=dict)     # model name -> message
    vif: dict = field(default_factory=dict)
    ovb: dict = field(default_factory=dict)
    entropies: dict = field(default_factory=dict)    # year -> {province: measures}
    tables: dict = field(default_factory=dict)       # year -> AnalysisTable
    files: dict = field(default_factory=dict)        # name -> Path
    manifest: dict = field(default_factory=dict)


DECISION_FLAGS = {
    "log_base": "e",
    "entropy_units": "nats",
    "zero_share_convention": "0*log(0) = 0",
    "weighted_entropy_renormalized": False,
    "entropy_summation": "math.fsum (correctly rounded; order independent)",
    "vote_share_renormalization_band": [ingest.RENORMALIZE_FLOOR, 1.0],
    "region_encoding": "L-1 dummies, baseline omitted",
    "estimator": "OLS via Householder QR",
    "standard_errors": "classical (homoskedastic)",
    "rank_tolerance": 1e-10,
    "missing_values": "listwise deletion per model",
    "depth_normalization": "per-frame min-max to [0, 1]",
    "distance_space": "(x * aspect, y, z), unitless",
    "join_granularity": "frame",
    "baseline_row": "not reproduced: intercept plus six region dummies is singular",
}


def _entropy_csv(measures: dict, delimiter=",") -> str:
    lines = [delimiter.join(["province", "h_unweighted", "h_religiosity",
                             "h_political", "enp"])]
    for prov, m in measures.items():
        lines.append(delimiter.join([prov, repr(m.h_unweighted), repr(m.h_religiosity),
                                     repr(m.h_political), repr(m.enp)]))
    return "\n".join(lines) + "\n"


def run_pipeline(cfg: PipelineConfig) -> ReportBundle:
    """Run every configured model and write the report files.

    Ingest errors abort the run (strict parsing, with file and line in the
    message). A model that fails to fit is recorded in ``bundle.failures``
    and the remaining models still run.
    """
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = ReportBundle()
    d = cfg.delimiter

    distances = ingest.read_table(cfg.distances, "distance", delimiter=d)
    controls = ingest.read_table(cfg.controls, "controls", delimiter=d)
    ingest_flags = {
        "distances": dict(distances.flags), "controls": dict(controls.flags),
        "warnings": [],
    }
    for src, t in (("distances", distances), ("controls", controls)):
        ingest_flags["warnings"] += [f"{src}:{w.line}: {w.message}" for w in t.warnings]

    years = sorted({m.year for m in cfg.models})
    control_years = set(controls.years())
    for y in years:
        if y not in control_years:
            raise DataError(f"controls file has no rows for {y}", source=str(cfg.controls))
    weights_source = {}
    for y in years:
        votes, wpath = cfg.elections[y]
        elec = ingest.read_table(votes, "election", delimiter=d,
                                 election_id=f"election_{y}")
        if wpath is None:
            wts = builtin_weights(y)
            weights_source[y] = f"builtin:{y}"
        else:
            wts = ingest.read_table(wpath, "weights", delimiter=d)
            weights_source[y] = str(wpath)
        ingest_flags["warnings"] += [f"{votes}:{w.line}: {w.message}" for w in elec.warnings]
        ent = _entropy.province_entropies(elec, wts)
        bundle.entropies[y] = ent
        bundle.tables[y] = ingest.join_province(ent, distances, controls, y)

    def write(name, text):
        p = out / name
        p.write_text(text, encoding="utf-8")
        bundle.files[name] = p

    for y in years:
        write(f"entropy_{y}.csv", _entropy_csv(bundle.entropies[y], d))
        write(f"join_report_{y}.json", bundle.tables[y].report.to_json())
        long = ["province,measure,value"]
        for prov, m in bundle.entropies[y].items():
            for k, v in m.as_dict().items():
                long.append(f"{prov},{k},{v!r}")
        write(f"plot_entropy_{y}.csv", "\n".join(long) + "\n")
        scatter, r = temples_distance_scatter(bundle.tables[y])
        write(f"plot_temples_distance_{y}.csv",
              scatter.to_csv(index=False, lineterminator="\n"))
        write(f"temples_distance_{y}.json", report.to_json(
            {"year": y, "pearson_r": r, "n_provinces": len(scatter),
             "note": "descriptive only"}))

    runs = list(cfg.models)
    tables = dict(bundle.tables)
    if cfg.pooled and len(years) > 1:
        pooled = pool_tables([bundle.tables[y] for y in years])
        tables["pooled"] = pooled
        for o in sorted({m.spec.outcome for m in cfg.models}):
            runs.append(ModelRun("pooled", ModelSpec(
                outcome=o, baseline=cfg.baseline_region, time_effects=True,
                name=f"{o}_pooled")))

    for run in runs:
        table = tables[run.year]
        frame = table.frame if hasattr(table, "frame") else table
        try:
            design = build_design(table, run.spec)
            bundle.results[run.name] = ols_fit(design, label=run.name)
            if cfg.run_vif:
                bundle.vif[run.name] = vif(design)
        except (DataError, NumericalError, InvalidConfig) as exc:
            bundle.failures[run.name] = f"{type(exc).__name__}: {exc}"
            continue
        col = cfg.auxiliary_column
        if cfg.auxiliary and col in frame.columns and frame[col].notna().any():
            try:
                bundle.ovb[run.name] = auxiliary_ovb(table, run.spec, col)
            except (DataError, NumericalError, InvalidConfig) as exc:
                bundle.failures[f"{run.name}+{col}"] = f"{type(exc).__name__}: {exc}"

    groups = {}
    for run in runs:
        if run.name in bundle.results:
            groups.setdefault(run.year, []).append(bundle.results[run.name])
    results = list(bundle.results.values())
    if "table" in cfg.formats:
        text = []
        for y, res in groups.items():
            title = f"Regression Results for {y} Political Entropy"
            text.append(report.coefficient_table(
                res, title=title, notes=(report.baseline_note(res),)))
        if bundle.failures:
            text.append("Failed models:\n" + "".join(
                f"  {k}: {v}\n" for k, v in sorted(bundle.failures.items())))
        write("regression_tables.txt", "\n".join(text))
        if bundle.vif:
            write("vif_tables.txt", "\n".join(
                report.vif_table(v, title=f"VIF: {k}") for k, v in bundle.vif.items()))
        if bundle.ovb:
            text = []
            for y, res in groups.items():
                aux = [bundle.ovb[r.label].auxiliary for r in res if r.label in bundle.ovb]
                if aux:
                    text.append(report.coefficient_table(
                        aux, title=f"Regression Results for {y} Entropy Variables "
                                   f"with {report.row_label(cfg.auxiliary_column)}",
                        notes=(report.baseline_note(aux),)))
            write("auxiliary_tables.txt", "\n".join(text))
    if "csv" in cfg.formats:
        write("coefficients.csv", report.coefficients_csv(results, d))
        write("fit.csv", report.fit_csv(results, d))
        if bundle.vif:
            write("vif.csv", report.vif_csv(bundle.vif, d))
    if "json" in cfg.formats:
        write("results.json", report.to_json({
            "models": [r.summary_dict() for r in results],
            "failures": bundle.failures,
        }))
        if bundle.vif:
            write("vif.json", report.to_json(
                {k: {"vif": v.as_dict(), "groups": v.groups} for k, v in bundle.vif.items()}))
        if bundle.ovb:
            write("auxiliary.json", report.to_json(
                {k: v.as_dict() for k, v in bundle.ovb.items()}))

    manifest = {
        "toolkit_version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "inputs": {str(p): sha256(p) for p in cfg.input_paths()},
        "weights_source": {str(k): v for k, v in weights_source.items()},
        "flags": {**DECISION_FLAGS, "baseline_region": cfg.baseline_region},
        "ingest": ingest_flags,
        "models": [{"name": r.name, "year": r.year, "outcome": r.spec.outcome,
                    "regressors": list(r.spec.regressors),
                    "categorical": r.spec.categorical, "baseline": r.spec.baseline}
                   for r in runs],
        "failures": bundle.failures,
        "outputs": sorted(bundle.files),
    }
    bundle.manifest = manifest
    p = out / "manifest.json"
    p.write_text(report.to_json(manifest), encoding="utf-8")
    bundle.files["manifest.json"] = p
    return bundle
