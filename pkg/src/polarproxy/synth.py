"""Synthetic datasets with planted coefficients.

Random numbers come from the PCG64 generator (PCG-XSL-RR 128/64) seeded
through :class:`numpy.random.SeedSequence`. Stream 0 drives province-level
draws and stream ``1 + i`` the frames of the ``i``-th province, so results do
not depend on the order in which provinces are processed. A uniform is the
top 53 bits of one raw 64-bit output, offset by half a unit so it lies in
``(0, 1)``. Normal variates are the inverse normal CDF of such uniforms.

Two generators are provided. :func:`generate` plants ``y = X beta + eps`` at
the frame level and returns an analysis table directly. :func:`generate_inputs`
writes the four standard input tables; its outcome is a province-level
entropy, so coefficients on frame-level regressors are planted as zero and
only province-level terms carry signal.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping, Optional

import numpy as np
import pandas as pd
from scipy import special

from . import entropy as _entropy
from . import ingest
from .errors import InvalidConfig, RankDeficient
from .provinces import PROVINCE_REGION, REGIONS
from .regress import INTERCEPT, DEFAULT_REGRESSORS, ModelSpec, build_design, ols_fit

FRAME_LEVEL = ("NRP_vs_RP", "NRP_vs_NRP", "daynight", "is_summer")

DEFAULT_BETA = {
    INTERCEPT: 0.9,
    "NRP_vs_RP": 0.05,
    "NRP_vs_NRP": -0.03,
    "num_mosques": 4.5e-5,
    "gdp_per_capita": 3.8e-6,
    "economic_sophistication_proxy": -1.0,
    "daynight": -0.01,
    "is_summer": -0.01,
    "region_east": 0.09,
    "region_marmara": 0.18,
    "region_south": 0.37,
    "region_southeast": 0.05,
    "region_west": 0.10,
}

_UNIT = 2.0 ** -53


@dataclass(frozen=True)
class SynthConfig:
    n_provinces: int = 81
    frames_per_province: int = 20
    true_beta: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_BETA))
    noise_sd: float = 0.05
    rng_seed: int = 0
    years: tuple = (2018,)
    outcome: str = "h_unweighted"
    baseline: str = "central"
    regressors: tuple = DEFAULT_REGRESSORS
    distance_mean: float = 1.0
    distance_sd: float = 0.25
    distance_corr: float = 0.0
    rp_missing_rate: float = 0.2
    mosque_range: tuple = (200, 4000)
    gdp_per_capita_range: tuple = (15000.0, 90000.0)
    sophistication_range: tuple = (0.10, 0.45)
    agriculture_range: tuple = (0.03, 0.25)
    p_day: float = 0.7
    p_summer: float = 0.5
    poverty_gdp_corr: float = 0.0
    duplicate: Optional[str] = None

    def validate(self):
        if not 1 <= self.n_provinces <= 81:
            raise InvalidConfig(f"n_provinces={self.n_provinces} not in 1..81")
        if self.frames_per_province < 1:
            raise InvalidConfig("frames_per_province must be >= 1")
        if not self.noise_sd >= 0:
            raise InvalidConfig("noise_sd must be >= 0")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise InvalidConfig("rng_seed must be a 64-bit unsigned integer")
        if not -1 < self.distance_corr < 1 or not -1 <= self.poverty_gdp_corr <= 1:
            raise InvalidConfig("correlations must lie in (-1, 1)")
        if not 0 <= self.rp_missing_rate < 1:
            raise InvalidConfig("rp_missing_rate must lie in [0, 1)")
        if self.baseline not in REGIONS:
            raise InvalidConfig(f"unknown baseline region {self.baseline!r}")
        if self.duplicate and self.duplicate not in self.regressors:
            raise InvalidConfig(f"cannot duplicate {self.duplicate!r}: not a regressor")
        lo, hi = self.sophistication_range
        alo, ahi = self.agriculture_range
        if not (0 <= lo <= hi and 0 <= alo <= ahi and hi + ahi < 0.95):
            raise InvalidConfig("sector share ranges must leave room for services")
        return self

    @property
    def model_regressors(self):
        dup = (f"{self.duplicate}_copy",) if self.duplicate else ()
        return (*self.regressors, *dup)

    def model_spec(self) -> ModelSpec:
        return ModelSpec(outcome=self.outcome, regressors=self.model_regressors,
                         baseline=self.baseline)

    def beta_for(self, name: str) -> float:
        return float(self.true_beta.get(name, 0.0))


class Streams:
    """Independent PCG64 streams spawned from one master seed."""

    def __init__(self, seed: int, n: int):
        children = np.random.SeedSequence(seed).spawn(n)
        self._bits = [np.random.PCG64(c) for c in children]

    def uniform(self, stream: int, size) -> np.ndarray:
        n = int(np.prod(size))
        raw = self._bits[stream].random_raw(n).astype(np.uint64) >> np.uint64(11)
        return ((raw.astype(np.float64) + 0.5) * _UNIT).reshape(size)

    def normal(self, stream: int, size) -> np.ndarray:
        return special.ndtri(self.uniform(stream, size))


def select_provinces(n: int):
    """First ``n`` provinces taken round-robin over the regions."""
    pools = {r: sorted(p for p, reg in PROVINCE_REGION.items() if reg == r)
             for r in REGIONS}
    out = []
    i = 0
    while len(out) < n:
        pool = pools[REGIONS[i % len(REGIONS)]]
        if pool:
            out.append(pool.pop(0))
        i += 1
    return out


def _scale(u, lo, hi):
    return lo + (hi - lo) * u


def _province_controls(cfg: SynthConfig, streams: Streams, stream: int,
                       provinces, year: int):
    n = len(provinces)
    u = streams.uniform(stream, (n, 8)).tolist()
    z = streams.normal(stream, (n,)).tolist()
    recs = []
    glo, ghi = cfg.gdp_per_capita_range
    for i, prov in enumerate(provinces):
        gpc = _scale(u[i][0], glo, ghi)
        population = _scale(u[i][1], 1e5, 5e6)
        total = gpc * population
        agri = _scale(u[i][2], *cfg.agriculture_range)
        soph = _scale(u[i][3], *cfg.sophistication_range)
        mfg_frac = u[i][4]
        serv_total = (1.0 - agri - soph) * _scale(u[i][5], 0.7, 1.0)
        fin_frac = _scale(u[i][6], 0.05, 0.2)
        mosques = int(math.floor(_scale(u[i][7], cfg.mosque_range[0],
                                        cfg.mosque_range[1] + 1)))
        zg = (u[i][0] - 0.5) * math.sqrt(12.0)
        rho = cfg.poverty_gdp_corr
        poverty = abs(0.2 + 0.05 * (rho * zg + math.sqrt(1 - rho * rho) * z[i]))
        recs.append(ingest.ControlRecord(
            province=prov, year=year, num_mosques=mosques, gdp_per_capita=gpc,
            agriculture_gdp=agri * total,
            manufacturing_gdp=soph * mfg_frac * total,
            industry_gdp=soph * (1.0 - mfg_frac) * total,
            services_gdp=serv_total * (1.0 - fin_frac) * total,
            finance_gdp=serv_total * fin_frac * total,
            total_gdp=total, poverty_rate=poverty,
        ))
    return recs


def _frames(cfg: SynthConfig, streams: Streams, stream: int, province: str):
    m = cfg.frames_per_province
    z = streams.normal(stream, (m, 4))
    u = streams.uniform(stream, (m, 3))
    rho = cfg.distance_corr
    mu, sd = cfg.distance_mean, cfg.distance_sd
    nrp_rp = np.abs(mu + sd * z[:, 0])
    nrp_nrp = np.abs(mu + sd * (rho * z[:, 0] + math.sqrt(1 - rho * rho) * z[:, 1]))
    rp_rp = np.abs(mu + sd * z[:, 2])
    out = []
    for j in range(m):
        out.append(ingest.DistanceRecord(
            frame_id=f"{province}-{j:05d}", province=province,
            NRP_vs_NRP=float(nrp_nrp[j]),
            RP_vs_RP=None if u[j, 0] < cfg.rp_missing_rate else float(rp_rp[j]),
            NRP_vs_RP=float(nrp_rp[j]),
            daynight=int(u[j, 1] < cfg.p_day),
            is_summer=int(u[j, 2] < cfg.p_summer),
        ))
    return out, z[:, 3]


def _linear_predictor(cfg: SynthConfig, row: dict, beta) -> float:
    terms = [beta(INTERCEPT)]
    for name in cfg.regressors:
        terms.append(beta(name) * row[name])
    if "poverty_rate" not in cfg.regressors:
        terms.append(beta("poverty_rate") * row["poverty_rate"])
    if row["region"] != cfg.baseline:
        terms.append(beta(f"region_{row['region']}"))
    return math.fsum(terms)


def truth_record(cfg: SynthConfig, names, frame_level_zero=False) -> dict:
    out = {}
    for n in names:
        if n.endswith("_copy"):
            out[n] = 0.0
        elif frame_level_zero and n in FRAME_LEVEL:
            out[n] = 0.0
        else:
            out[n] = cfg.beta_for(n)
    return out


def generate(cfg: SynthConfig, year: Optional[int] = None):
    """Frame-level analysis table with ``outcome = X beta_true + eps``.

    Returns ``(table, truth)`` where ``truth`` maps each design column of
    ``cfg.model_spec()`` to its planted coefficient.
    """
    cfg.validate()
    year = cfg.years[0] if year is None else year
    provinces = select_provinces(cfg.n_provinces)
    streams = Streams(cfg.rng_seed, 1 + cfg.n_provinces)
    ctl = _province_controls(cfg, streams, 0, provinces, year)
    rows = []
    for i, (prov, c) in enumerate(zip(provinces, ctl)):
        shared = {
            "region": PROVINCE_REGION[prov], "year": year,
            "num_mosques": float(c.num_mosques),
            "gdp_per_capita": c.gdp_per_capita,
            "poverty_rate": c.poverty_rate,
            **from_sectors(c),
        }
        frames, noise = _frames(cfg, streams, 1 + i, prov)
        for rec, e in zip(frames, noise):
            row = {
                "frame_id": rec.frame_id, "province": prov,
                "NRP_vs_NRP": rec.NRP_vs_NRP, "NRP_vs_RP": rec.NRP_vs_RP,
                "RP_vs_RP": np.nan if rec.RP_vs_RP is None else rec.RP_vs_RP,
                "daynight": rec.daynight, "is_summer": rec.is_summer, **shared,
            }
            row[cfg.outcome] = _linear_predictor(cfg, row, cfg.beta_for) \
                + cfg.noise_sd * float(e)
            if cfg.duplicate:
                row[f"{cfg.duplicate}_copy"] = row[cfg.duplicate]
            rows.append(row)
    frame = ingest.assemble(rows)
    report = ingest.JoinReport(year=year, level="frame", n_input=len(rows),
                               n_output=len(rows), unmatched={})
    names = _design_names(cfg, frame)
    return ingest.AnalysisTable(frame=frame, report=report), truth_record(cfg, names)


def from_sectors(c) -> dict:
    from .controls import sector_proportions
    return sector_proportions(c).as_columns()


def _design_names(cfg: SynthConfig, frame: pd.DataFrame):
    levels = [r for r in REGIONS if r in set(frame["region"]) and r != cfg.baseline]
    return (INTERCEPT, *cfg.model_regressors, *(f"region_{r}" for r in levels))


# -- input-file bundle -------------------------------------------------------

def shares_with_entropy(target: float, n: int, order=None) -> list:
    """Vote shares over ``n`` parties whose Shannon entropy equals ``target``.

    Shares follow ``p_i ~ exp(-t i)``; ``t`` is found by bisection, as the
    entropy decreases monotonically from ``ln n`` at ``t = 0``.
    """
    if not 0.0 < target < math.log(n):
        raise InvalidConfig(f"target entropy {target} outside (0, ln {n})")
    ranks = np.arange(n, dtype=float)

    def shares(t):
        w = np.exp(-t * ranks)
        return w / w.sum()

    def h(t):
        p = shares(t)
        return -math.fsum(p * np.log(p))

    lo, hi = 0.0, 1.0
    while h(hi) > target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    p = shares(0.5 * (lo + hi))
    if order is not None:
        p = p[np.argsort(order)]
    return [float(x) for x in p]


@dataclass(frozen=True)
class SynthBundle:
    elections: dict   # year -> ElectionTable
    weights: dict     # year -> WeightTable
    distances: ingest.DistanceTable
    controls: ingest.ControlTable
    truth: dict       # year -> {column: beta}
    config: SynthConfig

    def write(self, directory, delimiter=","):
        """Write the input files plus ``truth.json``; returns the paths."""
        from pathlib import Path
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {}

        def put(name, text):
            p = d / name
            p.write_text(text, encoding="utf-8")
            paths[name] = p

        for y, t in sorted(self.elections.items()):
            put(f"election_{y}.csv", ingest.serialize(t, delimiter))
            put(f"weights_{y}.csv", ingest.serialize(self.weights[y], delimiter))
        put("distances.csv", ingest.serialize(self.distances, delimiter))
        put("controls.csv", ingest.serialize(self.controls, delimiter))
        cfg = asdict(self.config)
        cfg["true_beta"] = dict(self.config.true_beta)
        put("truth.json", json.dumps(
            {"config": cfg, "truth": {str(y): t for y, t in self.truth.items()}},
            indent=2, sort_keys=True) + "\n")
        return paths


def _bundle_weights(year: int, n_parties: int, streams: Streams, stream: int):
    from .data import builtin_weights
    try:
        return builtin_weights(year)
    except KeyError:
        u = streams.uniform(stream, (n_parties, 2))
        rows = {f"party{i + 1:02d}": ingest.PartyProfile(
            r=round(float(u[i, 0]), 1), s=round(float(u[i, 1]), 1))
            for i in range(n_parties)}
        return ingest.WeightTable(rows=rows)


def generate_inputs(cfg: SynthConfig) -> SynthBundle:
    """The four standard input tables for every year in ``cfg.years``.

    The province-level outcome ``cfg.outcome`` (unweighted entropy) is
    planted as ``X_p beta + eps_p`` over province-level columns and realized
    by choosing vote shares with exactly that entropy. Years 2018 and 2019
    use the built-in candidate and party weight tables; other years get
    twelve synthetic parties.
    """
    cfg.validate()
    if cfg.outcome != "h_unweighted":
        raise InvalidConfig("input bundles can only plant h_unweighted")
    years = tuple(cfg.years)
    provinces = select_provinces(cfg.n_provinces)
    n_streams = 1 + cfg.n_provinces + 2 * len(years)
    streams = Streams(cfg.rng_seed, n_streams)

    records = []
    for i, prov in enumerate(provinces):
        frames, _ = _frames(cfg, streams, 1 + i, prov)
        records.extend(frames)
    distances = ingest.DistanceTable(records=tuple(records))

    elections, weights, truth, ctl_all = {}, {}, {}, []
    zero_frame = lambda name: 0.0 if name in FRAME_LEVEL else cfg.beta_for(name)
    for k, year in enumerate(years):
        base = 1 + cfg.n_provinces + 2 * k
        ctl = _province_controls(cfg, streams, base, provinces, year)
        ctl_all.extend(ctl)
        wt = _bundle_weights(year, 12, streams, base + 1)
        parties = sorted(wt.rows)
        noise = streams.normal(base + 1, (len(provinces),))
        order = streams.uniform(base + 1, (len(provinces), len(parties)))
        rows = {}
        for i, (prov, c) in enumerate(zip(provinces, ctl)):
            row = {"region": PROVINCE_REGION[prov], "num_mosques": float(c.num_mosques),
                   "gdp_per_capita": c.gdp_per_capita,
                   "poverty_rate": c.poverty_rate, **from_sectors(c)}
            for name in FRAME_LEVEL:
                row[name] = 0.0
            target = _linear_predictor(cfg, row, zero_frame) + cfg.noise_sd * float(noise[i])
            p = shares_with_entropy(target, len(parties), order[i])
            rows[prov] = ingest.VoteShares(tuple(zip(parties, p)))
        elections[year] = ingest.ElectionTable(
            election_id=f"synthetic_{year}", rows=rows, parties=tuple(parties))
        weights[year] = wt
        names = _design_names(cfg, pd.DataFrame(
            {"region": [PROVINCE_REGION[p] for p in provinces]}))
        truth[year] = truth_record(cfg, names, frame_level_zero=True)
    return SynthBundle(
        elections=elections, weights=weights, distances=distances,
        controls=ingest.ControlTable(records=tuple(ctl_all)), truth=truth,
        config=cfg,
    )


# -- recovery ----------------------------------------------------------------

@dataclass
class RecoveryReport:
    verdict: str                       # "pass" | "fail" | "expected-failure"
    mode: str
    coefficients: list = field(default_factory=list)
    message: str = ""
    N: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "expected-failure")

    def as_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


RECOVERY_RTOL = 1e-6
RECOVERY_Z = 4.0


def _compare(res, truth, noiseless):
    rows, ok = [], True
    ci = res.conf_int(0.05)
    for i, name in enumerate(res.names):
        b, s = float(res.beta[i]), float(res.se[i])
        t = truth.get(name, 0.0)
        err = b - t
        if noiseless:
            good = abs(err) <= RECOVERY_RTOL * (abs(t) if t != 0 else 1.0)
        else:
            good = abs(err) <= RECOVERY_Z * s
        ok &= good
        rows.append({
            "name": name, "truth": t, "estimate": b, "se": s, "bias": err,
            "covered_95": bool(ci[i, 0] <= t <= ci[i, 1]), "ok": bool(good),
        })
    return rows, ok


def recovery_check(cfg: SynthConfig, mode: str = "direct") -> RecoveryReport:
    """Generate, ingest, fit and compare estimates against the truth.

    ``mode="direct"`` round-trips the frame-level table through CSV;
    ``mode="files"`` writes the four input tables as text and runs them
    through parsing, entropy, join and regression. Noiseless configs must
    recover every coefficient to 1e-6 relative (absolute for zero truths);
    noisy ones within four standard errors. A config with a duplicated
    regressor must fail with :class:`RankDeficient`, reported as
    ``"expected-failure"``.
    """
    expect_fail = cfg.duplicate is not None
    try:
        if mode == "direct":
            table, truth = generate(cfg)
            table = ingest.AnalysisTable.from_csv(table.to_csv())
            year = cfg.years[0]
        elif mode == "files":
            if cfg.duplicate:
                raise InvalidConfig("duplicate columns are only available in direct mode")
            bundle = generate_inputs(cfg)
            year = cfg.years[0]
            truth = bundle.truth[year]
            elec = ingest.parse_table(ingest.serialize(bundle.elections[year]), "election")
            wts = ingest.parse_table(ingest.serialize(bundle.weights[year]), "weights")
            dist = ingest.parse_table(ingest.serialize(bundle.distances), "distance")
            ctl = ingest.parse_table(ingest.serialize(bundle.controls), "controls")
            ent = _entropy.province_entropies(elec, wts)
            table = ingest.join_province(ent, dist, ctl, year)
        else:
            raise InvalidConfig(f"unknown mode {mode!r}")
        res = ols_fit(build_design(table, cfg.model_spec()))
    except RankDeficient as exc:
        verdict = "expected-failure" if expect_fail else "fail"
        return RecoveryReport(verdict=verdict, mode=mode,
                              message=f"RankDeficient: {exc}")
    rows, ok = _compare(res, truth, cfg.noise_sd == 0)
    if expect_fail:
        return RecoveryReport(verdict="fail", mode=mode, coefficients=rows,
                              message="duplicated regressor was not detected",
                              N=res.N)
    return RecoveryReport(verdict="pass" if ok else "fail", mode=mode,
                          coefficients=rows, N=res.N)


def coverage(cfg: SynthConfig, replications: int = 500, alpha: float = 0.05):
    """Monte Carlo confidence-interval coverage of every planted coefficient.

    Replication ``r`` reuses ``cfg`` with seed ``cfg.rng_seed + r``. Returns
    ``(names, coverage_fraction, estimates)`` with estimates of shape
    ``(replications, k)``.
    """
    hits = None
    est = []
    names = None
    for r in range(replications):
        table, truth = generate(replace(cfg, rng_seed=cfg.rng_seed + r))
        res = ols_fit(build_design(table, cfg.model_spec()))
        if names is None:
            names = res.names
            hits = np.zeros(len(names))
            t = np.array([truth[n] for n in names])
        ci = res.conf_int(alpha)
        hits += (ci[:, 0] <= t) & (t <= ci[:, 1])
        est.append(res.beta)
    return names, hits / replications, np.array(est)
