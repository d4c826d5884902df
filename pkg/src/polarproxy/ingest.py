"""Parsing, validation and joining of the four input tables.

Four delimiter-separated schemas are understood:

``election``
    ``province`` followed by one column per party or candidate holding its
    share of valid votes.
``weights``
    ``party, r, s``: religiosity degree and political-spectrum position,
    both in ``[0, 1]``.
``distance``
    ``frame_id, province, NRP_vs_NRP, RP_vs_RP, NRP_vs_RP, daynight,
    is_summer``. ``is_summer`` may be replaced by ``publish_month``.
``controls``
    ``province, year, num_mosques, gdp_per_capita, agriculture_gdp,
    industry_gdp, services_gdp, finance_gdp, total_gdp`` plus optional
    ``manufacturing_gdp``, ``poverty_rate`` and ``region``.

Header names are matched case-insensitively. Empty cells and ``NA`` /
``nan`` / ``null`` / ``none`` are missing values; a missing distance is
``None``, never 0.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np
import pandas as pd

from . import controls as _controls
from .errors import (
    DataError,
    DuplicateKey,
    MalformedHeader,
    UnmatchedProvince,
    ValueOutOfRange,
)
from .geometry import PAIR_TYPES
from .provinces import N_PROVINCES, PROVINCE_REGION, REGIONS, resolve

SCHEMAS = ("election", "weights", "distance", "controls")
DISTANCE_FIELDS = tuple(t.value for t in PAIR_TYPES)
SHARE_TOLERANCE = 1e-9
RENORMALIZE_FLOOR = 0.90
SUMMER_MONTHS = frozenset({5, 6, 7, 8, 9})

_MISSING = frozenset({"", "na", "nan", "null", "none"})


@dataclass(frozen=True)
class Issue:
    line: int
    kind: str
    message: str


@dataclass(frozen=True)
class VoteShares:
    shares: tuple  # ((party_id, p), ...)

    def __post_init__(self):
        ids = [k for k, _ in self.shares]
        if len(set(ids)) != len(ids):
            raise DuplicateKey(f"duplicate party id in {ids}")

    def as_dict(self):
        return dict(self.shares)

    @property
    def parties(self):
        return tuple(k for k, _ in self.shares)


@dataclass(frozen=True)
class PartyProfile:
    r: float
    s: float

    def __post_init__(self):
        for name in ("r", "s"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueOutOfRange(f"{name}={v!r} outside [0, 1]")


@dataclass(frozen=True)
class DistanceRecord:
    frame_id: str
    province: str
    NRP_vs_NRP: Optional[float]
    RP_vs_RP: Optional[float]
    NRP_vs_RP: Optional[float]
    daynight: int
    is_summer: int


@dataclass(frozen=True)
class ControlRecord:
    province: str
    year: int
    num_mosques: int
    gdp_per_capita: float
    agriculture_gdp: float
    manufacturing_gdp: float
    industry_gdp: float
    services_gdp: float
    finance_gdp: float
    total_gdp: float
    poverty_rate: Optional[float] = None
    region: Optional[str] = None


@dataclass(frozen=True)
class _Table:
    warnings: tuple = field(default=(), compare=False)
    rejected: tuple = field(default=(), compare=False)
    flags: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ElectionTable(_Table):
    election_id: str = ""
    rows: dict = field(default_factory=dict)  # province -> VoteShares
    parties: tuple = ()

    schema = "election"


@dataclass(frozen=True)
class WeightTable(_Table):
    rows: dict = field(default_factory=dict)  # party_id -> PartyProfile

    schema = "weights"


@dataclass(frozen=True)
class DistanceTable(_Table):
    records: tuple = ()

    schema = "distance"

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True)
class ControlTable(_Table):
    records: tuple = ()

    schema = "controls"

    def __iter__(self):
        return iter(self.records)

    def years(self):
        return sorted({r.year for r in self.records})

    def for_year(self, year: int) -> dict:
        return {r.province: r for r in self.records if r.year == year}


# -- cell parsing ------------------------------------------------------------

def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in _MISSING


def _float(cell: str, name: str, line: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise ValueOutOfRange(f"{name}={cell!r} is not a number", line=line)
    if not math.isfinite(v):
        raise ValueOutOfRange(f"{name}={cell!r} is not finite", line=line)
    return v


def _opt_float(cell: str, name: str, line: int) -> Optional[float]:
    return None if _is_missing(cell) else _float(cell, name, line)


def _binary(cell: str, name: str, line: int) -> int:
    v = _float(cell, name, line)
    if v not in (0.0, 1.0):
        raise ValueOutOfRange(f"{name}={cell!r} is not 0 or 1", line=line)
    return int(v)


def _count(cell: str, name: str, line: int) -> int:
    v = _float(cell, name, line)
    if v < 0 or v != int(v):
        raise ValueOutOfRange(f"{name}={cell!r} is not a non-negative count",
                              line=line)
    return int(v)


def _nonneg(cell: str, name: str, line: int) -> float:
    v = _float(cell, name, line)
    if v < 0:
        raise ValueOutOfRange(f"{name}={v!r} is negative", line=line)
    return v


# -- reading -----------------------------------------------------------------

def _text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    if isinstance(source, str):
        return source
    if isinstance(source, os.PathLike):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8-sig")
    data = source.read()
    return data.decode("utf-8-sig") if isinstance(data, bytes) else data


def _rows(text: str, delimiter: str):
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = None
    for row in reader:
        if header is None:
            if not row or all(not c.strip() for c in row):
                continue
            header = [c.strip() for c in row]
            yield reader.line_num, header
            continue
        if not row or all(not c.strip() for c in row):
            continue
        yield reader.line_num, [c.strip() for c in row]


def _index(header, required, optional=()):
    lookup = {h.lower(): i for i, h in enumerate(header)}
    if len(lookup) != len(header):
        raise MalformedHeader(f"repeated column name in header {header}", line=1)
    missing = [c for c in required if c.lower() not in lookup]
    if missing:
        raise MalformedHeader(f"missing required column(s) {missing}", line=1)
    cols = {c: lookup[c.lower()] for c in required}
    cols.update({c: lookup[c.lower()] for c in optional if c.lower() in lookup})
    return cols


class _Collector:
    def __init__(self, strict, source):
        self.strict = strict
        self.source = source
        self.warnings = []
        self.rejected = []

    def fail(self, exc: DataError, line: int):
        exc = exc.located(line, self.source)
        if self.strict:
            raise exc
        self.rejected.append(Issue(line, type(exc).__name__, str(exc)))

    def warn(self, line, kind, message):
        self.warnings.append(Issue(line, kind, message))


def _check_province_count(keys, col: _Collector, line):
    if len(keys) > N_PROVINCES:
        col.fail(ValueOutOfRange(
            f"more than {N_PROVINCES} distinct provinces"), line)


def _parse_election(rows, col: _Collector, election_id):
    line, header = next(rows)
    cols = _index(header, ["province"])
    pcol = cols["province"]
    parties = []
    for i, h in enumerate(header):
        if i == pcol:
            continue
        pid = resolve(h)
        if not pid:
            raise MalformedHeader("empty party column name", line=line)
        if pid in parties:
            raise MalformedHeader(f"party {pid!r} appears twice", line=line)
        parties.append((i, pid))
    if not parties:
        raise MalformedHeader("no party columns", line=line)
    out = {}
    for line, row in rows:
        try:
            if len(row) != len(header):
                raise MalformedHeader(
                    f"expected {len(header)} fields, got {len(row)}")
            prov = resolve(row[pcol])
            if prov not in PROVINCE_REGION:
                raise ValueOutOfRange(f"unknown province {row[pcol]!r}")
            if prov in out:
                raise DuplicateKey(f"province {prov!r} repeated")
            vals = []
            for i, pid in parties:
                cell = row[i]
                p = 0.0 if _is_missing(cell) else _float(cell, pid, line)
                if p < 0.0 or p > 1.0:
                    raise ValueOutOfRange(f"share {pid}={p!r} outside [0, 1]")
                vals.append(p)
            total = math.fsum(vals)
            if abs(total - 1.0) > SHARE_TOLERANCE:
                if RENORMALIZE_FLOOR <= total < 1.0:
                    vals = [p / total for p in vals]
                    col.warn(line, "Renormalized",
                             f"{prov}: shares summed to {total!r}; rescaled to 1")
                else:
                    raise ValueOutOfRange(
                        f"shares sum to {total!r}, outside "
                        f"[{RENORMALIZE_FLOOR}, 1 + {SHARE_TOLERANCE}]")
            out[prov] = VoteShares(tuple((pid, p) for (_, pid), p in zip(parties, vals)))
        except DataError as exc:
            col.fail(exc, line)
    _check_province_count(out, col, line)
    return ElectionTable(
        warnings=tuple(col.warnings), rejected=tuple(col.rejected),
        election_id=election_id or "", rows=out,
        parties=tuple(pid for _, pid in parties),
    )


def _parse_weights(rows, col: _Collector):
    line, header = next(rows)
    cols = _index(header, ["party", "r", "s"])
    out = {}
    for line, row in rows:
        try:
            if len(row) < len(header):
                raise MalformedHeader(
                    f"expected {len(header)} fields, got {len(row)}")
            pid = resolve(row[cols["party"]])
            if pid in out:
                raise DuplicateKey(f"party {pid!r} repeated")
            out[pid] = PartyProfile(
                r=_float(row[cols["r"]], "r", line),
                s=_float(row[cols["s"]], "s", line),
            )
        except DataError as exc:
            col.fail(exc, line)
    return WeightTable(warnings=tuple(col.warnings),
                       rejected=tuple(col.rejected), rows=out)


def _parse_distance(rows, col: _Collector):
    line, header = next(rows)
    lower = {h.lower() for h in header}
    derive = "is_summer" not in lower and "publish_month" in lower
    required = ["frame_id", "province", *DISTANCE_FIELDS, "daynight"]
    required.append("publish_month" if derive else "is_summer")
    cols = _index(header, required)
    flags = {"is_summer_derived_from_publish_month": derive}
    if derive:
        col.warn(line, "DerivedColumn",
                 "is_summer derived from publish_month (months 5-9 -> 1)")
    out = []
    seen = set()
    for line, row in rows:
        try:
            if len(row) < len(header):
                raise MalformedHeader(
                    f"expected {len(header)} fields, got {len(row)}")
            fid = row[cols["frame_id"]]
            if not fid:
                raise ValueOutOfRange("empty frame_id")
            if fid in seen:
                raise DuplicateKey(f"frame_id {fid!r} repeated")
            dist = {}
            for name in DISTANCE_FIELDS:
                v = _opt_float(row[cols[name]], name, line)
                if v is not None and v < 0:
                    raise ValueOutOfRange(f"{name}={v!r} is negative")
                dist[name] = v
            if all(v is None for v in dist.values()):
                raise ValueOutOfRange("all three distance fields are missing")
            if derive:
                month = _float(row[cols["publish_month"]], "publish_month", line)
                if month not in range(1, 13):
                    raise ValueOutOfRange(f"publish_month={month!r} not in 1..12")
                summer = int(int(month) in SUMMER_MONTHS)
            else:
                summer = _binary(row[cols["is_summer"]], "is_summer", line)
            out.append(DistanceRecord(
                frame_id=fid,
                province=resolve(row[cols["province"]]),
                daynight=_binary(row[cols["daynight"]], "daynight", line),
                is_summer=summer,
                **dist,
            ))
            seen.add(fid)
        except DataError as exc:
            col.fail(exc, line)
    return DistanceTable(warnings=tuple(col.warnings),
                         rejected=tuple(col.rejected), flags=flags,
                         records=tuple(out))


_CONTROL_SECTORS = ("agriculture_gdp", "industry_gdp", "services_gdp",
                    "finance_gdp")


def _parse_controls(rows, col: _Collector):
    line, header = next(rows)
    required = ["province", "year", "num_mosques", "gdp_per_capita",
                *_CONTROL_SECTORS, "total_gdp"]
    cols = _index(header, required,
                  optional=["manufacturing_gdp", "poverty_rate", "region"])
    flags = {"manufacturing_column_present": "manufacturing_gdp" in cols}
    if "manufacturing_gdp" not in cols:
        col.warn(line, "MissingOptionalColumn",
                 "no manufacturing_gdp column; industry_gdp taken as the "
                 "combined manufacturing + industry value")
    out = []
    seen = set()
    provinces = set()
    for line, row in rows:
        try:
            if len(row) < len(header):
                raise MalformedHeader(
                    f"expected {len(header)} fields, got {len(row)}")
            prov = resolve(row[cols["province"]])
            region = None
            if "region" in cols and not _is_missing(row[cols["region"]]):
                region = row[cols["region"]].strip().lower()
                if region not in REGIONS:
                    raise ValueOutOfRange(f"unknown region {region!r}")
            if prov not in PROVINCE_REGION and region is None:
                raise ValueOutOfRange(f"unknown province {row[cols['province']]!r}")
            year = _float(row[cols["year"]], "year", line)
            if year != int(year):
                raise ValueOutOfRange(f"year={year!r} is not an integer")
            year = int(year)
            if (prov, year) in seen:
                raise DuplicateKey(f"province {prov!r} repeated for {year}")
            vals = {name: _nonneg(row[cols[name]], name, line)
                    for name in (*_CONTROL_SECTORS, "total_gdp")}
            vals["manufacturing_gdp"] = (
                _nonneg(row[cols["manufacturing_gdp"]], "manufacturing_gdp", line)
                if "manufacturing_gdp" in cols else 0.0)
            if not vals["total_gdp"] > 0:
                raise ValueOutOfRange("total_gdp must be positive")
            for name, v in vals.items():
                if name != "total_gdp" and v > vals["total_gdp"]:
                    raise ValueOutOfRange(f"{name}={v!r} exceeds total_gdp")
            gpc = _float(row[cols["gdp_per_capita"]], "gdp_per_capita", line)
            if not gpc > 0:
                raise ValueOutOfRange(f"gdp_per_capita={gpc!r} must be positive")
            poverty = None
            if "poverty_rate" in cols:
                poverty = _opt_float(row[cols["poverty_rate"]], "poverty_rate", line)
                if poverty is not None and poverty < 0:
                    raise ValueOutOfRange(f"poverty_rate={poverty!r} is negative")
            out.append(ControlRecord(
                province=prov, year=year,
                num_mosques=_count(row[cols["num_mosques"]], "num_mosques", line),
                gdp_per_capita=gpc, poverty_rate=poverty, region=region, **vals,
            ))
            seen.add((prov, year))
            provinces.add(prov)
        except DataError as exc:
            col.fail(exc, line)
    _check_province_count(provinces, col, line)
    return ControlTable(warnings=tuple(col.warnings),
                        rejected=tuple(col.rejected), flags=flags,
                        records=tuple(out))


def parse_table(source, schema: str, *, delimiter: str = ",",
                strict: bool = True, election_id: Optional[str] = None,
                name: Optional[str] = None):
    """Parse and validate one input table.

    Parameters
    ----------
    source : bytes, str, path-like or file object
        UTF-8 delimiter-separated text with a header row. A ``str`` is taken
        as the text itself; wrap paths in :class:`pathlib.Path`.
    schema : {"election", "weights", "distance", "controls"}
    strict : bool
        Raise on the first invalid row (default). Otherwise invalid rows are
        collected in ``table.rejected`` with their line numbers.
    name : str, optional
        Source label used in error messages.

    Raises
    ------
    MalformedHeader
        Missing required column; always raised, regardless of ``strict``.
    ValueOutOfRange, DuplicateKey
        Invalid or repeated row (strict mode only).
    """
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}; expected one of {SCHEMAS}")
    if name is None and isinstance(source, os.PathLike):
        name = os.fspath(source)
    rows = _rows(_text(source), delimiter)
    col = _Collector(strict, name)
    try:
        if schema == "election":
            return _parse_election(rows, col, election_id)
        if schema == "weights":
            return _parse_weights(rows, col)
        if schema == "distance":
            return _parse_distance(rows, col)
        return _parse_controls(rows, col)
    except StopIteration:
        raise MalformedHeader("empty input: no header row", line=1, source=name)
    except MalformedHeader as exc:
        raise exc.located(source=name) from None


def read_table(path, schema: str, **kwargs):
    """:func:`parse_table` on a file path."""
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_table(data, schema, name=os.fspath(path), **kwargs)


# -- serializing -------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def serialize(table, delimiter: str = ",") -> str:
    """Inverse of :func:`parse_table` for validated tables."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    if isinstance(table, ElectionTable):
        w.writerow(["province", *table.parties])
        for prov in sorted(table.rows):
            d = table.rows[prov].as_dict()
            w.writerow([prov, *(_cell(d.get(p, 0.0)) for p in table.parties)])
    elif isinstance(table, WeightTable):
        w.writerow(["party", "r", "s"])
        for pid in sorted(table.rows):
            prof = table.rows[pid]
            w.writerow([pid, _cell(prof.r), _cell(prof.s)])
    elif isinstance(table, DistanceTable):
        names = ["frame_id", "province", *DISTANCE_FIELDS, "daynight", "is_summer"]
        w.writerow(names)
        for rec in table.records:
            w.writerow([_cell(getattr(rec, n)) for n in names])
    elif isinstance(table, ControlTable):
        names = ["province", "year", "num_mosques", "gdp_per_capita",
                 "agriculture_gdp", "manufacturing_gdp", "industry_gdp",
                 "services_gdp", "finance_gdp", "total_gdp", "poverty_rate",
                 "region"]
        w.writerow(names)
        for rec in table.records:
            w.writerow([_cell(getattr(rec, n)) for n in names])
    else:
        raise TypeError(f"cannot serialize {type(table).__name__}")
    return buf.getvalue()


# -- joining -----------------------------------------------------------------

PROVINCE_COLUMNS = (
    "h_unweighted", "h_religiosity", "h_political",
    "num_mosques", "gdp_per_capita", "poverty_rate",
    "economic_sophistication_proxy", "agriculture_prop", "industry_prop",
    "services_prop",
)
ANALYSIS_COLUMNS = (
    "frame_id", "province", "region", "year",
    *DISTANCE_FIELDS, "daynight", "is_summer",
    *PROVINCE_COLUMNS,
)


@dataclass(frozen=True)
class JoinReport:
    year: int
    level: str
    n_input: int
    n_output: int
    unmatched: dict  # province -> {"frames": int, "missing": [...]}

    @property
    def n_dropped(self) -> int:
        return self.n_input - self.n_output

    def as_dict(self):
        return {
            "year": self.year,
            "level": self.level,
            "input_records": self.n_input,
            "output_rows": self.n_output,
            "dropped_records": self.n_dropped,
            "unmatched_provinces": self.unmatched,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class AnalysisTable:
    """Joined analysis rows plus the join report.

    ``frame`` is a :class:`pandas.DataFrame` whose columns follow
    :data:`ANALYSIS_COLUMNS` (missing values are NaN). Treat it as
    read-only.
    """

    frame: pd.DataFrame
    report: Optional[JoinReport] = None
    level: str = "frame"

    def __len__(self):
        return len(self.frame)

    @property
    def columns(self):
        return tuple(self.frame.columns)

    def to_csv(self, delimiter: str = ",") -> str:
        return self.frame.to_csv(index=False, sep=delimiter, lineterminator="\n",
                                 float_format=None)

    @classmethod
    def from_csv(cls, source, delimiter: str = ","):
        text = _text(source)
        frame = pd.read_csv(io.StringIO(text), sep=delimiter,
                            float_precision="round_trip", dtype={"frame_id": str, "province": str,
                                   "region": str})
        return cls(frame=frame, report=None)


def _province_values(measures, control) -> dict:
    if hasattr(measures, "as_dict"):
        vals = dict(measures.as_dict())
    else:
        vals = dict(measures)
    vals.update(
        num_mosques=float(control.num_mosques),
        gdp_per_capita=control.gdp_per_capita,
        poverty_rate=(np.nan if control.poverty_rate is None
                      else control.poverty_rate),
    )
    vals.update(_controls.sector_proportions(control).as_columns())
    return vals


def assemble(rows: Iterable[dict]) -> pd.DataFrame:
    """DataFrame with the canonical analysis column order.

    Extra keys are appended after the canonical columns in first-seen order.
    """
    rows = list(rows)
    extra = []
    for r in rows:
        for k in r:
            if k not in ANALYSIS_COLUMNS and k not in extra:
                extra.append(k)
    names = [*ANALYSIS_COLUMNS, *extra]
    frame = pd.DataFrame({n: [r.get(n, np.nan) for r in rows] for n in names})
    for n in ("frame_id", "province", "region"):
        frame[n] = frame[n].astype(object)
    num = [n for n in names if n not in ("frame_id", "province", "region")]
    frame[num] = frame[num].astype(float)
    frame["year"] = frame["year"].astype("int64") if len(frame) else frame["year"]
    return frame


def join_province(entropies: Mapping, distances, controls, year: int,
                  level: str = "frame") -> AnalysisTable:
    """Join frame records with province outcomes and controls for one year.

    Parameters
    ----------
    entropies : mapping
        Province -> :class:`~polarproxy.entropy.EntropyMeasures` (or a mapping
        of outcome columns), e.g. from :func:`~polarproxy.entropy.province_entropies`.
    distances : DistanceTable or iterable of DistanceRecord
    controls : ControlTable or iterable of ControlRecord
    year : int
        Control year to join.
    level : {"frame", "province"}
        Frame-level rows (province values replicated across frames), or one
        row per province with distance fields averaged.

    Distance records whose province lacks an entropy row or a control row
    are dropped and listed in ``table.report.unmatched``; the join fails with
    :class:`UnmatchedProvince` only when no record survives.
    """
    if level not in ("frame", "province"):
        raise ValueError(f"level must be 'frame' or 'province', not {level!r}")
    records = list(distances)
    ctl = {}
    for rec in controls:
        if rec.year == year:
            ctl[rec.province] = rec
    if not ctl:
        raise UnmatchedProvince(f"no control rows for year {year}")
    ent = {resolve(k): v for k, v in entropies.items()}

    cache = {}
    rows = []
    unmatched = {}
    for rec in records:
        prov = rec.province
        if prov not in cache:
            missing = []
            if prov not in PROVINCE_REGION and (prov not in ctl or ctl[prov].region is None):
                missing.append("unknown_province")
            if prov not in ent:
                missing.append("election")
            if prov not in ctl:
                missing.append("controls")
            if missing:
                cache[prov] = missing
            else:
                c = ctl[prov]
                cache[prov] = {
                    "region": c.region or PROVINCE_REGION[prov],
                    **_province_values(ent[prov], c),
                }
        info = cache[prov]
        if isinstance(info, list):
            slot = unmatched.setdefault(prov, {"frames": 0, "missing": info})
            slot["frames"] += 1
            continue
        row = {
            "frame_id": rec.frame_id, "province": prov, "year": year,
            "daynight": rec.daynight, "is_summer": rec.is_summer,
        }
        for name in DISTANCE_FIELDS:
            v = getattr(rec, name)
            row[name] = np.nan if v is None else v
        row.update(info)
        rows.append(row)

    if not rows:
        raise UnmatchedProvince(
            f"none of {len(records)} distance records joined for {year}; "
            f"unmatched provinces: {sorted(unmatched)}")
    table = AnalysisTable(
        frame=assemble(rows),
        report=JoinReport(year=year, level="frame", n_input=len(records),
                          n_output=len(rows), unmatched=dict(sorted(unmatched.items()))),
    )
    if level == "province":
        agg = aggregate_provinces(table)
        table = AnalysisTable(
            frame=agg,
            report=JoinReport(year=year, level="province",
                              n_input=len(records), n_output=len(rows),
                              unmatched=table.report.unmatched),
            level="province",
        )
    return table


def aggregate_provinces(table) -> pd.DataFrame:
    """One row per province: frame-level fields averaged, NaNs skipped.

    Adds ``n_frames``. Accepts an :class:`AnalysisTable` or its frame.
    """
    frame = table.frame if isinstance(table, AnalysisTable) else table
    frame_level = [*DISTANCE_FIELDS, "daynight", "is_summer"]
    keep = [c for c in frame.columns
            if c not in ("frame_id", *frame_level)]
    first = frame.groupby("province", sort=True)[
        [c for c in keep if c != "province"]].first()
    means = frame.groupby("province", sort=True)[frame_level].mean()
    counts = frame.groupby("province", sort=True).size().rename("n_frames")
    out = pd.concat([first, means, counts], axis=1).reset_index()
    order = ["province", "region", "year", *frame_level,
             *[c for c in out.columns
               if c not in ("province", "region", "year", *frame_level)]]
    return out[[c for c in order if c in out.columns]]
