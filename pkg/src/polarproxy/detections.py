"""Detection files to distance tables.

A detections file has one row per detected pedestrian::

    frame_id,cx,cy,bw,bh,cls[,province,daynight,is_summer|publish_month]

Frame metadata (province and the two environment flags) may come from the
same file or from a separate metadata file keyed by ``frame_id``. Depth maps
live in a directory as ``<frame_id>.txt``: plain whitespace-separated rows of
reals, one row per image row.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError, DuplicateKey, MalformedHeader, ValueOutOfRange
from .geometry import Detection, DepthMap, PairType, frame_pair_means
from .ingest import (
    SUMMER_MONTHS,
    DistanceRecord,
    DistanceTable,
    _binary,
    _Collector,
    _float,
    _index,
    _rows,
    _text,
)
from .provinces import resolve

DEFAULT_ASPECT = 16 / 9
DETECTION_COLUMNS = ("frame_id", "cx", "cy", "bw", "bh", "cls")
META_COLUMNS = ("province", "daynight", "is_summer", "publish_month")


@dataclass
class DetectionFile:
    frames: dict = field(default_factory=dict)   # frame_id -> [Detection]
    meta: dict = field(default_factory=dict)     # frame_id -> {column: value}
    warnings: tuple = ()


def _meta_value(name, cell, line):
    if name == "province":
        return resolve(cell)
    if name == "publish_month":
        m = _float(cell, name, line)
        if m not in range(1, 13):
            raise ValueOutOfRange(f"publish_month={m!r} not in 1..12")
        return int(m)
    return _binary(cell, name, line)


def _merge_meta(store, fid, values, line):
    old = store.setdefault(fid, {})
    for k, v in values.items():
        if k in old and old[k] != v:
            raise ValueOutOfRange(
                f"frame {fid!r} has conflicting {k} values {old[k]!r} and {v!r}",
                line=line)
        old[k] = v


def parse_detections(source, delimiter: str = ",", name: Optional[str] = None):
    """Read a detections file into per-frame detection lists."""
    col = _Collector(True, name or (str(source) if isinstance(source, Path) else None))
    rows = _rows(_text(source), delimiter)
    try:
        _, header = next(rows)
    except StopIteration:
        raise MalformedHeader("empty detections file", line=1, source=col.source)
    cols = _index(header, DETECTION_COLUMNS, META_COLUMNS)
    out = DetectionFile()
    for line, row in rows:
        try:
            if len(row) < len(header):
                raise MalformedHeader(f"expected {len(header)} fields, got {len(row)}")
            fid = row[cols["frame_id"]]
            if not fid:
                raise ValueOutOfRange("empty frame_id")
            vals = [_float(row[cols[c]], c, line) for c in ("cx", "cy", "bw", "bh")]
            cls = row[cols["cls"]].upper()
            out.frames.setdefault(fid, []).append(Detection(*vals, cls))
            meta = {c: _meta_value(c, row[cols[c]], line)
                    for c in META_COLUMNS if c in cols and row[cols[c]]}
            _merge_meta(out.meta, fid, meta, line)
        except DataError as exc:
            col.fail(exc, line)
    return out


def parse_frame_meta(source, delimiter: str = ",", name: Optional[str] = None) -> dict:
    """Per-frame metadata file: ``frame_id`` plus any of the meta columns."""
    col = _Collector(True, name or (str(source) if isinstance(source, Path) else None))
    rows = _rows(_text(source), delimiter)
    _, header = next(rows)
    cols = _index(header, ("frame_id",), META_COLUMNS)
    out = {}
    for line, row in rows:
        try:
            fid = row[cols["frame_id"]]
            if fid in out:
                raise DuplicateKey(f"frame_id {fid!r} repeated")
            out[fid] = {c: _meta_value(c, row[cols[c]], line)
                        for c in META_COLUMNS if c in cols and row[cols[c]]}
        except DataError as exc:
            col.fail(exc, line)
    return out


def load_depth(path) -> DepthMap:
    grid = np.loadtxt(path, dtype=float, ndmin=2)
    return DepthMap(grid)


@dataclass
class DistanceRun:
    table: DistanceTable
    skipped: dict            # frame_id -> reason
    frames: dict             # frame_id -> FrameDistances


def distance_table(det: DetectionFile, meta: Optional[dict] = None,
                   depth_dir=None, aspect: Optional[float] = None,
                   ground_contact: bool = False) -> DistanceRun:
    """One :class:`DistanceRecord` per frame with at least one pair.

    Without a depth map for a frame the depth is flat and only the image
    plane contributes; ``aspect`` then defaults to 16:9. With a depth map the
    aspect defaults to the grid's width/height.
    """
    meta = dict(meta or {})
    for fid, m in det.meta.items():
        merged = dict(m)
        merged.update(meta.get(fid, {}))
        meta[fid] = merged
    records, skipped, frames = [], {}, {}
    for fid in sorted(det.frames):
        dets = det.frames[fid]
        depth = None
        if depth_dir is not None:
            p = Path(depth_dir) / f"{fid}.txt"
            if p.is_file():
                depth = load_depth(p)
        ar = aspect
        if depth is None:
            depth = DepthMap.flat()
            ar = DEFAULT_ASPECT if aspect is None else aspect
        fd = frame_pair_means(dets, depth, frame_id=fid, aspect=ar,
                              ground_contact=ground_contact)
        frames[fid] = fd
        if all(v is None for v in fd.means.values()):
            skipped[fid] = f"{len(dets)} detection(s), no pairs"
            continue
        m = meta.get(fid, {})
        missing = [k for k in ("province", "daynight") if k not in m]
        if "is_summer" not in m and "publish_month" not in m:
            missing.append("is_summer")
        if missing:
            raise DataError(f"frame {fid!r} lacks metadata {missing}")
        summer = m.get("is_summer")
        if summer is None:
            summer = int(m["publish_month"] in SUMMER_MONTHS)
        records.append(DistanceRecord(
            frame_id=fid, province=m["province"],
            NRP_vs_NRP=fd[PairType.NRP_vs_NRP], RP_vs_RP=fd[PairType.RP_vs_RP],
            NRP_vs_RP=fd[PairType.NRP_vs_RP],
            daynight=m["daynight"], is_summer=summer,
        ))
    flags = {"depth_normalization": "per-frame min-max",
             "ground_contact": ground_contact,
             "aspect": "depth map width/height" if aspect is None else aspect}
    return DistanceRun(table=DistanceTable(records=tuple(records), flags=flags),
                       skipped=skipped, frames=frames)
