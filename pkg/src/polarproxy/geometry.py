"""Relative 3D distances between detected pedestrians.

A detection is a normalized box centre in image coordinates plus a class
(``NRP`` non-religious, ``RP`` religious). Depth comes from a monocular
relative inverse-depth map, which is only defined up to a monotone
transform, so each frame's map is min-max normalized to ``[0, 1]``. The
horizontal coordinate is scaled by the frame aspect ratio so that image-plane
units are isotropic. Resulting distances are unitless.
"""

import enum
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptyDepthMap, ValueOutOfRange


class PairType(str, enum.Enum):
    NRP_vs_NRP = "NRP_vs_NRP"
    RP_vs_RP = "RP_vs_RP"
    NRP_vs_RP = "NRP_vs_RP"


PAIR_TYPES = tuple(PairType)
CLASSES = ("NRP", "RP")


@dataclass(frozen=True)
class Detection:
    cx: float
    cy: float
    bw: float
    bh: float
    cls: str

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueOutOfRange(f"class {self.cls!r} not in {CLASSES}")
        for name in ("cx", "cy"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueOutOfRange(f"{name}={v!r} outside [0, 1]")
        for name in ("bw", "bh"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueOutOfRange(f"{name}={v!r} outside (0, 1]")


class DepthMap:
    """Dense relative inverse-depth grid, indexed ``values[row, col]``.

    ``width`` is the number of columns and ``height`` the number of rows.
    """

    def __init__(self, values):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise EmptyDepthMap("depth map must be a non-empty 2D grid")
        if not np.all(np.isfinite(v)):
            raise ValueOutOfRange("depth map contains non-finite values")
        v.setflags(write=False)
        self.values = v
        self.height, self.width = v.shape
        self._lo = float(v.min())
        self._span = float(v.max()) - self._lo

    @classmethod
    def flat(cls, width=16, height=9):
        """Constant map; every normalized depth is 0."""
        return cls(np.zeros((height, width)))

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def __repr__(self):
        return f"DepthMap(width={self.width}, height={self.height})"


def _bilinear(values: np.ndarray, x: float, y: float) -> float:
    h, w = values.shape
    x0 = min(int(math.floor(x)), w - 1)
    y0 = min(int(math.floor(y)), h - 1)
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    top = values[y0, x0] * (1 - fx) + values[y0, x1] * fx
    bot = values[y1, x0] * (1 - fx) + values[y1, x1] * fx
    return float(top * (1 - fy) + bot * fy)


def depth_at(depth: DepthMap, cx: float, cy: float) -> float:
    """Normalized depth in ``[0, 1]`` at normalized image coordinates.

    The grid is bilinearly interpolated at ``(cx*(width-1), cy*(height-1))``
    and the value rescaled by the map's min and max. Constant maps give 0.
    """
    if depth is None or depth.values.size == 0:
        raise EmptyDepthMap("no depth values")
    cx = min(max(cx, 0.0), 1.0)
    cy = min(max(cy, 0.0), 1.0)
    if depth._span == 0.0:
        return 0.0
    raw = _bilinear(depth.values, cx * (depth.width - 1), cy * (depth.height - 1))
    z = (raw - depth._lo) / depth._span
    return min(max(z, 0.0), 1.0)


def classify_pair(a: str, b: str) -> PairType:
    if a not in CLASSES or b not in CLASSES:
        raise ValueOutOfRange(f"unknown class in pair ({a!r}, {b!r})")
    if a == b:
        return PairType.NRP_vs_NRP if a == "NRP" else PairType.RP_vs_RP
    return PairType.NRP_vs_RP


def _anchor(d: Detection, ground_contact: bool):
    if ground_contact:
        return d.cx, min(d.cy + d.bh / 2.0, 1.0)
    return d.cx, d.cy


def _euclid(p, q) -> float:
    dx, dy, dz = p[0] - q[0], p[1] - q[1], p[2] - q[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def _point(d: Detection, depth: DepthMap, aspect: float, ground_contact: bool):
    x, y = _anchor(d, ground_contact)
    return (x * aspect, y, depth_at(depth, x, y))


def pair_distance(a: Detection, b: Detection, depth: DepthMap,
                  aspect: Optional[float] = None,
                  ground_contact: bool = False) -> float:
    """Euclidean distance between two detections in (x*aspect, y, z) space.

    ``aspect`` defaults to the depth map's width/height. With
    ``ground_contact`` the anchor is the bottom edge of the box
    (``cy + bh/2``) instead of its centre.
    """
    ar = depth.aspect if aspect is None else aspect
    pa = _point(a, depth, ar, ground_contact)
    pb = _point(b, depth, ar, ground_contact)
    return _euclid(pa, pb)


@dataclass(frozen=True)
class FrameDistances:
    frame_id: str
    means: dict = field(default_factory=dict)  # PairType -> float | None
    n_detections: int = 0
    n_pairs: dict = field(default_factory=dict)

    def __getitem__(self, pair_type):
        return self.means.get(PairType(pair_type))


def frame_pair_means(dets: Sequence[Detection], depth: DepthMap,
                     frame_id: str = "", aspect: Optional[float] = None,
                     ground_contact: bool = False) -> FrameDistances:
    """Mean distance per pair type over all unordered detection pairs.

    Pair types with no pairs are ``None``, never 0.
    """
    ar = depth.aspect if aspect is None else aspect
    points = [_point(d, depth, ar, ground_contact) for d in dets]
    sums = defaultdict(list)
    for i, j in itertools.combinations(range(len(dets)), 2):
        t = classify_pair(dets[i].cls, dets[j].cls)
        sums[t].append(_euclid(points[i], points[j]))
    means = {t: (math.fsum(sums[t]) / len(sums[t]) if sums[t] else None)
             for t in PAIR_TYPES}
    return FrameDistances(
        frame_id=frame_id,
        means=means,
        n_detections=len(dets),
        n_pairs={t: len(sums[t]) for t in PAIR_TYPES},
    )


def province_mean_distances(records: Iterable) -> dict:
    """Per-province arithmetic mean of each distance field.

    ``records`` are :class:`~polarproxy.ingest.DistanceRecord` objects (or
    anything with ``province`` and the three pair-type attributes). Absent
    values are skipped; a field with no values at all stays ``None``.
    """
    acc = defaultdict(lambda: {t.value: [] for t in PAIR_TYPES})
    for rec in records:
        slot = acc[rec.province]
        for t in PAIR_TYPES:
            v = getattr(rec, t.value)
            if v is not None and not (isinstance(v, float) and math.isnan(v)):
                slot[t.value].append(float(v))
    return {
        prov: {k: (math.fsum(v) / len(v) if v else None) for k, v in slot.items()}
        for prov, slot in sorted(acc.items())
    }
