"""Economic controls derived from provincial GDP components."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroTotalGdp

# column names these proportions get in an analysis table
COLUMN_NAMES = {
    "sophistication": "economic_sophistication_proxy",
    "agriculture": "agriculture_prop",
    "industry": "industry_prop",
    "services": "services_prop",
}


@dataclass(frozen=True)
class SectorProportions:
    agriculture: float
    industry: float
    services: float
    sophistication: float

    @property
    def residual(self) -> float:
        """Share of total GDP not covered by the three listed sectors."""
        return 1.0 - math.fsum((self.agriculture, self.industry, self.services))

    def as_columns(self) -> dict:
        return {COLUMN_NAMES[k]: getattr(self, k) for k in COLUMN_NAMES}


def sector_proportions(rec) -> SectorProportions:
    """Sector shares of a :class:`~polarproxy.ingest.ControlRecord`.

    Industry (and the economic sophistication proxy, which is the same quantity)
    is manufacturing plus industry GDP over total GDP; services include
    finance and insurance. Proportions are not forced to sum to one.

    >>> from types import SimpleNamespace as R
    >>> sector_proportions(R(agriculture_gdp=25, manufacturing_gdp=20,
    ...     industry_gdp=10, services_gdp=30, finance_gdp=5, total_gdp=100))
    SectorProportions(agriculture=0.25, industry=0.3, services=0.35, sophistication=0.3)
    """
    total = float(rec.total_gdp)
    if not total > 0.0:
        raise ZeroTotalGdp(f"total GDP is {total!r}")
    industry = (float(rec.manufacturing_gdp) + float(rec.industry_gdp)) / total
    return SectorProportions(
        agriculture=float(rec.agriculture_gdp) / total,
        industry=industry,
        services=(float(rec.services_gdp) + float(rec.finance_gdp)) / total,
        sophistication=industry,
    )


def pearson(x, y) -> float:
    """Sample Pearson correlation; NaN with fewer than two finite pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 2:
        return float("nan")
    dx, dy = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        return float("nan")
    return float(dx @ dy) / denom


def temples_distance_scatter(table, distance="NRP_vs_RP"):
    """Province-level scatter of mosque counts against mean pair distance.

    Returns ``(frame, r)`` where ``frame`` has columns ``province``,
    ``num_mosques`` and ``mean_<distance>`` and ``r`` is their Pearson
    correlation. Purely descriptive.
    """
    from .ingest import aggregate_provinces

    prov = aggregate_provinces(table)
    out = prov[["province", "num_mosques", distance]].rename(
        columns={distance: f"mean_{distance}"}
    )
    return out, pearson(out["num_mosques"], out[f"mean_{distance}"])
