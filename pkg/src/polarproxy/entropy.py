"""Shannon entropy of vote shares and its ideology-weighted variants.

All values are in nats (natural logarithm). The weighted measures multiply
each share by a party weight before the ``-q log q`` transform and do **not**
renormalize the products, so they are not entropies of a probability
distribution; they are bounded below by 0 only because every product is at
most 1.

Sums are accumulated with :func:`math.fsum`, which is correctly rounded. The
result is therefore independent of term order, which gives permutation
invariance exactly rather than to within rounding.
"""

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    InvalidDistribution,
    LengthMismatch,
    MissingProfile,
    WeightOutOfRange,
)

SUM_TOLERANCE = 1e-9
UNITS = "nats"


@dataclass(frozen=True)
class EntropyMeasures:
    h_unweighted: float
    h_religiosity: float
    h_political: float
    n_parties: int = 0
    enp: float = float("nan")

    def as_dict(self):
        return {
            "h_unweighted": self.h_unweighted,
            "h_religiosity": self.h_religiosity,
            "h_political": self.h_political,
        }


def _check_shares(shares: Sequence[float]) -> None:
    for p in shares:
        if not p >= 0.0:  # also rejects NaN
            raise InvalidDistribution(f"share {p!r} is negative or not a number")
    total = math.fsum(shares)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise InvalidDistribution(f"shares sum to {total!r}, expected 1")


def _neg_xlogx(x: float) -> float:
    # 0 log 0 := 0 by continuity
    if x == 0.0:
        return 0.0
    return -x * math.log(x)


def shannon_entropy(shares: Sequence[float]) -> float:
    """Entropy ``-sum p log p`` of a vote-share vector, in nats.

    >>> round(shannon_entropy([0.25, 0.25, 0.25, 0.25]), 7)
    1.3862944
    """
    shares = [float(p) for p in shares]
    _check_shares(shares)
    return math.fsum(_neg_xlogx(p) for p in shares)


def weighted_entropy(shares: Sequence[float], weights: Sequence[float]) -> float:
    """Entropy-like sum ``-sum q log q`` with ``q_i = p_i * w_i``.

    Parameters
    ----------
    shares : sequence of float
        Vote proportions summing to one.
    weights : sequence of float
        Per-party weights in ``[0, 1]``, aligned with ``shares``.

    Notes
    -----
    With all weights equal to one every product equals its share exactly, so
    the result is bit-identical to :func:`shannon_entropy`. Zero products
    contribute nothing.
    """
    shares = [float(p) for p in shares]
    weights = [float(w) for w in weights]
    if len(shares) != len(weights):
        raise LengthMismatch(
            f"{len(shares)} shares but {len(weights)} weights"
        )
    _check_shares(shares)
    for w in weights:
        if not 0.0 <= w <= 1.0:
            raise WeightOutOfRange(f"weight {w!r} outside [0, 1]")
    return math.fsum(_neg_xlogx(p * w) for p, w in zip(shares, weights))


def effective_number_of_parties(shares: Sequence[float]) -> float:
    """Laakso-Taagepera index ``1 / sum p^2``, for cross-checking only."""
    shares = [float(p) for p in shares]
    _check_shares(shares)
    return 1.0 / math.fsum(p * p for p in shares)


def province_entropies(elections, weights) -> dict:
    """All three measures for every province of an election table.

    Parameters are an :class:`~polarproxy.ingest.ElectionTable` and a
    :class:`~polarproxy.ingest.WeightTable`. Parties are visited in ascending
    ``party_id`` order; provinces are returned in sorted order.

    Raises
    ------
    MissingProfile
        A party received a positive share but has no weight row.
    """
    profiles: Mapping = weights.rows
    out = {}
    for province in sorted(elections.rows):
        pairs = sorted(elections.rows[province].shares)
        shares, r, s = [], [], []
        for party, p in pairs:
            prof = profiles.get(party)
            if prof is None:
                if p > 0.0:
                    raise MissingProfile(
                        f"party {party!r} has votes in {province!r} "
                        "but no weight profile"
                    )
                continue
            shares.append(p)
            r.append(prof.r)
            s.append(prof.s)
        out[province] = EntropyMeasures(
            h_unweighted=shannon_entropy(shares),
            h_religiosity=weighted_entropy(shares, r),
            h_political=weighted_entropy(shares, s),
            n_parties=len(shares),
            enp=effective_number_of_parties(shares),
        )
    return out
