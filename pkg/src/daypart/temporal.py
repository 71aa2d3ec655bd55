"""Local-time arithmetic and circular statistics on the 24-hour clock.

Times of day live on a circle, not a line: the mean of samples around
midnight must come out near midnight, not near noon. All aggregation here
goes through mergeable vector sums so that sharded processing commutes with
merging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

DAY_S = 86400
MIN_OFFSET_S = -43200
MAX_OFFSET_S = 50400

# Below this resultant length the mean direction is numerically meaningless
# (mass is antipodal, atan2 of near-zero components).
RESULTANT_EPS = 1e-9

_EPOCH_ORDINAL = date(1970, 1, 1).toordinal()
_TWO_PI = 2.0 * math.pi
_RAD_PER_S = _TWO_PI / DAY_S


class EmptyAccumulatorError(ValueError):
    """No samples: mean/resultant undefined."""


class UndefinedMeanError(ValueError):
    """Antipodal mass: resultant vector too short to define a direction."""


def local_time(utc_s: int, offset_s: int) -> tuple[date, int]:
    """Shift an epoch instant by a UTC offset into (local date, seconds since local midnight).

    Exact integer identity: (utc_s + offset_s) == days_since_epoch * 86400 + tod.
    """
    if not MIN_OFFSET_S <= offset_s <= MAX_OFFSET_S:
        raise ValueError(f"offset {offset_s}s outside [{MIN_OFFSET_S}, {MAX_OFFSET_S}]")
    days, tod = divmod(utc_s + offset_s, DAY_S)
    return date.fromordinal(_EPOCH_ORDINAL + days), tod


def format_tod(tod_s: int) -> str:
    """Seconds since midnight -> 'HH:MM:SS'."""
    h, rem = divmod(int(tod_s), 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


def parse_tod(text: str) -> int:
    h, m, s = text.split(":")
    tod = int(h) * 3600 + int(m) * 60 + int(s)
    if not 0 <= tod < DAY_S:
        raise ValueError(f"time of day out of range: {text!r}")
    return tod


@dataclass
class CircularAccumulator:
    """Sufficient statistics for a circular mean: running unit-vector sums.

    Forms a commutative monoid under merge() with the empty accumulator as
    identity, which is the contract sharded pipelines rely on.
    """

    sum_sin: float = 0.0
    sum_cos: float = 0.0
    count: int = 0

    def add(self, tod_s: int) -> None:
        if not 0 <= tod_s < DAY_S:
            raise ValueError(f"time of day out of range: {tod_s}")
        theta = tod_s * _RAD_PER_S
        self.sum_sin += math.sin(theta)
        self.sum_cos += math.cos(theta)
        self.count += 1

    def merge(self, other: "CircularAccumulator") -> "CircularAccumulator":
        return CircularAccumulator(
            self.sum_sin + other.sum_sin,
            self.sum_cos + other.sum_cos,
            self.count + other.count,
        )

    def resultant_length(self) -> float:
        """Mean vector length in [0, 1]; 1 = concentrated, 0 = dispersed."""
        if self.count == 0:
            raise EmptyAccumulatorError("no samples")
        return math.hypot(self.sum_sin, self.sum_cos) / self.count

    def mean_tod(self) -> int:
        """Direction of the resultant vector, as whole seconds in [0, 86400)."""
        if self.count == 0:
            raise EmptyAccumulatorError("no samples")
        if self.resultant_length() < RESULTANT_EPS:
            raise UndefinedMeanError(
                f"resultant length below {RESULTANT_EPS}: mean direction undefined"
            )
        theta = math.atan2(self.sum_sin, self.sum_cos) % _TWO_PI
        return round(theta / _RAD_PER_S) % DAY_S

    def as_triple(self) -> tuple[float, float, int]:
        """Checkpoint form (sum_sin, sum_cos, count)."""
        return (self.sum_sin, self.sum_cos, self.count)

    @classmethod
    def from_triple(cls, triple) -> "CircularAccumulator":
        sum_sin, sum_cos, count = triple
        return cls(float(sum_sin), float(sum_cos), int(count))

    @classmethod
    def of(cls, samples) -> "CircularAccumulator":
        acc = cls()
        for s in samples:
            acc.add(s)
        return acc


def rotated_quantiles(samples: list[int], qs: list[float]) -> list[int]:
    """Nearest-rank quantiles of circular samples, linearized about the mean.

    Rotates all samples so their circular mean sits at 12:00, takes ordinary
    nearest-rank quantiles on the rotated values, and rotates back. Raises
    UndefinedMeanError when the samples are antipodal (no usable center).
    """
    if not samples:
        raise EmptyAccumulatorError("no samples")
    for q in qs:
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile level out of [0, 1]: {q}")
    mean = CircularAccumulator.of(samples).mean_tod()
    delta = (DAY_S // 2 - mean) % DAY_S
    rotated = sorted((s + delta) % DAY_S for s in samples)
    n = len(rotated)
    out = []
    for q in qs:
        rank = max(1, math.ceil(q * n))
        out.append((rotated[rank - 1] - delta) % DAY_S)
    return out
