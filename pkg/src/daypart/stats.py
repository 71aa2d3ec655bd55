"""Exact binomial testing over time-of-day bins and boundary detection.

Grounds where one part of day ends and the next begins: counts of two
greeting classes are binned by local time, each bin gets an exact two-sided
binomial test against equal occurrence probability, and the boundary is read
off the verdict sequence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.special import gammaln

from .ingest import GroundedEvent
from .lexicon import GreetingClass
from .temporal import DAY_S, format_tod

_LOG2 = math.log(2.0)


class EmptyBinError(ValueError):
    """No observations: the test is undefined."""


def binomial_two_sided(k: int, n: int) -> float:
    """Exact two-sided p-value for k successes in n trials at p0 = 1/2.

    Minimum-likelihood tail definition: the total probability of all
    outcomes no more likely than k. At p0 = 1/2 the distribution is
    symmetric and unimodal, so this is min(1, 2 * P(X <= min(k, n-k))),
    with the clamp absorbing the double-counted center point when k = n/2.
    Log-gamma arithmetic keeps terms finite up to n >= 1e6.
    """
    if n < 1:
        raise EmptyBinError("n must be >= 1")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside [0, {n}]")
    m = min(k, n - k)
    i = np.arange(0, m + 1, dtype=np.float64)
    log_terms = gammaln(n + 1.0) - gammaln(i + 1.0) - gammaln(n - i + 1.0) - n * _LOG2
    # Terms ascend toward the mode; summing in this order is accurate.
    p = 2.0 * float(np.sum(np.exp(log_terms)))
    return min(1.0, p)


class BinCounts(NamedTuple):
    bin_index: int
    count_a: int
    count_b: int


def bin_events(
    events: Iterable[GroundedEvent],
    class_a: GreetingClass,
    class_b: GreetingClass,
    width_s: int = 600,
) -> list[BinCounts]:
    """Count the two classes per half-open local-time bin [i*w, (i+1)*w).

    Every bin of the day is present in the result, including empty ones.
    """
    if width_s <= 0 or DAY_S % width_s != 0:
        raise ValueError(f"bin width {width_s}s does not divide {DAY_S}")
    if class_a is class_b:
        raise ValueError("class_a and class_b must differ")
    n_bins = DAY_S // width_s
    counts_a = [0] * n_bins
    counts_b = [0] * n_bins
    for ev in events:
        if ev.cls is class_a:
            counts_a[ev.local_tod_s // width_s] += 1
        elif ev.cls is class_b:
            counts_b[ev.local_tod_s // width_s] += 1
    return [BinCounts(i, counts_a[i], counts_b[i]) for i in range(n_bins)]


class Verdict:
    A = "A"
    B = "B"
    NOT_SIGNIFICANT = "not_significant"
    EMPTY = "empty"


class BinVerdict(NamedTuple):
    bin_index: int
    n: int
    k_a: int
    p_value: float | None
    verdict: str


@dataclass
class BoundaryResult:
    width_s: int
    alpha: float
    per_bin: list[BinVerdict]
    # End time of the last A-dominant bin before the first B-dominant bin,
    # and start time of that first B-dominant bin; None when no boundary.
    a_end_s: int | None
    b_start_s: int | None

    @property
    def found(self) -> bool:
        return self.a_end_s is not None and self.b_start_s is not None


def detect_boundary(
    bins: list[BinCounts], alpha: float = 0.05, bonferroni: bool = False
) -> BoundaryResult:
    """Per-bin dominance verdicts and the A-to-B switch-over times.

    A bin is A-dominant when p < alpha and class A holds the majority
    (symmetrically for B). The boundary is anchored on the first B-dominant
    bin: a_end is the end of the last A-dominant bin before it, b_start the
    start of the B-dominant bin itself. Either side missing means no
    boundary (a_end_s and b_start_s are None).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1]: {alpha}")
    if not bins:
        raise ValueError("no bins")
    width_s = DAY_S // len(bins)
    effective_alpha = alpha
    if bonferroni:
        tested = sum(1 for b in bins if b.count_a + b.count_b > 0)
        effective_alpha = alpha / max(1, tested)

    per_bin: list[BinVerdict] = []
    for b in bins:
        n = b.count_a + b.count_b
        if n == 0:
            per_bin.append(BinVerdict(b.bin_index, 0, 0, None, Verdict.EMPTY))
            continue
        p = binomial_two_sided(b.count_a, n)
        if p < effective_alpha and 2 * b.count_a > n:
            verdict = Verdict.A
        elif p < effective_alpha and 2 * b.count_a < n:
            verdict = Verdict.B
        else:
            verdict = Verdict.NOT_SIGNIFICANT
        per_bin.append(BinVerdict(b.bin_index, n, b.count_a, p, verdict))

    first_b = next((v.bin_index for v in per_bin if v.verdict == Verdict.B), None)
    a_end = b_start = None
    if first_b is not None:
        last_a = next(
            (
                v.bin_index
                for v in reversed(per_bin[:first_b])
                if v.verdict == Verdict.A
            ),
            None,
        )
        if last_a is not None:
            a_end = (last_a + 1) * width_s
            b_start = first_b * width_s
    return BoundaryResult(
        width_s=width_s, alpha=alpha, per_bin=per_bin, a_end_s=a_end, b_start_s=b_start
    )


def boundary_report(
    events: Iterable[GroundedEvent],
    class_a: GreetingClass,
    class_b: GreetingClass,
    width_s: int = 600,
    alpha: float = 0.05,
    bonferroni: bool = False,
) -> BoundaryResult:
    """bin_events + detect_boundary over an event stream."""
    bins = bin_events(events, class_a, class_b, width_s)
    return detect_boundary(bins, alpha=alpha, bonferroni=bonferroni)


BOUNDARY_CSV_HEADER = ["bin_start_hhmmss", "count_a", "count_b", "p_value", "verdict"]


def write_boundary_csv(result: BoundaryResult, fh) -> None:
    """Per-bin rows plus a trailer row carrying a_end and b_start (empty
    fields when no boundary was found)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BOUNDARY_CSV_HEADER)
    for v in result.per_bin:
        p_text = "" if v.p_value is None else f"{v.p_value:.6g}"
        writer.writerow(
            [
                format_tod(v.bin_index * result.width_s),
                v.k_a,
                v.n - v.k_a,
                p_text,
                v.verdict,
            ]
        )
    writer.writerow(
        [
            "boundary",
            format_tod(result.a_end_s) if result.a_end_s is not None else "",
            format_tod(result.b_start_s) if result.b_start_s is not None else "",
            "",
            "",
        ]
    )
