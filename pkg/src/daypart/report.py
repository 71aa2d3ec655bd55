"""Analytical outputs: per-country average-time tables, daily time series,
stacked-area class shares, and box-plot summaries, emitted as CSV (and SVG
via the svg module).

Emission is deterministic: fixed row ordering and fixed float formatting, so
identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

from .geo import CountryProfile
from .ingest import GroundedEvent
from .lexicon import GreetingClass
from .temporal import (
    DAY_S,
    CircularAccumulator,
    UndefinedMeanError,
    format_tod,
    rotated_quantiles,
)

log = logging.getLogger(__name__)

CLASS_ORDER = list(GreetingClass)
_CLASS_INDEX = {c: i for i, c in enumerate(CLASS_ORDER)}


def _fmt6(x: float) -> str:
    return f"{x:.6g}"


@dataclass(frozen=True)
class CountryTableRow:
    country: str
    lang: str
    cls: GreetingClass
    mean_tod_s: int
    count: int
    resultant: float


def country_table(
    events: Iterable[GroundedEvent],
    registry: dict[str, CountryProfile] | None = None,
    min_count: int = 500,
    include_foreign: bool = False,
) -> list[CountryTableRow]:
    """One row per (country, lang, class) with at least min_count events.

    Rows are ordered the way the headline table reads: (country, lang)
    groups ascend by their morning mean, classes in canonical order within
    a group. Only official-language events count unless include_foreign.
    """
    accs: dict[tuple[str, str, GreetingClass], CircularAccumulator] = {}
    for ev in events:
        if not include_foreign and not ev.official_lang:
            continue
        if registry is not None and ev.country not in registry:
            continue
        key = (ev.country, ev.lang, ev.cls)
        acc = accs.get(key)
        if acc is None:
            acc = accs[key] = CircularAccumulator()
        acc.add(ev.local_tod_s)

    rows = []
    for (country, lang, cls), acc in accs.items():
        if acc.count < min_count:
            continue
        try:
            mean = acc.mean_tod()
        except UndefinedMeanError:
            log.warning(
                "suppressing %s/%s/%s: antipodal mass, mean undefined",
                country, lang, cls.value,
            )
            continue
        rows.append(
            CountryTableRow(
                country=country,
                lang=lang,
                cls=cls,
                mean_tod_s=mean,
                count=acc.count,
                resultant=acc.resultant_length(),
            )
        )

    morning_mean: dict[tuple[str, str], int] = {
        (r.country, r.lang): r.mean_tod_s
        for r in rows
        if r.cls is GreetingClass.MORNING
    }
    rows.sort(
        key=lambda r: (
            morning_mean.get((r.country, r.lang), DAY_S),
            r.country,
            r.lang,
            _CLASS_INDEX[r.cls],
        )
    )
    return rows


@dataclass(frozen=True)
class DailyPoint:
    local_date: date
    mean_tod_s: int
    count: int
    is_weekend: bool


def daily_series(
    events: Iterable[GroundedEvent],
    country: str,
    cls: GreetingClass,
    lang: str | None = None,
    official_only: bool = True,
) -> list[DailyPoint]:
    """Circular mean per local calendar date for one country and class.

    Dates with no events are omitted. Pass lang to pin a single language
    (with official_only=False this covers foreign-language series, e.g. a
    minority language inside a country).
    """
    accs: dict[date, CircularAccumulator] = {}
    for ev in events:
        if ev.country != country or ev.cls is not cls:
            continue
        if lang is not None and ev.lang != lang:
            continue
        if official_only and not ev.official_lang:
            continue
        acc = accs.get(ev.local_date)
        if acc is None:
            acc = accs[ev.local_date] = CircularAccumulator()
        acc.add(ev.local_tod_s)

    points = []
    for day in sorted(accs):
        acc = accs[day]
        try:
            mean = acc.mean_tod()
        except UndefinedMeanError:
            log.warning("skipping %s: antipodal mass, mean undefined", day)
            continue
        points.append(
            DailyPoint(
                local_date=day,
                mean_tod_s=mean,
                count=acc.count,
                is_weekend=day.weekday() >= 5,
            )
        )
    return points


@dataclass(frozen=True)
class AreaBin:
    bin_index: int
    shares_pct: tuple[float, float, float, float, float]  # CLASS_ORDER
    total: int


def area_series(
    events: Iterable[GroundedEvent],
    country: str,
    width_s: int = 600,
    official_only: bool = True,
) -> list[AreaBin]:
    """Percentage share of each greeting class per local-time bin.

    Shares sum to 100 in every non-empty bin; empty bins carry all zeros.
    """
    if width_s <= 0 or DAY_S % width_s != 0:
        raise ValueError(f"bin width {width_s}s does not divide {DAY_S}")
    n_bins = DAY_S // width_s
    counts = [[0] * len(CLASS_ORDER) for _ in range(n_bins)]
    for ev in events:
        if ev.country != country:
            continue
        if official_only and not ev.official_lang:
            continue
        counts[ev.local_tod_s // width_s][_CLASS_INDEX[ev.cls]] += 1

    out = []
    for i in range(n_bins):
        total = sum(counts[i])
        if total == 0:
            shares = (0.0,) * len(CLASS_ORDER)
        else:
            shares = tuple(100.0 * c / total for c in counts[i])
        out.append(AreaBin(bin_index=i, shares_pct=shares, total=total))
    return out


@dataclass(frozen=True)
class BoxplotRow:
    group: tuple[str, ...]
    min_s: int
    q1_s: int
    median_s: int
    q3_s: int
    max_s: int
    count: int


def boxplot_summary(
    events: Iterable[GroundedEvent],
    keys: Sequence[str] = ("country", "lang", "class"),
    country: str | None = None,
    official_only: bool = True,
) -> list[BoxplotRow]:
    """Five-number summary (after circular centering) per group.

    keys picks the grouping fields from {country, lang, class}. Groups whose
    circular mean is undefined are skipped with a warning.
    """
    valid = {"country", "lang", "class"}
    if not keys or any(k not in valid for k in keys):
        raise ValueError(f"group keys must be a non-empty subset of {sorted(valid)}")

    def group_of(ev: GroundedEvent) -> tuple[str, ...]:
        parts = []
        for k in keys:
            if k == "country":
                parts.append(ev.country)
            elif k == "lang":
                parts.append(ev.lang)
            else:
                parts.append(ev.cls.value)
        return tuple(parts)

    samples: dict[tuple[str, ...], list[int]] = {}
    for ev in events:
        if country is not None and ev.country != country:
            continue
        if official_only and not ev.official_lang:
            continue
        samples.setdefault(group_of(ev), []).append(ev.local_tod_s)

    rows = []
    for group in sorted(samples):
        tods = samples[group]
        try:
            q = rotated_quantiles(tods, [0.0, 0.25, 0.5, 0.75, 1.0])
        except UndefinedMeanError:
            log.warning("skipping group %s: antipodal mass, quantiles undefined", group)
            continue
        rows.append(
            BoxplotRow(
                group=group,
                min_s=q[0],
                q1_s=q[1],
                median_s=q[2],
                q3_s=q[3],
                max_s=q[4],
                count=len(tods),
            )
        )
    return rows


def load_holidays(path) -> dict[tuple[str, date], str]:
    """Holiday TSV: iso2<TAB>YYYY-MM-DD<TAB>label."""
    out: dict[tuple[str, date], str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            iso2, date_iso, label = cols
            out[(iso2.strip().upper(), date.fromisoformat(date_iso.strip()))] = label.strip()
    return out


# ---------------------------------------------------------------------------
# CSV emission (deterministic byte output)
# ---------------------------------------------------------------------------

COUNTRY_TABLE_HEADER = ["country", "lang", "class", "mean_tod", "count", "resultant"]
DAILY_HEADER = ["date", "mean_tod", "count", "is_weekend"]
AREA_HEADER = [
    "bin_start",
    "morning_pct",
    "afternoon_pct",
    "evening_pct",
    "night_pct",
    "hello_pct",
    "total",
]
BOXPLOT_HEADER_SUFFIX = ["min", "q1", "median", "q3", "max", "count"]


def write_country_table_csv(rows: list[CountryTableRow], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COUNTRY_TABLE_HEADER)
    for r in rows:
        writer.writerow(
            [
                r.country,
                r.lang,
                r.cls.value,
                format_tod(r.mean_tod_s),
                r.count,
                _fmt6(r.resultant),
            ]
        )


def write_daily_csv(points: list[DailyPoint], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(DAILY_HEADER)
    for p in points:
        writer.writerow(
            [
                p.local_date.isoformat(),
                format_tod(p.mean_tod_s),
                p.count,
                "true" if p.is_weekend else "false",
            ]
        )


def write_area_csv(bins: list[AreaBin], width_s: int, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(AREA_HEADER)
    for b in bins:
        writer.writerow(
            [format_tod(b.bin_index * width_s)]
            + [_fmt6(s) for s in b.shares_pct]
            + [b.total]
        )


def write_boxplot_csv(rows: list[BoxplotRow], keys: Sequence[str], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(list(keys) + BOXPLOT_HEADER_SUFFIX)
    for r in rows:
        writer.writerow(
            list(r.group)
            + [
                format_tod(r.min_s),
                format_tod(r.q1_s),
                format_tod(r.median_s),
                format_tod(r.q3_s),
                format_tod(r.max_s),
                r.count,
            ]
        )
