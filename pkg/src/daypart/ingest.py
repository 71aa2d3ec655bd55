"""Record parsing, filtering, and grounding into greeting events.

Input is UTF-8 line-delimited JSON, one record per line. Record-level
problems are never fatal: every dropped record is counted under exactly one
reason, and records_in == events_out + sum(drops) holds for every run.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Iterable, Iterator, NamedTuple

from .geo import CountryProfile, Gazetteer, resolve_location
from .lexicon import GreetingClass, Lexicon, find_matches, normalize_text
from .temporal import local_time

log = logging.getLogger(__name__)


class RecordError(ValueError):
    """Line is not a well-formed input record."""


class DropReason(enum.Enum):
    RETWEET = "retweet"
    NO_OFFSET = "no_offset"
    NO_LOCATION = "no_location"
    UNRESOLVED_LOCATION = "unresolved_location"
    OFFSET_MISMATCH = "offset_mismatch"
    NO_GREETING_MATCH = "no_greeting_match"
    MULTI_CLASS = "multi_class"
    BAD_RECORD = "bad_record"


class RawMessage(NamedTuple):
    created_at_utc: int  # epoch seconds
    utc_offset_s: int | None
    user_location: str | None
    text: str
    lang: str | None
    is_retweet: bool


class GroundedEvent(NamedTuple):
    country: str
    lang: str
    cls: GreetingClass
    local_date: date
    local_tod_s: int
    official_lang: bool


def _parse_created_at(value: str) -> int:
    # RFC-3339; fromisoformat on 3.10 does not accept a literal 'Z'.
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def parse_record(line: str, byte_offset: int | None = None) -> RawMessage:
    """Parse one JSON record line; raises RecordError on malformed input.

    A record is a retweet when the explicit 'retweeted' flag is set or the
    normalized text starts with 'rt @' (raw-text corpora lack the flag).
    """
    where = f" at byte {byte_offset}" if byte_offset is not None else ""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid JSON{where}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise RecordError(f"record is not an object{where}")

    created_raw = obj.get("created_at")
    if not isinstance(created_raw, str):
        raise RecordError(f"missing or non-string created_at{where}")
    try:
        created = _parse_created_at(created_raw)
    except ValueError:
        raise RecordError(f"unparseable created_at {created_raw!r}{where}") from None

    offset = obj.get("utc_offset")
    if offset is not None and (isinstance(offset, bool) or not isinstance(offset, int)):
        raise RecordError(f"utc_offset must be integer seconds or null{where}")

    location = obj.get("location")
    if location is not None and not isinstance(location, str):
        raise RecordError(f"location must be a string or null{where}")

    text = obj.get("text")
    if not isinstance(text, str):
        raise RecordError(f"missing or non-string text{where}")

    lang = obj.get("lang")
    if lang is not None and not isinstance(lang, str):
        raise RecordError(f"lang must be a string or null{where}")

    retweeted = obj.get("retweeted", False)
    if not isinstance(retweeted, bool):
        raise RecordError(f"retweeted must be a boolean{where}")

    is_retweet = retweeted or normalize_text(text).startswith("rt @")
    return RawMessage(
        created_at_utc=created,
        utc_offset_s=offset,
        user_location=location,
        text=text,
        lang=lang.casefold() if lang else None,
        is_retweet=is_retweet,
    )


def filter_record(message: RawMessage) -> DropReason | None:
    """None to keep, else the single drop reason.

    Retweets echo an original for hours and would smear the temporal signal;
    duplicates are deliberately KEPT (identical greetings from many users and
    days are the signal, not noise).
    """
    if message.is_retweet:
        return DropReason.RETWEET
    if message.utc_offset_s is None:
        return DropReason.NO_OFFSET
    if message.user_location is None or not message.user_location.strip():
        return DropReason.NO_LOCATION
    return None


def ground_message(
    message: RawMessage,
    lexicon: Lexicon,
    gazetteer: Gazetteer,
    registry: dict[str, CountryProfile],
) -> GroundedEvent | DropReason:
    """Resolve, sanity-check, and match one filtered message.

    Events in languages that are not official in the resolved country are
    emitted with official_lang=False rather than dropped; reports filter on
    the flag.
    """
    country = resolve_location(gazetteer, message.user_location)
    if country is None:
        return DropReason.UNRESOLVED_LOCATION
    profile = registry.get(country)
    if profile is None:
        # Resolvable name but no offset/language profile: cannot validate.
        return DropReason.UNRESOLVED_LOCATION
    if message.utc_offset_s not in profile.valid_offsets_s:
        return DropReason.OFFSET_MISMATCH
    matches = find_matches(lexicon, message.text, message.lang)
    if not matches:
        return DropReason.NO_GREETING_MATCH
    if len({e.cls for e in matches}) > 1:
        return DropReason.MULTI_CLASS
    local_date, tod_s = local_time(message.created_at_utc, message.utc_offset_s)
    return GroundedEvent(
        country=country,
        lang=message.lang,
        cls=matches[0].cls,
        local_date=local_date,
        local_tod_s=tod_s,
        official_lang=message.lang in profile.official_langs,
    )


@dataclass
class StreamCounters:
    """Per-run bookkeeping; merges across shards by addition."""

    records_in: int = 0
    events_out: int = 0
    drops: Counter = field(default_factory=Counter)

    def drop(self, reason: DropReason) -> None:
        self.drops[reason] += 1

    def merge(self, other: "StreamCounters") -> None:
        self.records_in += other.records_in
        self.events_out += other.events_out
        self.drops.update(other.drops)

    @property
    def dropped(self) -> int:
        return sum(self.drops.values())

    def conservation_holds(self) -> bool:
        return self.records_in == self.events_out + self.dropped

    def as_dict(self) -> dict:
        return {
            "records_in": self.records_in,
            "events_out": self.events_out,
            "drops": {r.value: self.drops.get(r, 0) for r in DropReason},
        }


def ground_stream(
    lines: Iterable[str | tuple[int, str]],
    lexicon: Lexicon,
    gazetteer: Gazetteer,
    registry: dict[str, CountryProfile],
    counters: StreamCounters,
) -> Iterator[GroundedEvent]:
    """Drive parse -> filter -> ground over a line stream, yielding events.

    Accepts bare lines or (byte_offset, line) pairs. Deterministic given its
    inputs: re-running a corpus yields an identical event stream.
    """
    for item in lines:
        offset, line = item if isinstance(item, tuple) else (None, item)
        if line is None:  # undecodable bytes upstream
            counters.records_in += 1
            counters.drop(DropReason.BAD_RECORD)
            continue
        if not line.strip():
            continue
        counters.records_in += 1
        try:
            message = parse_record(line, byte_offset=offset)
        except RecordError as exc:
            log.warning("bad record: %s", exc)
            counters.drop(DropReason.BAD_RECORD)
            continue
        reason = filter_record(message)
        if reason is not None:
            counters.drop(reason)
            continue
        outcome = ground_message(message, lexicon, gazetteer, registry)
        if isinstance(outcome, DropReason):
            counters.drop(outcome)
            continue
        counters.events_out += 1
        yield outcome


def iter_file_lines(path) -> Iterator[tuple[int, str | None]]:
    """Yield (byte_offset, decoded line) pairs; None for undecodable lines."""
    offset = 0
    with open(path, "rb") as fh:
        for raw in fh:
            try:
                yield offset, raw.decode("utf-8")
            except UnicodeDecodeError:
                yield offset, None
            offset += len(raw)


EVENTS_CSV_HEADER = ["country", "lang", "class", "local_date", "local_tod_s", "official"]


def write_events_csv(events: Iterable[GroundedEvent], fh) -> int:
    """Write events in the grounded-events CSV schema; returns row count."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(EVENTS_CSV_HEADER)
    n = 0
    for ev in events:
        writer.writerow(
            [
                ev.country,
                ev.lang,
                ev.cls.value,
                ev.local_date.isoformat(),
                ev.local_tod_s,
                "true" if ev.official_lang else "false",
            ]
        )
        n += 1
    return n


def read_events_csv(path) -> list[GroundedEvent]:
    events = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVENTS_CSV_HEADER:
            raise RecordError(f"{path}: not a grounded-events CSV (header {header})")
        for row in reader:
            country, lang, cls_token, date_iso, tod_raw, official = row
            events.append(
                GroundedEvent(
                    country=country,
                    lang=lang,
                    cls=GreetingClass(cls_token),
                    local_date=date.fromisoformat(date_iso),
                    local_tod_s=int(tod_raw),
                    official_lang=official == "true",
                )
            )
    return events
