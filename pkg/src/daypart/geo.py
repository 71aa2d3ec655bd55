"""Country resolution from free-text user locations, plus per-country
UTC-offset validation and official-language metadata.

Location strings are user-supplied and often fake or vague; resolution is a
gazetteer lookup with population-maximal disambiguation, backstopped by
checking the message's UTC offset against the resolved country's legal
offset set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .lexicon import normalize_text
from .temporal import MAX_OFFSET_S, MIN_OFFSET_S

log = logging.getLogger(__name__)


class GazetteerError(ValueError):
    """Unusable gazetteer file."""


class RegistryError(ValueError):
    """Malformed country registry file."""


@dataclass(frozen=True)
class CountryProfile:
    iso2: str
    # Union of the standard and DST offsets legal in the country during the
    # collection season; membership is a static sanity check, not a DST model.
    valid_offsets_s: frozenset[int]
    official_langs: frozenset[str]


@dataclass
class Gazetteer:
    """Normalized place name -> country candidates sorted by population desc."""

    names: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    skipped_rows: int = 0

    def __len__(self) -> int:
        return len(self.names)


def _finalize(candidates: dict[str, dict[str, int]], skipped: int) -> Gazetteer:
    names: dict[str, list[tuple[str, int]]] = {}
    for name, by_country in candidates.items():
        ranked = sorted(by_country.items(), key=lambda kv: (-kv[1], kv[0]))
        names[name] = ranked
    return Gazetteer(names=names, skipped_rows=skipped)


def load_gazetteer(path, fmt: str = "simple") -> Gazetteer:
    """Load a gazetteer.

    fmt='simple':    name<TAB>iso2<TAB>population
    fmt='geonames':  geonames dump rows; name, asciiname and every
                     alternatename become lookup keys.

    Rows with too few columns or an empty country code are skipped (counted,
    not fatal). A country appearing under the same name multiple times keeps
    its highest population.
    """
    if fmt not in ("simple", "geonames"):
        raise GazetteerError(f"unknown gazetteer format {fmt!r}")
    candidates: dict[str, dict[str, int]] = {}
    skipped = 0

    def put(name_raw: str, iso2: str, population: int) -> None:
        name = normalize_text(name_raw)
        if not name:
            return
        by_country = candidates.setdefault(name, {})
        if population > by_country.get(iso2, -1):
            by_country[iso2] = population

    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if fmt == "simple":
                if len(cols) < 3:
                    skipped += 1
                    continue
                name, iso2, pop_raw = cols[0], cols[1].strip().upper(), cols[2]
                if not iso2:
                    skipped += 1
                    continue
                try:
                    pop = int(pop_raw)
                except ValueError:
                    skipped += 1
                    continue
                put(name, iso2, pop)
            else:
                # geonames dump, 0-indexed: 1=name, 2=asciiname,
                # 3=alternatenames (comma-separated), 8=country code,
                # 14=population.
                if len(cols) < 15:
                    skipped += 1
                    continue
                iso2 = cols[8].strip().upper()
                if not iso2:
                    skipped += 1
                    continue
                try:
                    pop = int(cols[14]) if cols[14].strip() else 0
                except ValueError:
                    skipped += 1
                    continue
                put(cols[1], iso2, pop)
                put(cols[2], iso2, pop)
                for alt in cols[3].split(","):
                    if alt.strip():
                        put(alt, iso2, pop)
    gaz = _finalize(candidates, skipped)
    log.info("loaded %d gazetteer names from %s (%d rows skipped)",
             len(gaz), path, skipped)
    return gaz


def resolve_location(gazetteer: Gazetteer, location: str | None) -> str | None:
    """Map a free-text location to an ISO2 country code, or None.

    The string is split on commas and segments are tried right to left
    (users usually put the broadest unit last); the first segment found in
    the gazetteer wins with its highest-population candidate.
    """
    if not location:
        return None
    for segment in reversed(location.split(",")):
        key = normalize_text(segment)
        if not key:
            continue
        ranked = gazetteer.names.get(key)
        if ranked:
            return ranked[0][0]
    return None


def load_timezone_table(path) -> dict[str, CountryProfile]:
    """Load the country registry: iso2<TAB>offset_seconds<TAB>official_langs.

    One row per (country, offset); the language list must be repeated
    identically on every row of the same country. Profiles carry the union
    of all listed offsets.
    """
    offsets: dict[str, set[int]] = {}
    langs: dict[str, frozenset[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise RegistryError(f"{path}:{lineno}: expected 3 columns, got {len(cols)}")
            iso2 = cols[0].strip().upper()
            if len(iso2) != 2:
                raise RegistryError(f"{path}:{lineno}: bad country code {cols[0]!r}")
            try:
                offset = int(cols[1])
            except ValueError:
                raise RegistryError(f"{path}:{lineno}: bad offset {cols[1]!r}") from None
            if not MIN_OFFSET_S <= offset <= MAX_OFFSET_S or offset % 900 != 0:
                raise RegistryError(f"{path}:{lineno}: illegal offset {offset}")
            lang_set = frozenset(
                t.strip().casefold() for t in cols[2].split(",") if t.strip()
            )
            if not lang_set:
                raise RegistryError(f"{path}:{lineno}: no official languages for {iso2}")
            if iso2 in langs and langs[iso2] != lang_set:
                raise RegistryError(
                    f"{path}:{lineno}: language list for {iso2} differs between rows"
                )
            langs[iso2] = lang_set
            offsets.setdefault(iso2, set()).add(offset)
    profiles = {}
    for iso2, offs in offsets.items():
        if not offs:
            raise RegistryError(f"{path}: country {iso2} listed with zero offsets")
        profiles[iso2] = CountryProfile(
            iso2=iso2,
            valid_offsets_s=frozenset(offs),
            official_langs=langs[iso2],
        )
    log.info("loaded %d country profiles from %s", len(profiles), path)
    return profiles


def validate_offset(profile: CountryProfile, offset_s: int) -> bool:
    """True iff the offset is legal somewhere in the profile's country."""
    return offset_s in profile.valid_offsets_s


def default_gazetteer_path() -> Path:
    from importlib.resources import files

    return Path(str(files("daypart").joinpath("data/gazetteer.tsv")))


def default_registry_path() -> Path:
    from importlib.resources import files

    return Path(str(files("daypart").joinpath("data/countries.tsv")))
