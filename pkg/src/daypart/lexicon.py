"""Multilingual greeting lexicon: loading, text normalization, and matching.

Matching is containment at word boundaries on normalized text, scoped to the
message's language. Texts that hit surfaces of two different greeting classes
are deliberately not matched (the caller records them separately).
"""

from __future__ import annotations

import enum
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)


class GreetingClass(enum.Enum):
    MORNING = "morning"
    AFTERNOON = "afternoon"
    EVENING = "evening"
    NIGHT = "night"
    HELLO = "hello"


_CLASS_BY_TOKEN = {c.value: c for c in GreetingClass}
_KNOWN_FLAGS = {"ambiguous", "merged"}


class LexiconError(ValueError):
    """Malformed lexicon file or inconsistent entries."""


@dataclass(frozen=True)
class LexiconEntry:
    lang: str
    cls: GreetingClass
    surface: str
    # True when the form is conventionally used outside its nominal class
    # (e.g. French "bonjour" doubles as a plain hello).
    ambiguous: bool = False
    # True when the language collapses evening and night into one form.
    merged_evening_night: bool = False


@dataclass
class Lexicon:
    """Entries indexed by language, longest surface first within each language."""

    _by_lang: dict[str, list[LexiconEntry]] = field(default_factory=dict)
    _size: int = 0

    def add(self, entry: LexiconEntry) -> None:
        bucket = self._by_lang.setdefault(entry.lang, [])
        if any(e.surface == entry.surface for e in bucket):
            raise LexiconError(
                f"duplicate surface {entry.surface!r} for language {entry.lang!r}"
            )
        bucket.append(entry)
        bucket.sort(key=lambda e: (-len(e.surface), e.surface))
        self._size += 1

    def entries_for(self, lang: str | None) -> list[LexiconEntry]:
        if lang is None:
            return []
        return self._by_lang.get(lang, [])

    def entry(self, lang: str, cls: GreetingClass) -> LexiconEntry | None:
        """First (longest-surface) entry of a class, or None."""
        for e in self.entries_for(lang):
            if e.cls is cls:
                return e
        return None

    @property
    def languages(self) -> list[str]:
        return sorted(self._by_lang)

    def __len__(self) -> int:
        return self._size


def normalize_text(text: str) -> str:
    """Canonical-compose, case-fold, collapse runs of whitespace, strip.

    The trailing NFC pass keeps the function idempotent: case folding can
    emit decomposed sequences that NFC would otherwise re-compose on a
    second application.
    """
    folded = unicodedata.normalize("NFC", text).casefold()
    folded = unicodedata.normalize("NFC", folded)
    return " ".join(folded.split())


def load_lexicon(path) -> Lexicon:
    """Load a TSV lexicon: lang<TAB>class<TAB>surface<TAB>flags.

    flags is '-' or a comma-separated subset of {ambiguous, merged}. Blank
    lines and lines starting with '#' are skipped.
    """
    lexicon = Lexicon()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise LexiconError(f"{path}:{lineno}: expected 4 columns, got {len(cols)}")
            lang_raw, cls_token, surface_raw, flags_raw = cols
            lang = lang_raw.strip().casefold()
            if not lang:
                raise LexiconError(f"{path}:{lineno}: empty language code")
            cls = _CLASS_BY_TOKEN.get(cls_token.strip())
            if cls is None:
                raise LexiconError(f"{path}:{lineno}: unknown class {cls_token!r}")
            surface = normalize_text(surface_raw)
            if not surface:
                raise LexiconError(f"{path}:{lineno}: empty surface")
            flags = set()
            if flags_raw.strip() != "-":
                flags = {f.strip() for f in flags_raw.split(",")}
                unknown = flags - _KNOWN_FLAGS
                if unknown:
                    raise LexiconError(f"{path}:{lineno}: unknown flags {sorted(unknown)}")
            entry = LexiconEntry(
                lang=lang,
                cls=cls,
                surface=surface,
                ambiguous="ambiguous" in flags,
                merged_evening_night="merged" in flags,
            )
            try:
                lexicon.add(entry)
            except LexiconError as exc:
                raise LexiconError(f"{path}:{lineno}: {exc}") from None
    log.info("loaded %d lexicon entries for %d languages from %s",
             len(lexicon), len(lexicon.languages), path)
    return lexicon


def _is_letter(ch: str) -> bool:
    return unicodedata.category(ch).startswith("L")


def _occurs_at_word_boundary(text: str, surface: str) -> bool:
    # Boundary = string edge or a non-letter character on both sides.
    start = text.find(surface)
    width = len(surface)
    n = len(text)
    while start != -1:
        end = start + width
        if (start == 0 or not _is_letter(text[start - 1])) and (
            end == n or not _is_letter(text[end])
        ):
            return True
        start = text.find(surface, start + 1)
    return False


def find_matches(lexicon: Lexicon, text: str, lang: str | None) -> list[LexiconEntry]:
    """All entries for lang whose surface occurs in the normalized text at
    word boundaries, longest surface first."""
    entries = lexicon.entries_for(lang)
    if not entries:
        return []
    norm = normalize_text(text)
    if not norm:
        return []
    return [e for e in entries if _occurs_at_word_boundary(norm, e.surface)]


def match_greeting(
    lexicon: Lexicon, text: str, lang: str | None
) -> tuple[GreetingClass, LexiconEntry] | None:
    """Single-class greeting match, or None.

    Returns the first (longest-surface) matching entry. Texts matching
    surfaces of more than one distinct class return None: counting one
    message toward two parts of day would double-ground it.
    """
    matches = find_matches(lexicon, text, lang)
    if not matches:
        return None
    if len({e.cls for e in matches}) > 1:
        return None
    return matches[0].cls, matches[0]


def default_lexicon_path() -> Path:
    from importlib.resources import files

    return Path(str(files("daypart").joinpath("data/lexicon.tsv")))
