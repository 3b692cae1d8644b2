"""Sentence splitting, normalization, and stopword handling.

Normalization is deliberately aggressive: lowercase everything, delete (not
space out) every character in the strip set, then split on whitespace.
Deleting apostrophes collapses contractions ("we're" -> "were"), which keeps
the token space small and matches how the mined n-grams are meant to read.
Numerals are ordinary tokens.
"""

from __future__ import annotations

import functools
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, List

# Deleted outright during normalization: every Unicode punctuation category
# plus these ASCII symbols. Kept deliberately small beyond that so numerals
# and unusual-but-real tokens survive.
_STRIP_SYMBOLS = set("~@#$%^&*()_+=|\\/<>")

# Sentence boundary: terminal punctuation followed by whitespace. Newlines
# are unconditional boundaries (one-sentence-per-line corpora).
_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+")

_WS_RE = re.compile(r"\s+")

STOPWORD_LIST_VERSION = "en-150-v1"


@functools.lru_cache(maxsize=None)
def _stripped(ch: str) -> bool:
    return ch in _STRIP_SYMBOLS or unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class Sentence:
    """A normalized sentence: token tuple plus the raw text it came from."""

    tokens: tuple[str, ...]
    raw: str

    def __len__(self) -> int:
        return len(self.tokens)


def split_sentences(text: str) -> List[str]:
    """Split running text into sentence strings.

    Splits at sentence-final punctuation (. ! ?) followed by whitespace and at
    newlines. Text with no terminal punctuation comes back as one segment.
    Empty input yields an empty list.
    """
    out: List[str] = []
    for line in text.splitlines():
        for seg in _BOUNDARY_RE.split(line):
            seg = seg.strip()
            if seg:
                out.append(seg)
    return out


def normalize(raw: str) -> Sentence:
    """Lowercase, delete strip-set characters, split on whitespace."""
    cleaned = "".join(ch for ch in raw.lower() if not _stripped(ch))
    return Sentence(tokens=tuple(_WS_RE.split(cleaned.strip())) if cleaned.strip() else (), raw=raw)


@dataclass(frozen=True)
class StopwordSet:
    """A pinned stopword list; `source` identifies where it came from."""

    words: frozenset[str]
    source: str

    def __contains__(self, word: str) -> bool:
        return word in self.words

    @classmethod
    def from_file(cls, path: str) -> "StopwordSet":
        words = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                word = line.strip()
                if word and not word.startswith("#"):
                    words.add(word)
        return cls(words=frozenset(words), source=str(path))


@functools.lru_cache(maxsize=1)
def default_stopwords() -> StopwordSet:
    data = resources.files("stylemirror.data").joinpath("stopwords_en.txt").read_text("utf-8")
    words = frozenset(w for w in (line.strip() for line in data.splitlines())
                      if w and not w.startswith("#"))
    return StopwordSet(words=words, source=STOPWORD_LIST_VERSION)


def is_stopword_only(ngram: Iterable[str], stops: StopwordSet) -> bool:
    """True if every token of the n-gram is a stopword."""
    return all(tok in stops for tok in ngram)


def read_corpus_file(path: str, *, lines: bool) -> List[Sentence]:
    """Read a UTF-8 corpus file into normalized sentences.

    lines=True treats each line as one sentence; otherwise the file is prose
    and goes through split_sentences. Sentences that normalize to zero tokens
    are dropped.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    raws = [ln.strip() for ln in text.splitlines() if ln.strip()] if lines else split_sentences(text)
    sentences = [normalize(r) for r in raws]
    return [s for s in sentences if s.tokens]
