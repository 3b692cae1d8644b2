"""Wildcard patterns mined out of sentences.

decompose() matches a sentence against the style n-grams greedily: longest
n-gram first, then leftmost occurrence, then lexicographic n-gram order, with
no overlaps. Matched spans become fixed segments (adjacent matches merge),
unmatched runs become wildcards, and the wildcard contents concatenate into
the sentence's context. Interleaving the context back into the wildcard slots
reproduces the original token sequence exactly; tests rely on that.

A fully matched sentence yields a degenerate pattern with no wildcard. Those
are stored like any other pattern but are never eligible for selection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import StateFormatError
from .ingest import Sentence, normalize
from .miner import NGram

PATTERN_STORE_VERSION = "1"

# A segment is a token tuple (fixed) or None (wildcard).
Segment = tuple[str, ...] | None


@dataclass(frozen=True)
class Pattern:
    segments: tuple[Segment, ...]

    @property
    def canonical_text(self) -> str:
        return " ".join("*" if seg is None else " ".join(seg) for seg in self.segments)

    @property
    def wildcard_count(self) -> int:
        return sum(1 for seg in self.segments if seg is None)

    @property
    def fixed_segments(self) -> list[tuple[str, ...]]:
        return [seg for seg in self.segments if seg is not None]


@dataclass(frozen=True)
class Context:
    """Wildcard contents of one sentence: concatenated tokens plus how many
    of them fall into each slot."""

    tokens: tuple[str, ...]
    slot_lengths: tuple[int, ...]


@dataclass
class PatternRecord:
    pattern: Pattern
    contexts: list[Context] = field(default_factory=list)
    originals: list[Sentence] = field(default_factory=list)
    _mean_cache: dict = field(default_factory=dict, repr=False)

    def append(self, context: Context, original: Sentence) -> None:
        self.contexts.append(context)
        self.originals.append(original)
        self._mean_cache.clear()

    def _mean(self, kind: str, token_lists: list[tuple[str, ...]], embedder) -> np.ndarray:
        # cache per provider identity; a refreshed provider invalidates
        cache_key = (kind, id(embedder))
        hit = self._mean_cache.get(cache_key)
        if hit is None:
            vecs = [embedder.embed(toks) for toks in token_lists]
            hit = np.mean(np.stack(vecs), axis=0)
            self._mean_cache[cache_key] = hit
        return hit

    def mean_context_vec(self, embedder) -> np.ndarray:
        return self._mean("ctx", [c.tokens for c in self.contexts], embedder)

    def mean_original_vec(self, embedder) -> np.ndarray:
        return self._mean("orig", [s.tokens for s in self.originals], embedder)


class PatternStore:
    """Pattern records keyed by canonical text."""

    def __init__(self):
        self.records: dict[str, PatternRecord] = {}

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records.values())

    def get(self, canonical_text: str) -> PatternRecord | None:
        return self.records.get(canonical_text)

    def eligible_records(self) -> list[PatternRecord]:
        """Records usable for selection, i.e. with at least one wildcard."""
        return [rec for rec in self.records.values() if rec.pattern.wildcard_count >= 1]


def decompose(sentence: Sentence, style: Iterable[NGram]) -> tuple[Pattern, Context] | None:
    """Match style n-grams into the sentence; None when nothing matches."""
    toks = sentence.tokens
    n = len(toks)
    occurrences = []
    for gram in style:
        width = len(gram)
        if width == 0 or width > n:
            continue
        for i in range(n - width + 1):
            if toks[i:i + width] == gram:
                occurrences.append((-width, i, gram))
    if not occurrences:
        return None
    occurrences.sort()

    covered = [False] * n
    matched_any = False
    for neg_width, start, gram in occurrences:
        end = start - neg_width  # start + width
        if any(covered[start:end]):
            continue
        for j in range(start, end):
            covered[j] = True
        matched_any = True
    if not matched_any:
        return None

    segments: list[Segment] = []
    ctx_tokens: list[str] = []
    slot_lengths: list[int] = []
    i = 0
    while i < n:
        j = i
        while j < n and covered[j] == covered[i]:
            j += 1
        if covered[i]:
            segments.append(toks[i:j])
        else:
            segments.append(None)
            ctx_tokens.extend(toks[i:j])
            slot_lengths.append(j - i)
        i = j
    return (
        Pattern(segments=tuple(segments)),
        Context(tokens=tuple(ctx_tokens), slot_lengths=tuple(slot_lengths)),
    )


def reconstruct(pattern: Pattern, context: Context) -> tuple[str, ...]:
    """Interleave a context back into the pattern's wildcard slots."""
    out: list[str] = []
    pos = 0
    slot = 0
    for seg in pattern.segments:
        if seg is None:
            take = context.slot_lengths[slot]
            out.extend(context.tokens[pos:pos + take])
            pos += take
            slot += 1
        else:
            out.extend(seg)
    return tuple(out)


def upsert(store: PatternStore, pattern: Pattern, context: Context,
           original: Sentence) -> PatternStore:
    """Add one decomposition to the store (duplicates are kept)."""
    key = pattern.canonical_text
    record = store.records.get(key)
    if record is None:
        record = PatternRecord(pattern=pattern)
        store.records[key] = record
    record.append(context, original)
    return store


def rebuild(store: PatternStore, corpus: Iterable[Sentence],
            style: Iterable[NGram]) -> PatternStore:
    """Fresh store from decomposing the whole retained corpus.

    The passed store only donates its type; its contents are not reused
    because a changed style set invalidates old decompositions wholesale.
    """
    fresh = PatternStore()
    style = set(style)
    for sentence in corpus:
        hit = decompose(sentence, style)
        if hit is not None:
            upsert(fresh, hit[0], hit[1], sentence)
    return fresh


def store_to_dict(store: PatternStore) -> dict:
    patterns = []
    for key in sorted(store.records):
        rec = store.records[key]
        patterns.append({
            "canonical_text": key,
            "segments": ["*" if seg is None else list(seg) for seg in rec.pattern.segments],
            "contexts": [
                {"tokens": list(c.tokens), "slot_lengths": list(c.slot_lengths)}
                for c in rec.contexts
            ],
            "originals": [s.raw for s in rec.originals],
        })
    return {"version": PATTERN_STORE_VERSION, "patterns": patterns}


def store_from_dict(doc: dict) -> PatternStore:
    version = doc.get("version")
    if version != PATTERN_STORE_VERSION:
        raise StateFormatError(
            f"pattern store version {version!r} is not supported (this build reads {PATTERN_STORE_VERSION!r})"
        )
    store = PatternStore()
    for entry in doc["patterns"]:
        segments = tuple(
            None if seg == "*" else tuple(seg) for seg in entry["segments"]
        )
        pattern = Pattern(segments=segments)
        record = PatternRecord(pattern=pattern)
        if len(entry["contexts"]) != len(entry["originals"]):
            raise StateFormatError(
                f"pattern {entry['canonical_text']!r} has "
                f"{len(entry['contexts'])} contexts but {len(entry['originals'])} originals"
            )
        for ctx, raw in zip(entry["contexts"], entry["originals"]):
            record.contexts.append(
                Context(tokens=tuple(ctx["tokens"]), slot_lengths=tuple(ctx["slot_lengths"]))
            )
            record.originals.append(normalize(raw))
        store.records[entry["canonical_text"]] = record
    return store


def store_to_json(store: PatternStore) -> str:
    return json.dumps(store_to_dict(store), sort_keys=True, separators=(",", ":")) + "\n"
