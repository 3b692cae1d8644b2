"""Frequent n-gram mining over a growing sentence corpus.

Support is sentence presence: an n-gram's count is the number of sentences
containing it contiguously at least once, and it is frequent when
count / total_sentences >= min_support (inclusive). Mining is levelwise:
level-1 candidates are the distinct tokens, and a level-(n+1) candidate is a
window whose two maximal contiguous subwindows are frequent n-grams (the
suffix/prefix join). Only candidates that actually occur in the corpus are
materialized; a join that never occurs has count zero and cannot be promoted
before its first occurrence, which is always seen by the scan of the
increment that introduces it.

Alongside the frequent set the miner keeps the negative border: occurring
n-grams that are themselves infrequent but whose maximal subwindows are all
frequent (every occurring infrequent token at level 1). Border counts stay
exact, so growth of the corpus promotes border members without recounting.
Promotions enable new join candidates whose occurrences may be spread over
old data; those are picked up by a single rescan of the retained corpus per
affected level. Increments without promotions touch only the new sentences.

min_support arrives as float, string, or Fraction and is normalized through
Fraction(str(x)) so that e.g. 0.006 means exactly 6/1000 and the inclusive
threshold comparison never falls to float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import EmptyCorpusError, InvalidSupportError, StateFormatError
from .ingest import Sentence, StopwordSet, is_stopword_only, normalize

NGram = tuple[str, ...]

MINER_STATE_VERSION = "1"

_TOKEN_MASK = 0xFFFFFFFF


def _as_fraction(min_support) -> Fraction:
    try:
        if isinstance(min_support, Fraction):
            sup = min_support
        elif isinstance(min_support, str):
            sup = Fraction(min_support)
        elif isinstance(min_support, float):
            # str() gives the shortest round-tripping decimal, i.e. what the
            # caller typed, so 0.006 becomes 3/500 rather than the float's
            # exact binary expansion.
            sup = Fraction(str(min_support))
        elif isinstance(min_support, int) and not isinstance(min_support, bool):
            sup = Fraction(min_support)
        else:
            raise InvalidSupportError("invalid support")
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidSupportError("invalid support") from exc
    if not (0 < sup <= 1):
        raise InvalidSupportError("invalid support")
    return sup


class CorpusLog:
    """Append-only retained corpus of normalized sentences."""

    def __init__(self, sentences: Sequence[Sentence] | None = None, path: str | None = None):
        self.sentences: list[Sentence] = list(sentences) if sentences else []
        self.path = path

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def extend(self, sentences: Iterable[Sentence]) -> None:
        self.sentences.extend(sentences)

    def raw_lines(self) -> list[str]:
        return [s.raw.replace("\n", " ") for s in self.sentences]

    @classmethod
    def from_raw_lines(cls, lines: Iterable[str], path: str | None = None) -> "CorpusLog":
        sentences = []
        for line in lines:
            sent = normalize(line.rstrip("\n"))
            if not sent.tokens:
                raise StateFormatError("corpus log contains a sentence that normalizes to nothing")
            sentences.append(sent)
        return cls(sentences, path=path)


@dataclass
class IncrementStats:
    """What the last mine operation did; the CLI reports these."""

    new_sentences: int = 0
    dropped: int = 0
    promotions: list[NGram] = field(default_factory=list)
    demotions: list[NGram] = field(default_factory=list)
    rescanned_levels: list[int] = field(default_factory=list)


class _LevelIndex:
    """Dense ids for the frequent n-grams of one level."""

    __slots__ = ("grams", "ids")

    def __init__(self):
        self.grams: list[NGram] = []
        self.ids: dict[NGram, int] = {}

    def add(self, gram: NGram) -> int:
        gid = len(self.grams)
        self.grams.append(gram)
        self.ids[gram] = gid
        return gid

    def __len__(self) -> int:
        return len(self.grams)


class MinerState:
    """Frequent set, negative border, and the retained corpus behind them."""

    def __init__(self, min_support, corpus: CorpusLog | None = None):
        self.min_support: Fraction = _as_fraction(min_support)
        self.min_support_repr: str = (
            min_support if isinstance(min_support, str) else str(min_support)
        )
        self.total_sentences: int = 0
        self.frequent: dict[NGram, int] = {}
        self.border: dict[NGram, int] = {}
        self.corpus: CorpusLog = corpus if corpus is not None else CorpusLog()
        self.last_stats: IncrementStats = IncrementStats()
        self._vocab: dict[str, int] = {}
        self._vocab_list: list[str] = []
        self._enc: list[np.ndarray] = []
        self._flat_cache: tuple[np.ndarray, np.ndarray] | None = None
        for sent in self.corpus:
            self._enc.append(self._encode_sentence(sent))
        self.total_sentences = len(self.corpus)

    # threshold: smallest count c with c / total >= min_support
    def threshold(self) -> int:
        num = self.min_support.numerator * self.total_sentences
        den = self.min_support.denominator
        return -((-num) // den)

    def _encode_sentence(self, sent: Sentence) -> np.ndarray:
        vocab = self._vocab
        vlist = self._vocab_list
        ids = []
        for tok in sent.tokens:
            tid = vocab.get(tok)
            if tid is None:
                tid = len(vlist)
                vocab[tok] = tid
                vlist.append(tok)
            ids.append(tid)
        return np.asarray(ids, dtype=np.int32)

    def _flat(self) -> tuple[np.ndarray, np.ndarray]:
        if self._flat_cache is None:
            offsets = np.zeros(len(self._enc) + 1, dtype=np.int64)
            np.cumsum([len(e) for e in self._enc], out=offsets[1:])
            tokens = (
                np.concatenate(self._enc) if self._enc else np.empty(0, dtype=np.int32)
            )
            self._flat_cache = (np.ascontiguousarray(tokens, dtype=np.int32), offsets)
        return self._flat_cache

    def _freq_levels(self) -> dict[int, _LevelIndex]:
        levels: dict[int, _LevelIndex] = {}
        for gram in self.frequent:
            levels.setdefault(len(gram), _LevelIndex()).add(gram)
        return levels


def _flatten(encoded: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    np.cumsum([len(e) for e in encoded], out=offsets[1:])
    tokens = np.concatenate(encoded) if encoded else np.empty(0, dtype=np.int32)
    return np.ascontiguousarray(tokens, dtype=np.int32), offsets


def _unigram_positions(tokens: np.ndarray, index: _LevelIndex | None,
                       vocab: dict[str, int], vocab_size: int) -> np.ndarray | None:
    if index is None or not index.grams:
        return None
    lut = np.full(vocab_size, -1, dtype=np.int32)
    for gid, gram in enumerate(index.grams):
        tid = vocab.get(gram[0])
        if tid is not None:
            lut[tid] = gid
    return np.ascontiguousarray(lut[tokens], dtype=np.int32)


def _remap_positions(new_pos: np.ndarray, lut: np.ndarray) -> np.ndarray:
    out = np.full(new_pos.shape, -1, dtype=np.int32)
    mask = new_pos >= 0
    out[mask] = lut[new_pos[mask]]
    return out


def _decode_keys(keys: np.ndarray, prev: _LevelIndex, vocab_list: list[str]) -> list[NGram]:
    grams = prev.grams
    return [grams[k >> 32] + (vocab_list[k & _TOKEN_MASK],) for k in keys.tolist()]


def mine_batch(corpus: Iterable[Sentence], min_support) -> MinerState:
    """Mine a whole corpus from scratch.

    Raises EmptyCorpusError for an empty corpus (sentences that normalized to
    zero tokens do not count) and InvalidSupportError for min_support outside
    (0, 1].
    """
    kept = [s for s in corpus if s.tokens]
    if not kept:
        raise EmptyCorpusError("empty corpus")
    state = MinerState(min_support, CorpusLog(kept))
    tokens, offsets = state._flat()
    thresh = state.threshold()
    vocab_list = state._vocab_list

    counts1 = _kernels.scan_unigrams(tokens, offsets, len(vocab_list))
    freq_ix = _LevelIndex()
    for tid, count in enumerate(counts1.tolist()):
        if count == 0:
            continue
        gram = (vocab_list[tid],)
        if count >= thresh:
            state.frequent[gram] = count
            freq_ix.add(gram)
        else:
            state.border[gram] = count
    if not freq_ix.grams:
        return state

    prev_pos = _unigram_positions(tokens, freq_ix, state._vocab, len(vocab_list))
    prev_ix = freq_ix
    width = 2
    while True:
        keys, counts, new_pos = _kernels.scan_level(tokens, offsets, prev_pos, width)
        if keys.size == 0:
            break
        level_ix = _LevelIndex()
        lut = np.full(keys.size, -1, dtype=np.int32)
        grams = _decode_keys(keys, prev_ix, vocab_list)
        for i, (gram, count) in enumerate(zip(grams, counts.tolist())):
            if count >= thresh:
                state.frequent[gram] = count
                lut[i] = level_ix.add(gram)
            else:
                state.border[gram] = count
        if not level_ix.grams:
            break
        prev_pos = _remap_positions(new_pos, lut)
        prev_ix = level_ix
        width += 1
    return state


def mine_increment(state: MinerState, new_sentences: Iterable[Sentence]) -> MinerState:
    """Fold new sentences into an existing state.

    The result is extensionally identical (frequent set, border set, counts)
    to mine_batch over old corpus + increment. The increment is scanned once;
    the retained corpus is rescanned only at levels above a promotion, where
    newly enabled join candidates may have occurrences in old data. An empty
    increment returns the state unchanged. The state is updated in place and
    returned; state.last_stats describes what happened.
    """
    incoming = list(new_sentences)
    kept = [s for s in incoming if s.tokens]
    stats = IncrementStats(new_sentences=len(kept), dropped=len(incoming) - len(kept))
    state.last_stats = stats
    if not kept:
        return state

    old_frequent = dict(state.frequent)
    old_levels = state._freq_levels()
    old_sets = {n: set(ix.grams) for n, ix in old_levels.items()}

    enc_new = [state._encode_sentence(s) for s in kept]
    inc_tokens, inc_offsets = _flatten(enc_new)
    vocab_list = state._vocab_list
    vocab_size = len(vocab_list)

    tracked: dict[NGram, int] = dict(state.frequent)
    tracked.update(state.border)

    # Scan the increment once under the old classification. Every tracked
    # n-gram has frequent subwindows, so this updates all tracked counts and
    # discovers first-time n-grams (whose counts are exact because they never
    # occurred before).
    counts1 = _kernels.scan_unigrams(inc_tokens, inc_offsets, vocab_size)
    for tid in np.nonzero(counts1)[0].tolist():
        gram = (vocab_list[tid],)
        tracked[gram] = tracked.get(gram, 0) + int(counts1[tid])

    prev_pos = _unigram_positions(inc_tokens, old_levels.get(1), state._vocab, vocab_size)
    prev_ix = old_levels.get(1)
    width = 2
    while prev_pos is not None:
        keys, counts, new_pos = _kernels.scan_level(inc_tokens, inc_offsets, prev_pos, width)
        if keys.size == 0:
            break
        grams = _decode_keys(keys, prev_ix, vocab_list)
        for gram, count in zip(grams, counts.tolist()):
            tracked[gram] = tracked.get(gram, 0) + count
        cur_ix = old_levels.get(width)
        if cur_ix is None:
            break
        lut = np.full(keys.size, -1, dtype=np.int32)
        for i, gram in enumerate(grams):
            gid = cur_ix.ids.get(gram)
            if gid is not None:
                lut[i] = gid
        prev_pos = _remap_positions(new_pos, lut)
        prev_ix = cur_ix
        width += 1

    state.corpus.extend(kept)
    state._enc.extend(enc_new)
    state._flat_cache = None
    state.total_sentences += len(kept)

    # Reclassify bottom-up against the new threshold. A level is rescanned
    # over the retained corpus only when the level below had promotions.
    thresh = state.threshold()
    tracked_by_len: dict[int, dict[NGram, int]] = {}
    for gram, count in tracked.items():
        tracked_by_len.setdefault(len(gram), {})[gram] = count

    new_frequent: dict[NGram, int] = {}
    new_border: dict[NGram, int] = {}

    level1_ix = _LevelIndex()
    for gram, count in tracked_by_len.get(1, {}).items():
        if count >= thresh:
            new_frequent[gram] = count
            level1_ix.add(gram)
        else:
            new_border[gram] = count
    new_levels: dict[int, _LevelIndex] = {1: level1_ix}
    promotions_below = set(level1_ix.grams) - old_sets.get(1, set())

    # chain_pos holds full-corpus position ids for the new-frequent grams at
    # chain_level; advanced lazily, only when a rescan needs it.
    chain_level = 0
    chain_pos: np.ndarray | None = None
    full_tokens: np.ndarray | None = None
    full_offsets: np.ndarray | None = None

    def _advance_chain(target: int) -> None:
        nonlocal chain_level, chain_pos
        while chain_level < target:
            nxt = chain_level + 1
            if nxt == 1:
                chain_pos = _unigram_positions(
                    full_tokens, new_levels[1], state._vocab, vocab_size
                )
            else:
                keys, _, new_pos = _kernels.scan_level(
                    full_tokens, full_offsets, chain_pos, nxt
                )
                grams = _decode_keys(keys, new_levels[nxt - 1], vocab_list)
                lut = np.full(keys.size, -1, dtype=np.int32)
                for i, gram in enumerate(grams):
                    gid = new_levels[nxt].ids.get(gram)
                    if gid is not None:
                        lut[i] = gid
                chain_pos = _remap_positions(new_pos, lut)
            chain_level = nxt

    prev_ix = level1_ix
    width = 2
    while prev_ix.grams:
        rescanned = bool(promotions_below)
        if rescanned:
            if full_tokens is None:
                full_tokens, full_offsets = state._flat()
            _advance_chain(width - 1)
            keys, counts, new_pos = _kernels.scan_level(
                full_tokens, full_offsets, chain_pos, width
            )
            grams = _decode_keys(keys, prev_ix, vocab_list)
            level_counts = dict(zip(grams, counts.tolist()))
            stats.rescanned_levels.append(width)
        else:
            prev_set = prev_ix.ids
            level_counts = {
                gram: count
                for gram, count in tracked_by_len.get(width, {}).items()
                if gram[:-1] in prev_set and gram[1:] in prev_set
            }

        level_ix = _LevelIndex()
        for gram, count in level_counts.items():
            if count >= thresh:
                new_frequent[gram] = count
                level_ix.add(gram)
            else:
                new_border[gram] = count
        new_levels[width] = level_ix
        promotions_below = set(level_ix.grams) - old_sets.get(width, set())
        if rescanned:
            # this scan's positions give the chain at this level for free
            lut = np.full(len(grams), -1, dtype=np.int32)
            for i, gram in enumerate(grams):
                gid = level_ix.ids.get(gram)
                if gid is not None:
                    lut[i] = gid
            chain_pos = _remap_positions(new_pos, lut)
            chain_level = width
        if not level_ix.grams:
            break
        prev_ix = level_ix
        width += 1

    state.frequent = new_frequent
    state.border = new_border
    stats.promotions = sorted(set(new_frequent) - set(old_frequent))
    stats.demotions = sorted(set(old_frequent) - set(new_frequent))
    return state


def style_ngrams(state: MinerState, stops: StopwordSet) -> set[NGram]:
    """Frequent n-grams of length >= 2 that are not made of stopwords only."""
    return {
        gram
        for gram in state.frequent
        if len(gram) >= 2 and not is_stopword_only(gram, stops)
    }


def state_to_dict(state: MinerState) -> dict:
    """Canonical JSON-ready form; arrays sorted lexicographically by tokens."""
    return {
        "version": MINER_STATE_VERSION,
        "min_support": state.min_support_repr,
        "total_sentences": state.total_sentences,
        "frequent": [
            {"tokens": list(gram), "count": count}
            for gram, count in sorted(state.frequent.items())
        ],
        "border": [
            {"tokens": list(gram), "count": count}
            for gram, count in sorted(state.border.items())
        ],
        "corpus_log_path": state.corpus.path,
    }


def state_from_dict(doc: dict, corpus: CorpusLog) -> MinerState:
    """Rebuild a state from its dict form plus the retained corpus."""
    version = doc.get("version")
    if version != MINER_STATE_VERSION:
        raise StateFormatError(
            f"miner state version {version!r} is not supported (this build reads {MINER_STATE_VERSION!r})"
        )
    total = doc["total_sentences"]
    if len(corpus) < total:
        raise StateFormatError(
            f"corpus log has {len(corpus)} sentences but the state records {total}"
        )
    if len(corpus) > total:
        # A crash between the corpus-log write and the state write can leave
        # extra trailing lines; the committed prefix is authoritative.
        corpus = CorpusLog(corpus.sentences[:total], path=corpus.path)
    state = MinerState(doc["min_support"], corpus)
    state.frequent = {tuple(rec["tokens"]): rec["count"] for rec in doc["frequent"]}
    state.border = {tuple(rec["tokens"]): rec["count"] for rec in doc["border"]}
    return state
