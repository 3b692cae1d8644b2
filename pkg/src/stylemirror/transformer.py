"""Restyling: pick a pattern, slot the input into its wildcards, rank.

Candidate generation enumerates every order-preserving distribution of the
input's m chunks over the pattern's k wildcard slots (slots may stay empty),
which is C(m+k-1, k-1) sequences before deduplication. Chunking keeps that
number small: in "phrase" mode a determiner/adjective run attaches to the
following head token so noun phrases travel as units. The word lists driving
that heuristic are right here in the module and deliberately modest; this is
a stand-in for real phrase detection, not linguistics.
"""

from __future__ import annotations

import math
import subprocess
import sys
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

from .embedding import cosine
from .errors import (
    DegeneratePatternError,
    EmptyInputError,
    NoPatternsError,
    ZeroVectorError,
)
from .ingest import Sentence, normalize
from .patterns import Pattern, PatternRecord, PatternStore

DEFAULT_CANDIDATE_CAP = 512
DEFAULT_CHUNK_MODE = "phrase"

# Determiners and possessives that open a phrase chunk.
DETERMINERS = frozenset("""
a an the this that these those my your his her its our their some any no
every each all both few many much several such another
""".split())

# Common adjectives that extend a phrase chunk. Unknown words end the run as
# its head, so this list only needs to cover frequent premodifiers.
ADJECTIVES = frozenset("""
good great best better big bigger small smaller large little new old young
long short high low right wrong same different instant real whole own other
last next early late hard easy strong weak true false nice bad huge tiny
beautiful amazing incredible fantastic tremendous wonderful terrible awful
happy sad free full empty quick slow hot cold warm dark light heavy poor
rich safe dangerous simple fancy cheap expensive fresh final major minor
""".split())


@dataclass(frozen=True)
class Candidate:
    tokens: tuple[str, ...]
    score: float


@dataclass
class TransformResult:
    """Full provenance of one transformation."""

    input: Sentence
    pattern: Pattern
    selection_score: float
    candidates: list[Candidate]
    output: Sentence
    chunk_mode: str
    gec_output: str | None = None


class GecHook:
    """Optional external cleanup command; sentence on stdin, result on stdout.

    A non-zero exit disables the hook for the rest of the session (with a
    warning) rather than failing transforms.
    """

    def __init__(self, command: str, *, timeout: float = 30.0):
        self.command = command
        self.timeout = timeout
        self.enabled = True

    def run(self, text: str) -> str | None:
        if not self.enabled:
            return None
        try:
            proc = subprocess.run(
                self.command, shell=True, input=text.encode("utf-8"),
                stdout=subprocess.PIPE, stderr=subprocess.PIPE, timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            self.enabled = False
            print(f"warning: cleanup hook failed ({exc}); disabled for this session",
                  file=sys.stderr)
            return None
        if proc.returncode != 0:
            self.enabled = False
            print(
                f"warning: cleanup hook exited {proc.returncode}; disabled for this session",
                file=sys.stderr,
            )
            return None
        return proc.stdout.decode("utf-8").strip()


def select_record(sentence: Sentence, store: PatternStore, embedder) -> tuple[PatternRecord, float]:
    """Most similar eligible record by cosine against the mean context vector.

    Ties prefer more contexts, then the lexicographically smaller canonical
    text. Degenerate records (no wildcard, zero mean vectors) are skipped.
    """
    input_vec = embedder.embed(sentence.tokens)
    best = None
    for record in store.eligible_records():
        ctx_vec = record.mean_context_vec(embedder)
        orig_vec = record.mean_original_vec(embedder)
        # zero mean vectors make cosine undefined; such records are unusable
        if not _has_norm(ctx_vec) or not _has_norm(orig_vec):
            continue
        ctx_score = cosine(input_vec, ctx_vec)
        key = (-ctx_score, -len(record.contexts), record.pattern.canonical_text)
        if best is None or key < best[0]:
            best = (key, record, ctx_score)
    if best is None:
        raise NoPatternsError("no patterns available")
    return best[1], best[2]


def _has_norm(vec) -> bool:
    return bool((vec != 0.0).any())


def select_pattern(sentence: Sentence, store: PatternStore, embedder) -> tuple[Pattern, float]:
    record, score = select_record(sentence, store, embedder)
    return record.pattern, score


def chunk(sentence: Sentence, mode: str) -> list[tuple[str, ...]]:
    """Split tokens into chunks; "token" is singletons, "phrase" groups
    determiner/adjective runs with their head."""
    toks = sentence.tokens
    if mode == "token":
        return [(t,) for t in toks]
    if mode != "phrase":
        raise ValueError(f"unknown chunk mode {mode!r}")
    chunks: list[tuple[str, ...]] = []
    run: list[str] = []
    for tok in toks:
        if tok in DETERMINERS or tok in ADJECTIVES:
            run.append(tok)
        elif run:
            chunks.append(tuple(run) + (tok,))
            run = []
        else:
            chunks.append((tok,))
    if run:
        chunks.append(tuple(run))
    return chunks


def candidate_count(m: int, k: int) -> int:
    """Number of order-preserving distributions of m chunks over k slots."""
    return math.comb(m + k - 1, k - 1) if k > 0 else (1 if m == 0 else 0)


def generate_candidates(chunks: Sequence[tuple[str, ...]], pattern: Pattern) -> list[tuple[str, ...]]:
    """All fills of the pattern's wildcard slots, deduplicated, order kept."""
    k = pattern.wildcard_count
    m = len(chunks)
    fills = []
    # split points chosen with repetition partition chunks into k runs
    for cuts in combinations_with_replacement(range(m + 1), k - 1) if k > 1 else [()]:
        bounds = (0, *cuts, m)
        fills.append([chunks[bounds[i]:bounds[i + 1]] for i in range(k)])
    out: list[tuple[str, ...]] = []
    seen = set()
    for fill in fills:
        tokens: list[str] = []
        slot = 0
        for seg in pattern.segments:
            if seg is None:
                for piece in fill[slot]:
                    tokens.extend(piece)
                slot += 1
            else:
                tokens.extend(seg)
        tup = tuple(tokens)
        if tup not in seen:
            seen.add(tup)
            out.append(tup)
    return out


def rank_and_pick(candidates: Sequence[tuple[str, ...]], record: PatternRecord,
                  embedder) -> tuple[tuple[str, ...], list[Candidate]]:
    """Score candidates against the mean original vector; ties go to the
    lexicographically smaller token list."""
    try:
        target = record.mean_original_vec(embedder)
    except ZeroVectorError as exc:
        raise DegeneratePatternError("degenerate pattern record") from exc
    if not _has_norm(target):
        raise DegeneratePatternError("degenerate pattern record")
    scored = []
    for tokens in candidates:
        scored.append(Candidate(tokens=tokens, score=cosine(embedder.embed(tokens), target)))
    best = min(scored, key=lambda c: (-c.score, c.tokens))
    return best.tokens, scored


def _coarsen(chunks: list[tuple[str, ...]], k: int, cap: int) -> list[tuple[str, ...]]:
    # largest m' that keeps the candidate count under the cap, then merge
    # into m' consecutive groups of near-equal size
    m = len(chunks)
    target = m
    while target > 1 and candidate_count(target, k) > cap:
        target -= 1
    if target == m:
        return chunks
    merged: list[tuple[str, ...]] = []
    base, extra = divmod(m, target)
    i = 0
    for g in range(target):
        size = base + (1 if g < extra else 0)
        merged.append(tuple(tok for piece in chunks[i:i + size] for tok in piece))
        i += size
    return merged


def plan_chunks(sentence: Sentence, mode: str, k: int, cap: int) -> tuple[list[tuple[str, ...]], str]:
    """Chunk the input, degrading (token -> phrase -> coarser groups) until
    the candidate count fits the cap."""
    modes = [mode] if mode == "phrase" else [mode, "phrase"]
    chunks = None
    used = mode
    for m in modes:
        chunks = chunk(sentence, m)
        used = m
        if candidate_count(len(chunks), k) <= cap:
            return chunks, used
    return _coarsen(chunks, k, cap), used


def transform(raw: str, store: PatternStore, embedder, *,
              chunk_mode: str = DEFAULT_CHUNK_MODE,
              candidate_cap: int = DEFAULT_CANDIDATE_CAP,
              gec_hook: GecHook | None = None) -> TransformResult:
    """Normalize, select a pattern, fill its slots, rank, optionally clean up."""
    sentence = normalize(raw)
    if not sentence.tokens:
        raise EmptyInputError("empty input")
    record, selection_score = select_record(sentence, store, embedder)
    chunks, used_mode = plan_chunks(sentence, chunk_mode, record.pattern.wildcard_count, candidate_cap)
    candidates = generate_candidates(chunks, record.pattern)
    best_tokens, scored = rank_and_pick(candidates, record, embedder)
    output_text = " ".join(best_tokens)
    result = TransformResult(
        input=sentence,
        pattern=record.pattern,
        selection_score=selection_score,
        candidates=scored,
        output=Sentence(tokens=best_tokens, raw=output_text),
        chunk_mode=used_mode,
    )
    if gec_hook is not None:
        result.gec_output = gec_hook.run(output_text)
    return result
