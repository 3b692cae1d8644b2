"""Pure-Python mining kernels; fallback for the compiled extension.

Both backends share one contract. Sentences arrive as a flat int32 token-id
array plus an int64 offsets array (offsets[i]:offsets[i+1] is sentence i).
Counts are sentence-presence counts: a sentence contributes at most 1 to any
n-gram, however often the n-gram repeats inside it.

scan_level discovers, for a window width n, every window whose two maximal
subwindows are frequent (n-1)-grams, identified through prev_pos: prev_pos[p]
is the id of the frequent (n-1)-gram starting at token position p, or -1.
A discovered window is keyed by (prefix_id << 32) | last_token_id.
"""

from __future__ import annotations

import numpy as np


def scan_unigrams(tokens, offsets, vocab_size):
    """Sentence-presence counts for every token id. Returns int64 array."""
    counts = [0] * vocab_size
    stamp = [-1] * vocab_size
    toks = tokens.tolist()
    offs = offsets.tolist()
    for s in range(len(offs) - 1):
        for p in range(offs[s], offs[s + 1]):
            t = toks[p]
            if stamp[t] != s:
                stamp[t] = s
                counts[t] += 1
    return np.asarray(counts, dtype=np.int64)


def scan_level(tokens, offsets, prev_pos, width):
    """One level of the window scan.

    Returns (keys, counts, new_pos): packed int64 keys and sentence-presence
    counts per discovered candidate, and new_pos marking each token position
    with the candidate index of the window starting there (-1 elsewhere).
    """
    table: dict[int, int] = {}
    keys: list[int] = []
    counts: list[int] = []
    stamp: list[int] = []
    toks = tokens.tolist()
    offs = offsets.tolist()
    prev = prev_pos.tolist()
    new_pos = [-1] * len(toks)
    for s in range(len(offs) - 1):
        last = offs[s + 1] - width
        for p in range(offs[s], last + 1):
            a = prev[p]
            if a < 0 or prev[p + 1] < 0:
                continue
            key = (a << 32) | toks[p + width - 1]
            idx = table.get(key)
            if idx is None:
                idx = len(keys)
                table[key] = idx
                keys.append(key)
                counts.append(0)
                stamp.append(-1)
            new_pos[p] = idx
            if stamp[idx] != s:
                stamp[idx] = s
                counts[idx] += 1
    return (
        np.asarray(keys, dtype=np.int64),
        np.asarray(counts, dtype=np.int64),
        np.asarray(new_pos, dtype=np.int32),
    )
