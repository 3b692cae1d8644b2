"""Brute-force reference implementations the real miner is checked against.

Everything here favors obviousness over speed: enumerate every contiguous
n-gram of every sentence, count sentence presence with plain dicts, and
classify directly from the definition.
"""

from fractions import Fraction


def sentence_presence_counts(corpus):
    """Count, per n-gram, in how many sentences it occurs at least once."""
    counts = {}
    for sent in corpus:
        toks = tuple(sent.tokens)
        seen = set()
        for n in range(1, len(toks) + 1):
            for i in range(len(toks) - n + 1):
                seen.add(toks[i:i + n])
        for gram in seen:
            counts[gram] = counts.get(gram, 0) + 1
    return counts


def threshold_for(min_support, total: int) -> int:
    frac = Fraction(str(min_support)) if not isinstance(min_support, Fraction) else min_support
    num = frac.numerator * total
    den = frac.denominator
    return -((-num) // den)  # ceil


def classify(corpus, min_support):
    """(frequent, border) dicts of n-gram -> sentence count, by definition.

    Border membership: an occurring infrequent n-gram whose maximal proper
    contiguous subsequences (the two length n-1 windows; none for unigrams)
    are all frequent.
    """
    counts = sentence_presence_counts(corpus)
    thr = threshold_for(min_support, len(corpus))
    frequent = {g: c for g, c in counts.items() if c >= thr}
    border = {}
    for gram, count in counts.items():
        if count >= thr:
            continue
        if len(gram) == 1:
            border[gram] = count
        elif gram[:-1] in frequent and gram[1:] in frequent:
            border[gram] = count
    return frequent, border
