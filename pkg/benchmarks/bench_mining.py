"""Compare the compiled scan kernels against the pure Python fallback.

Runs the same mining workload under both backends, checks the results are
identical, and reports wall times. Usage:

    python benchmarks/bench_mining.py --sentences 17000 --repeats 3
"""

import argparse
import random
import time

from stylemirror import _kernels
from stylemirror.ingest import normalize
from stylemirror.miner import mine_batch, mine_increment


PHRASES = [
    "believe me", "make america great again", "thank you very much",
    "nobody knows", "the fake news", "we are going to win",
    "so much", "our great country", "by the way", "a lot of people",
]

FILLER = [
    "economy", "jobs", "people", "country", "trade", "deal", "border",
    "military", "taxes", "energy", "freedom", "votes", "media", "congress",
    "history", "future", "families", "workers", "farmers", "cities",
]


def build_corpus(n: int, seed: int = 7) -> list:
    rng = random.Random(seed)
    sentences = []
    for _ in range(n):
        words = []
        if rng.random() < 0.45:
            words.extend(rng.choice(PHRASES).split())
        words.extend(rng.choices(FILLER, k=rng.randint(3, 9)))
        if rng.random() < 0.3:
            words.extend(rng.choice(PHRASES).split())
        rng.shuffle(words)
        sentences.append(normalize(" ".join(words)))
    return sentences


def run_batch(corpus, support):
    t0 = time.perf_counter()
    state = mine_batch(corpus, support)
    elapsed = time.perf_counter() - t0
    return state, elapsed


def run_incremental(base, increments, support):
    state = mine_batch(base, support)
    t0 = time.perf_counter()
    for inc in increments:
        mine_increment(state, inc)
    elapsed = time.perf_counter() - t0
    return state, elapsed


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sentences", type=int, default=17000)
    ap.add_argument("--support", default="0.01")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--increments", type=int, default=50)
    args = ap.parse_args()

    if not _kernels.native_available():
        print("compiled kernels are not available in this install; nothing to compare")
        return 1

    corpus = build_corpus(args.sentences)
    split = max(1, len(corpus) - args.increments * 10)
    base, rest = corpus[:split], corpus[split:]
    increments = [rest[i:i + 10] for i in range(0, len(rest), 10)]

    results = {}
    for backend in ("native", "pure"):
        _kernels.set_backend(backend)
        batch_times, inc_times = [], []
        for _ in range(args.repeats):
            state, t = run_batch(corpus, args.support)
            batch_times.append(t)
            inc_state, t = run_incremental(base, increments, args.support)
            inc_times.append(t)
        results[backend] = {
            "batch": min(batch_times),
            "incremental": min(inc_times),
            "frequent": dict(state.frequent),
            "border": dict(state.border),
            "inc_frequent": dict(inc_state.frequent),
        }
        print(f"{backend:>7}: batch {min(batch_times):8.3f}s   "
              f"{args.increments} increments {min(inc_times):8.3f}s   "
              f"({len(state.frequent)} frequent, {len(state.border)} border)")

    _kernels.set_backend("auto")

    same = (
        results["native"]["frequent"] == results["pure"]["frequent"]
        and results["native"]["border"] == results["pure"]["border"]
        and results["native"]["inc_frequent"] == results["pure"]["inc_frequent"]
    )
    if not same:
        print("BACKEND MISMATCH: pure and native kernels disagree")
        return 1

    speedup = results["pure"]["batch"] / results["native"]["batch"]
    inc_speedup = results["pure"]["incremental"] / results["native"]["incremental"]
    print(f"identical results; native speedup: batch {speedup:.1f}x, "
          f"incremental {inc_speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
