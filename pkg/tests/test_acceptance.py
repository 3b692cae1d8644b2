"""Acceptance suite: one test per shipping criterion, each printing a
single PASS/FAIL line with the measured numbers.

Run as part of the normal suite; file order matters only in that the
closure check reuses states mined by the equivalence and oracle checks.
"""

import json
import math
import os
import random
import statistics
import subprocess
import sys
import time

import pytest

from oracle import classify
from stylemirror.embedding import BuiltinEmbedder, UnigramTable, cosine
from stylemirror.evaluator import perplexity, train_lm
from stylemirror.ingest import Sentence, default_stopwords, normalize
from stylemirror.miner import mine_batch, mine_increment, style_ngrams
from stylemirror.patterns import Pattern, PatternStore, decompose, rebuild, reconstruct
from stylemirror.session import Config, Session
from stylemirror.transformer import candidate_count, chunk, generate_candidates, transform
from synth import random_corpus, styled_corpus

_MINED_STATES = []  # states accumulated for the closure check


def _line(name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f" -- {detail}" if detail else ""
    print(f"[{tag}] {name}{suffix}")
    assert ok, f"{name}: {detail}"


def test_incremental_folding_equals_batch_mining():
    t0 = time.perf_counter()
    n_corpora = 200
    mismatches = 0
    for seed in range(n_corpora):
        rng = random.Random(10_000 + seed)
        corpus = random_corpus(rng)  # 50-500 sentences, vocab 50-200
        support = rng.choice(("0.02", "0.05", "0.1", "0.2", "0.5"))
        batch = mine_batch(corpus, support)
        cut = rng.randint(1, len(corpus) - 1)
        folded = mine_batch(corpus[:cut], support)
        rest = corpus[cut:]
        while rest:
            step = rng.randint(1, 40)
            mine_increment(folded, rest[:step])
            rest = rest[step:]
        same = (
            dict(folded.frequent) == dict(batch.frequent)
            and dict(folded.border) == dict(batch.border)
            and folded.total_sentences == batch.total_sentences
        )
        if not same:
            mismatches += 1
        _MINED_STATES.append(batch)
        _MINED_STATES.append(folded)
    elapsed = time.perf_counter() - t0
    _line(
        "incremental folding equals batch mining",
        mismatches == 0 and elapsed < 60.0,
        f"{n_corpora} corpora, {mismatches} mismatches, {elapsed:.1f}s (budget 60s)",
    )


def test_miner_matches_bruteforce_oracle():
    supports = ("0.05", "0.1", "0.5", "1.0")
    checked = 0
    mismatches = 0
    for seed in range(25):
        rng = random.Random(20_000 + seed)
        corpus = random_corpus(rng, n_sentences=rng.randint(10, 100), vocab_size=30)
        for support in supports:
            state = mine_batch(corpus, support)
            want_freq, want_border = classify(corpus, support)
            if dict(state.frequent) != want_freq or dict(state.border) != want_border:
                mismatches += 1
            _MINED_STATES.append(state)
            checked += 1

    # exact inclusive boundaries: counts engineered to hit count/N == support
    boundary = [normalize("hit here")] * 10 + [
        normalize(f"filler{i} word{i}") for i in range(10)
    ]
    state = mine_batch(boundary, "0.5")  # 10/20 == 0.5 exactly
    want_freq, want_border = classify(boundary, "0.5")
    boundary_ok = (
        dict(state.frequent) == want_freq
        and state.frequent.get(("hit", "here")) == 10
        and dict(state.border) == want_border
    )
    state = mine_batch(boundary, "0.05")  # every unique sentence: 1/20 == 0.05
    boundary_ok &= dict(state.frequent) == classify(boundary, "0.05")[0]
    full = [normalize("always present")] * 7
    state = mine_batch(full, "1.0")  # 7/7 == 1.0
    boundary_ok &= state.frequent.get(("always", "present")) == 7
    _MINED_STATES.append(state)

    _line(
        "mined sets match the brute-force oracle",
        mismatches == 0 and boundary_ok,
        f"{checked} corpus/support pairs plus inclusive boundaries at {supports}",
    )


def test_downward_closure_on_every_mined_state():
    assert _MINED_STATES, "equivalence and oracle checks must run first"
    violations = 0
    grams_checked = 0
    for state in _MINED_STATES:
        freq = state.frequent
        for gram in freq:
            grams_checked += 1
            for n in range(1, len(gram)):
                for i in range(len(gram) - n + 1):
                    if gram[i:i + n] not in freq:
                        violations += 1
    _line(
        "downward closure holds on every mined state",
        violations == 0,
        f"{len(_MINED_STATES)} states, {grams_checked} frequent n-grams, "
        f"{violations} violations",
    )


def test_fixture_decomposition_and_candidates():
    style = {("try", "my", "best", "to")}
    sent = normalize("I will try my best to bring our jobs back")
    pattern, context = decompose(sent, style)
    decomp_ok = (
        pattern.canonical_text == "* try my best to *"
        and context.tokens == ("i", "will", "bring", "our", "jobs", "back")
    )

    chunks = chunk(normalize("i eat an instant noodle"), "phrase")
    cands = [" ".join(c) for c in generate_candidates(chunks, pattern)]
    cands_ok = cands == [
        "try my best to i eat an instant noodle",
        "i try my best to eat an instant noodle",
        "i eat try my best to an instant noodle",
        "i eat an instant noodle try my best to",
    ]

    law_ok = True
    for m in range(1, 9):
        distinct_chunks = [(f"c{i}",) for i in range(m)]
        for k in range(1, 5):
            segments = []
            for i in range(k):
                segments.append(None)
                if i < k - 1:
                    segments.append((f"x{i}",))
            got = len(generate_candidates(distinct_chunks, Pattern(tuple(segments))))
            if got != candidate_count(m, k) or got != math.comb(m + k - 1, k - 1):
                law_ok = False

    _line(
        "decomposition and candidate fixtures reproduce",
        decomp_ok and cands_ok and law_ok,
        "pattern/context fixture, 4-candidate enumeration, count law m<=8 k<=4",
    )


def test_reconstruction_is_exact_over_ingest(tmp_path):
    corpus_sents = styled_corpus(seed=5, n_sentences=1000, style_rate=0.5)
    cfg = Config(min_support="0.01", state_path=str(tmp_path / "s.json"))
    session = Session(cfg)
    session.ingest(corpus_sents[:700])
    session.ingest(corpus_sents[700:900])
    session.ingest(corpus_sents[900:])
    pairs = 0
    broken = 0
    for record in session.store.records.values():
        for context, original in zip(record.contexts, record.originals):
            pairs += 1
            if reconstruct(record.pattern, context) != original.tokens:
                broken += 1
    _line(
        "stored decompositions reconstruct their originals exactly",
        pairs > 0 and broken == 0,
        f"{pairs} stored (pattern, context) pairs over a 1000-sentence ingest, "
        f"{broken} mismatches",
    )


def test_outputs_carry_measurable_style(tmp_path):
    t0 = time.perf_counter()
    corpus = styled_corpus(seed=21, n_sentences=600, style_rate=0.5)
    state = mine_batch(corpus, "0.02")
    style = style_ngrams(state, default_stopwords())
    store = rebuild(PatternStore(), corpus, style)
    embedder = BuiltinEmbedder(UnigramTable.from_sentences(corpus), seed=1234)
    lm = train_lm(corpus, order=3, k=0.1)

    rng = random.Random(99)
    nouns = ["garden", "bicycle", "train", "dinner", "letter", "window"]
    verbs = ["found", "saw", "bought", "fixed", "lost", "made"]
    inputs = [
        normalize(f"my friend {rng.choice(verbs)} the {rng.choice(nouns)}")
        for _ in range(30)
    ]

    out_ppls, ctrl_ppls, sims = [], [], []
    for sent in inputs:
        result = transform(sent.raw, store, embedder)
        output = result.output
        out_ppls.append(perplexity(lm, output))
        # control: same words, same length, style adjacency shuffled away
        shuffled = list(output.tokens)
        rng.shuffle(shuffled)
        ctrl = Sentence(tokens=tuple(shuffled), raw=" ".join(shuffled))
        ctrl_ppls.append(perplexity(lm, ctrl))
        sims.append(cosine(embedder.embed(sent.tokens), embedder.embed(output.tokens)))
    med_out = statistics.median(out_ppls)
    med_ctrl = statistics.median(ctrl_ppls)
    mean_sim = statistics.fmean(sims)
    elapsed = time.perf_counter() - t0
    _line(
        "transformed outputs are more fluent than matched-length controls",
        med_out < med_ctrl and mean_sim >= 0.9 and elapsed < 120.0,
        f"median perplexity {med_out:.2f} vs control {med_ctrl:.2f}, "
        f"mean similarity {mean_sim:.4f} (floor 0.9), {elapsed:.1f}s (budget 120s)",
    )


def test_fraction_sweep_is_deterministic(tmp_path):
    # 400 sentences at support 0.1 keeps the 5% prefix above the trivial
    # threshold of 1, so even the smallest fraction mines real patterns
    corpus = styled_corpus(seed=33, n_sentences=400, style_rate=0.8)
    corpus_file = tmp_path / "corpus.txt"
    corpus_file.write_text("".join(s.raw + "\n" for s in corpus))
    state_file = str(tmp_path / "sess.json")
    env = dict(os.environ)

    def cli(*args):
        return subprocess.run(
            [sys.executable, "-m", "stylemirror", *args],
            capture_output=True, text=True, env=env,
        )

    r = cli("ingest", str(corpus_file), "--state", state_file, "--support", "0.1")
    assert r.returncode == 0, r.stderr
    inputs = tmp_path / "inputs.txt"
    inputs.write_text("my friend found the garden\nthe team lost the letter\n")
    csv_path, json_path = tmp_path / "s.csv", tmp_path / "s.json.out"

    def sweep():
        r = cli("eval", "--inputs", str(inputs), "--run", "--state", state_file,
                "--fractions", "0.05,0.10,0.20,1.0",
                "--csv", str(csv_path), "--json", str(json_path))
        assert r.returncode == 0, r.stderr
        return csv_path.read_bytes(), json_path.read_bytes()

    first = sweep()
    second = sweep()
    rows = first[0].decode().count("\n") - 1
    doc = json.loads(first[1])
    _line(
        "fraction sweep emits byte-identical reports on re-run",
        first == second and len(doc["fractions"]) == 4 and rows == 8,
        f"fractions 5/10/20/100 percent, {rows} CSV rows, re-run identical",
    )


def test_lm_distributions_are_normalized():
    corpus = styled_corpus(seed=8, n_sentences=300)
    worst = 0.0
    contexts_checked = 0
    for order in (1, 2, 3):
        lm = train_lm(corpus, order=order, k=0.1)
        space = lm.prediction_space()
        vocab = sorted(lm.vocab) + ["zzz-unseen"]
        rng = random.Random(order)
        for _ in range(100):
            ctx = tuple(rng.choice(vocab) for _ in range(order - 1))
            mapped = tuple(lm.map_token(t) for t in ctx)
            total = sum(lm.prob(w, mapped) for w in space)
            worst = max(worst, abs(total - 1.0))
            contexts_checked += 1
    _line(
        "language model distributions sum to one",
        worst <= 1e-9,
        f"{contexts_checked} contexts across orders 1-3, "
        f"worst deviation {worst:.2e} (tolerance 1e-9)",
    )


def _performance_corpus(n: int = 17_000):
    rng = random.Random(4242)
    hot = [
        normalize("we will make this country proud believe me"),
        normalize("nobody does it better than our workers folks"),
        normalize("they want votes so much believe me"),
    ]
    vocab = [f"t{i}" for i in range(1500)]
    sentences = []
    for _ in range(n - 900):
        sentences.append(normalize(" ".join(rng.choices(vocab, k=rng.randint(5, 12)))))
    sentences.extend(hot * 300)
    rng.shuffle(sentences)
    return sentences, hot


def test_speech_scale_mining_performance():
    corpus, hot = _performance_corpus()
    t0 = time.perf_counter()
    state = mine_batch(corpus, "0.006")
    batch_time = time.perf_counter() - t0
    for sent in hot:
        assert sent.tokens in state.frequent  # hot sentences fully frequent

    inc_times = []
    promo_free = True
    rng = random.Random(7)
    for _ in range(3):
        increment = [rng.choice(hot) for _ in range(1000)]
        t0 = time.perf_counter()
        mine_increment(state, increment)
        inc_times.append(time.perf_counter() - t0)
        if state.last_stats.promotions:
            promo_free = False
    worst_inc = max(inc_times)
    _line(
        "mining scales to a speech-sized corpus",
        batch_time < 10.0 and worst_inc < 1.0 and promo_free,
        f"17k-sentence batch {batch_time:.2f}s (budget 10s); "
        f"1000-sentence increments {', '.join(f'{t:.3f}s' for t in inc_times)} "
        f"(budget 1s each, no promotions)",
    )
