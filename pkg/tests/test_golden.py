"""Frozen transform regression: the same corpus, store, and inputs must keep
producing byte-identical outputs. Regenerate the data file only on an
intentional behavior change (tests/make_golden.py), reviewing the diff."""

import json
from pathlib import Path

from stylemirror.embedding import BuiltinEmbedder, UnigramTable
from stylemirror.ingest import default_stopwords
from stylemirror.miner import mine_batch, style_ngrams
from stylemirror.patterns import PatternStore, rebuild
from stylemirror.transformer import transform

from make_golden import neutral_inputs
from synth import styled_corpus

GOLDEN = Path(__file__).parent / "data" / "golden_transforms.json"


def test_transforms_match_frozen_outputs():
    doc = json.loads(GOLDEN.read_text())
    corpus = styled_corpus(seed=doc["corpus_seed"], n_sentences=doc["corpus_size"])
    state = mine_batch(corpus, doc["support"])
    style = style_ngrams(state, default_stopwords())
    store = rebuild(PatternStore(), corpus, style)
    embedder = BuiltinEmbedder(
        UnigramTable.from_sentences(corpus), seed=doc["embed_seed"])

    inputs = neutral_inputs(7, len(doc["transforms"]))
    for raw, want in zip(inputs, doc["transforms"]):
        assert raw == want["input"]
        result = transform(raw, store, embedder)
        assert result.output.raw == want["output"], raw
        assert result.pattern.canonical_text == want["pattern"], raw
        assert repr(result.selection_score) == want["selection_score"], raw
        assert result.chunk_mode == want["chunk_mode"], raw
        assert len(result.candidates) == want["n_candidates"], raw
