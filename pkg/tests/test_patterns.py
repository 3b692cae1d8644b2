import json

import pytest

from stylemirror.errors import StateFormatError
from stylemirror.ingest import default_stopwords, normalize
from stylemirror.miner import mine_batch, style_ngrams
from stylemirror.patterns import (
    Context,
    Pattern,
    PatternStore,
    decompose,
    rebuild,
    reconstruct,
    store_from_dict,
    store_to_dict,
    store_to_json,
    upsert,
)
from synth import styled_corpus


class TestDecompose:
    def test_single_phrase_with_two_slots(self):
        style = {("try", "my", "best", "to")}
        sent = normalize("I will try my best to bring our jobs back")
        pattern, context = decompose(sent, style)
        assert pattern.canonical_text == "* try my best to *"
        assert context.tokens == ("i", "will", "bring", "our", "jobs", "back")
        assert context.slot_lengths == (2, 4)

    def test_phrase_at_sentence_start(self):
        style = {("believe", "me")}
        pattern, context = decompose(normalize("believe me it works"), style)
        assert pattern.canonical_text == "believe me *"
        assert context.tokens == ("it", "works")
        assert context.slot_lengths == (2,)

    def test_whole_sentence_pattern_has_no_slots(self):
        style = {("you", "know")}
        pattern, context = decompose(normalize("you know you know"), style)
        assert pattern.wildcard_count == 0
        assert context.tokens == ()

    def test_wider_gram_wins_overlap(self):
        style = {("a", "b"), ("a", "b", "c")}
        pattern, _ = decompose(normalize("x a b c y"), style)
        assert pattern.canonical_text == "* a b c *"

    def test_adjacent_matches_merge_into_one_segment(self):
        style = {("a", "b"), ("c", "d")}
        pattern, context = decompose(normalize("x a b c d y"), style)
        assert pattern.canonical_text == "* a b c d *"
        assert context.slot_lengths == (1, 1)

    def test_no_match_returns_none(self):
        assert decompose(normalize("nothing special here"), {("absent", "gram")}) is None

    def test_repeated_phrase_occupies_both_spots(self):
        style = {("so", "much")}
        pattern, context = decompose(normalize("we won so much and lost so much"), style)
        assert pattern.canonical_text == "* so much * so much"
        assert context.tokens == ("we", "won", "and", "lost")
        assert context.slot_lengths == (2, 2)


class TestReconstruct:
    def test_round_trip_simple(self):
        style = {("try", "my", "best", "to")}
        sent = normalize("I will try my best to bring our jobs back")
        pattern, context = decompose(sent, style)
        assert reconstruct(pattern, context) == sent.tokens

    def test_round_trip_over_mined_corpus(self):
        corpus = styled_corpus(seed=3, n_sentences=300)
        state = mine_batch(corpus, "0.02")
        style = style_ngrams(state, default_stopwords())
        hits = 0
        for sent in corpus:
            result = decompose(sent, style)
            if result is None:
                continue
            hits += 1
            assert reconstruct(result[0], result[1]) == sent.tokens
        assert hits > 50  # the corpus is built to contain style


class TestStore:
    def _store_from(self, texts, style):
        store = PatternStore()
        for text in texts:
            sent = normalize(text)
            hit = decompose(sent, style)
            if hit:
                upsert(store, hit[0], hit[1], sent)
        return store

    def test_upsert_groups_by_pattern(self):
        style = {("believe", "me")}
        store = self._store_from(
            ["we won believe me", "they lost believe me"], style)
        assert len(store) == 1
        rec = store.get("* believe me")
        assert len(rec.contexts) == 2
        assert [c.tokens for c in rec.contexts] == [("we", "won"), ("they", "lost")]

    def test_duplicate_contexts_are_kept(self):
        style = {("believe", "me")}
        store = self._store_from(["we won believe me", "we won believe me"], style)
        assert len(store.get("* believe me").contexts) == 2

    def test_eligible_records_need_a_wildcard(self):
        style = {("you", "know")}
        store = self._store_from(["you know", "you know it"], style)
        eligible = store.eligible_records()
        assert [r.pattern.canonical_text for r in eligible] == ["you know *"]

    def test_rebuild_discards_old_contents(self):
        style1 = {("believe", "me")}
        store = self._store_from(["we won believe me"], style1)
        corpus = [normalize("so much winning"), normalize("they lost so much")]
        rebuilt = rebuild(store, corpus, {("so", "much")})
        assert store.get("* believe me") is not None  # input store untouched
        assert rebuilt.get("* believe me") is None
        assert rebuilt.get("* so much") is not None

    def test_serialization_round_trip_is_canonical(self):
        style = {("believe", "me"), ("so", "much")}
        store = self._store_from(
            ["we won believe me", "they cried so much", "so much energy believe me"],
            style)
        doc = store_to_dict(store)
        text1 = store_to_json(store)
        back = store_from_dict(json.loads(text1))
        text2 = store_to_json(back)
        assert text1 == text2
        assert store_to_dict(back) == doc

    def test_version_mismatch_rejected(self):
        doc = store_to_dict(PatternStore())
        doc["version"] = "0"
        with pytest.raises(StateFormatError, match="0"):
            store_from_dict(doc)

    def test_misaligned_contexts_rejected(self):
        style = {("believe", "me")}
        store = self._store_from(["we won believe me"], style)
        doc = store_to_dict(store)
        doc["patterns"][0]["originals"].append("extra line")
        with pytest.raises(StateFormatError):
            store_from_dict(doc)

    def test_mean_vectors_are_cached_until_append(self):
        from stylemirror.embedding import BuiltinEmbedder, UnigramTable
        style = {("believe", "me")}
        store = self._store_from(["we won believe me", "they lost believe me"], style)
        rec = store.get("* believe me")
        emb = BuiltinEmbedder(UnigramTable())
        v1 = rec.mean_context_vec(emb)
        v2 = rec.mean_context_vec(emb)
        assert v1 is v2
        sent = normalize("others cried believe me")
        hit = decompose(sent, style)
        upsert(store, hit[0], hit[1], sent)
        v3 = rec.mean_context_vec(emb)
        assert v3 is not v1
