"""Session state: configuration plus the mined artifacts, persisted as one
canonical JSON document next to an append-only corpus log.

Saves are atomic (temp file + rename, corpus log first) so a crash never
leaves a partially written session. If a crash lands between the two renames
the corpus log can carry extra trailing lines; the committed sentence count
in the session document is authoritative and loading heals the difference.

Canonical serialization means save -> load -> save is byte-identical.
"""

from __future__ import annotations

import fcntl
import json
import os
import tempfile
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import miner as miner_mod
from . import patterns as patterns_mod
from .embedding import (
    DEFAULT_DIM,
    DEFAULT_SEED,
    BuiltinEmbedder,
    RemoteEmbedder,
    UnigramTable,
    load_word_vectors,
)
from .errors import ConfigError, StateFormatError
from .ingest import Sentence, StopwordSet, default_stopwords
from .miner import CorpusLog, MinerState, mine_batch, mine_increment, style_ngrams
from .patterns import PatternStore, decompose, rebuild, upsert

SESSION_VERSION = "1"

ENV_STATE = "STYLEMIRROR_STATE"
ENV_EMBEDDER_URL = "STYLEMIRROR_EMBEDDER_URL"

DEFAULT_STATE_PATH = "style_session.json"


@dataclass(frozen=True)
class Config:
    """Runtime configuration; file format is `key = value` lines with #
    comments. Unknown keys are rejected."""

    min_support: str = "0.006"
    chunk_mode: str = "phrase"
    embedder: str = "builtin"  # or remote:<base_url>
    lm_order: int = 3
    smoothing_k: float = 0.1
    candidate_cap: int = 512
    stopword_path: str | None = None
    word_vector_path: str | None = None
    state_path: str = DEFAULT_STATE_PATH
    gec_command: str | None = None
    seed: int = DEFAULT_SEED
    embedding_dim: int = DEFAULT_DIM

    def validate(self) -> "Config":
        try:
            miner_mod._as_fraction(self.min_support)
        except Exception as exc:  # InvalidSupportError or parse failures
            raise ConfigError(f"min_support must be a fraction in (0, 1]: {exc}") from exc
        if self.chunk_mode not in ("token", "phrase"):
            raise ConfigError(f"chunk_mode must be 'token' or 'phrase', got {self.chunk_mode!r}")
        if not (self.embedder == "builtin" or self.embedder.startswith("remote:")):
            raise ConfigError(
                f"embedder must be 'builtin' or 'remote:<url>', got {self.embedder!r}"
            )
        if self.lm_order < 2:
            raise ConfigError(f"lm_order must be >= 2, got {self.lm_order}")
        if self.smoothing_k <= 0:
            raise ConfigError(f"smoothing_k must be > 0, got {self.smoothing_k}")
        if self.candidate_cap < 1:
            raise ConfigError(f"candidate_cap must be >= 1, got {self.candidate_cap}")
        if self.embedding_dim < 1:
            raise ConfigError(f"embedding_dim must be >= 1, got {self.embedding_dim}")
        return self

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    @classmethod
    def from_file(cls, path: str) -> "Config":
        values: dict = {}
        try:
            with open(path, encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for line_no, line in enumerate(lines, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {text!r}")
            key, _, value = text.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in cls.field_names():
                raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
            values[key] = value
        return cls._coerced(values)

    @classmethod
    def _coerced(cls, values: dict) -> "Config":
        out: dict = {}
        for f in fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name]
            if raw is None or isinstance(raw, (int, float)):
                out[f.name] = raw
                continue
            if f.name in ("stopword_path", "word_vector_path", "gec_command"):
                out[f.name] = raw or None
                continue
            if f.name in ("min_support", "chunk_mode", "embedder", "state_path"):
                out[f.name] = raw
                continue
            try:
                out[f.name] = float(raw) if f.name == "smoothing_k" else int(raw)
            except ValueError as exc:
                raise ConfigError(f"config key {f.name!r}: bad value {raw!r}") from exc
        return cls(**out).validate()

    def with_env_overrides(self) -> "Config":
        cfg = self
        if os.environ.get(ENV_STATE):
            cfg = replace(cfg, state_path=os.environ[ENV_STATE])
        if os.environ.get(ENV_EMBEDDER_URL):
            cfg = replace(cfg, embedder=f"remote:{os.environ[ENV_EMBEDDER_URL]}")
        return cfg

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def corpus_log_path_for(state_path: str) -> str:
    return str(Path(state_path).with_suffix("")) + ".corpus.txt"


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


@dataclass
class IngestSummary:
    new_sentences: int = 0
    dropped: int = 0
    promotions: int = 0
    demotions: int = 0
    style_changed: bool = False
    pattern_count: int = 0


class Session:
    """Everything one speaker's data produces, plus how it was configured."""

    def __init__(self, config: Config, state: MinerState | None = None,
                 store: PatternStore | None = None):
        self.config = config
        self.state = state
        self.store = store if store is not None else PatternStore()
        self._stopwords: StopwordSet | None = None

    @property
    def stopwords(self) -> StopwordSet:
        if self._stopwords is None:
            if self.config.stopword_path:
                self._stopwords = StopwordSet.from_file(self.config.stopword_path)
            else:
                self._stopwords = default_stopwords()
        return self._stopwords

    def embedder(self):
        """Provider per config, with word frequencies from the current corpus."""
        table = (
            UnigramTable.from_sentences(self.state.corpus)
            if self.state is not None
            else UnigramTable()
        )
        return self.builtin_embedder(table) if self.config.embedder == "builtin" else (
            RemoteEmbedder(self.config.embedder[len("remote:"):])
        )

    def builtin_embedder(self, table: UnigramTable | None = None) -> BuiltinEmbedder:
        if table is None:
            table = (
                UnigramTable.from_sentences(self.state.corpus)
                if self.state is not None
                else UnigramTable()
            )
        word_vectors = (
            load_word_vectors(self.config.word_vector_path)
            if self.config.word_vector_path
            else None
        )
        return BuiltinEmbedder(
            table, seed=self.config.seed, dim=self.config.embedding_dim,
            word_vectors=word_vectors,
        )

    def ingest(self, sentences: list[Sentence]) -> IngestSummary:
        """Mine the new sentences and keep the pattern store in sync.

        If the style n-gram set changed, every old decomposition is suspect
        and the store is rebuilt from the retained corpus; otherwise only the
        new sentences are decomposed.
        """
        summary = IngestSummary()
        if self.state is None:
            kept = [s for s in sentences if s.tokens]
            summary.dropped = len(sentences) - len(kept)
            summary.new_sentences = len(kept)
            self.state = mine_batch(kept, self.config.min_support)
            old_style: set = set()
        else:
            old_style = style_ngrams(self.state, self.stopwords)
            mine_increment(self.state, sentences)
            stats = self.state.last_stats
            summary.new_sentences = stats.new_sentences
            summary.dropped = stats.dropped
            summary.promotions = len(stats.promotions)
            summary.demotions = len(stats.demotions)
        new_style = style_ngrams(self.state, self.stopwords)
        summary.style_changed = new_style != old_style
        if summary.style_changed:
            self.store = rebuild(self.store, self.state.corpus, new_style)
        else:
            offset = self.state.total_sentences - summary.new_sentences
            for sent in self.state.corpus.sentences[offset:]:
                hit = decompose(sent, new_style)
                if hit is not None:
                    upsert(self.store, hit[0], hit[1], sent)
        summary.pattern_count = len(self.store)
        return summary

    # persistence ---------------------------------------------------------

    def to_dict(self, corpus_log_name: str) -> dict:
        if self.state is None:
            raise StateFormatError("nothing to save: session has no mined state")
        miner_doc = miner_mod.state_to_dict(self.state)
        miner_doc["corpus_log_path"] = corpus_log_name
        return {
            "version": SESSION_VERSION,
            "config": self.config.to_dict(),
            "miner": miner_doc,
            "patterns": patterns_mod.store_to_dict(self.store),
        }

    def save(self, state_path: str | None = None) -> None:
        state_path = state_path or self.config.state_path
        log_path = corpus_log_path_for(state_path)
        corpus_text = "".join(line + "\n" for line in self.state.corpus.raw_lines())
        _atomic_write(log_path, corpus_text)
        doc = self.to_dict(os.path.basename(log_path))
        _atomic_write(state_path, canonical_json(doc))

    @classmethod
    def load(cls, state_path: str, *, config: Config | None = None) -> "Session":
        try:
            with open(state_path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise StateFormatError(f"cannot read session file {state_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise StateFormatError(f"session file {state_path} is not valid JSON: {exc}") from exc
        version = doc.get("version")
        if version != SESSION_VERSION:
            raise StateFormatError(
                f"session version {version!r} is not supported (this build reads {SESSION_VERSION!r})"
            )
        saved_cfg = Config(**{
            k: v for k, v in doc["config"].items() if k in Config.field_names()
        })
        if config is not None:
            # mining-determining settings stay with the state they built
            saved_cfg = replace(
                config,
                min_support=saved_cfg.min_support,
                seed=saved_cfg.seed,
                stopword_path=saved_cfg.stopword_path,
                embedding_dim=saved_cfg.embedding_dim,
            )
        log_name = doc["miner"].get("corpus_log_path")
        log_path = os.path.join(os.path.dirname(os.path.abspath(state_path)), log_name)
        try:
            with open(log_path, encoding="utf-8") as fh:
                corpus = CorpusLog.from_raw_lines(fh, path=log_name)
        except OSError as exc:
            raise StateFormatError(f"cannot read corpus log {log_path}: {exc}") from exc
        state = miner_mod.state_from_dict(doc["miner"], corpus)
        store = patterns_mod.store_from_dict(doc["patterns"])
        return cls(saved_cfg, state=state, store=store)


class SessionLock:
    """Advisory exclusive lock on <state_path>.lock for command duration."""

    def __init__(self, state_path: str):
        self.lock_path = state_path + ".lock"
        self._fh = None

    def __enter__(self):
        directory = os.path.dirname(os.path.abspath(self.lock_path))
        os.makedirs(directory, exist_ok=True)
        self._fh = open(self.lock_path, "w")
        fcntl.flock(self._fh, fcntl.LOCK_EX)
        return self

    def __exit__(self, *exc):
        fcntl.flock(self._fh, fcntl.LOCK_UN)
        self._fh.close()
        return False
