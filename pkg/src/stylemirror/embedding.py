"""Sentence embeddings used for pattern selection and candidate ranking.

The builtin provider needs no model files: each word gets a deterministic
Gaussian vector derived from a keyed blake2b stream (so vectors are
bit-identical across processes and platforms for the same seed), and a
sentence is the frequency-weighted average

    v(s) = sum_w [a / (a + p(w))] * v(w) / len(s),   a = 1e-3,

where p(w) is the word's relative frequency in the retained corpus. Frequent
words are damped, rare and unseen words dominate, which is what makes the
similarity ranking insensitive to inserted high-frequency style tokens. No
principal-component removal is applied. Word vectors can alternatively come
from a "word v1 .. vD" text file, and an HTTP provider delegates embedding to
an external server.
"""

from __future__ import annotations

import hashlib
import json
import math
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmbeddingError, RemoteProviderError, ZeroVectorError
from .ingest import Sentence

SIF_A = 1e-3
DEFAULT_DIM = 300
DEFAULT_SEED = 1234


@dataclass(frozen=True)
class ProviderDescriptor:
    name: str
    dimension: int
    deterministic: bool
    version: str


class UnigramTable:
    """Relative word frequencies over the retained corpus.

    Unseen words fall back to 1 / (total_tokens + vocab_size + 1), i.e. they
    look rarer than anything observed.
    """

    def __init__(self, counts: Counter | None = None):
        self.counts: Counter = counts or Counter()
        self.total: int = sum(self.counts.values())

    @classmethod
    def from_sentences(cls, sentences: Iterable[Sentence]) -> "UnigramTable":
        counts: Counter = Counter()
        for sent in sentences:
            counts.update(sent.tokens)
        return cls(counts)

    def prob(self, word: str) -> float:
        count = self.counts.get(word, 0)
        if count == 0:
            return 1.0 / (self.total + len(self.counts) + 1)
        return count / self.total


def _hash_gaussians(word: str, seed: int, dim: int) -> np.ndarray:
    # blake2b in counter mode -> uint64 stream -> Box-Muller. Self-contained
    # so the vectors never depend on a RNG library's stream versioning.
    key = seed.to_bytes(8, "little", signed=False)
    n_u64 = dim + (dim & 1)
    blocks = []
    data = word.encode("utf-8")
    for ctr in range((n_u64 * 8 + 63) // 64):
        blocks.append(
            hashlib.blake2b(
                data, digest_size=64, key=key, salt=ctr.to_bytes(8, "little"),
                person=b"stylemirror.wv",
            ).digest()
        )
    raw = np.frombuffer(b"".join(blocks), dtype="<u8")[:n_u64]
    half = n_u64 // 2
    u1 = (raw[:half].astype(np.float64) + 1.0) * (2.0 ** -64)  # (0, 1]
    u2 = raw[half:].astype(np.float64) * (2.0 ** -64)          # [0, 1)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(n_u64, dtype=np.float64)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:dim]


def load_word_vectors(path: str) -> dict[str, np.ndarray]:
    """Read a 'word v1 .. vD' text file (one word per line)."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            try:
                vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingError(f"bad vector on line {line_no} of {path}") from exc
            vectors[parts[0]] = vec
    if not vectors:
        raise EmbeddingError(f"no vectors found in {path}")
    dims = {v.shape[0] for v in vectors.values()}
    if len(dims) != 1:
        raise EmbeddingError(f"inconsistent vector dimensions in {path}: {sorted(dims)}")
    return vectors


class BuiltinEmbedder:
    """Deterministic frequency-weighted average word vectors."""

    def __init__(
        self,
        table: UnigramTable | None = None,
        *,
        seed: int = DEFAULT_SEED,
        dim: int = DEFAULT_DIM,
        word_vectors: dict[str, np.ndarray] | None = None,
        a: float = SIF_A,
    ):
        self.table = table or UnigramTable()
        self.seed = seed
        self.a = a
        self.word_vectors = word_vectors
        self.dim = next(iter(word_vectors.values())).shape[0] if word_vectors else dim
        self._cache: dict[str, np.ndarray] = {}
        source = "file" if word_vectors else "hash"
        self.descriptor = ProviderDescriptor(
            name="builtin",
            dimension=self.dim,
            deterministic=True,
            version=f"builtin-1/{source}/seed={seed}/dim={self.dim}",
        )

    def _vector(self, word: str) -> np.ndarray:
        vec = self._cache.get(word)
        if vec is None:
            if self.word_vectors is not None and word in self.word_vectors:
                vec = self.word_vectors[word]
            else:
                vec = _hash_gaussians(word, self.seed, self.dim)
            self._cache[word] = vec
        return vec

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            raise EmbeddingError("cannot embed empty sentence")
        acc = np.zeros(self.dim, dtype=np.float64)
        for word in tokens:
            weight = self.a / (self.a + self.table.prob(word))
            acc += weight * self._vector(word)
        return acc / len(tokens)


class RemoteEmbedder:
    """POSTs {"tokens": [...]} to <base_url>/embed, expects {"dim", "values"}."""

    def __init__(self, base_url: str, *, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._descriptor: ProviderDescriptor | None = None

    @property
    def descriptor(self) -> ProviderDescriptor:
        if self._descriptor is None:
            raise RemoteProviderError(
                "remote provider dimension is unknown before the first embed call"
            )
        return self._descriptor

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            raise EmbeddingError("cannot embed empty sentence")
        payload = json.dumps({"tokens": list(tokens)}).encode("utf-8")
        req = urllib.request.Request(
            self.base_url + "/embed",
            data=payload,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = resp.read()
                status = resp.status
        except urllib.error.HTTPError as exc:
            raise RemoteProviderError(
                f"embedding server returned HTTP {exc.code} for POST /embed"
            ) from exc
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise RemoteProviderError(f"embedding server unreachable: {exc}") from exc
        if status != 200:
            raise RemoteProviderError(f"embedding server returned HTTP {status} for POST /embed")
        try:
            doc = json.loads(body)
            dim = int(doc["dim"])
            values = np.asarray([float(x) for x in doc["values"]], dtype=np.float64)
        except (ValueError, KeyError, TypeError) as exc:
            raise RemoteProviderError(f"malformed embedding response: {exc}") from exc
        if values.shape[0] != dim:
            raise RemoteProviderError(
                f"embedding response declares dim={dim} but carries {values.shape[0]} values"
            )
        if self._descriptor is None:
            self._descriptor = ProviderDescriptor(
                name="remote", dimension=dim, deterministic=False,
                version=f"remote-1/{self.base_url}",
            )
        elif dim != self._descriptor.dimension:
            raise RemoteProviderError(
                f"embedding server changed dimension from {self._descriptor.dimension} to {dim}"
            )
        return values


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; zero-norm inputs are an error, not a NaN."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("undefined cosine")
    return float(np.dot(a, b)) / (na * nb)


def mean(vectors: Sequence[np.ndarray]) -> np.ndarray:
    if not vectors:
        raise EmbeddingError("cannot take the mean of zero vectors")
    return np.mean(np.stack(vectors), axis=0)
