"""Fluency and meaning-preservation metrics for transformed sentences.

Fluency comes from an interpolated add-k n-gram language model trained on the
speaker's corpus: lower perplexity means the output walks token transitions
the speaker actually uses. Meaning preservation is the cosine similarity
between input and output under the builtin deterministic embedder, so
evaluation never depends on a remote service.

The LM predicts over vocab + UNK + </s>. Training words below a count floor
collapse to UNK (default floor 2). Per order j the conditional is
(c(ctx, w) + k) / (c(ctx) + k * V), and the orders mix with fixed weights
proportional to j, so each conditional sums to exactly 1 over the prediction
space no matter the context.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .embedding import cosine
from .ingest import Sentence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

DEFAULT_ORDER = 3
DEFAULT_K = 0.1


class NGramLM:
    """Interpolated add-k n-gram model with sentence-boundary padding."""

    def __init__(self, order: int = DEFAULT_ORDER, k: float = DEFAULT_K,
                 unk_min_count: int = 2):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if k <= 0:
            raise ValueError(f"smoothing k must be > 0, got {k}")
        self.order = order
        self.k = k
        self.unk_min_count = unk_min_count
        self.vocab: set[str] = set()
        # counts[j][ctx][w] and totals[j][ctx] for context length j-1
        self._counts: list[dict] = [defaultdict(Counter) for _ in range(order + 1)]
        self._totals: list[dict] = [defaultdict(int) for _ in range(order + 1)]
        total = order * (order + 1) // 2
        self.lambdas = tuple(j / total for j in range(1, order + 1))
        self._pred_size = 0

    def fit(self, corpus: Iterable[Sentence]) -> "NGramLM":
        sentences = [s.tokens for s in corpus]
        word_counts = Counter(tok for toks in sentences for tok in toks)
        self.vocab = {w for w, c in word_counts.items() if c >= self.unk_min_count}
        self._pred_size = len(self.vocab) + 2  # + UNK + EOS
        for toks in sentences:
            mapped = [t if t in self.vocab else UNK for t in toks]
            padded = [BOS] * (self.order - 1) + mapped + [EOS]
            start = self.order - 1
            for i in range(start, len(padded)):
                word = padded[i]
                for j in range(1, self.order + 1):
                    ctx = tuple(padded[i - j + 1:i])
                    self._counts[j][ctx][word] += 1
                    self._totals[j][ctx] += 1
        return self

    def map_token(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def order_prob(self, j: int, context: Sequence[str], word: str) -> float:
        """Add-k conditional at a single order (no interpolation)."""
        ctx = tuple(context[len(context) - (j - 1):]) if j > 1 else ()
        count = self._counts[j][ctx][word] if ctx in self._counts[j] else 0
        total = self._totals[j].get(ctx, 0)
        return (count + self.k) / (total + self.k * self._pred_size)

    def prob(self, word: str, context: Sequence[str]) -> float:
        """Interpolated P(word | context); word and context already mapped."""
        return sum(
            lam * self.order_prob(j, context, word)
            for j, lam in zip(range(1, self.order + 1), self.lambdas)
        )

    def prediction_space(self) -> list[str]:
        return sorted(self.vocab) + [UNK, EOS]

    def logprob(self, sentence: Sentence) -> tuple[float, int]:
        mapped = [self.map_token(t) for t in sentence.tokens]
        padded = [BOS] * (self.order - 1) + mapped + [EOS]
        total = 0.0
        n = 0
        for i in range(self.order - 1, len(padded)):
            total += math.log(self.prob(padded[i], padded[i - self.order + 1:i]))
            n += 1
        return total, n


def train_lm(corpus: Iterable[Sentence], order: int = DEFAULT_ORDER,
             k: float = DEFAULT_K, unk_min_count: int = 2) -> NGramLM:
    return NGramLM(order=order, k=k, unk_min_count=unk_min_count).fit(corpus)


def perplexity(lm: NGramLM, sentence: Sentence) -> float:
    """exp of the negative mean log probability; always finite under add-k."""
    logp, n = lm.logprob(sentence)
    return math.exp(-logp / n)


def context_similarity(input_sentence: Sentence, output_sentence: Sentence, embedder) -> float:
    return cosine(embedder.embed(input_sentence.tokens), embedder.embed(output_sentence.tokens))


@dataclass(frozen=True)
class EvalRow:
    input: str
    output: str
    perplexity: float
    similarity: float


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]
    median_perplexity: float
    mean_similarity: float

    @property
    def n(self) -> int:
        return len(self.rows)


def evaluate(inputs: Sequence[Sentence], outputs: Sequence[Sentence],
             lm: NGramLM, embedder) -> EvalReport:
    """Per-row perplexity and similarity plus the summary statistics."""
    if len(inputs) != len(outputs):
        raise ValueError(
            f"evaluate needs aligned rows: {len(inputs)} inputs vs {len(outputs)} outputs"
        )
    rows = []
    for inp, out in zip(inputs, outputs):
        rows.append(EvalRow(
            input=inp.raw,
            output=out.raw,
            perplexity=perplexity(lm, out),
            similarity=context_similarity(inp, out, embedder),
        ))
    return EvalReport(
        rows=tuple(rows),
        median_perplexity=statistics.median(r.perplexity for r in rows),
        mean_similarity=statistics.fmean(r.similarity for r in rows),
    )


def report_to_csv(report: EvalReport, *, fraction: float | None = None) -> str:
    """CSV text; repr() float formatting keeps re-runs byte-identical."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["input", "output", "perplexity", "similarity"]
    if fraction is not None:
        header.insert(0, "fraction")
    writer.writerow(header)
    for row in report.rows:
        fields = [row.input, row.output, repr(row.perplexity), repr(row.similarity)]
        if fraction is not None:
            fields.insert(0, repr(fraction))
        writer.writerow(fields)
    return buf.getvalue()


def report_to_summary(report: EvalReport) -> dict:
    return {
        "median_perplexity": report.median_perplexity,
        "mean_similarity": report.mean_similarity,
        "n": report.n,
    }


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, separators=(",", ":")) + "\n"
