"""Model quality: topic coherence, diversity, and reconstruction coverage."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dictionary import AtomDictionary, SparseCode, fit, reconstruct
from .embeddings import EmbeddingStore
from .errors import ConfigError, DatmError, NumericError
from .topics import Topic, interpret_topics

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QualityReport:
    k: int
    t0: int
    seed: int
    coherence: float
    diversity: float
    coverage: float
    sse: float
    rmse: float


def _unit_term_vectors(topic: Topic, store: EmbeddingStore, top: int) -> np.ndarray:
    if len(topic.top_terms) < 2 or top > len(topic.top_terms):
        raise NumericError(
            f"topic {topic.atom_id} has {len(topic.top_terms)} terms, need {max(top, 2)}"
        )
    vectors = np.column_stack([store.vector(term) for term, _ in topic.top_terms[:top]])
    norms = np.linalg.norm(vectors, axis=0)
    if np.any(norms == 0):
        raise NumericError(f"topic {topic.atom_id} has a zero-norm term vector")
    return vectors / norms


def coherence(topics: list[Topic], store: EmbeddingStore, top: int = 25,
              pooled: bool = False) -> float:
    """Mean pairwise cosine similarity among each topic's top terms.

    By default per-topic means are averaged; ``pooled=True`` averages over
    all pairs of all topics in one pool instead.
    """
    if top < 2:
        raise ConfigError("top must be >= 2 for pairwise similarity")
    per_topic_sums = []
    n_pairs = top * (top - 1) // 2
    for topic in topics:
        unit = _unit_term_vectors(topic, store, top)
        gram = unit.T @ unit
        pair_sum = (gram.sum() - np.trace(gram)) / 2.0
        per_topic_sums.append(pair_sum)
    if pooled:
        return float(sum(per_topic_sums) / (n_pairs * len(topics)))
    return float(np.mean([s / n_pairs for s in per_topic_sums]))


def diversity(topics: list[Topic], top: int = 25) -> float:
    """Fraction of unique terms across all topics' top-term lists."""
    if top < 1:
        raise ConfigError("top must be >= 1")
    seen: set[str] = set()
    for topic in topics:
        if len(topic.top_terms) < top:
            raise NumericError(
                f"topic {topic.atom_id} has only {len(topic.top_terms)} terms, need {top}"
            )
        seen.update(term for term, _ in topic.top_terms[:top])
    return len(seen) / (len(topics) * top)


def sse_of(embedding: EmbeddingStore, dictionary: AtomDictionary,
           code: SparseCode) -> float:
    diff = embedding.matrix - reconstruct(dictionary, code)
    return float(np.einsum("ij,ij->", diff, diff))


def coverage(embedding: EmbeddingStore, dictionary: AtomDictionary,
             code: SparseCode) -> float:
    """Proportion of embedding variance explained by the reconstruction.

    R^2 = 1 - SSE / SST with SST the squared deviation of word vectors from
    their mean. Negative values are possible for models worse than the mean
    predictor.
    """
    mean = embedding.matrix.mean(axis=1, keepdims=True)
    centered = embedding.matrix - mean
    sst = float(np.einsum("ij,ij->", centered, centered))
    if sst == 0.0:
        raise NumericError("all word vectors are identical; variance is zero")
    return 1.0 - sse_of(embedding, dictionary, code) / sst


def sweep(embedding: EmbeddingStore, k_grid: list[int], t0: int = 5,
          max_iter: int = 10, seeds: list[int] | None = None, top: int = 25,
          backend: str = "auto",
          pooled: bool = False) -> tuple[list[QualityReport], list[tuple[int, int, str]]]:
    """Fit one model per (k, seed) and score it on all quality metrics.

    Failures for a particular k are reported and skipped so the rest of the
    grid still completes. Returns (reports, failures).
    """
    seeds = seeds if seeds is not None else [0]
    reports: list[QualityReport] = []
    failures: list[tuple[int, int, str]] = []
    n, v = embedding.dimension, embedding.size
    for k in k_grid:
        for seed in seeds:
            try:
                dictionary, code, fit_report = fit(embedding, k, t0,
                                                   max_iter=max_iter, seed=seed,
                                                   backend=backend)
                topics = interpret_topics(dictionary, embedding, top)
                sse = fit_report.sse_per_iteration[-1]
                reports.append(QualityReport(
                    k=k, t0=t0, seed=seed,
                    coherence=coherence(topics, embedding, top, pooled),
                    diversity=diversity(topics, top),
                    coverage=coverage(embedding, dictionary, code),
                    sse=sse,
                    rmse=float(np.sqrt(sse / (n * v))),
                ))
            except DatmError as exc:
                log.warning("sweep failed at k=%d seed=%d: %s", k, seed, exc)
                failures.append((k, seed, str(exc)))
    return reports, failures


def knee_candidate(ks: list[int], values: list[float]) -> int | None:
    """K with the largest distance to the chord between the curve endpoints.

    A rough elbow marker for inspection; model selection itself stays a
    human judgment over all metrics.
    """
    if len(ks) < 3:
        return None
    order = np.argsort(ks)
    x = np.asarray(ks, dtype=float)[order]
    y = np.asarray(values, dtype=float)[order]
    x_span = x[-1] - x[0]
    y_span = y[-1] - y[0]
    if x_span == 0:
        return None
    x_hat = (x - x[0]) / x_span
    y_hat = (y - y[0]) / y_span if y_span != 0 else np.zeros_like(y)
    distance = np.abs(y_hat - x_hat) / np.sqrt(2.0)
    return int(x[int(np.argmax(distance))])
