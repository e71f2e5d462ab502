"""Recovering the local meaning of a window of words.

A window embeds as a frequency-weighted sum of its word vectors: frequent
words are damped by weight a / (p(w) + a). The dominant direction across
many such window embeddings captures corpus-wide syntax and frequency
effects; removing its projection from a window embedding leaves the local
gist, the vector later matched against atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ContextWindow
from .embeddings import EmbeddingStore
from .errors import ConfigError, DataError, InsufficientDataError
from .kernels import orient_sign
from .seeding import substream

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class SifWeights:
    """Smoothed inverse-frequency weights, weight(w) = a / (p(w) + a)."""

    a: float = 0.001

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError("smoothing parameter a must be > 0")

    def weight(self, probability: float) -> float:
        return self.a / (probability + self.a)


@dataclass(frozen=True)
class GlobalContext:
    """Unit direction of greatest shared variance among window embeddings."""

    c0: np.ndarray
    sample_size: int

    def __post_init__(self):
        vec = np.ascontiguousarray(self.c0, dtype=np.float64)
        if abs(np.linalg.norm(vec) - 1.0) > UNIT_NORM_TOL:
            raise DataError("global context vector must be unit norm")
        vec.setflags(write=False)
        object.__setattr__(self, "c0", vec)


@dataclass(frozen=True)
class GistVector:
    vector: np.ndarray
    window_ref: ContextWindow

    @property
    def is_degenerate(self) -> bool:
        return not np.any(self.vector)


def context_embed(window: ContextWindow, store: EmbeddingStore,
                  weights: SifWeights) -> np.ndarray:
    """Weighted sum of the window's word vectors.

    Repeated words contribute once per occurrence; out-of-vocabulary words
    contribute nothing, so an all-OOV window embeds to the zero vector.
    """
    total = np.zeros(store.dimension)
    counts = store.vocab.counts
    denom = store.vocab.total_tokens
    index = store.vocab.index
    for term in window.terms:
        col = index.get(term)
        if col is None:
            continue
        total += weights.weight(counts[term] / denom) * store.matrix[:, col]
    return total


def estimate_global_context(windows: list[ContextWindow], store: EmbeddingStore,
                            weights: SifWeights, sample_cap: int = 50_000,
                            seed: int = 0, centered: bool = False) -> GlobalContext:
    """First singular direction of stacked window embeddings.

    Draws a seeded uniform sample of at most ``sample_cap`` windows, embeds
    them, and takes the leading eigenvector of the (uncentered by default)
    second-moment matrix. Sign fixed so the largest-magnitude entry is
    positive.
    """
    if sample_cap < 2:
        raise ConfigError("sample_cap must be >= 2")
    if len(windows) > sample_cap:
        rng = substream(seed, "sampling")
        keep = np.sort(rng.choice(len(windows), size=sample_cap, replace=False))
        windows = [windows[i] for i in keep]
    rows = []
    for window in windows:
        vec = context_embed(window, store, weights)
        if np.any(vec):
            rows.append(vec)
    if len(rows) < 2:
        raise InsufficientDataError(
            f"need at least 2 windows with nonzero embeddings, got {len(rows)}"
        )
    stacked = np.array(rows)
    if centered:
        stacked = stacked - stacked.mean(axis=0)
    moment = stacked.T @ stacked
    _, vectors = np.linalg.eigh(moment)
    direction, _ = orient_sign(vectors[:, -1])
    return GlobalContext(direction / np.linalg.norm(direction), len(rows))


def local_gist(window: ContextWindow, store: EmbeddingStore, weights: SifWeights,
               global_context: GlobalContext) -> GistVector:
    """Window embedding with its projection on the global direction removed."""
    vec = context_embed(window, store, weights)
    c0 = global_context.c0
    return GistVector(vec - (vec @ c0) * c0, window)


def emission_distribution(point: np.ndarray, store: EmbeddingStore) -> np.ndarray:
    """Softmax over inner products of ``point`` with every word vector.

    Max-subtraction keeps the exponentials finite for logit ranges far
    beyond overflow. The zero point gives the uniform distribution.
    """
    point = np.asarray(point, dtype=np.float64)
    if not np.all(np.isfinite(point)):
        raise DataError("point contains NaN or Inf")
    logits = store.matrix.T @ point
    logits -= logits.max()
    probs = np.exp(logits)
    return probs / probs.sum()
