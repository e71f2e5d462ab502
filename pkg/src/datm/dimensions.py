"""Contrast-pair semantic dimensions and topic loadings.

A dimension is the mean vector of one word list minus the mean vector of an
opposing list (e.g. feminine minus masculine terms). Topics load onto the
dimension by cosine similarity; loadings can then be compared with how
often topics occur in two groups of documents.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import stdtr

from .dictionary import AtomDictionary
from .embeddings import EmbeddingStore
from .errors import ConfigError, DataError, MissingTermsError, NumericError
from .topics import TopicAssignment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SemanticDimension:
    name: str
    positive_terms: tuple[str, ...]
    negative_terms: tuple[str, ...]
    vector: np.ndarray


def build_dimension(store: EmbeddingStore, positive: list[str], negative: list[str],
                    name: str = "dimension") -> SemanticDimension:
    """Mean of resolved positive vectors minus mean of resolved negatives.

    Terms missing from the vocabulary are skipped with a warning (corpora
    differ); a side that resolves no terms at all is an error, as is a
    contrast whose two means coincide.
    """
    if not positive or not negative:
        raise ConfigError("both term lists must be non-empty")

    def resolve(terms, side):
        found, vectors = [], []
        for term in terms:
            if term in store.vocab:
                found.append(term)
                vectors.append(store.vector(term))
            else:
                log.warning("dimension %s: %s term %r not in vocabulary", name, side, term)
        if not vectors:
            raise MissingTermsError(f"no {side} terms of dimension {name!r} are in the vocabulary")
        return found, np.mean(vectors, axis=0)

    pos_found, pos_mean = resolve(positive, "positive")
    neg_found, neg_mean = resolve(negative, "negative")
    vector = pos_mean - neg_mean
    if not np.any(vector):
        raise NumericError(f"dimension {name!r} is the zero vector; the contrast is degenerate")
    return SemanticDimension(name, tuple(pos_found), tuple(neg_found), vector)


def project_topics(dimension: SemanticDimension, dictionary: AtomDictionary) -> np.ndarray:
    """Cosine of every atom with the dimension vector (positive pole first list)."""
    nrm = np.linalg.norm(dimension.vector)
    if nrm == 0.0:
        raise NumericError("dimension vector has zero norm")
    return dictionary.atoms.T @ (dimension.vector / nrm)


@dataclass(frozen=True)
class PrevalenceRatios:
    """Per-topic presence fractions in two groups and their ratio A / B.

    Ratios with a zero denominator are NaN (undefined) and are dropped
    pairwise by downstream correlation.
    """

    fraction_a: np.ndarray
    fraction_b: np.ndarray
    ratio: np.ndarray


def prevalence_ratio(assignments: list[TopicAssignment],
                     group_of: Mapping[str, bool], k: int) -> PrevalenceRatios:
    """Presence fraction in group True over presence fraction in group False."""
    n_a = n_b = 0
    hits_a = np.zeros(k)
    hits_b = np.zeros(k)
    for assignment in assignments:
        if assignment.doc_id not in group_of:
            raise DataError(f"doc id {assignment.doc_id!r} has no group flag")
        in_a = bool(group_of[assignment.doc_id])
        if in_a:
            n_a += 1
        else:
            n_b += 1
        for atom_id in assignment.presence:
            if in_a:
                hits_a[atom_id] += 1
            else:
                hits_b[atom_id] += 1
    if n_a == 0 or n_b == 0:
        raise ConfigError("both groups must be non-empty")
    fraction_a = hits_a / n_a
    fraction_b = hits_b / n_b
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(fraction_b > 0, fraction_a / fraction_b, np.nan)
    return PrevalenceRatios(fraction_a, fraction_b, ratio)


def rank_with_ties(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the average of their rank block."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> tuple[float, float]:
    """Rank correlation with average-rank ties and a t-approximation p-value.

    Pairs where either entry is NaN are dropped. The p-value is two-sided,
    from t = rho * sqrt((n-2) / (1-rho^2)) with n-2 degrees of freedom.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("inputs must be equal-length 1-D sequences")
    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = x[keep], y[keep]
    n = len(x)
    if n < 3:
        raise DataError(f"need at least 3 usable pairs, got {n}")
    rx = rank_with_ties(x)
    ry = rank_with_ties(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise NumericError("correlation undefined for constant input")
    rho = float(dx @ dy) / math.sqrt(sx * sy)
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(stdtr(n - 2, -abs(t)))
    return rho, p
