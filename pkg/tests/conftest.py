import math

import numpy as np
import pytest

from datm import kernels
from datm.embeddings import EmbeddingStore, Vocabulary

BACKENDS = ["pure"] + (["compiled"] if kernels.compiled_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def make_store(matrix, words=None, counts=None) -> EmbeddingStore:
    """Build a store from a raw matrix, defaulting words and counts."""
    matrix = np.asarray(matrix, dtype=np.float64)
    v = matrix.shape[1]
    if words is None:
        words = [f"w{i}" for i in range(v)]
    if counts is None:
        counts = {w: 1 for w in words}
    return EmbeddingStore(Vocabulary(tuple(words), dict(counts)), matrix)


@pytest.fixture
def store_factory():
    return make_store


def brute_force_ranking(store, query):
    """Independent cosine ranking oracle: per-word arithmetic, explicit sort."""
    scores = []
    qnorm = math.sqrt(math.fsum(float(x) * float(x) for x in query))
    for i, word in enumerate(store.vocab.words):
        col = store.matrix[:, i]
        dot = math.fsum(float(a) * float(b) for a, b in zip(col, query))
        nrm = math.sqrt(math.fsum(float(x) * float(x) for x in col))
        scores.append((word, dot / (nrm * qnorm) if nrm > 0 else 0.0))
    order = sorted(range(len(scores)), key=lambda i: (-scores[i][1], i))
    return [scores[i] for i in order]
