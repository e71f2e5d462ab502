"""Vocabulary, word frequencies, and the word-vector matrix.

The embedding interchange format is plain text: a header line ``V N``
followed by one ``term x1 ... xN`` row per word. Corpus frequencies live in
a companion TSV (``term<TAB>count``) because the vector file itself carries
no counts and the frequency-weighted window embedding needs them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    DegenerateQueryError,
    FormatError,
    OutOfVocabularyError,
)


@dataclass(frozen=True)
class Vocabulary:
    """Ordered terms with column ids and corpus occurrence counts."""

    words: tuple[str, ...]
    counts: dict[str, int]
    index: dict[str, int] = field(init=False, repr=False)
    total_tokens: int = field(init=False)

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise DataError("vocabulary contains duplicate terms")
        for term in self.words:
            if self.counts.get(term, 0) < 1:
                raise DataError(f"retained term {term!r} has count < 1")
        object.__setattr__(self, "index", {w: i for i, w in enumerate(self.words)})
        object.__setattr__(self, "total_tokens", sum(self.counts[w] for w in self.words))

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, term: str) -> bool:
        return term in self.index


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable word-vector matrix (dimension x vocabulary) plus vocabulary.

    Columns are stored exactly as read, never normalized: frequency-weighted
    sums downstream need the raw vectors, and cosine operations normalize on
    the fly.
    """

    vocab: Vocabulary
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if mat.ndim != 2:
            raise DataError("embedding matrix must be two-dimensional")
        if mat.shape[0] < 2:
            raise DataError("embedding dimension must be at least 2")
        if mat.shape[1] != len(self.vocab):
            raise DataError(
                f"matrix has {mat.shape[1]} columns but vocabulary has {len(self.vocab)} terms"
            )
        if not np.all(np.isfinite(mat)):
            raise DataError("embedding matrix contains NaN or Inf")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return self.matrix.shape[1]

    def vector(self, term: str) -> np.ndarray:
        """Column for ``term``; raises OutOfVocabularyError if unknown."""
        try:
            return self.matrix[:, self.vocab.index[term]]
        except KeyError:
            raise OutOfVocabularyError(f"unknown term {term!r}") from None


def load_counts(path: str | Path) -> dict[str, int]:
    """Read a ``term<TAB>count`` TSV into a dict."""
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"expected 'term<TAB>count', got {line!r}", line=lineno)
            term, raw = parts
            try:
                value = int(raw)
            except ValueError:
                raise FormatError(f"count for {term!r} is not an integer", line=lineno) from None
            if value < 0:
                raise FormatError(f"count for {term!r} is negative", line=lineno)
            if term in counts:
                raise DataError(f"duplicate term {term!r} in count file")
            counts[term] = value
    return counts


def write_counts(counts: dict[str, int], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for term, value in counts.items():
            handle.write(f"{term}\t{value}\n")


def load_embedding(path: str | Path, min_count: int = 15,
                   counts_path: str | Path | None = None) -> EmbeddingStore:
    """Parse an embedding file, filter rare terms, and build the store.

    Terms are kept when their count in the companion file is >= max(min_count, 1);
    terms absent from the count file are dropped (their frequency, needed by
    the weighting scheme, is unknown). Column order follows file order after
    filtering. Frequencies are computed over retained terms only.
    """
    path = Path(path)
    if counts_path is None:
        counts_path = path.with_suffix(".counts.tsv")
        if not counts_path.exists():
            raise DataError(
                f"no count file given and {counts_path} does not exist; "
                "pass counts_path or produce one with `datm preprocess`"
            )
    if min_count < 0:
        raise DataError("min_count must be >= 0")
    counts = load_counts(counts_path)
    threshold = max(min_count, 1)

    words: list[str] = []
    seen: set[str] = set()
    columns: list[np.ndarray] = []
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError("header must be two integers 'V N'", line=1)
        try:
            declared_v, dim = (int(p) for p in parts)
        except ValueError:
            raise FormatError("header must be two integers 'V N'", line=1) from None
        if dim < 2:
            raise FormatError("embedding dimension must be at least 2", line=1)
        n_rows = 0
        for lineno, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            n_rows += 1
            fields = line.split()
            term, values = fields[0], fields[1:]
            if len(values) != dim:
                raise FormatError(
                    f"row for {term!r} has {len(values)} values, expected {dim}",
                    line=lineno,
                )
            if term in seen:
                raise DataError(f"duplicate word {term!r} in embedding file")
            seen.add(term)
            if counts.get(term, 0) < threshold:
                continue
            try:
                vec = np.array([float(v) for v in values])
            except ValueError:
                raise FormatError(f"non-numeric value in row for {term!r}", line=lineno) from None
            words.append(term)
            columns.append(vec)
    if n_rows != declared_v:
        raise FormatError(
            f"header declares {declared_v} rows but file has {n_rows}", line=1
        )
    if not words:
        raise DataError(f"no terms retained at min_count={min_count}")
    vocab = Vocabulary(tuple(words), {w: counts[w] for w in words})
    return EmbeddingStore(vocab, np.column_stack(columns))


def write_embedding(store: EmbeddingStore, path: str | Path) -> None:
    """Serialize a store back to the interchange format (17 digit floats)."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{store.size} {store.dimension}\n")
        for i, term in enumerate(store.vocab.words):
            row = " ".join(f"{x:.17g}" for x in store.matrix[:, i])
            handle.write(f"{term} {row}\n")


def word_probability(store: EmbeddingStore, term: str) -> float:
    """Relative corpus frequency count(term) / total tokens."""
    if term not in store.vocab:
        raise OutOfVocabularyError(f"unknown term {term!r}")
    return store.vocab.counts[term] / store.vocab.total_tokens


def cosine_to_columns(store: EmbeddingStore, query: np.ndarray) -> np.ndarray:
    """Cosine of ``query`` against every column; zero columns score 0."""
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (store.dimension,):
        raise DataError(f"query must have shape ({store.dimension},)")
    if not np.all(np.isfinite(query)):
        raise DegenerateQueryError("query contains NaN or Inf")
    qnorm = np.linalg.norm(query)
    if qnorm == 0.0:
        raise DegenerateQueryError("query has zero norm")
    col_norms = np.linalg.norm(store.matrix, axis=0)
    dots = store.matrix.T @ query
    with np.errstate(divide="ignore", invalid="ignore"):
        cosines = dots / (col_norms * qnorm)
    cosines[col_norms == 0.0] = 0.0
    return cosines


def nearest_words(store: EmbeddingStore, query: np.ndarray, top: int = 25) -> list[tuple[str, float]]:
    """Top terms by cosine similarity, ties broken by ascending column id."""
    if top < 1:
        raise DataError("top must be >= 1")
    cosines = cosine_to_columns(store, query)
    order = np.lexsort((np.arange(store.size), -cosines))
    return [(store.vocab.words[i], float(cosines[i])) for i in order[:top]]
