"""Tokenization, phrase merging, document filtering, and context windows."""

from __future__ import annotations

import json
import math
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, FormatError

# Stripped only at token boundaries; underscores encode merged phrases and
# internal hyphens/apostrophes stay (drug names, gun models, contractions).
_BOUNDARY_PUNCT = (
    "".join(ch for ch in string.punctuation if ch != "_")
    + "‘’“”–—…"
)


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class ContextWindow:
    doc_id: str
    start: int
    terms: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.terms)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace, stripping boundary punctuation."""
    out = []
    for raw in text.lower().split():
        term = raw.strip(_BOUNDARY_PUNCT)
        if term:
            out.append(term)
    return out


def _pair_score(pair_count: int, count_a: int, count_b: int,
                total_tokens: int, min_pair_count: int) -> float:
    return (pair_count - min_pair_count) * total_tokens / (count_a * count_b)


def merge_phrases(docs: list[Document], threshold: float = 10.0,
                  min_pair_count: int = 5, passes: int = 1) -> list[Document]:
    """Rewrite high-scoring adjacent pairs as single ``a_b`` terms.

    A pair merges when (count(ab) - min_pair_count) * T / (count(a) * count(b))
    exceeds ``threshold``, with T the corpus token total. Each pass rewrites
    left to right without overlaps; a second pass promotes bigrams into
    trigrams and beyond.
    """
    if threshold <= 0:
        raise ConfigError("threshold must be > 0")
    if passes < 1:
        raise ConfigError("passes must be >= 1")
    for _ in range(passes):
        unigrams: Counter[str] = Counter()
        pairs: Counter[tuple[str, str]] = Counter()
        for doc in docs:
            unigrams.update(doc.tokens)
            pairs.update(zip(doc.tokens, doc.tokens[1:]))
        total = sum(unigrams.values())
        merged_docs = []
        for doc in docs:
            tokens = doc.tokens
            out: list[str] = []
            i = 0
            while i < len(tokens):
                if i + 1 < len(tokens):
                    a, b = tokens[i], tokens[i + 1]
                    score = _pair_score(pairs[(a, b)], unigrams[a], unigrams[b],
                                        total, min_pair_count)
                    if score > threshold:
                        out.append(f"{a}_{b}")
                        i += 2
                        continue
                out.append(tokens[i])
                i += 1
            merged_docs.append(Document(doc.id, tuple(out)))
        docs = merged_docs
    return docs


def filter_documents(docs: list[Document], min_terms: int = 50) -> list[Document]:
    """Keep documents with at least ``min_terms`` tokens."""
    if min_terms < 0:
        raise ConfigError("min_terms must be >= 0")
    return [d for d in docs if d.token_count >= min_terms]


def term_counts(docs: list[Document]) -> dict[str, int]:
    counts: Counter[str] = Counter()
    for doc in docs:
        counts.update(doc.tokens)
    return dict(counts)


def windows(doc: Document, length: int = 10, stride: int = 1) -> list[ContextWindow]:
    """Rolling context windows over the document's token stream.

    Full windows start at offsets 0, stride, 2*stride, ... A final shorter
    window at the next offset is emitted when at least ceil(length/2) tokens
    would otherwise stay uncovered. Documents shorter than ``length`` yield
    a single window of all tokens.
    """
    if length < 1:
        raise ConfigError("window length must be >= 1")
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    n = doc.token_count
    if n == 0:
        return []
    if n < length:
        return [ContextWindow(doc.id, 0, doc.tokens)]
    out = []
    offset = 0
    for offset in range(0, n - length + 1, stride):
        out.append(ContextWindow(doc.id, offset, doc.tokens[offset:offset + length]))
    uncovered = n - (offset + length)
    tail = offset + stride
    if uncovered >= math.ceil(length / 2) and tail < n:
        out.append(ContextWindow(doc.id, tail, doc.tokens[tail:]))
    return out


def read_corpus(path: str | Path) -> list[tuple[str, str]]:
    """Read raw documents as (id, text) pairs.

    JSON Lines with ``id`` and ``text`` fields when the file looks like
    JSONL, otherwise plain text with one document per line and the 1-based
    line number as id.
    """
    path = Path(path)
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as handle:
        first = handle.readline()
        is_jsonl = first.lstrip().startswith("{")
        handle.seek(0)
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            if is_jsonl:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    raise FormatError("invalid JSON object", line=lineno) from None
                if "id" not in obj or "text" not in obj:
                    raise FormatError("object must have 'id' and 'text'", line=lineno)
                pairs.append((str(obj["id"]), str(obj["text"])))
            else:
                pairs.append((str(lineno), line.rstrip("\n")))
    return pairs


def read_tokens(path: str | Path) -> list[Document]:
    """Read a tokenized corpus (JSONL with ``id`` and ``tokens``)."""
    docs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise FormatError("invalid JSON object", line=lineno) from None
            if "id" not in obj or "tokens" not in obj:
                raise FormatError("object must have 'id' and 'tokens'", line=lineno)
            docs.append(Document(str(obj["id"]), tuple(str(t) for t in obj["tokens"])))
    return docs


def write_tokens(docs: list[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write(json.dumps({"id": doc.id, "tokens": list(doc.tokens)}) + "\n")
