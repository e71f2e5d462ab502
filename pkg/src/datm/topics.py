"""Atoms as topics: interpretation, window assignment, and document coding."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import Document, windows
from .dictionary import AtomDictionary
from .embeddings import EmbeddingStore, nearest_words
from .errors import ConfigError, DataError, FormatError, JoinError
from .gist import GistVector, GlobalContext, SifWeights, local_gist


@dataclass(frozen=True)
class Topic:
    atom_id: int
    vector: np.ndarray
    top_terms: tuple[tuple[str, float], ...]
    label: str | None = None


@dataclass(frozen=True)
class TopicAssignment:
    """A document as a sequence of topics.

    ``sequence`` holds (window offset, atom id, cosine) in document order.
    ``distribution`` is sparse (atom id -> weight) and empty when every
    window was degenerate. ``presence`` marks topics occurring at least once.
    """

    doc_id: str
    sequence: tuple[tuple[int, int, float], ...]
    distribution: dict[int, float]
    presence: frozenset[int]

    @property
    def is_degenerate(self) -> bool:
        return not self.distribution


def interpret_topics(dictionary: AtomDictionary, store: EmbeddingStore,
                     top: int = 25,
                     labels: Mapping[int, str] | None = None) -> list[Topic]:
    """Describe each atom by its nearest words in cosine similarity."""
    if top < 1:
        raise ConfigError("top must be >= 1")
    labels = labels or {}
    out = []
    for atom_id in range(dictionary.k):
        terms = nearest_words(store, dictionary.atom(atom_id), top)
        out.append(Topic(atom_id, dictionary.atom(atom_id), tuple(terms),
                         labels.get(atom_id)))
    return out


def assign_window(gist: GistVector, dictionary: AtomDictionary) -> tuple[int, float] | None:
    """Atom with the highest cosine to the gist; None for a zero gist.

    Ties break toward the lowest atom id. Atoms are unit norm, so the
    cosine is the inner product divided by the gist norm.
    """
    vec = gist.vector
    nrm = np.linalg.norm(vec)
    if nrm == 0.0:
        return None
    sims = dictionary.atoms.T @ (vec / nrm)
    best = int(np.argmax(sims))
    return best, float(sims[best])


def code_document(doc: Document, store: EmbeddingStore, weights: SifWeights,
                  global_context: GlobalContext, dictionary: AtomDictionary,
                  window_length: int = 10, stride: int = 1,
                  count_mode: str = "window") -> TopicAssignment:
    """Code a document as a topic sequence, distribution, and presence set.

    Each window's gist is matched to its nearest atom. Degenerate windows
    (all OOV, or parallel to the global direction) are dropped from the
    distribution denominator. ``count_mode="run"`` collapses consecutive
    repeats of the same topic before counting, de-overlapping the rolling
    windows; the default counts every window once.
    """
    if count_mode not in ("window", "run"):
        raise ConfigError("count_mode must be 'window' or 'run'")
    sequence: list[tuple[int, int, float]] = []
    for window in windows(doc, window_length, stride):
        gist = local_gist(window, store, weights, global_context)
        hit = assign_window(gist, dictionary)
        if hit is None:
            continue
        sequence.append((window.start, hit[0], hit[1]))
    counts: dict[int, int] = {}
    previous = None
    for _, atom_id, _ in sequence:
        if count_mode == "run" and atom_id == previous:
            continue
        counts[atom_id] = counts.get(atom_id, 0) + 1
        previous = atom_id
    total = sum(counts.values())
    distribution = {a: c / total for a, c in counts.items()} if total else {}
    return TopicAssignment(doc.id, tuple(sequence), distribution,
                           frozenset(counts))


def merge_assignments(assignments: list[TopicAssignment],
                      record_of: Mapping[str, str]) -> list[TopicAssignment]:
    """Union assignments that share a record id (e.g. two reports per case).

    Sequences concatenate in input order, the distribution is recomputed
    from the combined window counts, and presence is the union.
    """
    order: list[str] = []
    grouped: dict[str, list[TopicAssignment]] = {}
    for assignment in assignments:
        if assignment.doc_id not in record_of:
            raise JoinError(f"doc id {assignment.doc_id!r} has no record id")
        rec = record_of[assignment.doc_id]
        if rec not in grouped:
            grouped[rec] = []
            order.append(rec)
        grouped[rec].append(assignment)
    merged = []
    for rec in order:
        sequence: list[tuple[int, int, float]] = []
        counts: dict[int, int] = {}
        for assignment in grouped[rec]:
            sequence.extend(assignment.sequence)
            for _, atom_id, _ in assignment.sequence:
                counts[atom_id] = counts.get(atom_id, 0) + 1
        total = sum(counts.values())
        distribution = {a: c / total for a, c in counts.items()} if total else {}
        merged.append(TopicAssignment(rec, tuple(sequence), distribution,
                                      frozenset(counts)))
    return merged


@dataclass(frozen=True)
class PrevalenceTable:
    """Per-group fraction of documents in which each topic occurs."""

    groups: tuple[str, ...]
    fractions: np.ndarray  # shape (len(groups), k)

    def standardized(self) -> np.ndarray:
        """Z-score each topic across groups; constant topics map to 0."""
        mean = self.fractions.mean(axis=0)
        std = self.fractions.std(axis=0)
        out = np.zeros_like(self.fractions)
        ok = std > 0
        out[:, ok] = (self.fractions[:, ok] - mean[ok]) / std[ok]
        return out


def prevalence_table(assignments: list[TopicAssignment],
                     groups: Mapping[str, str], k: int) -> PrevalenceTable:
    if k < 1:
        raise ConfigError("k must be >= 1")
    labels = sorted(set(groups.values()))
    row_of = {g: i for i, g in enumerate(labels)}
    doc_totals = np.zeros(len(labels))
    hits = np.zeros((len(labels), k))
    for assignment in assignments:
        if assignment.doc_id not in groups:
            raise JoinError(f"doc id {assignment.doc_id!r} has no group label")
        row = row_of[groups[assignment.doc_id]]
        doc_totals[row] += 1
        for atom_id in assignment.presence:
            if atom_id >= k:
                raise DataError(f"assignment references atom {atom_id} >= k={k}")
            hits[row, atom_id] += 1
    if np.any(doc_totals == 0):
        raise DataError("every group must contain at least one document")
    return PrevalenceTable(tuple(labels), hits / doc_totals[:, None])


def write_assignments(assignments: list[TopicAssignment], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for a in assignments:
            obj = {
                "id": a.doc_id,
                "sequence": [[off, atom, cos] for off, atom, cos in a.sequence],
                "distribution": {str(atom): w for atom, w in sorted(a.distribution.items())},
                "presence": sorted(a.presence),
            }
            handle.write(json.dumps(obj) + "\n")


def read_assignments(path: str | Path) -> list[TopicAssignment]:
    out = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise FormatError("invalid JSON object", line=lineno) from None
            sequence = tuple((int(o), int(a), float(c)) for o, a, c in obj["sequence"])
            distribution = {int(a): float(w) for a, w in obj["distribution"].items()}
            out.append(TopicAssignment(str(obj["id"]), sequence, distribution,
                                       frozenset(int(a) for a in obj["presence"])))
    return out


def write_topics(topics: list[Topic], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("atom_id\trank\tterm\tcosine\n")
        for topic in topics:
            for rank, (term, cosine) in enumerate(topic.top_terms, start=1):
                handle.write(f"{topic.atom_id}\t{rank}\t{term}\t{cosine:.17g}\n")


def read_labels(path: str | Path) -> dict[int, str]:
    """Read human-assigned topic labels: ``atom_id<TAB>label`` lines."""
    labels: dict[int, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError("expected 'atom_id<TAB>label'", line=lineno)
            try:
                atom_id = int(parts[0])
            except ValueError:
                raise FormatError(f"atom id {parts[0]!r} is not an integer", line=lineno) from None
            labels[atom_id] = parts[1]
    return labels
