"""Synthetic embeddings and corpora with known ground truth.

Real corpora for this kind of surveillance text are access-restricted, so
validation runs on planted models: atoms are drawn first, word vectors are
sparse combinations of them plus noise, and documents are sampled from the
emission distribution of a per-document gist. The generator keeps every
planted quantity, making it its own oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Document
from .embeddings import EmbeddingStore, Vocabulary, write_counts, write_embedding
from .errors import ConfigError, InfeasibleConfigError
from .gist import emission_distribution
from .seeding import substream


@dataclass(frozen=True)
class SynthData:
    atoms: np.ndarray                      # dims x k_true, unit columns
    store: EmbeddingStore                  # planted word vectors and counts
    supports: list[list[tuple[int, float]]]
    docs: list[Document]
    doc_topics: dict[str, int]


def generate(k_true: int, dims: int, vocab: int, t0_true: int = 3,
             noise: float = 0.01, n_docs: int = 200, doc_length: int = 60,
             gist_scale: float = 8.0, orthonormal: bool = False,
             count_floor: int = 15, seed: int = 0) -> SynthData:
    """Plant a model and sample a corpus from it.

    Atoms are random unit vectors (orthonormal via QR when requested, which
    needs k_true <= dims). Each word vector combines ``t0_true`` distinct
    atoms with coefficients uniform on [0.5, 1.5] plus isotropic Gaussian
    noise of scale ``noise``. Word counts follow a shuffled Zipf profile
    floored at ``count_floor``. Every document draws one topic; its tokens
    are sampled from the softmax emission of the scaled atom vector.
    """
    if k_true < 2:
        raise ConfigError("k_true must be >= 2")
    if dims < 2:
        raise ConfigError("dims must be >= 2")
    if k_true > vocab:
        raise InfeasibleConfigError(f"k_true={k_true} exceeds vocab={vocab}")
    if not 1 <= t0_true <= k_true:
        raise ConfigError(f"t0_true must be in [1, {k_true}]")
    if orthonormal and k_true > dims:
        raise InfeasibleConfigError("orthonormal atoms need k_true <= dims")
    if noise < 0:
        raise ConfigError("noise must be >= 0")
    rng = substream(seed, "synth")

    if orthonormal:
        raw = rng.normal(size=(dims, k_true))
        atoms, _ = np.linalg.qr(raw)
    else:
        atoms = rng.normal(size=(dims, k_true))
        atoms /= np.linalg.norm(atoms, axis=0)

    words = [f"w{i:05d}" for i in range(vocab)]
    supports: list[list[tuple[int, float]]] = []
    matrix = np.empty((dims, vocab))
    for col in range(vocab):
        chosen = np.sort(rng.choice(k_true, size=t0_true, replace=False))
        coefs = rng.uniform(0.5, 1.5, size=t0_true)
        column = atoms[:, chosen] @ coefs
        if noise > 0:
            column = column + rng.normal(0.0, noise, size=dims)
        matrix[:, col] = column
        supports.append([(int(a), float(c)) for a, c in zip(chosen, coefs)])

    ranks = rng.permutation(vocab)
    counts = {
        words[i]: count_floor + int(round(5 * vocab / (ranks[i] + 1)))
        for i in range(vocab)
    }
    store = EmbeddingStore(Vocabulary(tuple(words), counts), matrix)

    docs: list[Document] = []
    doc_topics: dict[str, int] = {}
    word_array = np.array(words)
    for d in range(n_docs):
        topic = int(rng.integers(k_true))
        probs = emission_distribution(gist_scale * atoms[:, topic], store)
        tokens = word_array[rng.choice(vocab, size=doc_length, p=probs)]
        doc_id = f"doc-{d:05d}"
        docs.append(Document(doc_id, tuple(tokens.tolist())))
        doc_topics[doc_id] = topic

    return SynthData(atoms, store, supports, docs, doc_topics)


def write_synth(data: SynthData, out_dir: str | Path) -> dict[str, str]:
    """Write the sampled corpus, embedding, counts, and ground truth files.

    Returns a name -> relative path map of everything written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    truth = out_dir / "truth"
    truth.mkdir(exist_ok=True)

    write_embedding(data.store, out_dir / "embedding.txt")
    write_counts(data.store.vocab.counts, out_dir / "counts.tsv")
    with open(out_dir / "corpus.jsonl", "w", encoding="utf-8") as handle:
        for doc in data.docs:
            handle.write(json.dumps({"id": doc.id, "text": " ".join(doc.tokens)}) + "\n")

    with open(truth / "atoms.tsv", "w", encoding="utf-8") as handle:
        for j in range(data.atoms.shape[1]):
            handle.write("\t".join(f"{x:.17g}" for x in data.atoms[:, j]) + "\n")
    with open(truth / "doc_topics.tsv", "w", encoding="utf-8") as handle:
        for doc_id, topic in data.doc_topics.items():
            handle.write(f"{doc_id}\t{topic}\n")
    with open(truth / "word_supports.tsv", "w", encoding="utf-8") as handle:
        for word, pairs in zip(data.store.vocab.words, data.supports):
            for atom_id, coefficient in pairs:
                handle.write(f"{word}\t{atom_id}\t{coefficient:.17g}\n")

    return {
        "embedding": "embedding.txt",
        "counts": "counts.tsv",
        "corpus": "corpus.jsonl",
        "truth_atoms": "truth/atoms.tsv",
        "truth_doc_topics": "truth/doc_topics.tsv",
        "truth_word_supports": "truth/word_supports.tsv",
    }


def load_truth_atoms(path: str | Path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                rows.append([float(x) for x in line.split("\t")])
    return np.array(rows).T


def load_doc_topics(path: str | Path) -> dict[str, int]:
    out = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                doc_id, topic = line.rstrip("\n").split("\t")
                out[doc_id] = int(topic)
    return out
