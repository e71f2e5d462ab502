"""Topic modeling in word-embedding space.

Learns a sparse dictionary of unit-norm atom vectors over a word-vector
matrix, interprets atoms as topics, maps documents onto topic sequences via
frequency-weighted window embeddings with global-context removal, scores
models (coherence, diversity, coverage), and projects topics onto
contrast-pair semantic dimensions.
"""

__version__ = "0.1.0"

from .corpus import (ContextWindow, Document, filter_documents, merge_phrases,
                     tokenize, windows)
from .dictionary import (AtomDictionary, FitReport, OmpCode, SparseCode, fit,
                         fit_matrix, load_model, omp_encode, reconstruct,
                         save_model)
from .dimensions import (PrevalenceRatios, SemanticDimension, build_dimension,
                         prevalence_ratio, project_topics, spearman)
from .embeddings import (EmbeddingStore, Vocabulary, load_embedding,
                         nearest_words, word_probability)
from .gist import (GistVector, GlobalContext, SifWeights, context_embed,
                   emission_distribution, estimate_global_context, local_gist)
from .metrics import QualityReport, coherence, coverage, diversity, sweep
from .topics import (PrevalenceTable, Topic, TopicAssignment, assign_window,
                     code_document, interpret_topics, merge_assignments,
                     prevalence_table)

__all__ = [
    "AtomDictionary", "ContextWindow", "Document", "EmbeddingStore",
    "FitReport", "GistVector", "GlobalContext", "OmpCode", "PrevalenceRatios",
    "PrevalenceTable", "QualityReport", "SemanticDimension", "SifWeights",
    "SparseCode", "Topic", "TopicAssignment", "Vocabulary", "assign_window",
    "build_dimension", "code_document", "coherence", "context_embed",
    "coverage", "diversity", "emission_distribution",
    "estimate_global_context", "filter_documents", "fit", "fit_matrix",
    "interpret_topics", "load_embedding", "load_model", "local_gist",
    "merge_assignments", "merge_phrases", "nearest_words", "omp_encode",
    "prevalence_ratio", "prevalence_table", "project_topics", "reconstruct",
    "save_model", "spearman", "sweep", "tokenize", "windows",
    "word_probability",
]
