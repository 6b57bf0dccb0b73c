"""DS-Sent: cosine between graph-level document embeddings (higher = better).

Sentences form a graph whose strictly-upper-triangular adjacency encodes
focus transitions: two sentences are connected when they share a focus,
with the connection discounted by sentence distance. The ``unweighted``
variant scores a connected pair 1/(j-i); the ``weighted`` variant scales
that by the number of shared foci. Sentence embeddings are aggregated
through the adjacency (plus a self-loop) and summarized into a single
vector by concatenating column-wise mean, max, min and sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import AnnotatedDocument
from .embeddings import EmbeddingError, StaticLexicon, cosine
from .focus import ENTITY, NN, FocusBipartite, extract_entity_foci, extract_nn_foci
from .focusdiff import AVERAGE, MAX_SCORE, MetricScore

UNWEIGHTED = "unweighted"
WEIGHTED = "weighted"


class ZeroGraphEmbedding(ValueError):
    """A document's graph embedding has zero norm; cosine is undefined."""

    def __init__(self, doc_id: str):
        super().__init__(f"zero-norm graph embedding for document {doc_id!r}")
        self.doc_id = doc_id


@dataclass(frozen=True)
class SentenceGraph:
    """Strictly-upper-triangular weighted adjacency over sentences."""

    adjacency: np.ndarray
    variant: str
    focus_choice: str

    @property
    def sentence_count(self) -> int:
        return self.adjacency.shape[0]


def shared_focus_counts(doc: AnnotatedDocument, bipartite: FocusBipartite) -> np.ndarray:
    """counts[i, j] (j > i) = number of foci with member tokens in both
    sentence i and sentence j."""
    n = doc.sentence_count
    counts = np.zeros((n, n), dtype=np.int64)
    sentence_sets: list[set[int]] = []
    for focus in bipartite.foci:
        sentence_sets.append({doc.tokens[t].sentence_index for t in focus.members})
    for sentences in sentence_sets:
        ordered = sorted(sentences)
        for a in range(len(ordered)):
            for b in range(a + 1, len(ordered)):
                counts[ordered[a], ordered[b]] += 1
    return counts


def build_sentence_graph(
    doc: AnnotatedDocument, bipartite: FocusBipartite, variant: str = UNWEIGHTED
) -> SentenceGraph:
    if variant not in (UNWEIGHTED, WEIGHTED):
        raise ValueError(f"unknown sentence-graph variant: {variant!r}")
    counts = shared_focus_counts(doc, bipartite)
    n = doc.sentence_count
    adjacency = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            if counts[i, j] > 0:
                weight = 1.0 if variant == UNWEIGHTED else float(counts[i, j])
                adjacency[i, j] = weight / (j - i)
    return SentenceGraph(adjacency=adjacency, variant=variant, focus_choice=bipartite.choice)


def sentence_embeddings(
    doc: AnnotatedDocument,
    token_embeddings: np.ndarray | None = None,
    *,
    sentence_vectors: np.ndarray | None = None,
) -> np.ndarray:
    """Per-sentence vectors: externally supplied ones pass through
    unchanged, otherwise each sentence is the mean of its token rows."""
    if sentence_vectors is not None:
        S = np.asarray(sentence_vectors, dtype=np.float64)
        if S.ndim != 2 or S.shape[0] != doc.sentence_count:
            raise EmbeddingError(
                f"expected {doc.sentence_count} sentence vectors, "
                f"got shape {S.shape}"
            )
        return S
    if token_embeddings is None:
        raise EmbeddingError("either token embeddings or sentence vectors are required")
    Z = np.asarray(token_embeddings, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] != doc.token_count:
        raise EmbeddingError(
            f"embedding rows {Z.shape} do not match token count {doc.token_count}"
        )
    rows = []
    for start, end in doc.sentences:
        if end <= start:
            raise EmbeddingError("empty sentence span")
        rows.append(Z[start:end].mean(axis=0))
    return np.stack(rows)


def aggregate(S: np.ndarray, adjacency: np.ndarray) -> np.ndarray:
    """Mix each sentence with its focus-connected successors:
    (adjacency + identity) @ S."""
    S = np.asarray(S, dtype=np.float64)
    A = np.asarray(adjacency, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got {A.shape}")
    if S.ndim != 2 or S.shape[0] != A.shape[0]:
        raise ValueError(f"shape mismatch: adjacency {A.shape} vs embeddings {S.shape}")
    return (A + np.eye(A.shape[0])) @ S


def graph_embedding(aggregated: np.ndarray) -> np.ndarray:
    """Concatenated column statistics (mean, max, min, sum) of the
    aggregated sentence matrix; length 4d."""
    M = np.asarray(aggregated, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] == 0:
        raise ValueError("aggregated sentence matrix must be non-empty and 2-D")
    return np.concatenate(
        [M.mean(axis=0), M.max(axis=0), M.min(axis=0), M.sum(axis=0)]
    )


def _bipartite_for(
    doc: AnnotatedDocument,
    focus_choice: str,
    lexicon: StaticLexicon | None,
    threshold: float,
) -> FocusBipartite:
    if focus_choice == NN:
        return extract_nn_foci(doc)
    if focus_choice == ENTITY:
        if lexicon is None:
            raise ValueError("entity focus requires a static lexicon")
        return extract_entity_foci(doc, lexicon, threshold)
    raise ValueError(f"unknown focus choice: {focus_choice!r}")


def document_graph_embedding(
    doc: AnnotatedDocument,
    token_embeddings: np.ndarray | None,
    *,
    variant: str = UNWEIGHTED,
    focus_choice: str = NN,
    lexicon: StaticLexicon | None = None,
    threshold: float = 0.8,
    sentence_vectors: np.ndarray | None = None,
) -> np.ndarray:
    """Full pipeline for one document: foci, sentence graph, aggregation,
    graph embedding."""
    bipartite = _bipartite_for(doc, focus_choice, lexicon, threshold)
    graph = build_sentence_graph(doc, bipartite, variant)
    S = sentence_embeddings(doc, token_embeddings, sentence_vectors=sentence_vectors)
    return graph_embedding(aggregate(S, graph.adjacency))


def ds_sent(
    hyp_doc: AnnotatedDocument,
    ref_doc: AnnotatedDocument,
    hyp_embeddings: np.ndarray | None,
    ref_embeddings: np.ndarray | None,
    *,
    variant: str = UNWEIGHTED,
    focus_choice: str = NN,
    lexicon: StaticLexicon | None = None,
    threshold: float = 0.8,
    hyp_sentence_vectors: np.ndarray | None = None,
    ref_sentence_vectors: np.ndarray | None = None,
) -> float:
    """Cosine similarity between the two documents' graph embeddings."""
    g_hyp = document_graph_embedding(
        hyp_doc, hyp_embeddings, variant=variant, focus_choice=focus_choice,
        lexicon=lexicon, threshold=threshold, sentence_vectors=hyp_sentence_vectors,
    )
    g_ref = document_graph_embedding(
        ref_doc, ref_embeddings, variant=variant, focus_choice=focus_choice,
        lexicon=lexicon, threshold=threshold, sentence_vectors=ref_sentence_vectors,
    )
    if not np.any(g_hyp):
        raise ZeroGraphEmbedding(hyp_doc.doc_id)
    if not np.any(g_ref):
        raise ZeroGraphEmbedding(ref_doc.doc_id)
    return cosine(g_hyp, g_ref)


def ds_sent_multi_ref(
    hyp_doc: AnnotatedDocument,
    ref_docs: Sequence[AnnotatedDocument],
    hyp_embeddings: np.ndarray | None,
    ref_embeddings: Sequence[np.ndarray | None],
    mode: str = AVERAGE,
    **kwargs,
) -> MetricScore:
    """Score against every reference; ``average`` means, ``max`` keeps the
    highest cosine."""
    if not ref_docs:
        raise ValueError("at least one reference is required")
    sentence_vectors = kwargs.pop("ref_sentence_vectors", None)
    values = []
    for i, ref_doc in enumerate(ref_docs):
        ref_vecs = sentence_vectors[i] if sentence_vectors is not None else None
        values.append(
            ds_sent(
                hyp_doc, ref_doc, hyp_embeddings, ref_embeddings[i],
                ref_sentence_vectors=ref_vecs, **kwargs,
            )
        )
    if mode == AVERAGE:
        return MetricScore(float(np.mean(values)))
    if mode == MAX_SCORE:
        return MetricScore(float(max(values)))
    raise ValueError(f"unknown multi-reference mode: {mode!r}")
