"""Discourse-aware evaluation metrics and their meta-evaluation.

The package scores system outputs against references through the lens of
the reader's focus of attention: ``ds_focus`` compares focus embeddings
(lower = better), ``ds_sent`` compares graph-aggregated sentence
embeddings (higher = better). Five feature-based discourse baselines and
a correlation harness against human ratings round out the toolkit.
"""

from .corpus import (
    AnnotatedDocument,
    DatasetError,
    RatedInstance,
    Token,
    load_dataset,
    segment_plaintext,
)
from .embeddings import (
    EmbeddingClient,
    StaticLexicon,
    cosine,
    load_embedding_file,
    load_static_lexicon,
)
from .focus import Focus, FocusBipartite, common_foci, extract_entity_foci, extract_nn_foci
from .focusdiff import (
    FocusedDoc,
    MetricScore,
    NoFociError,
    ds_focus,
    ds_focus_multi_ref,
    ds_focus_pair,
    focus_embeddings,
)
from .harness import (
    METRICS,
    CorrelationReport,
    EmbeddingLookup,
    ScoreOptions,
    kendall,
    pearson,
    score_corpus,
    system_scores,
)
from .sentgraph import SentenceGraph, build_sentence_graph, ds_sent, graph_embedding

__version__ = "0.1.0"

__all__ = [
    "AnnotatedDocument",
    "CorrelationReport",
    "DatasetError",
    "EmbeddingClient",
    "EmbeddingLookup",
    "Focus",
    "FocusBipartite",
    "FocusedDoc",
    "METRICS",
    "MetricScore",
    "NoFociError",
    "RatedInstance",
    "ScoreOptions",
    "SentenceGraph",
    "StaticLexicon",
    "Token",
    "build_sentence_graph",
    "common_foci",
    "cosine",
    "ds_focus",
    "ds_focus_multi_ref",
    "ds_focus_pair",
    "ds_sent",
    "extract_entity_foci",
    "extract_nn_foci",
    "focus_embeddings",
    "graph_embedding",
    "kendall",
    "load_dataset",
    "load_embedding_file",
    "load_static_lexicon",
    "pearson",
    "score_corpus",
    "segment_plaintext",
    "system_scores",
    "__version__",
]
