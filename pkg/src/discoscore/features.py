"""Discourse features of a single text and their discriminative power.

``freq`` is the mean occurrence count of a text's repeated foci (foci
mentioned once carry no repetition signal and are excluded). ``conn``
averages the sentence-graph adjacency over the strictly-upper-triangular
positions; below-diagonal cells are structurally zero and would only make
the average depend on the sentence count twice.

``discriminativeness`` summarizes, over hypothesis/reference pairs, how
often a feature separates the two sides in each direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import AnnotatedDocument, same_text
from .embeddings import StaticLexicon
from .focus import ENTITY, NN, FocusBipartite, extract_entity_foci, extract_nn_foci
from .sentgraph import UNWEIGHTED, WEIGHTED, SentenceGraph, build_sentence_graph

FREQ_NN = "freq_nn"
FREQ_ENTITY = "freq_entity"
CONN_U_NN = "conn_u_nn"
CONN_U_ENTITY = "conn_u_entity"
CONN_W_NN = "conn_w_nn"
CONN_W_ENTITY = "conn_w_entity"

ALL_FEATURES = (FREQ_NN, FREQ_ENTITY, CONN_U_NN, CONN_U_ENTITY, CONN_W_NN, CONN_W_ENTITY)
NN_FEATURES = (FREQ_NN, CONN_U_NN, CONN_W_NN)


def freq(bipartite: FocusBipartite) -> float | None:
    """Total frequency of repeated foci divided by their count, or None
    when every focus occurs exactly once."""
    repeated = [f.frequency for f in bipartite.foci if f.frequency >= 2]
    if not repeated:
        return None
    return sum(repeated) / len(repeated)


def conn(graph: SentenceGraph) -> float:
    """Mean adjacency weight over the n(n-1)/2 sentence pairs; 0 for a
    single-sentence document."""
    n = graph.sentence_count
    if n < 2:
        return 0.0
    return float(graph.adjacency.sum()) / (n * (n - 1) / 2)


@dataclass(frozen=True)
class Discriminativeness:
    """Directional separation counts over (hyp, ref) feature pairs.

    The three counts partition the pairs exactly; the d_* fractions are
    derived views. Both orientations are reported because either
    direction can be the interesting one.
    """

    n_pos: int  # pairs with ref > hyp
    n_zero: int  # pairs with equal values
    n_neg: int  # pairs with ref < hyp
    n: int

    @property
    def d_pos(self) -> float:
        return self.n_pos / self.n

    @property
    def d_zero(self) -> float:
        return self.n_zero / self.n

    @property
    def d_neg(self) -> float:
        return self.n_neg / self.n


def discriminativeness(pairs: Sequence[tuple[float, float]]) -> Discriminativeness:
    if not pairs:
        raise ValueError("discriminativeness needs at least one pair")
    pos = zero = neg = 0
    for hyp_value, ref_value in pairs:
        if ref_value > hyp_value:
            pos += 1
        elif ref_value < hyp_value:
            neg += 1
        else:
            zero += 1
    return Discriminativeness(n_pos=pos, n_zero=zero, n_neg=neg, n=len(pairs))


def compute_feature(
    doc: AnnotatedDocument,
    feature: str,
    *,
    lexicon: StaticLexicon | None = None,
    entity_threshold: float = 0.8,
) -> float | None:
    """Evaluate one named feature on one document."""
    if feature not in ALL_FEATURES:
        raise ValueError(f"unknown feature: {feature!r}")
    choice = ENTITY if feature.endswith("_entity") else NN
    if choice == ENTITY:
        if lexicon is None:
            raise ValueError(f"feature {feature!r} requires a static lexicon")
        bipartite = extract_entity_foci(doc, lexicon, entity_threshold)
    else:
        bipartite = extract_nn_foci(doc)
    if feature.startswith("freq"):
        return freq(bipartite)
    variant = WEIGHTED if feature.startswith("conn_w") else UNWEIGHTED
    return conn(build_sentence_graph(doc, bipartite, variant))


@dataclass(frozen=True)
class FeatureRow:
    """One hypothesis/reference comparison for one feature; the value is
    None where the feature is undefined on that side."""

    pair_id: str
    feature: str
    hyp_value: float | None
    ref_value: float | None
    identical_text: bool


def feature_table(
    instances: Iterable,
    features: Sequence[str],
    *,
    lexicon: StaticLexicon | None = None,
    entity_threshold: float = 0.8,
) -> list[FeatureRow]:
    """Feature values for every (hypothesis, reference) pair of the corpus,
    one row per pair and feature. Pair ids are ``system:doc:refN``."""
    rows: list[FeatureRow] = []
    for instance in instances:
        hyp_values = {
            f: compute_feature(
                instance.hypothesis, f, lexicon=lexicon, entity_threshold=entity_threshold
            )
            for f in features
        }
        for ref_index, ref in enumerate(instance.references):
            identical = same_text(instance.hypothesis, ref)
            pair_id = f"{instance.system_id}:{instance.doc_id}:ref{ref_index}"
            for f in features:
                rows.append(
                    FeatureRow(
                        pair_id=pair_id,
                        feature=f,
                        hyp_value=hyp_values[f],
                        ref_value=compute_feature(
                            ref, f, lexicon=lexicon, entity_threshold=entity_threshold
                        ),
                        identical_text=identical,
                    )
                )
    return rows


@dataclass(frozen=True)
class FeatureSummary:
    feature: str
    stats: Discriminativeness | None
    n_pairs: int
    n_identical: int
    n_undefined: int


def summarize_discriminativeness(rows: Sequence[FeatureRow]) -> list[FeatureSummary]:
    """Per-feature separation statistics. Pairs with identical texts and
    pairs where either side is undefined are excluded but counted."""
    by_feature: dict[str, list[FeatureRow]] = {}
    for row in rows:
        by_feature.setdefault(row.feature, []).append(row)
    summaries = []
    for feature in sorted(by_feature):
        feature_rows = by_feature[feature]
        identical = sum(1 for r in feature_rows if r.identical_text)
        usable: list[tuple[float, float]] = []
        undefined = 0
        for row in feature_rows:
            if row.identical_text:
                continue
            if row.hyp_value is None or row.ref_value is None:
                undefined += 1
                continue
            usable.append((row.hyp_value, row.ref_value))
        summaries.append(
            FeatureSummary(
                feature=feature,
                stats=discriminativeness(usable) if usable else None,
                n_pairs=len(feature_rows),
                n_identical=identical,
                n_undefined=undefined,
            )
        )
    return summaries
