"""Focus extraction and the focus-token bipartite graph.

A focus is an object of the reader's attention. Two realizations are
supported: ``nn`` treats every distinct noun surface as one focus whose
members are all its occurrences; ``entity`` additionally merges noun
surfaces whose static word vectors are more similar than a threshold, so
that lexically related nouns (e.g. "berlin" and "capital") share a focus.

The bipartite adjacency has one row per focus and one column per token of
the document; entry (i, j) is 1 exactly when token j belongs to focus i.
Rows partition the noun tokens, so row sums are the focus frequencies.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
import numpy as np

from .corpus import AnnotatedDocument
from .embeddings import StaticLexicon, cosine

NN = "nn"
ENTITY = "entity"

_PUNCT = re.compile(r"[^\w]+", re.UNICODE)


class FocusError(ValueError):
    """Mismatched or malformed focus structures."""


def normalize_surface(surface: str, *, lowercase: bool = True, strip_punct: bool = True) -> str:
    """Canonical form used for grouping and matching occurrences."""
    out = surface.lower() if lowercase else surface
    if strip_punct:
        stripped = _PUNCT.sub("", out)
        if stripped:
            out = stripped
    return out


@dataclass(frozen=True)
class Focus:
    """One focus: its label, member token indices and member surfaces.

    ``frequency`` counts occurrences; a focus with frequency >= 2 is a
    "good" focus, the carrier of repetition-based coherence signal.
    """

    label: str
    members: tuple[int, ...]
    surfaces: frozenset[str]

    @property
    def frequency(self) -> int:
        return len(self.members)

    @property
    def is_good(self) -> bool:
        return self.frequency >= 2


@dataclass(frozen=True)
class FocusBipartite:
    """Foci of one document plus their token-association adjacency."""

    foci: tuple[Focus, ...]
    token_count: int
    choice: str

    @property
    def focus_count(self) -> int:
        return len(self.foci)

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 matrix, one row per focus, one column per token."""
        matrix = np.zeros((len(self.foci), self.token_count), dtype=np.float64)
        for i, focus in enumerate(self.foci):
            matrix[i, list(focus.members)] = 1.0
        return matrix

    def label_of(self, index: int) -> str:
        return self.foci[index].label


def _noun_groups(
    doc: AnnotatedDocument, *, lowercase: bool, strip_punct: bool
) -> dict[str, list[int]]:
    """Noun token indices grouped by normalized surface, in first-occurrence
    order (dicts preserve insertion order)."""
    groups: dict[str, list[int]] = {}
    for token in doc.tokens:
        if not token.is_noun:
            continue
        key = normalize_surface(token.surface, lowercase=lowercase, strip_punct=strip_punct)
        groups.setdefault(key, []).append(token.token_index)
    return groups


def extract_nn_foci(
    doc: AnnotatedDocument, *, lowercase: bool = True, strip_punct: bool = True
) -> FocusBipartite:
    """One focus per distinct (normalized) noun surface. A document without
    nouns yields an empty focus list."""
    foci = tuple(
        Focus(label=surface, members=tuple(members), surfaces=frozenset([surface]))
        for surface, members in _noun_groups(
            doc, lowercase=lowercase, strip_punct=strip_punct
        ).items()
    )
    return FocusBipartite(foci=foci, token_count=doc.token_count, choice=NN)


def extract_entity_foci(
    doc: AnnotatedDocument,
    lexicon: StaticLexicon,
    threshold: float,
    *,
    lowercase: bool = True,
    strip_punct: bool = True,
) -> FocusBipartite:
    """Merge noun surfaces into semantic entities.

    Surfaces whose lexicon vectors have cosine similarity strictly above
    ``threshold`` end up in the same focus; merging is single-link, i.e.
    the transitive closure over all above-threshold pairs. Surfaces absent
    from the lexicon never merge and keep their surface-level focus.
    """
    # thresholds above 1 are allowed: no pair can exceed cosine 1, so the
    # result degenerates to the surface-level foci
    groups = _noun_groups(doc, lowercase=lowercase, strip_punct=strip_punct)
    surfaces = list(groups)
    parent = list(range(len(surfaces)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    vectors = [lexicon.get(s) for s in surfaces]
    for i in range(len(surfaces)):
        if vectors[i] is None:
            continue
        for j in range(i + 1, len(surfaces)):
            if vectors[j] is None:
                continue
            if cosine(vectors[i], vectors[j]) > threshold:
                union(i, j)

    clusters: dict[int, list[int]] = {}
    for i in range(len(surfaces)):
        clusters.setdefault(find(i), []).append(i)

    foci = []
    for root in sorted(clusters):  # root order == first-occurrence order
        cluster_surfaces = sorted(surfaces[i] for i in clusters[root])
        members = sorted(idx for i in clusters[root] for idx in groups[surfaces[i]])
        foci.append(
            Focus(
                label="|".join(cluster_surfaces),
                members=tuple(members),
                surfaces=frozenset(cluster_surfaces),
            )
        )
    return FocusBipartite(foci=tuple(foci), token_count=doc.token_count, choice=ENTITY)


def common_foci(hyp: FocusBipartite, ref: FocusBipartite) -> tuple[tuple[int, int], ...]:
    """Matched focus pairs (hyp index, ref index) between two documents.

    Noun foci match on equal label. Entity foci are matched greedily on
    shared noun surfaces: candidate pairs are ranked by the size of their
    shared surface set (ties broken by label order), each focus is used at
    most once, and pairs sharing no surface are never matched. The result
    may be empty.
    """
    if hyp.choice != ref.choice:
        raise FocusError(
            f"cannot match foci extracted with different choices: "
            f"{hyp.choice!r} vs {ref.choice!r}"
        )
    if hyp.choice == NN:
        ref_by_label = {f.label: j for j, f in enumerate(ref.foci)}
        pairs = [
            (i, ref_by_label[f.label])
            for i, f in enumerate(hyp.foci)
            if f.label in ref_by_label
        ]
        return tuple(pairs)

    candidates: list[tuple[int, str, str, int, int]] = []
    for i, hf in enumerate(hyp.foci):
        for j, rf in enumerate(ref.foci):
            shared = len(hf.surfaces & rf.surfaces)
            if shared:
                candidates.append((-shared, hf.label, rf.label, i, j))
    candidates.sort()
    matched_hyp: set[int] = set()
    matched_ref: set[int] = set()
    pairs = []
    for _, _, _, i, j in candidates:
        if i in matched_hyp or j in matched_ref:
            continue
        matched_hyp.add(i)
        matched_ref.add(j)
        pairs.append((i, j))
    pairs.sort()
    return tuple(pairs)
