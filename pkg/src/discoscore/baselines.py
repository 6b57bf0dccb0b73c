"""Five feature-based discourse baselines.

RC and LC need neither source nor reference: they measure how much of a
hypothesis consists of lexical cohesion devices (content words repeated
across sentences or linked to another sentence's word by vector
similarity). Entity Graph and Lexical Graph score a hypothesis by the
average connectivity of its sentence graph. Lexical Chain compares the
sentence-position footprints of repeated words between hypothesis and
reference.

Content words are non-punctuation tokens outside the stopword list; the
restriction keeps function-word repetition ("the ... the") from counting
as cohesion. Word identity is the lowercased, punctuation-stripped
surface; no lemmatization is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import AnnotatedDocument, load_stopwords
from .embeddings import StaticLexicon, cosine
from .features import conn
from .focus import extract_nn_foci, normalize_surface
from .sentgraph import build_sentence_graph

_DEFAULT_STOPWORDS: frozenset[str] | None = None


def _stopwords(stopwords: frozenset[str] | None) -> frozenset[str]:
    global _DEFAULT_STOPWORDS
    if stopwords is not None:
        return stopwords
    if _DEFAULT_STOPWORDS is None:
        _DEFAULT_STOPWORDS = load_stopwords()
    return _DEFAULT_STOPWORDS


def _content_positions(
    doc: AnnotatedDocument, stopwords: frozenset[str]
) -> dict[str, list[int]]:
    """Sentence indices (with repetition) per content-word type, in
    first-occurrence order."""
    positions: dict[str, list[int]] = {}
    for token in doc.tokens:
        if token.is_punctuation:
            continue
        word = normalize_surface(token.surface)
        if not word or word in stopwords:
            continue
        positions.setdefault(word, []).append(token.sentence_index)
    return positions


def _similar(
    a: str, b: str, lexicon: StaticLexicon | None, threshold: float
) -> bool:
    if a == b:
        return True
    if lexicon is None:
        return False
    va, vb = lexicon.get(a), lexicon.get(b)
    if va is None or vb is None:
        return False
    return cosine(va, vb) > threshold


def _cohesion_devices(
    doc: AnnotatedDocument,
    lexicon: StaticLexicon | None,
    threshold: float,
    stopwords: frozenset[str],
) -> tuple[set[str], dict[str, list[int]]]:
    """Content-word types that act as cohesion devices: repeated across
    sentences, or similar (above threshold) to a word in another sentence."""
    positions = _content_positions(doc, stopwords)
    words = list(positions)
    devices = {w for w in words if len(set(positions[w])) >= 2}
    if lexicon is not None:
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                a, b = words[i], words[j]
                if a in devices and b in devices:
                    continue
                # the pair must span two different sentences somewhere
                if len(set(positions[a]) | set(positions[b])) < 2:
                    continue
                va, vb = lexicon.get(a), lexicon.get(b)
                if va is None or vb is None:
                    continue
                if cosine(va, vb) > threshold:
                    devices.add(a)
                    devices.add(b)
    return devices, positions


def rc(
    doc: AnnotatedDocument,
    *,
    lexicon: StaticLexicon | None = None,
    threshold: float = 0.8,
    stopwords: frozenset[str] | None = None,
) -> float:
    """Proportion of content-word occurrences that are cohesion devices."""
    devices, positions = _cohesion_devices(doc, lexicon, threshold, _stopwords(stopwords))
    total = sum(len(p) for p in positions.values())
    if total == 0:
        return 0.0
    return sum(len(positions[w]) for w in devices) / total


def lc(
    doc: AnnotatedDocument,
    *,
    lexicon: StaticLexicon | None = None,
    threshold: float = 0.8,
    stopwords: frozenset[str] | None = None,
) -> float:
    """Proportion of content-word types that are cohesion devices."""
    devices, positions = _cohesion_devices(doc, lexicon, threshold, _stopwords(stopwords))
    if not positions:
        return 0.0
    return len(devices) / len(positions)


def entity_graph(doc: AnnotatedDocument) -> float:
    """Average connectivity of the unweighted noun-focus sentence graph;
    shares the implementation with the connectivity feature."""
    return conn(build_sentence_graph(doc, extract_nn_foci(doc), "unweighted"))


def lexical_graph(
    doc: AnnotatedDocument,
    lexicon: StaticLexicon | None = None,
    threshold: float = 0.8,
    *,
    stopwords: frozenset[str] | None = None,
) -> float:
    """Average distance-discounted connectivity where two sentences connect
    when they hold a repeated or similar content-word pair."""
    stops = _stopwords(stopwords)
    n = doc.sentence_count
    if n < 2:
        return 0.0
    sentence_words: list[list[str]] = []
    for i in range(n):
        seen: dict[str, None] = {}
        for token in doc.sentence_tokens(i):
            if token.is_punctuation:
                continue
            word = normalize_surface(token.surface)
            if word and word not in stops:
                seen.setdefault(word)
        sentence_words.append(list(seen))
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if any(
                _similar(a, b, lexicon, threshold)
                for a in sentence_words[i]
                for b in sentence_words[j]
            ):
                total += 1.0 / (j - i)
    return total / (n * (n - 1) / 2)


@dataclass(frozen=True)
class LexicalChain:
    """A repeated word and the set of sentences it appears in."""

    word: str
    positions: frozenset[int]


def extract_chains(
    doc: AnnotatedDocument, *, stopwords: frozenset[str] | None = None
) -> list[LexicalChain]:
    """Chains exist only for content words appearing in more than one
    sentence."""
    positions = _content_positions(doc, _stopwords(stopwords))
    return [
        LexicalChain(word=w, positions=frozenset(p))
        for w, p in positions.items()
        if len(set(p)) >= 2
    ]


def _jaccard(a: frozenset[int], b: frozenset[int]) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def lexical_chain_score(
    hyp: AnnotatedDocument,
    ref: AnnotatedDocument,
    *,
    lexicon: StaticLexicon | None = None,
    threshold: float = 0.8,
    stopwords: frozenset[str] | None = None,
) -> float:
    """Soft chain overlap: each reference chain earns the best positional
    Jaccard among hypothesis chains with a matching word (equal surface or
    vector similarity above threshold); the score averages that credit.
    A reference without chains scores 0."""
    stops = _stopwords(stopwords)
    ref_chains = extract_chains(ref, stopwords=stops)
    if not ref_chains:
        return 0.0
    hyp_chains = extract_chains(hyp, stopwords=stops)
    total = 0.0
    for ref_chain in ref_chains:
        best = 0.0
        for hyp_chain in hyp_chains:
            if _similar(hyp_chain.word, ref_chain.word, lexicon, threshold):
                best = max(best, _jaccard(ref_chain.positions, hyp_chain.positions))
        total += best
    return total / len(ref_chains)
