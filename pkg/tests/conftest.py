"""Shared builders: documents, deterministic embeddings, corpus files."""

from __future__ import annotations

import hashlib
import json

import numpy as np
import pytest

from discoscore.corpus import (
    HYPOTHESIS,
    NOUN,
    OTHER,
    REFERENCE,
    AnnotatedDocument,
    Token,
)
from discoscore.embeddings import StaticLexicon

NOUN_POOL = [
    "team", "game", "coach", "league", "title", "city", "player", "match",
    "goal", "season", "club", "record", "street", "crowd", "stadium",
    "manager", "paper", "river", "market", "bridge",
]
OTHER_POOL = [
    "quickly", "ran", "the", "and", "said", "very", "slowly", "walked",
    "big", "small", "over", "under", "bright", "took", "saw",
]


def make_doc(
    sentences,
    doc_id="d0",
    kind=HYPOTHESIS,
    system_id="sys",
) -> AnnotatedDocument:
    """Build a document from [[(surface, pos), ...], ...]."""
    if kind == REFERENCE:
        system_id = system_id if system_id != "sys" else "ref0"
    tokens = []
    spans = []
    for si, sent in enumerate(sentences):
        start = len(tokens)
        for surface, pos in sent:
            tokens.append(Token(surface, pos, si, len(tokens)))
        spans.append((start, len(tokens)))
    return AnnotatedDocument(
        doc_id=doc_id,
        kind=kind,
        sentences=tuple(spans),
        tokens=tuple(tokens),
        system_id=system_id,
    )


def _unit(tag: str, dim: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "big")
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


def embed_doc(doc: AnnotatedDocument, dim: int = 8, *, scale: float = 1.0) -> np.ndarray:
    """Deterministic pseudo-contextual embeddings: a token's vector mixes
    its surface with its sentence's bag of surfaces, so identical documents
    embed identically and edits perturb whole sentences."""
    rows = []
    for token in doc.tokens:
        context = " ".join(t.surface.lower() for t in doc.sentence_tokens(token.sentence_index))
        v = _unit("tok:" + token.surface.lower(), dim) + 0.6 * _unit("ctx:" + context, dim)
        rows.append(v)
    return np.asarray(rows, dtype=np.float64) * scale


def random_doc(
    rng: np.random.Generator,
    *,
    doc_id="r0",
    kind=HYPOTHESIS,
    system_id="sys",
    max_sentences: int = 8,
    max_tokens: int = 40,
    ensure_noun: bool = True,
) -> AnnotatedDocument:
    total = int(rng.integers(1, max_tokens + 1))
    n_sent = int(rng.integers(1, min(max_sentences, total) + 1))
    # random sentence boundaries over `total` tokens
    cuts = sorted(rng.choice(np.arange(1, total), size=n_sent - 1, replace=False)) if n_sent > 1 else []
    bounds = [0, *map(int, cuts), total]
    sentences = []
    for si in range(n_sent):
        sent = []
        for _ in range(bounds[si + 1] - bounds[si]):
            if rng.random() < 0.45:
                sent.append((str(rng.choice(NOUN_POOL)), NOUN))
            else:
                sent.append((str(rng.choice(OTHER_POOL)), OTHER))
        sentences.append(sent)
    if ensure_noun and not any(pos == NOUN for sent in sentences for _, pos in sent):
        sentences[0][0] = (str(rng.choice(NOUN_POOL)), NOUN)
    return make_doc(sentences, doc_id=doc_id, kind=kind, system_id=system_id)


def make_lexicon(entries: dict[str, list[float]]) -> StaticLexicon:
    vectors = {w: np.asarray(v, dtype=np.float64) for w, v in entries.items()}
    dims = {v.shape[0] for v in vectors.values()}
    assert len(dims) == 1
    return StaticLexicon(dim=dims.pop(), vectors=vectors)


def doc_to_sentences_value(doc: AnnotatedDocument) -> dict:
    return {
        "sentences": [
            [{"w": t.surface, "p": t.pos} for t in doc.sentence_tokens(i)]
            for i in range(doc.sentence_count)
        ]
    }


def write_dataset_file(path, instances) -> None:
    """instances: iterable of (doc_id, system_id, hyp_doc, [ref_docs], ratings)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, system_id, hyp, refs, ratings in instances:
            fh.write(
                json.dumps(
                    {
                        "doc_id": doc_id,
                        "system_id": system_id,
                        "hypothesis": doc_to_sentences_value(hyp),
                        "references": [doc_to_sentences_value(r) for r in refs],
                        "ratings": ratings,
                    }
                )
                + "\n"
            )


def write_embedding_file(path, docs_with_matrices) -> None:
    """docs_with_matrices: iterable of (doc, matrix); values stored float32."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc, matrix in docs_with_matrices:
            m32 = np.asarray(matrix, dtype=np.float32)
            fh.write(
                json.dumps(
                    {
                        "doc_id": doc.doc_id,
                        "kind": doc.kind,
                        "system_id": doc.system_id or "",
                        "dim": int(m32.shape[1]),
                        "token_count": int(m32.shape[0]),
                        "vectors": [[float(x) for x in row] for row in m32],
                    }
                )
                + "\n"
            )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
