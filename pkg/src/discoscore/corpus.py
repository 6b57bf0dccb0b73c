"""Data model and ingestion for hypotheses, references and human ratings.

A dataset is NDJSON: one JSON object per line with fields ``doc_id``,
``system_id``, ``hypothesis``, ``references`` and ``ratings``. Hypothesis
and reference entries are either raw strings (segmented by the naive
rules in :func:`segment_plaintext`) or pre-annotated objects of the form
``{"sentences": [[{"w": surface, "p": pos}, ...], ...]}``.

All types here are immutable after construction and safe to share across
worker threads.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

NOUN = "NOUN"
OTHER = "OTHER"

HYPOTHESIS = "hypothesis"
REFERENCE = "reference"

_RATING_KEYS = ("doc_id", "system_id", "hypothesis", "references", "ratings")

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")
# words (keeping internal apostrophes/hyphens) or single punctuation marks
_TOKEN_PATTERN = re.compile(r"\w+(?:['’\-]\w+)*|[^\w\s]")


class DatasetError(ValueError):
    """Raised when a dataset file or document structure is invalid."""


@dataclass(frozen=True)
class Token:
    """One token occurrence. Identical surfaces at different positions are
    distinct tokens; occurrence counts matter downstream."""

    surface: str
    pos: str
    sentence_index: int
    token_index: int
    embedding_ref: int | None = None

    @property
    def is_noun(self) -> bool:
        # accepts the coarse NOUN tag or Penn-style NN/NNS/NNP/NNPS
        return self.pos == NOUN or self.pos.startswith("NN")

    @property
    def is_punctuation(self) -> bool:
        return not any(ch.isalnum() for ch in self.surface)


@dataclass(frozen=True)
class AnnotatedDocument:
    """An ordered, sentence-segmented sequence of tokens.

    ``sentences`` holds half-open ``(start, end)`` token spans; spans are
    contiguous, non-overlapping and cover every token.
    """

    doc_id: str
    kind: str
    sentences: tuple[tuple[int, int], ...]
    tokens: tuple[Token, ...]
    system_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (HYPOTHESIS, REFERENCE):
            raise DatasetError(f"unknown document kind: {self.kind!r}")
        if not self.sentences:
            raise DatasetError(f"document {self.doc_id!r} has no sentences")
        cursor = 0
        for si, (start, end) in enumerate(self.sentences):
            if start != cursor or end <= start:
                raise DatasetError(
                    f"document {self.doc_id!r}: sentence spans must be "
                    f"contiguous and non-empty (sentence {si})"
                )
            cursor = end
        if cursor != len(self.tokens):
            raise DatasetError(
                f"document {self.doc_id!r}: spans cover {cursor} tokens, "
                f"got {len(self.tokens)}"
            )
        for i, tok in enumerate(self.tokens):
            if tok.token_index != i:
                raise DatasetError(
                    f"document {self.doc_id!r}: token_index must equal "
                    f"position (token {i})"
                )

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    def sentence_tokens(self, index: int) -> tuple[Token, ...]:
        start, end = self.sentences[index]
        return self.tokens[start:end]

    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)


@dataclass(frozen=True)
class RatedInstance:
    """One system output with its references and human ratings."""

    doc_id: str
    system_id: str
    hypothesis: AnnotatedDocument
    references: tuple[AnnotatedDocument, ...]
    ratings: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.hypothesis.system_id:
            raise DatasetError(f"hypothesis {self.doc_id!r} needs a system_id")
        for aspect, value in self.ratings.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or not math.isfinite(value):
                raise DatasetError(
                    f"rating {aspect!r} of ({self.system_id}, {self.doc_id}) "
                    f"is not a finite number: {value!r}"
                )


def same_text(a: AnnotatedDocument, b: AnnotatedDocument) -> bool:
    """True when two documents carry the exact same token surfaces."""
    return a.surfaces() == b.surfaces()


def segment_plaintext(
    text: str,
    *,
    doc_id: str = "",
    kind: str = HYPOTHESIS,
    system_id: str | None = None,
) -> AnnotatedDocument:
    """Segment raw text with naive rules.

    Sentences end at ``.``, ``!`` or ``?`` followed by whitespace; tokens
    split on whitespace with punctuation detached. Abbreviations are not
    special-cased ("Mr x. y." becomes two sentences). All tokens are
    tagged OTHER; use :func:`apply_noun_lexicon` or pre-annotated input
    when noun tags are needed.
    """
    if not text or not text.strip():
        raise DatasetError("cannot segment empty or whitespace-only text")
    sentences: list[list[str]] = []
    for part in _SENTENCE_BOUNDARY.split(text.strip()):
        words = _TOKEN_PATTERN.findall(part)
        if words:
            sentences.append(words)
    if not sentences:
        raise DatasetError("text contains no tokens")
    return _build_document(
        [[(w, OTHER) for w in sent] for sent in sentences],
        doc_id=doc_id,
        kind=kind,
        system_id=system_id,
    )


def _build_document(
    tagged_sentences: Sequence[Sequence[tuple[str, str]]],
    *,
    doc_id: str,
    kind: str,
    system_id: str | None,
) -> AnnotatedDocument:
    tokens: list[Token] = []
    spans: list[tuple[int, int]] = []
    for si, sent in enumerate(tagged_sentences):
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


def load_noun_lexicon(path: str | None = None) -> frozenset[str]:
    """Lowercased noun surfaces for the heuristic tagger. Reads the bundled
    default list unless a path is given."""
    if path is None:
        text = resources.files("discoscore.data").joinpath("nouns.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def load_stopwords(path: str | None = None) -> frozenset[str]:
    """Lowercased stopwords; bundled English list by default."""
    if path is None:
        text = resources.files("discoscore.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def apply_noun_lexicon(
    doc: AnnotatedDocument, nouns: frozenset[str] | set[str]
) -> AnnotatedDocument:
    """Best-effort noun tagging: a token whose lowercased surface appears
    in ``nouns`` gets the NOUN tag, everything else keeps its tag."""
    tokens = tuple(
        Token(t.surface, NOUN, t.sentence_index, t.token_index, t.embedding_ref)
        if t.surface.lower() in nouns
        else t
        for t in doc.tokens
    )
    return AnnotatedDocument(
        doc_id=doc.doc_id,
        kind=doc.kind,
        sentences=doc.sentences,
        tokens=tokens,
        system_id=doc.system_id,
    )


def reference_system_id(index: int) -> str:
    """Stable id for the index-th reference of a document; shared with the
    embedding file convention so matrices can be joined back to texts."""
    return f"ref{index}"


def _parse_document(
    value: object,
    *,
    doc_id: str,
    kind: str,
    system_id: str | None,
    line_no: int,
    noun_lexicon: frozenset[str] | None,
) -> AnnotatedDocument:
    if isinstance(value, str):
        doc = segment_plaintext(value, doc_id=doc_id, kind=kind, system_id=system_id)
        if noun_lexicon is not None:
            doc = apply_noun_lexicon(doc, noun_lexicon)
        return doc
    if isinstance(value, dict):
        sentences = value.get("sentences")
        if not isinstance(sentences, list) or not sentences:
            raise DatasetError(
                f"line {line_no}: annotated document needs a non-empty "
                f"'sentences' list"
            )
        tagged: list[list[tuple[str, str]]] = []
        for sent in sentences:
            if not isinstance(sent, list) or not sent:
                raise DatasetError(f"line {line_no}: empty sentence in {doc_id!r}")
            row: list[tuple[str, str]] = []
            for tok in sent:
                if not isinstance(tok, dict) or "w" not in tok:
                    raise DatasetError(
                        f"line {line_no}: token objects need a 'w' field"
                    )
                row.append((str(tok["w"]), str(tok.get("p", OTHER))))
            tagged.append(row)
        return _build_document(
            tagged, doc_id=doc_id, kind=kind, system_id=system_id
        )
    raise DatasetError(
        f"line {line_no}: document must be a string or an annotated object, "
        f"got {type(value).__name__}"
    )


def load_dataset(
    path: str,
    format: str = "ndjson",
    *,
    tag_raw_text: bool = True,
    noun_lexicon: frozenset[str] | None = None,
) -> list[RatedInstance]:
    """Load a rated corpus.

    Raw-string documents are segmented and, when ``tag_raw_text`` is on,
    run through the heuristic noun tagger so noun-focus extraction stays
    possible without pre-annotation. Reference order is preserved; the
    i-th reference is keyed ``ref{i}``.
    """
    if format != "ndjson":
        raise DatasetError(f"unsupported dataset format: {format!r}")
    lexicon = None
    instances: list[RatedInstance] = []
    seen: dict[tuple[str, str], int] = {}
    rating_keys: frozenset[str] | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise DatasetError(f"line {line_no}: expected a JSON object")
            for key in _RATING_KEYS:
                if key not in record:
                    raise DatasetError(f"line {line_no}: missing required field {key!r}")
            doc_id = str(record["doc_id"])
            system_id = str(record["system_id"])
            dup_key = (system_id, doc_id)
            if dup_key in seen:
                raise DatasetError(
                    f"line {line_no}: duplicate (system_id, doc_id) "
                    f"{dup_key!r}, first seen on line {seen[dup_key]}"
                )
            seen[dup_key] = line_no
            if tag_raw_text and lexicon is None:
                lexicon = noun_lexicon if noun_lexicon is not None else load_noun_lexicon()
            hypothesis = _parse_document(
                record["hypothesis"],
                doc_id=doc_id,
                kind=HYPOTHESIS,
                system_id=system_id,
                line_no=line_no,
                noun_lexicon=lexicon,
            )
            refs_value = record["references"]
            if not isinstance(refs_value, list):
                raise DatasetError(f"line {line_no}: 'references' must be a list")
            references = tuple(
                _parse_document(
                    ref,
                    doc_id=doc_id,
                    kind=REFERENCE,
                    system_id=reference_system_id(i),
                    line_no=line_no,
                    noun_lexicon=lexicon,
                )
                for i, ref in enumerate(refs_value)
            )
            ratings = record["ratings"]
            if not isinstance(ratings, dict):
                raise DatasetError(f"line {line_no}: 'ratings' must be an object")
            for aspect, value in ratings.items():
                if isinstance(value, bool) or not isinstance(value, (int, float)) \
                        or not math.isfinite(value):
                    raise DatasetError(
                        f"line {line_no}: rating {aspect!r} is not a finite "
                        f"number: {value!r}"
                    )
            keys = frozenset(ratings)
            if rating_keys is None:
                rating_keys = keys
            elif keys != rating_keys:
                raise DatasetError(
                    f"line {line_no}: rating aspects {sorted(keys)} differ from "
                    f"the dataset's {sorted(rating_keys)}"
                )
            try:
                instances.append(
                    RatedInstance(
                        doc_id=doc_id,
                        system_id=system_id,
                        hypothesis=hypothesis,
                        references=references,
                        ratings={str(k): float(v) for k, v in ratings.items()},
                    )
                )
            except (TypeError, ValueError) as exc:
                raise DatasetError(f"line {line_no}: {exc}") from exc
    return instances


def document_to_value(doc: AnnotatedDocument) -> dict:
    """Annotated-object form of a document, as used in dataset files."""
    return {
        "sentences": [
            [{"w": t.surface, "p": t.pos} for t in doc.sentence_tokens(i)]
            for i in range(doc.sentence_count)
        ]
    }


def instance_to_record(instance: RatedInstance) -> dict:
    return {
        "doc_id": instance.doc_id,
        "system_id": instance.system_id,
        "hypothesis": document_to_value(instance.hypothesis),
        "references": [document_to_value(r) for r in instance.references],
        "ratings": dict(instance.ratings),
    }


def write_dataset(path: str, instances: Iterable[RatedInstance]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for instance in instances:
            fh.write(json.dumps(instance_to_record(instance), ensure_ascii=False))
            fh.write("\n")
