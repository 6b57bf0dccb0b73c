"""Contextual token embeddings and static word vectors.

Two backends supply per-token matrices: a precomputed NDJSON file (one
record per document) and an HTTP service speaking ``POST /embed``. Both
carry float32 values on the wire and are widened to float64 here, so the
two backends produce bit-identical matrices for the same upstream data.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .corpus import AnnotatedDocument

logger = logging.getLogger(__name__)


class EmbeddingError(ValueError):
    """Malformed embedding data (shape, dimension or value problems)."""


class TransportError(RuntimeError):
    """The embedding service could not be reached; retrying may help."""


class ProtocolError(RuntimeError):
    """The embedding service answered, but with an invalid payload."""


class DocKey(NamedTuple):
    """Joins a matrix back to its document. References use system ids
    ``ref0``, ``ref1``, ... in file order."""

    doc_id: str
    kind: str
    system_id: str


def doc_key(doc: AnnotatedDocument) -> DocKey:
    return DocKey(doc.doc_id, doc.kind, doc.system_id or "")


def _as_matrix(vectors: object, *, dim: int, rows: int, where: str) -> np.ndarray:
    matrix = np.asarray(vectors, dtype=np.float32).astype(np.float64)
    if matrix.ndim != 2:
        raise EmbeddingError(f"{where}: vectors must form a 2-D array")
    if matrix.shape[0] != rows:
        raise EmbeddingError(
            f"{where}: expected {rows} vectors, got {matrix.shape[0]}"
        )
    if matrix.shape[1] != dim:
        raise EmbeddingError(
            f"{where}: vectors have width {matrix.shape[1]}, declared dim {dim}"
        )
    if not np.all(np.isfinite(matrix)):
        raise EmbeddingError(f"{where}: non-finite embedding values")
    return matrix


def load_embedding_file(path: str) -> dict[DocKey, np.ndarray]:
    """Read per-token matrices from NDJSON.

    Record shape: ``{"doc_id", "kind", "system_id", "dim", "token_count",
    "vectors"}`` with vectors in token order. Records flagged
    ``"skipped": true`` (e.g. over-length documents the exporter refused)
    are ignored, as are sentence-vector records. The embedding dimension
    must agree across the whole file.
    """
    matrices: dict[DocKey, np.ndarray] = {}
    file_dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            if record.get("skipped"):
                continue
            if "sentence_vectors" in record:
                continue
            for field_name in ("doc_id", "kind", "system_id", "dim", "token_count", "vectors"):
                if field_name not in record:
                    raise EmbeddingError(
                        f"line {line_no}: missing required field {field_name!r}"
                    )
            dim = int(record["dim"])
            if file_dim is None:
                file_dim = dim
            elif dim != file_dim:
                raise EmbeddingError(
                    f"line {line_no}: dim {dim} does not match the file's {file_dim}"
                )
            key = DocKey(
                str(record["doc_id"]), str(record["kind"]), str(record["system_id"])
            )
            matrices[key] = _as_matrix(
                record["vectors"],
                dim=dim,
                rows=int(record["token_count"]),
                where=f"line {line_no}",
            )
    return matrices


def load_sentence_vector_file(path: str) -> dict[DocKey, np.ndarray]:
    """Read exporter-supplied per-sentence vectors (same NDJSON framing,
    field ``sentence_vectors`` instead of ``vectors``)."""
    matrices: dict[DocKey, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            if record.get("skipped") or "sentence_vectors" not in record:
                continue
            vectors = np.asarray(record["sentence_vectors"], dtype=np.float32)
            if vectors.ndim != 2:
                raise EmbeddingError(f"line {line_no}: sentence_vectors must be 2-D")
            if "dim" in record and vectors.shape[1] != int(record["dim"]):
                raise EmbeddingError(
                    f"line {line_no}: sentence vectors have width "
                    f"{vectors.shape[1]}, declared dim {record['dim']}"
                )
            key = DocKey(
                str(record["doc_id"]), str(record["kind"]), str(record["system_id"])
            )
            matrices[key] = vectors.astype(np.float64)
    return matrices


class EmbeddingClient:
    """HTTP backend. Thread-safe; at most ``max_parallel`` requests are in
    flight at once. Transport failures are retried ``retries`` times before
    surfacing a :class:`TransportError`."""

    def __init__(
        self,
        base_url: str,
        *,
        retries: int = 3,
        max_parallel: int = 4,
        timeout: float = 30.0,
        retry_wait: float = 0.2,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self.timeout = timeout
        self.retry_wait = retry_wait
        self._slots = threading.Semaphore(max_parallel)

    def fetch(self, document: AnnotatedDocument) -> np.ndarray:
        payload = json.dumps(
            {"tokens": [t.surface for t in document.tokens]}
        ).encode("utf-8")
        request = urllib.request.Request(
            f"{self.base_url}/embed",
            data=payload,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        body: bytes | None = None
        last_error: Exception | None = None
        for attempt in range(1, self.retries + 1):
            try:
                with self._slots:
                    with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                        body = resp.read()
                break
            except urllib.error.HTTPError as exc:
                # the service answered; surface its error message, no retry
                try:
                    detail = json.loads(exc.read().decode("utf-8")).get("error", "")
                except Exception:
                    detail = ""
                raise ProtocolError(
                    f"embedding service returned {exc.code} for "
                    f"{document.doc_id!r}: {detail or exc.reason}"
                ) from exc
            except (urllib.error.URLError, OSError) as exc:
                last_error = exc
                logger.warning(
                    "embed request for %r failed (attempt %d/%d): %s",
                    document.doc_id, attempt, self.retries, exc,
                )
                if attempt < self.retries:
                    time.sleep(self.retry_wait)
        if body is None:
            raise TransportError(
                f"embedding service unreachable after {self.retries} attempts: "
                f"{last_error}"
            )
        try:
            answer = json.loads(body)
            dim = int(answer["dim"])
            vectors = answer["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"invalid embed response for {document.doc_id!r}") from exc
        try:
            return _as_matrix(
                vectors,
                dim=dim,
                rows=document.token_count,
                where=f"embed response for {document.doc_id!r}",
            )
        except EmbeddingError as exc:
            raise ProtocolError(str(exc)) from exc


def fetch_embeddings(
    service_url: str, document: AnnotatedDocument, *, retries: int = 3
) -> np.ndarray:
    """One-shot convenience wrapper around :class:`EmbeddingClient`."""
    return EmbeddingClient(service_url, retries=retries).fetch(document)


@dataclass(frozen=True)
class StaticLexicon:
    """Static word vectors (word2vec text format). Lookups of unknown
    words return None; callers pick the fallback since a zero vector
    would poison cosine similarities."""

    dim: int
    vectors: Mapping[str, np.ndarray]

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def load_static_lexicon(path: str, format: str = "word2vec-text") -> StaticLexicon:
    """Parse a word2vec text file: header ``count dim``, then one
    ``word v1 ... v_dim`` line per entry. Duplicate words keep the last
    vector (with a warning); zero-norm vectors are rejected."""
    if format != "word2vec-text":
        raise EmbeddingError(f"unsupported lexicon format: {format!r}")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingError("lexicon header must be 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise EmbeddingError("lexicon header must be 'count dim'") from exc
        if dim <= 0:
            raise EmbeddingError(f"lexicon dim must be positive, got {dim}")
        vectors: dict[str, np.ndarray] = {}
        duplicates = 0
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            word = parts[0]
            if len(parts) - 1 != dim:
                raise EmbeddingError(
                    f"line {line_no}: expected {dim} components, got {len(parts) - 1}"
                )
            try:
                vector = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingError(
                    f"line {line_no}: non-numeric vector component"
                ) from exc
            if not np.all(np.isfinite(vector)):
                raise EmbeddingError(f"line {line_no}: non-finite vector component")
            if not np.any(vector):
                raise EmbeddingError(f"line {line_no}: zero-norm vector for {word!r}")
            if word in vectors:
                duplicates += 1
                logger.warning("duplicate lexicon entry %r; keeping the last one", word)
            vectors[word] = vector
    if len(vectors) + duplicates != count:
        logger.warning(
            "lexicon header declared %d entries, file held %d", count, len(vectors)
        )
    return StaticLexicon(dim=dim, vectors=vectors)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity, clipped into [-1, 1]. Zero-norm input is an error."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise EmbeddingError(f"cosine: shape mismatch {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise EmbeddingError("cosine undefined for zero-norm vectors")
    return float(np.clip(float(np.dot(u, v)) / (nu * nv), -1.0, 1.0))
