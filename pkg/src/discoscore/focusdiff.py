"""DS-Focus: distance between matched focus embeddings (lower = better).

Each focus gets an embedding by summing the contextual embeddings of its
member tokens, which encodes both what the focus means and how often it
is mentioned. The score averages the Euclidean distance between matched
hypothesis/reference focus embeddings over the number of hypothesis foci,
so unmatched hypothesis foci dilute nothing but still pay the normalizer.

An empty match set yields distance 0, which would read as "perfect" under
lower-is-better; results therefore carry an ``empty_overlap`` flag that
the harness can count or turn into a worst-rank score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .focus import FocusBipartite, common_foci

PRECISION = "precision"
RECALL = "recall"
FSCORE = "f"

AVERAGE = "average"
MAX_SCORE = "max"


class NoFociError(ValueError):
    """The normalizing document has no foci; the score is undefined."""


@dataclass(frozen=True)
class MetricScore:
    """A metric value plus bookkeeping for degenerate comparisons."""

    value: float
    empty_overlap: bool = False


class FocusedDoc(NamedTuple):
    """A document's foci paired with its token embedding matrix."""

    bipartite: FocusBipartite
    tokens: np.ndarray


def focus_embeddings(bipartite: FocusBipartite, token_embeddings: np.ndarray) -> np.ndarray:
    """Per-focus embeddings: row v is the sum of v's member token rows.

    Equivalent to the dense product adjacency @ token_embeddings, but
    computed row-wise from the member lists.
    """
    Z = np.asarray(token_embeddings, dtype=np.float64)
    if Z.ndim != 2:
        raise ValueError("token embeddings must form a 2-D matrix")
    if Z.shape[0] != bipartite.token_count:
        raise ValueError(
            f"embedding rows ({Z.shape[0]}) do not match the document's "
            f"token count ({bipartite.token_count})"
        )
    out = np.zeros((bipartite.focus_count, Z.shape[1]), dtype=np.float64)
    for i, focus in enumerate(bipartite.foci):
        out[i] = Z[list(focus.members)].sum(axis=0)
    return out


def _pair_distance_sum(
    hyp_F: np.ndarray, ref_F: np.ndarray, omega: Sequence[tuple[int, int]]
) -> float:
    total = 0.0
    for u, v in omega:
        total += float(np.linalg.norm(hyp_F[u] - ref_F[v]))
    return total


def ds_focus(
    hyp_F: np.ndarray,
    ref_F: np.ndarray,
    omega: Sequence[tuple[int, int]],
    hyp_focus_count: int,
) -> MetricScore:
    """Summed matched-pair distance scaled down by the hypothesis focus
    count. Raises :class:`NoFociError` when that count is zero."""
    if hyp_focus_count <= 0:
        raise NoFociError("hypothesis has no foci")
    value = _pair_distance_sum(hyp_F, ref_F, omega) / hyp_focus_count
    return MetricScore(value=value, empty_overlap=len(omega) == 0)


def ds_focus_recall_and_f(
    hyp_F: np.ndarray,
    ref_F: np.ndarray,
    omega: Sequence[tuple[int, int]],
    hyp_focus_count: int,
    ref_focus_count: int,
) -> tuple[MetricScore, MetricScore]:
    """Recall-style variant (normalized by the reference focus count) and
    the arithmetic mean of precision and recall distances."""
    if hyp_focus_count <= 0 or ref_focus_count <= 0:
        raise NoFociError("both documents need at least one focus")
    total = _pair_distance_sum(hyp_F, ref_F, omega)
    empty = len(omega) == 0
    recall = MetricScore(total / ref_focus_count, empty_overlap=empty)
    f_value = (total / hyp_focus_count + recall.value) / 2.0
    return recall, MetricScore(f_value, empty_overlap=empty)


def ds_focus_pair(hyp: FocusedDoc, ref: FocusedDoc, version: str = PRECISION) -> MetricScore:
    """Score one hypothesis/reference pair end to end."""
    omega = common_foci(hyp.bipartite, ref.bipartite)
    hyp_F = focus_embeddings(hyp.bipartite, hyp.tokens)
    ref_F = focus_embeddings(ref.bipartite, ref.tokens)
    if version == PRECISION:
        return ds_focus(hyp_F, ref_F, omega, hyp.bipartite.focus_count)
    recall, fscore = ds_focus_recall_and_f(
        hyp_F, ref_F, omega, hyp.bipartite.focus_count, ref.bipartite.focus_count
    )
    if version == RECALL:
        return recall
    if version == FSCORE:
        return fscore
    raise ValueError(f"unknown ds_focus version: {version!r}")


def combine_multi_ref(
    scores: Sequence[MetricScore], mode: str, *, lower_better: bool
) -> MetricScore:
    """Fold per-reference scores into one. ``average`` takes the mean;
    ``max`` keeps the best score, which for a distance is the minimum."""
    if not scores:
        raise ValueError("no per-reference scores to combine")
    values = [s.value for s in scores]
    if mode == AVERAGE:
        value = float(np.mean(values))
    elif mode == MAX_SCORE:
        value = min(values) if lower_better else max(values)
    else:
        raise ValueError(f"unknown multi-reference mode: {mode!r}")
    return MetricScore(value=value, empty_overlap=any(s.empty_overlap for s in scores))


def ds_focus_multi_ref(
    hyp: FocusedDoc,
    refs: Sequence[FocusedDoc],
    mode: str = AVERAGE,
    version: str = PRECISION,
) -> MetricScore:
    """Score against every reference and aggregate.

    A reference that cannot be scored (no foci on the normalizing side)
    is dropped; the error propagates only when every reference fails.
    """
    if not refs:
        raise ValueError("at least one reference is required")
    scores: list[MetricScore] = []
    failure: NoFociError | None = None
    for ref in refs:
        try:
            scores.append(ds_focus_pair(hyp, ref, version=version))
        except NoFociError as exc:
            failure = exc
    if not scores:
        raise failure if failure is not None else NoFociError("no scorable references")
    return combine_multi_ref(scores, mode, lower_better=True)
