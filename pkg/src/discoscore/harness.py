"""Meta-evaluation harness.

Scores a rated corpus with any registered metric, aggregates scores to
system level, and correlates them with human ratings (Pearson and
tie-corrected Kendall). Scores of lower-is-better metrics are negated
before any correlation so reported numbers are comparable across metrics.

Instances that cannot be scored (over the token limit, missing
embeddings, no foci) are skipped with a recorded reason, never silently.
Scoring may run on several workers; results are keyed and sorted before
aggregation, so reports do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import baselines
from .corpus import AnnotatedDocument, RatedInstance
from .embeddings import DocKey, StaticLexicon, doc_key
from .focus import ENTITY, NN, extract_entity_foci, extract_nn_foci
from .focusdiff import (
    AVERAGE,
    FSCORE,
    PRECISION,
    FocusedDoc,
    MetricScore,
    NoFociError,
    combine_multi_ref,
    ds_focus_multi_ref,
)
from .sentgraph import UNWEIGHTED, ZeroGraphEmbedding, ds_sent_multi_ref

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"

KEEP = "keep"
WORST = "worst"


class HarnessError(ValueError):
    """Unusable harness input (bad metric name, degenerate statistics...)."""


@dataclass(frozen=True)
class MetricDescriptor:
    name: str
    polarity: str
    needs_reference: bool
    needs_embeddings: bool
    needs_lexicon: bool = False

    @property
    def lower_better(self) -> bool:
        return self.polarity == LOWER_BETTER


METRICS: dict[str, MetricDescriptor] = {
    d.name: d
    for d in (
        MetricDescriptor("ds_focus", LOWER_BETTER, True, True),
        MetricDescriptor("ds_focus_f", LOWER_BETTER, True, True),
        MetricDescriptor("ds_sent", HIGHER_BETTER, True, True),
        MetricDescriptor("rc", HIGHER_BETTER, False, False),
        MetricDescriptor("lc", HIGHER_BETTER, False, False),
        MetricDescriptor("entity_graph", HIGHER_BETTER, False, False),
        MetricDescriptor("lexical_graph", HIGHER_BETTER, False, False, needs_lexicon=True),
        MetricDescriptor("lexical_chain", HIGHER_BETTER, True, False),
    )
}


@dataclass(frozen=True)
class ScoreOptions:
    """Knobs shared by every metric run."""

    focus_choice: str = NN
    variant: str = UNWEIGHTED
    entity_threshold: float = 0.8
    synonym_threshold: float = 0.8
    multi_ref: str = AVERAGE
    max_tokens: int = 512
    empty_overlap_policy: str = KEEP
    jobs: int = 1


@dataclass(frozen=True)
class SkipRecord:
    system_id: str
    doc_id: str
    reason: str


@dataclass
class ScoredCorpus:
    metric: str
    descriptor: MetricDescriptor
    scores: dict[tuple[str, str], float]
    empty_overlap: set[tuple[str, str]] = field(default_factory=set)
    skips: list[SkipRecord] = field(default_factory=list)

    @property
    def flags(self) -> dict[str, int]:
        return {"skipped": len(self.skips), "empty_overlap": len(self.empty_overlap)}


class _Skip(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class EmbeddingLookup:
    """Joins documents to their matrices; file- or service-backed."""

    def __init__(
        self,
        matrices: Mapping[DocKey, np.ndarray] | None = None,
        client=None,
        sentence_vectors: Mapping[DocKey, np.ndarray] | None = None,
    ) -> None:
        self.matrices = matrices
        self.client = client
        self.sentence_vectors = sentence_vectors or {}

    def tokens(self, doc: AnnotatedDocument) -> np.ndarray | None:
        if self.matrices is not None:
            return self.matrices.get(doc_key(doc))
        if self.client is not None:
            return self.client.fetch(doc)
        return None

    def sentences(self, doc: AnnotatedDocument) -> np.ndarray | None:
        return self.sentence_vectors.get(doc_key(doc))


def _usable_references(
    instance: RatedInstance, options: ScoreOptions
) -> tuple[AnnotatedDocument, ...]:
    """References under the token limit; over-length ones are excluded
    individually, mirroring how over-length translations are left out."""
    return tuple(
        r for r in instance.references if r.token_count <= options.max_tokens
    )


def _bipartite(doc, options: ScoreOptions, lexicon: StaticLexicon | None):
    if options.focus_choice == NN:
        return extract_nn_foci(doc)
    if options.focus_choice == ENTITY:
        if lexicon is None:
            raise HarnessError("entity focus requires a static lexicon")
        return extract_entity_foci(doc, lexicon, options.entity_threshold)
    raise HarnessError(f"unknown focus choice: {options.focus_choice!r}")


def _need_tokens(doc, embeddings: EmbeddingLookup) -> np.ndarray:
    Z = embeddings.tokens(doc)
    if Z is None:
        raise _Skip(f"missing embeddings for {doc.kind} {doc_key(doc)}")
    return Z


def _score_instance(
    instance: RatedInstance,
    descriptor: MetricDescriptor,
    options: ScoreOptions,
    embeddings: EmbeddingLookup | None,
    lexicon: StaticLexicon | None,
) -> MetricScore:
    hyp = instance.hypothesis
    if hyp.token_count > options.max_tokens:
        raise _Skip(f"hypothesis exceeds the {options.max_tokens}-token limit")
    refs: tuple[AnnotatedDocument, ...] = ()
    if descriptor.needs_reference:
        refs = _usable_references(instance, options)
        if not refs:
            raise _Skip(
                "no usable reference (missing or over the token limit)"
            )
    name = descriptor.name
    if name in ("ds_focus", "ds_focus_f"):
        assert embeddings is not None
        hyp_doc = FocusedDoc(_bipartite(hyp, options, lexicon), _need_tokens(hyp, embeddings))
        ref_docs = [
            FocusedDoc(_bipartite(r, options, lexicon), _need_tokens(r, embeddings))
            for r in refs
        ]
        version = FSCORE if name == "ds_focus_f" else PRECISION
        try:
            return ds_focus_multi_ref(hyp_doc, ref_docs, mode=options.multi_ref, version=version)
        except NoFociError as exc:
            raise _Skip(str(exc)) from exc
    if name == "ds_sent":
        assert embeddings is not None
        hyp_sent = embeddings.sentences(hyp)
        hyp_Z = None if hyp_sent is not None else _need_tokens(hyp, embeddings)
        ref_sents = [embeddings.sentences(r) for r in refs]
        ref_Zs = [
            None if s is not None else _need_tokens(r, embeddings)
            for r, s in zip(refs, ref_sents)
        ]
        try:
            return ds_sent_multi_ref(
                hyp, list(refs), hyp_Z, ref_Zs,
                mode=options.multi_ref,
                variant=options.variant,
                focus_choice=options.focus_choice,
                lexicon=lexicon,
                threshold=options.entity_threshold,
                hyp_sentence_vectors=hyp_sent,
                ref_sentence_vectors=ref_sents,
            )
        except ZeroGraphEmbedding as exc:
            raise _Skip(str(exc)) from exc
    if name == "rc":
        return MetricScore(
            baselines.rc(hyp, lexicon=lexicon, threshold=options.synonym_threshold)
        )
    if name == "lc":
        return MetricScore(
            baselines.lc(hyp, lexicon=lexicon, threshold=options.synonym_threshold)
        )
    if name == "entity_graph":
        return MetricScore(baselines.entity_graph(hyp))
    if name == "lexical_graph":
        if lexicon is None:
            raise HarnessError("lexical_graph requires a static lexicon")
        return MetricScore(
            baselines.lexical_graph(hyp, lexicon, options.synonym_threshold)
        )
    if name == "lexical_chain":
        per_ref = [
            MetricScore(
                baselines.lexical_chain_score(
                    hyp, r, lexicon=lexicon, threshold=options.synonym_threshold
                )
            )
            for r in refs
        ]
        return combine_multi_ref(per_ref, options.multi_ref, lower_better=False)
    raise HarnessError(f"unknown metric: {name!r}")


def score_corpus(
    instances: Sequence[RatedInstance],
    metric: str,
    *,
    embeddings: EmbeddingLookup | None = None,
    lexicon: StaticLexicon | None = None,
    options: ScoreOptions = ScoreOptions(),
) -> ScoredCorpus:
    """Score every instance, in parallel when options.jobs > 1."""
    if metric not in METRICS:
        raise HarnessError(f"unknown metric: {metric!r} (known: {sorted(METRICS)})")
    descriptor = METRICS[metric]
    if descriptor.needs_embeddings and embeddings is None:
        raise HarnessError(f"metric {metric!r} needs embeddings")
    if descriptor.needs_lexicon and lexicon is None:
        raise HarnessError(f"metric {metric!r} needs a static lexicon")

    def work(instance: RatedInstance):
        key = (instance.system_id, instance.doc_id)
        try:
            return key, _score_instance(instance, descriptor, options, embeddings, lexicon)
        except _Skip as skip:
            return key, skip

    if options.jobs > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            results = list(pool.map(work, instances))
    else:
        results = [work(i) for i in instances]

    scored = ScoredCorpus(metric=metric, descriptor=descriptor, scores={})
    for key, outcome in results:
        if isinstance(outcome, _Skip):
            scored.skips.append(SkipRecord(key[0], key[1], outcome.reason))
            continue
        scored.scores[key] = outcome.value
        if outcome.empty_overlap:
            scored.empty_overlap.add(key)

    if options.empty_overlap_policy == WORST and scored.empty_overlap:
        clean = [v for k, v in scored.scores.items() if k not in scored.empty_overlap]
        if clean:
            worst = max(clean) if descriptor.lower_better else min(clean)
            for key in scored.empty_overlap:
                scored.scores[key] = worst
    elif options.empty_overlap_policy not in (KEEP, WORST):
        raise HarnessError(
            f"unknown empty-overlap policy: {options.empty_overlap_policy!r}"
        )
    return scored


@dataclass(frozen=True)
class SystemScore:
    system_id: str
    metric_mean: float
    rating_means: Mapping[str, float]
    n: int


def system_scores(
    scored: ScoredCorpus, instances: Sequence[RatedInstance]
) -> dict[str, SystemScore]:
    """Per-system means of the metric and of every rating aspect, computed
    over the instances that were actually scored."""
    by_system: dict[str, list[RatedInstance]] = {}
    for instance in instances:
        by_system.setdefault(instance.system_id, []).append(instance)
    out: dict[str, SystemScore] = {}
    for system_id in sorted(by_system):
        scored_instances = [
            i for i in by_system[system_id]
            if (i.system_id, i.doc_id) in scored.scores
        ]
        if not scored_instances:
            raise HarnessError(
                f"system {system_id!r} has no scored instances (all skipped)"
            )
        values = [scored.scores[(i.system_id, i.doc_id)] for i in scored_instances]
        aspects = sorted(scored_instances[0].ratings)
        rating_means = {
            aspect: float(np.mean([i.ratings[aspect] for i in scored_instances]))
            for aspect in aspects
        }
        out[system_id] = SystemScore(
            system_id=system_id,
            metric_mean=float(np.mean(values)),
            rating_means=rating_means,
            n=len(values),
        )
    return out


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; errors on degenerate input."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1 or len(xa) < 2:
        raise HarnessError("pearson needs two equal-length vectors of size >= 2")
    xm = xa - xa.mean()
    ym = ya - ya.mean()
    denom = math.sqrt(float((xm * xm).sum()) * float((ym * ym).sum()))
    if denom == 0.0:
        raise HarnessError("pearson undefined for zero-variance input")
    return float(np.clip(float((xm * ym).sum()) / denom, -1.0, 1.0))


def kendall(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected rank correlation (tau-b):
    (concordant - discordant) / sqrt((n0 - ties_x)(n0 - ties_y))."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1 or len(xa) < 2:
        raise HarnessError("kendall needs two equal-length vectors of size >= 2")
    n = len(xa)
    iu = np.triu_indices(n, 1)
    sx = np.sign(xa[:, None] - xa[None, :])[iu]
    sy = np.sign(ya[:, None] - ya[None, :])[iu]
    product = sx * sy
    concordant = int(np.count_nonzero(product > 0))
    discordant = int(np.count_nonzero(product < 0))
    ties_x = int(np.count_nonzero(sx == 0))
    ties_y = int(np.count_nonzero(sy == 0))
    n0 = n * (n - 1) // 2
    if n0 == ties_x or n0 == ties_y:
        raise HarnessError("kendall undefined when one vector is all ties")
    return (concordant - discordant) / math.sqrt((n0 - ties_x) * (n0 - ties_y))


def oriented(values: Sequence[float], descriptor: MetricDescriptor) -> list[float]:
    """Flip lower-is-better scores so that larger always means better."""
    if descriptor.lower_better:
        return [-v for v in values]
    return list(values)


@dataclass(frozen=True)
class CorrelationReport:
    level: str
    aspect: str
    metric: str
    pearson: float
    kendall: float
    n: int
    flags: Mapping[str, int] = field(default_factory=dict)

    @property
    def skipped(self) -> int:
        return self.flags.get("skipped", 0)


def system_level_report(
    scored: ScoredCorpus,
    instances: Sequence[RatedInstance],
    aspect: str,
) -> CorrelationReport:
    """Correlation between per-system metric means and rating means."""
    systems = system_scores(scored, instances)
    if len(systems) < 2:
        raise HarnessError("system-level correlation needs at least 2 systems")
    ordered = sorted(systems)
    x = oriented([systems[s].metric_mean for s in ordered], scored.descriptor)
    y = [systems[s].rating_means.get(aspect) for s in ordered]
    if any(v is None for v in y):
        raise HarnessError(f"aspect {aspect!r} missing from ratings")
    return CorrelationReport(
        level="system",
        aspect=aspect,
        metric=scored.metric,
        pearson=pearson(x, y),
        kendall=kendall(x, y),
        n=len(ordered),
        flags=scored.flags,
    )


POOLED = "pooled"
PER_SYSTEM = "per_system"


def instance_level_correlation(
    scored: ScoredCorpus,
    instances: Sequence[RatedInstance],
    aspect: str,
    grouping: str = POOLED,
) -> CorrelationReport:
    """Instance-level correlation, pooled over the corpus or averaged over
    within-system correlations (systems that are too small or degenerate
    are skipped and counted in the flags)."""
    rated = {
        (i.system_id, i.doc_id): i.ratings[aspect]
        for i in instances
        if aspect in i.ratings
    }
    if not rated:
        raise HarnessError(f"aspect {aspect!r} missing from ratings")
    keys = sorted(k for k in scored.scores if k in rated)
    if grouping == POOLED:
        if len(keys) < 2:
            raise HarnessError("pooled correlation needs at least 2 scored instances")
        x = oriented([scored.scores[k] for k in keys], scored.descriptor)
        y = [rated[k] for k in keys]
        return CorrelationReport(
            level="instance_pooled",
            aspect=aspect,
            metric=scored.metric,
            pearson=pearson(x, y),
            kendall=kendall(x, y),
            n=len(keys),
            flags=scored.flags,
        )
    if grouping != PER_SYSTEM:
        raise HarnessError(f"unknown grouping: {grouping!r}")
    by_system: dict[str, list[tuple[str, str]]] = {}
    for key in keys:
        by_system.setdefault(key[0], []).append(key)
    pearsons: list[float] = []
    kendalls: list[float] = []
    used = 0
    skipped_groups = 0
    for system_id in sorted(by_system):
        group = by_system[system_id]
        if len(group) < 2:
            skipped_groups += 1
            continue
        x = oriented([scored.scores[k] for k in group], scored.descriptor)
        y = [rated[k] for k in group]
        try:
            group_pearson = pearson(x, y)
            group_kendall = kendall(x, y)
        except HarnessError:
            skipped_groups += 1
            continue
        pearsons.append(group_pearson)
        kendalls.append(group_kendall)
        used += len(group)
    if not kendalls:
        raise HarnessError("no system group was large and varied enough to correlate")
    flags = dict(scored.flags)
    flags["skipped_groups"] = skipped_groups
    return CorrelationReport(
        level="instance_per_system",
        aspect=aspect,
        metric=scored.metric,
        pearson=float(np.mean(pearsons)),
        kendall=float(np.mean(kendalls)),
        n=used,
        flags=flags,
    )


def aspect_intercorrelation(
    instances: Sequence[RatedInstance],
) -> tuple[list[str], np.ndarray]:
    """Pairwise Pearson between the system-level means of rating aspects."""
    by_system: dict[str, list[RatedInstance]] = {}
    for instance in instances:
        by_system.setdefault(instance.system_id, []).append(instance)
    if len(by_system) < 2:
        raise HarnessError("aspect intercorrelation needs at least 2 systems")
    aspects = sorted({a for i in instances for a in i.ratings})
    systems = sorted(by_system)
    means = {
        aspect: [
            float(np.mean([i.ratings[aspect] for i in by_system[s]]))
            for s in systems
        ]
        for aspect in aspects
    }
    matrix = np.eye(len(aspects))
    for i in range(len(aspects)):
        for j in range(i + 1, len(aspects)):
            value = pearson(means[aspects[i]], means[aspects[j]])
            matrix[i, j] = matrix[j, i] = value
    return aspects, matrix


def ensemble_average(a: ScoredCorpus, b: ScoredCorpus) -> dict[tuple[str, str], float]:
    """Average two metrics per instance after orienting both to
    higher-is-better and min-max scaling each to [0, 1] over the corpus
    (constant metrics map to 0.5)."""
    if set(a.scores) != set(b.scores):
        missing = set(a.scores) ^ set(b.scores)
        raise HarnessError(f"ensemble key mismatch on {sorted(missing)[:5]} ...")

    def normalized(scored: ScoredCorpus) -> dict[tuple[str, str], float]:
        keys = sorted(scored.scores)
        values = oriented([scored.scores[k] for k in keys], scored.descriptor)
        lo, hi = min(values), max(values)
        if hi == lo:
            return {k: 0.5 for k in keys}
        return {k: (v - lo) / (hi - lo) for k, v in zip(keys, values)}

    na, nb = normalized(a), normalized(b)
    return {k: (na[k] + nb[k]) / 2.0 for k in sorted(na)}


def write_report_csv(path: str, reports: Sequence[CorrelationReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("level,aspect,metric,pearson,kendall,n,skipped\n")
        for r in reports:
            fh.write(
                f"{r.level},{r.aspect},{r.metric},"
                f"{r.pearson:.6f},{r.kendall:.6f},{r.n},{r.skipped}\n"
            )


def format_report_table(reports: Sequence[CorrelationReport]) -> str:
    """Aligned plain-text view of the correlation rows."""
    headers = ("level", "aspect", "metric", "pearson", "kendall", "n", "skipped")
    rows = [
        (
            r.level,
            r.aspect,
            r.metric,
            f"{r.pearson:.6f}",
            f"{r.kendall:.6f}",
            str(r.n),
            str(r.skipped),
        )
        for r in reports
    ]
    widths = [
        max(len(headers[c]), *(len(row[c]) for row in rows)) if rows else len(headers[c])
        for c in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[c]) for c, h in enumerate(headers)),
        "  ".join("-" * widths[c] for c in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(row[c].ljust(widths[c]) for c in range(len(headers))))
    return "\n".join(lines) + "\n"
