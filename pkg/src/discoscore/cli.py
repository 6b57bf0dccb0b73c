"""Command-line surface.

Three subcommands share one flag vocabulary: ``score`` writes per-instance
metric scores, ``correlate`` writes correlation reports against human
ratings, and ``features`` writes per-pair discourse feature values with a
discriminativeness summary. Report-style commands also render figures
next to the delimited output unless --no-figures is given.

Exit codes: 0 success, 2 success with skipped instances, 1 fatal error.
Outputs are deterministic for identical inputs: fixed six-decimal floats
and stable sort orders, regardless of --jobs.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .corpus import DatasetError, load_dataset
from .embeddings import (
    EmbeddingClient,
    EmbeddingError,
    ProtocolError,
    TransportError,
    load_embedding_file,
    load_sentence_vector_file,
    load_static_lexicon,
)
from .features import ALL_FEATURES, NN_FEATURES, feature_table, summarize_discriminativeness
from .harness import (
    METRICS,
    CorrelationReport,
    EmbeddingLookup,
    HarnessError,
    ScoreOptions,
    aspect_intercorrelation,
    format_report_table,
    instance_level_correlation,
    score_corpus,
    system_level_report,
    write_report_csv,
)

_VARIANTS = {"u": "unweighted", "w": "weighted"}

_ERRORS = (DatasetError, EmbeddingError, HarnessError, TransportError, ProtocolError, ValueError, OSError)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", required=True, help="NDJSON corpus file")
    parser.add_argument("--embeddings", help="NDJSON token-embedding file")
    parser.add_argument("--embed-url", help="embedding service base URL")
    parser.add_argument(
        "--sentence-vectors", help="NDJSON per-sentence vector file (ds_sent override)"
    )
    parser.add_argument("--lexicon", help="static word vectors, word2vec text format")
    parser.add_argument(
        "--metric", action="append", choices=sorted(METRICS), default=None,
        help="metric to run (repeatable)",
    )
    parser.add_argument("--focus", choices=["nn", "entity"], default="nn")
    parser.add_argument("--variant", choices=["u", "w"], default="u")
    parser.add_argument(
        "--threshold", type=float, default=0.8,
        help="cosine threshold for entity clustering and synonym matching",
    )
    parser.add_argument("--multi-ref", choices=["average", "max"], default="average")
    parser.add_argument("--max-tokens", type=int, default=512)
    parser.add_argument(
        "--empty-overlap", choices=["keep", "worst"], default="keep",
        help="how to score pairs whose matched focus set is empty",
    )
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--out", required=True, help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discoscore",
        description="Discourse-aware evaluation metrics and their meta-evaluation",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    score = commands.add_parser("score", help="write per-instance metric scores")
    _add_common_flags(score)

    correlate = commands.add_parser(
        "correlate", help="correlate metric scores with human ratings"
    )
    _add_common_flags(correlate)
    correlate.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    features = commands.add_parser(
        "features", help="write discourse feature values and their separation stats"
    )
    _add_common_flags(features)
    features.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def _options(args: argparse.Namespace) -> ScoreOptions:
    return ScoreOptions(
        focus_choice=args.focus,
        variant=_VARIANTS[args.variant],
        entity_threshold=args.threshold,
        synonym_threshold=args.threshold,
        multi_ref=args.multi_ref,
        max_tokens=args.max_tokens,
        empty_overlap_policy=args.empty_overlap,
        jobs=max(1, args.jobs),
    )


def _load_backends(args: argparse.Namespace, metrics: list[str]):
    lexicon = load_static_lexicon(args.lexicon) if args.lexicon else None
    if args.focus == "entity" and lexicon is None:
        raise HarnessError("entity focus requires --lexicon")
    if "lexical_graph" in metrics and lexicon is None:
        raise HarnessError("lexical_graph requires --lexicon")
    needs_embeddings = any(METRICS[m].needs_embeddings for m in metrics)
    embeddings = None
    if needs_embeddings:
        sentence_vectors = (
            load_sentence_vector_file(args.sentence_vectors)
            if args.sentence_vectors
            else None
        )
        if args.embeddings:
            embeddings = EmbeddingLookup(
                matrices=load_embedding_file(args.embeddings),
                sentence_vectors=sentence_vectors,
            )
        elif args.embed_url:
            embeddings = EmbeddingLookup(
                client=EmbeddingClient(args.embed_url),
                sentence_vectors=sentence_vectors,
            )
        elif sentence_vectors is not None:
            embeddings = EmbeddingLookup(matrices={}, sentence_vectors=sentence_vectors)
        else:
            raise HarnessError(
                "the requested metrics need --embeddings or --embed-url"
            )
    return lexicon, embeddings


def _require_metrics(args: argparse.Namespace) -> list[str]:
    if not args.metric:
        raise HarnessError("at least one --metric is required")
    # preserve user order, drop repeats
    return list(dict.fromkeys(args.metric))


def _score_all(args: argparse.Namespace, metrics: list[str]):
    instances = load_dataset(args.dataset)
    lexicon, embeddings = _load_backends(args, metrics)
    options = _options(args)
    return instances, [
        score_corpus(
            instances, metric, embeddings=embeddings, lexicon=lexicon, options=options
        )
        for metric in metrics
    ]


def _write_scores(out: Path, scored_list) -> int:
    skipped = 0
    with open(out / "scores.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("metric,system_id,doc_id,score,empty_overlap\n")
        for scored in scored_list:
            for system_id, doc_id in sorted(scored.scores):
                value = scored.scores[(system_id, doc_id)]
                flag = int((system_id, doc_id) in scored.empty_overlap)
                fh.write(f"{scored.metric},{system_id},{doc_id},{value:.6f},{flag}\n")
    with open(out / "skips.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("metric,system_id,doc_id,reason\n")
        for scored in scored_list:
            for record in sorted(
                scored.skips, key=lambda r: (r.system_id, r.doc_id)
            ):
                reason = record.reason.replace(",", ";")
                fh.write(f"{scored.metric},{record.system_id},{record.doc_id},{reason}\n")
                skipped += 1
    return skipped


def cmd_score(args: argparse.Namespace) -> int:
    metrics = _require_metrics(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instances, scored_list = _score_all(args, metrics)
    skipped = _write_scores(out, scored_list)
    for scored in scored_list:
        for record in scored.skips:
            print(
                f"skipped {scored.metric} ({record.system_id}, {record.doc_id}): "
                f"{record.reason}",
                file=sys.stderr,
            )
    return 2 if skipped else 0


def cmd_correlate(args: argparse.Namespace) -> int:
    metrics = _require_metrics(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instances, scored_list = _score_all(args, metrics)
    skipped = _write_scores(out, scored_list)

    aspects = sorted({a for i in instances for a in i.ratings})
    if not aspects:
        raise HarnessError("the dataset carries no ratings to correlate with")
    reports: list[CorrelationReport] = []
    for scored in scored_list:
        for aspect in aspects:
            attempts = [
                ("system", lambda: system_level_report(scored, instances, aspect)),
                ("pooled", lambda: instance_level_correlation(scored, instances, aspect, "pooled")),
                ("per_system", lambda: instance_level_correlation(scored, instances, aspect, "per_system")),
            ]
            for label, attempt in attempts:
                try:
                    reports.append(attempt())
                except HarnessError as exc:
                    print(
                        f"note: {scored.metric}/{aspect} {label} correlation "
                        f"unavailable ({exc})",
                        file=sys.stderr,
                    )
    if not reports:
        raise HarnessError("no correlation could be computed for any metric/aspect")
    write_report_csv(str(out / "report.csv"), reports)
    with open(out / "report.txt", "w", encoding="utf-8") as fh:
        fh.write(format_report_table(reports))

    names: list[str] = []
    matrix = None
    try:
        names, matrix = aspect_intercorrelation(instances)
    except HarnessError as exc:
        print(f"note: aspect intercorrelation unavailable ({exc})", file=sys.stderr)
    if matrix is not None:
        with open(out / "aspect_correlation.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("aspect," + ",".join(names) + "\n")
            for i, name in enumerate(names):
                fh.write(name + "," + ",".join(f"{v:.6f}" for v in matrix[i]) + "\n")

    if not getattr(args, "no_figures", False):
        from . import figures

        figure_dir = out / "figures"
        figure_dir.mkdir(exist_ok=True)
        figures.system_correlation_bars(reports, str(figure_dir / "system_kendall.png"))
        if matrix is not None:
            figures.aspect_heatmap(names, matrix, str(figure_dir / "aspect_correlation.png"))
    return 2 if skipped else 0


def cmd_features(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instances = load_dataset(args.dataset)
    lexicon = load_static_lexicon(args.lexicon) if args.lexicon else None
    selected = list(ALL_FEATURES if lexicon is not None else NN_FEATURES)
    rows = feature_table(
        instances, selected, lexicon=lexicon, entity_threshold=args.threshold
    )

    def fmt(value: float | None) -> str:
        return "" if value is None else f"{value:.6f}"

    with open(out / "features.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("pair_id,feature,hyp_value,ref_value\n")
        for row in sorted(rows, key=lambda r: (r.pair_id, r.feature)):
            fh.write(
                f"{row.pair_id},{row.feature},{fmt(row.hyp_value)},{fmt(row.ref_value)}\n"
            )
    summaries = summarize_discriminativeness(rows)
    with open(out / "discriminativeness.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("feature,d_pos,d_zero,d_neg,n,excluded_identical,excluded_undefined\n")
        for s in summaries:
            if s.stats is None:
                fh.write(f"{s.feature},,,,0,{s.n_identical},{s.n_undefined}\n")
            else:
                fh.write(
                    f"{s.feature},{s.stats.d_pos:.6f},{s.stats.d_zero:.6f},"
                    f"{s.stats.d_neg:.6f},{s.stats.n},{s.n_identical},{s.n_undefined}\n"
                )

    if not getattr(args, "no_figures", False):
        from . import figures

        figure_dir = out / "figures"
        figure_dir.mkdir(exist_ok=True)
        for feature in selected:
            figures.feature_scatter(
                rows, feature, str(figure_dir / f"{feature}_scatter.png")
            )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"score": cmd_score, "correlate": cmd_correlate, "features": cmd_features}
    try:
        return handlers[args.command](args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
