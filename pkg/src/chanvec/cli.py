"""Command-line entry point wiring every pipeline stage.

Every subcommand derives its randomness from the global --seed plus the
subcommand name, writes data to files (or standard output for single
results), and logs progress to standard error. Identical inputs and
flags produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from chanvec import ingest
from chanvec.content import aggregate_content, read_video_vectors
from chanvec.dimensions import (
    DEFAULT_DIM_EDGES,
    DEFAULT_NESS_EDGES,
    build_dimension,
    project,
    read_dimension_seeds,
    read_scores,
    sample_bins,
    standardize,
    transfer_dimension,
    write_scores,
)
from chanvec.embedding import PROVENANCES, read_embedding, write_embedding
from chanvec.evaluation import (
    agreement_sweep,
    eval_category,
    read_judgments,
    read_triplets,
    render_agreement,
    sample_triplets,
    write_triplets,
)
from chanvec.forest import ForestConfig
from chanvec.ranking import (
    bootstrap_tau_difference,
    fit_plackett_luce,
    label_correlation,
    read_comparisons,
    read_labels,
    two_proportion_ztest,
)
from chanvec.recgraph import build_rec_graph, parse_crawl_records
from chanvec.seeds import derive_seed
from chanvec.sgns import SgnsConfig, train_sgns
from chanvec.social import embed_social
from chanvec.walks import WalkConfig, generate_walks
from chanvec.dimensions import DimensionScores

log = logging.getLogger("chanvec")

DEFAULT_SEED = 7


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="global random seed")
    p.add_argument("--config", type=Path, default=None, help="JSON file of flag defaults; explicit flags win")
    p.add_argument("--workers", type=int, default=1, help="parallelism degree (1 = fully deterministic)")


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    if not args.config:
        return
    try:
        loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"config {args.config}: {exc}") from exc
    if not isinstance(loaded, dict):
        raise ValueError(f"config {args.config}: expected a JSON object")
    explicit = set()
    for token in argv:
        if token.startswith("--"):
            explicit.add(token[2:].split("=", 1)[0].replace("-", "_"))
    for key, value in loaded.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"config {args.config}: unknown option {key!r}")
        if dest in explicit:
            continue
        current = getattr(args, dest)
        if isinstance(current, Path) or (current is None and key.endswith(("path", "dir"))):
            value = Path(value)
        setattr(args, dest, value)


def _edges(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    try:
        return tuple(float(x) for x in str(text).split(","))
    except ValueError as exc:
        raise ValueError(f"bad edge list {text!r}: {exc}") from exc


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.readlines()


def _read_categories(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line:
            continue
        cid, _, cat = line.partition(",")
        if not cid or not cat:
            raise ValueError(f"{path}:{lineno}: expected channel_id,category")
        out[cid] = cat
    return out


def cmd_ingest(args) -> int:
    tuples_res = ingest.parse_tuples(_read_lines(args.tuples))
    log.info("tuples: %d parsed, %d skipped", len(tuples_res.records), tuples_res.skipped)
    clean = ingest.filter_spam(tuples_res.records, args.max_videos_per_author)
    log.info("spam filter kept %d of %d tuples", len(clean), len(tuples_res.records))

    chan_res = ingest.parse_channels(_read_lines(args.channels))
    log.info("channels: %d parsed, %d skipped", len(chan_res.records), chan_res.skipped)
    overrides = None
    if args.language_overrides:
        overrides = ingest.read_language_overrides(_read_lines(args.language_overrides))
    retained = ingest.filter_channels(
        chan_res.records, args.min_subscribers, args.language, overrides
    )
    retained.sort(key=lambda rec: rec.channel_id)
    log.info("retained %d of %d channels", len(retained), len(chan_res.records))

    video_map = ingest.read_video_map(_read_lines(args.video_map))
    matrix, report = ingest.build_sharing_matrix(
        clean, video_map, [rec.channel_id for rec in retained]
    )
    log.info(
        "sharing matrix %dx%d; %d unresolved mentions, %d silent channels",
        matrix.shape[0], matrix.shape[1], report.unresolved_mentions,
        len(report.zero_mention_channels),
    )

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ingest.write_sharing_matrix(matrix, out / "sharing_matrix.txt")
    with open(out / "channels_retained.jsonl", "w", encoding="utf-8") as fh:
        ingest.write_channels(retained, fh)
    with open(out / "channel_categories.csv", "w", encoding="utf-8") as fh:
        for rec in retained:
            category = ingest.channel_category(rec)
            if category is not None:
                fh.write(f"{rec.channel_id},{category}\n")
    return 0


def cmd_embed_soc(args) -> int:
    w = ingest.read_sharing_matrix(args.matrix)
    s = read_embedding(args.subreddit_vectors)
    result = embed_social(w, s, args.min_coverage)
    log.info("embedded %d channels, omitted %d", len(result.table), len(result.omitted))
    write_embedding(result.table, args.out)
    return 0


def cmd_embed_rec(args) -> int:
    records = parse_crawl_records(_read_lines(args.crawl))
    if args.channels:
        chan_res = ingest.parse_channels(_read_lines(args.channels))
        retained = [rec.channel_id for rec in chan_res.records]
    else:
        retained = sorted(
            {r.source_channel for r in records}
            | {chan for r in records for _, chan in r.recommendations}
        )
    graph, report = build_rec_graph(records, retained)
    log.info(
        "graph: %d nodes, %d edges; dropped %d records / %d observations",
        len(graph), len(graph.edges), report.dropped_records, report.dropped_edges,
    )
    walk_cfg = WalkConfig(
        p=args.p, q=args.q, walk_length=args.walk_length,
        walks_per_node=args.walks_per_node,
        seed=derive_seed(args.seed, "embed-rec", "walks"),
    )
    walks = generate_walks(graph, walk_cfg, workers=args.workers)
    log.info("generated %d walks", len(walks))
    sgns_cfg = SgnsConfig(
        d=args.dim, window=args.window, negatives=args.negatives,
        epochs=args.epochs, learning_rate=args.learning_rate,
        seed=derive_seed(args.seed, "embed-rec", "sgns"),
    )
    result = train_sgns(walks, sgns_cfg, workers=args.workers)
    write_embedding(result.table, args.out)
    return 0


def cmd_embed_con(args) -> int:
    per_video = read_video_vectors(_read_lines(args.video_vectors))
    video_map = ingest.read_video_map(_read_lines(args.video_map))
    channel_index: dict[str, list[str]] = {}
    for vid, chan in sorted(video_map.items()):
        channel_index.setdefault(chan, []).append(vid)
    result = aggregate_content(per_video, channel_index)
    log.info("embedded %d channels, omitted %d", len(result.table), len(result.omitted))
    write_embedding(result.table, args.out)
    return 0


def cmd_dims(args) -> int:
    c = read_embedding(args.embedding, provenance="soc")
    s = read_embedding(args.subreddit_vectors)
    seeds = read_dimension_seeds(args.seeds)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(seeds):
        dim = build_dimension(s, seeds[name], name)
        result = project(c, dim)
        scores = result.scores if args.raw else standardize(result.scores)
        log.info("dimension %s: scored %d, omitted %d", name, len(scores.scores), len(result.omitted))
        write_scores(out / f"scores_{name}.csv", scores)
    return 0


def cmd_transfer(args) -> int:
    target = read_embedding(args.target)
    train = read_scores(args.scores)
    cfg = ForestConfig(
        n_trees=args.n_trees, max_depth=args.max_depth, min_leaf=args.min_leaf,
        seed=derive_seed(args.seed, "transfer", train.dimension),
    )
    result = transfer_dimension(target, train, cfg, min_overlap=args.min_overlap)
    oob = "n/a" if result.oob_r2 is None else f"{result.oob_r2:.4f}"
    log.info("transferred %s over %d channels; out-of-bag R2 %s", train.dimension, result.n_train, oob)
    scores = standardize(result.scores) if args.standardize else result.scores
    write_scores(args.out, scores)
    return 0


def cmd_sample_bins(args) -> int:
    scores = read_scores(args.scores)
    ness = read_scores(args.ness_scores)
    result = sample_bins(
        scores, ness,
        dim_edges=_edges(args.dim_edges), ness_edges=_edges(args.ness_edges),
        per_bin=args.per_bin, seed=derive_seed(args.seed, "sample-bins", scores.dimension),
    )
    log.info(
        "sampled %d channels over %d bins (%d short, %d out of range)",
        len(result.selected), len(result.bins), len(result.short_bins), len(result.out_of_range),
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for (i, j) in sorted(result.bins):
            for cid in result.bins[(i, j)]:
                fh.write(f"{i},{j},{cid}\n")
    return 0


def cmd_pl_fit(args) -> int:
    comparisons = read_comparisons(args.comparisons)
    if args.dimension:
        comparisons = [c for c in comparisons if c.dimension == args.dimension]
        if not comparisons:
            raise ValueError(f"no comparisons for dimension {args.dimension!r}")
        name = args.dimension
    else:
        names = sorted({c.dimension for c in comparisons})
        if len(names) != 1:
            raise ValueError(
                f"comparisons span dimensions {', '.join(names)}; pick one with --dimension"
            )
        name = names[0]
    fitted = fit_plackett_luce(comparisons, tol=args.tol, max_iter=args.max_iter, prior=args.prior)
    log.info(
        "fit %d items in %d iterations (converged=%s, log-likelihood %.4f)",
        len(fitted.scores), fitted.iterations, fitted.converged, fitted.log_likelihood,
    )
    write_scores(args.out, DimensionScores(name, fitted.scores))
    return 0


def cmd_eval_category(args) -> int:
    c = read_embedding(args.embedding)
    categories = _read_categories(args.categories)
    cfg = ForestConfig(n_trees=args.n_trees)
    result = eval_category(
        c, categories, args.target, reps=args.reps,
        seed=derive_seed(args.seed, "eval-category", args.target),
        per_class=args.per_class, forest_cfg=cfg,
    )
    log.info("category %s: mean F1 %.4f over %d reps", args.target, result.mean_f1, args.reps)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"target,{args.target},reps,{args.reps},mean_f1,{result.mean_f1:.6f}\n")
        for i, f1 in enumerate(result.per_rep):
            fh.write(f"rep,{i},{f1:.6f}\n")
    return 0


def cmd_sample_triplets(args) -> int:
    c = read_embedding(args.embedding, provenance=args.provenance)
    result = sample_triplets(
        c, k=args.k, n=args.n, seed=derive_seed(args.seed, "sample-triplets", str(args.k))
    )
    log.info("sampled %d triplets in %d attempts", len(result.triplets), result.attempts)
    write_triplets(args.out, result.triplets)
    return 0


def cmd_eval_triplets(args) -> int:
    c = read_embedding(args.embedding)
    triplets = read_triplets(args.triplets)
    judgments = list(read_judgments(args.judgments, triplets).values())
    pooled = agreement_sweep(judgments, c)
    print(render_agreement(pooled, "all triplets"))
    k_values = sorted({j.triplet.k for j in judgments})
    per_k = {}
    for k in k_values:
        per_k[k] = agreement_sweep(judgments, c, k=k)
        print()
        print(render_agreement(per_k[k], f"triplets with k={k}"))
    with open(args.out, "w", encoding="utf-8") as fh:
        for row in pooled:
            rate = "nan" if row.n == 0 else f"{row.rate:.6f}"
            fh.write(f"pooled,,{row.min_workers},{rate},{row.n}\n")
        for k in k_values:
            for row in per_k[k]:
                rate = "nan" if row.n == 0 else f"{row.rate:.6f}"
                fh.write(f"k,{k},{row.min_workers},{rate},{row.n}\n")
    return 0


def cmd_eval_rank(args) -> int:
    labels = read_labels(args.labels)
    rows = []
    score_sets = []
    for path in args.scores:
        scores = read_scores(path)
        tau = label_correlation(scores, labels)
        n = len(set(scores.scores) & set(labels))
        rows.append((Path(path).stem, scores.dimension, tau, n))
        score_sets.append(scores)
    with open(args.out, "w", encoding="utf-8") as fh:
        for stem, dimension, tau, n in rows:
            fh.write(f"tau_c,{stem},{dimension},{tau:.6f},{n}\n")
        if args.bootstrap > 0 and len(score_sets) == 2:
            common = sorted(
                set(score_sets[0].scores) & set(score_sets[1].scores) & set(labels)
            )
            if len(common) < 2:
                raise ValueError("fewer than two channels common to both score sets and labels")
            from chanvec.ranking import label_rank

            y = np.array([label_rank(labels[cid]) for cid in common], dtype=np.float64)
            xa = np.array([score_sets[0].scores[cid] for cid in common])
            xb = np.array([score_sets[1].scores[cid] for cid in common])
            delta = bootstrap_tau_difference(
                xa, xb, y, n_boot=args.bootstrap,
                seed=derive_seed(args.seed, "eval-rank", "bootstrap"), alpha=args.alpha,
            )
            fh.write(
                f"delta,{delta.delta:.6f},{delta.low:.6f},{delta.high:.6f},{delta.n_effective}\n"
            )
    for stem, dimension, tau, n in rows:
        log.info("tau_c(%s, labels) = %.4f over %d channels", stem, tau, n)
    return 0


def cmd_ztest(args) -> int:
    result = two_proportion_ztest(args.hits1, args.n1, args.hits2, args.n2, args.alpha)
    flag = "true" if result.significant else "false"
    print(f"z={result.z:.6f} p={result.p_value:.6g} significant={flag}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanvec",
        description="Build and evaluate channel embeddings from sharing, content, and recommendation data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse inputs, filter, build the sharing matrix")
    p.add_argument("--tuples", type=Path, required=True, help="sharing tuples TSV")
    p.add_argument("--channels", type=Path, required=True, help="channel records JSONL")
    p.add_argument("--video-map", type=Path, required=True, help="video_id<TAB>channel_id map")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--max-videos-per-author", type=int, default=ingest.DEFAULT_MAX_VIDEOS_PER_AUTHOR)
    p.add_argument("--min-subscribers", type=int, default=ingest.DEFAULT_MIN_SUBSCRIBERS)
    p.add_argument("--language", default="en")
    p.add_argument("--language-overrides", type=Path, default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("embed-soc", help="sharing matrix x subreddit vectors")
    p.add_argument("--matrix", type=Path, required=True, help="sharing matrix file")
    p.add_argument("--subreddit-vectors", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--min-coverage", type=float, default=0.5)
    p.set_defaults(func=cmd_embed_soc)

    p = sub.add_parser("embed-rec", help="walk + skip-gram embedding of the co-recommendation graph")
    p.add_argument("--crawl", type=Path, required=True, help="crawl records TSV")
    p.add_argument("--channels", type=Path, default=None, help="retained channels JSONL (default: all crawled)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.025)
    p.add_argument("--walk-length", type=int, default=80)
    p.add_argument("--walks-per-node", type=int, default=10)
    p.add_argument("--p", type=float, default=1.0, help="return parameter")
    p.add_argument("--q", type=float, default=1.0, help="in-out parameter")
    p.set_defaults(func=cmd_embed_rec)

    p = sub.add_parser("embed-con", help="average per-video text vectors per channel")
    p.add_argument("--video-vectors", type=Path, required=True)
    p.add_argument("--video-map", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_embed_con)

    p = sub.add_parser("dims", help="build dimension directions and score channels")
    p.add_argument("--embedding", type=Path, required=True, help="social-sharing channel embedding")
    p.add_argument("--subreddit-vectors", type=Path, required=True)
    p.add_argument("--seeds", type=Path, required=True, help="dimension seed-pair file")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--raw", action="store_true", help="write raw cosine scores instead of standardized")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("transfer", help="carry dimension scores into another embedding")
    p.add_argument("--target", type=Path, required=True, help="target embedding file")
    p.add_argument("--scores", type=Path, required=True, help="training scores file")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--min-overlap", type=int, default=100)
    p.add_argument("--standardize", action="store_true", help="standardize the predictions")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("sample-bins", help="stratified channel sample over score bins")
    p.add_argument("--scores", type=Path, required=True)
    p.add_argument("--ness-scores", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--per-bin", type=int, default=10)
    p.add_argument("--dim-edges", default=",".join(str(e) for e in DEFAULT_DIM_EDGES))
    p.add_argument("--ness-edges", default=",".join(str(e) for e in DEFAULT_NESS_EDGES))
    p.set_defaults(func=cmd_sample_bins)

    p = sub.add_parser("pl-fit", help="fit latent win scores from pairwise comparisons")
    p.add_argument("--comparisons", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dimension", default=None, help="restrict to one dimension")
    p.add_argument("--prior", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=10000)
    p.set_defaults(func=cmd_pl_fit)

    p = sub.add_parser("eval-category", help="repeated category-prediction F1")
    p.add_argument("--embedding", type=Path, required=True)
    p.add_argument("--categories", type=Path, required=True, help="channel_id,category lines")
    p.add_argument("--target", required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--n-trees", type=int, default=100)
    p.set_defaults(func=cmd_eval_category)

    p = sub.add_parser("sample-triplets", help="draw odd-one-out triplets from an embedding")
    p.add_argument("--embedding", type=Path, required=True)
    p.add_argument("--k", type=int, required=True, help="neighbor rank of the far channel")
    p.add_argument("--n", type=int, required=True, help="number of triplets")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--provenance", choices=PROVENANCES, default="external")
    p.set_defaults(func=cmd_sample_triplets)

    p = sub.add_parser("eval-triplets", help="agreement of embedding picks with crowd votes")
    p.add_argument("--triplets", type=Path, required=True)
    p.add_argument("--judgments", type=Path, required=True)
    p.add_argument("--embedding", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_eval_triplets)

    p = sub.add_parser("eval-rank", help="tau-c of scores against ordinal labels")
    p.add_argument("--scores", type=Path, action="append", required=True, help="repeatable scores file")
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--bootstrap", type=int, default=0, help="bootstrap resamples for a two-set tau difference")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_eval_rank)

    p = sub.add_parser("ztest", help="two-proportion z-test")
    p.add_argument("--hits1", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--hits2", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_ztest)

    for sp in sub.choices.values():
        _add_common(sp)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(
        level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_config(args, argv)
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
