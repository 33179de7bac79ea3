"""Walk the library end to end on the bundled mini dataset.

Parses the raw inputs, filters channels, builds the sharing matrix and
the social embedding, scores channels along a partisan dimension, and
closes with an odd-one-out agreement table against the bundled crowd
judgments. The command-line subcommands wrap exactly these calls; the
demo shows the same pipeline through the Python API.
"""

import argparse
from pathlib import Path

from chanvec import ingest
from chanvec.dimensions import build_dimension, project, read_dimension_seeds, standardize
from chanvec.embedding import read_embedding
from chanvec.evaluation import agreement_sweep, read_judgments, read_triplets, render_agreement
from chanvec.social import embed_social


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("mini_dir", nargs="?", default=Path("data/mini"), type=Path)
    args = parser.parse_args()
    m = args.mini_dir

    with open(m / "tuples.tsv", encoding="utf-8") as fh:
        tuples = ingest.parse_tuples(fh)
    with open(m / "channels.jsonl", encoding="utf-8") as fh:
        channels = ingest.parse_channels(fh)
    print(f"parsed {len(tuples.records)} sharing tuples ({tuples.skipped} skipped) "
          f"and {len(channels.records)} channel records")

    with open(m / "language_overrides.tsv", encoding="utf-8") as fh:
        overrides = ingest.read_language_overrides(fh)
    clean = ingest.filter_spam(tuples.records)
    retained = ingest.filter_channels(channels.records, language_overrides=overrides)
    print(f"{len(retained)} channels retained after the subscriber and language filters")

    with open(m / "video_map.tsv", encoding="utf-8") as fh:
        video_map = ingest.read_video_map(fh)
    w, report = ingest.build_sharing_matrix(clean, video_map, [r.channel_id for r in retained])
    print(f"sharing matrix: {len(w.channels)} channels x {len(w.subreddits)} subreddits "
          f"({report.unresolved_mentions} unresolved tuples dropped)")

    subreddit_vectors = read_embedding(m / "subreddit_vectors.txt", provenance="external")
    soc = embed_social(w, subreddit_vectors).table
    print(f"social embedding: {len(soc)} channels, {soc.d} components each")

    seeds = read_dimension_seeds(m / "seeds.csv")
    direction = build_dimension(subreddit_vectors, seeds["partisan"], "partisan")
    scores = standardize(project(soc, direction).scores)
    top = sorted(scores.scores.items(), key=lambda kv: kv[1])
    print("\npartisan scores (standardized), extremes:")
    for cid, score in (*top[:3], *top[-3:]):
        print(f"  {cid}  {score:+.2f}")

    triplets = read_triplets(m / "triplets.csv")
    judgments = read_judgments(m / "judgments.csv", triplets)
    rows = agreement_sweep(list(judgments.values()), soc)
    print()
    print(render_agreement(rows, "odd-one-out agreement vs crowd majorities"))


if __name__ == "__main__":
    main()
