"""Regenerate the bundled mini dataset.

Writes the twelve input files the walkthrough demos and the acceptance
pipeline consume: sharing tuples, channel records, a video map,
language overrides, subreddit and per-video vectors, a recommendation
crawl, dimension seed pairs, pairwise comparisons, stance labels, and
crowd triplets with judgments. Every byte is deterministic, so
rebuilding into a fresh directory reproduces the checked-in copy.
"""

import argparse
from pathlib import Path

from chanvec import minidata


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", nargs="?", default=Path("data/mini"), type=Path)
    args = parser.parse_args()

    paths = minidata.generate(args.out_dir)
    total = 0
    for name in sorted(paths):
        size = paths[name].stat().st_size
        total += size
        print(f"  {name:26s} {size:7,d} bytes")
    print(f"\n{len(paths)} files, {total:,} bytes, under {args.out_dir}/")


if __name__ == "__main__":
    main()
