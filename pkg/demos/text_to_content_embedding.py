"""Raw text to channel content embedding, across the two packages.

Writes a handful of video titles and descriptions, encodes them with
the text-encoder command line, then averages the per-video vectors
into channel vectors with the embed-con subcommand. The packages only
meet at the vector file: one "video_id field components..." line per
item. The offline hashing backend keeps the demo self-contained; pass
a checkpoint directory via --model-path to use a real sentence encoder
(the text-encoder CLI takes the same flag).
"""

import argparse
import subprocess
import sys
import tempfile
from pathlib import Path

from chanvec.embedding import read_embedding

VIDEOS = [
    ("vid01", "chA", "morning news roundup", "politics and a panel discussion"),
    ("vid02", "chA", "evening news special", "interviews about the election"),
    ("vid03", "chB", "speedrun world record", "gaming highlights and commentary"),
    ("vid04", "chB", "boss fight guide", ""),
]


def run(label: str, cmd: list[str]) -> None:
    print(f"$ {' '.join(cmd)}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"{label} failed:\n{proc.stderr}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model-path", type=Path, default=None,
                        help="use the 'model' backend with this checkpoint")
    args = parser.parse_args()

    work = Path(tempfile.mkdtemp(prefix="text_content_"))
    items = work / "items.tsv"
    with open(items, "w", encoding="utf-8") as fh:
        for video_id, _, title, description in VIDEOS:
            fh.write(f"{video_id}\ttitle\t{title}\n")
            fh.write(f"{video_id}\tdescription\t{description}\n")
    video_map = work / "video_map.tsv"
    with open(video_map, "w", encoding="utf-8") as fh:
        for video_id, channel_id, _, _ in VIDEOS:
            fh.write(f"{video_id}\t{channel_id}\n")
    print(f"wrote {2 * len(VIDEOS)} text items for {len(VIDEOS)} videos under {work}")

    vectors = work / "video_vectors.txt"
    encode = ["text-encoder", "--input", str(items), "--output", str(vectors)]
    if args.model_path is not None:
        encode += ["--backend", "model", "--model-path", str(args.model_path)]
    else:
        encode += ["--backend", "hash"]
    run("text-encoder", encode)

    out = work / "C_con.txt"
    run("embed-con", ["chanvec", "embed-con", "--video-vectors", str(vectors),
                      "--video-map", str(video_map), "--out", str(out)])

    table = read_embedding(out, provenance="con")
    print(f"\ncontent embedding: {len(table)} channels, {table.d} components each")
    for cid in table.ids:
        head = " ".join(f"{x:+.3f}" for x in table[cid][:4])
        print(f"  {cid}: [{head} ...]")


if __name__ == "__main__":
    main()
