"""Deterministic synthetic mini-dataset exercising every pipeline stage.

The generator writes a complete input bundle (sharing tuples, channel
records, subreddit vectors, video vectors, crawl records, dimension
seeds, comparisons, labels, triplets, judgments) into a directory. The
data is structured: channels belong to three interest groups with a
left-right lean inside each group, so embeddings, dimensions, and
rank-correlation stages all have signal to find. Everything derives
from one fixed seed; two runs produce byte-identical files.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from chanvec import ingest
from chanvec.content import VideoVectors, write_video_vectors
from chanvec.embedding import EmbeddingTable, write_embedding
from chanvec.evaluation import predict_odd, sample_triplets, write_judgments, write_triplets
from chanvec.evaluation import TripletJudgment
from chanvec.ingest import ChannelRecord, SharingTuple, VideoRecord
from chanvec.ranking import LABEL_ORDER, write_comparisons, write_labels
from chanvec.recgraph import CrawlRecord, write_crawl_records
from chanvec.seeds import derive_seed
from chanvec.social import embed_social
from chanvec.synth import sample_comparisons

MINI_SEED = 7
N_CHANNELS = 48
N_GROUPS = 3
GROUP_CATEGORIES = ("Gaming", "Music", "News & Politics")
SUBS_PER_GROUP = 4
S_DIM = 8
VIDEO_DIM = 12
VIDEOS_PER_CHANNEL = 3
TRIPLET_K = 5
TRIPLET_N = 30

# Channels failing the retention filters, by construction.
_LOW_SUBS = "ch36"
_NO_SUBS = "ch37"
_WRONG_LANG = "ch38"
_OVERRIDE_LANG = "ch39"
_EXACT_FLOOR = "ch41"


def _channel_ids():
    return [f"ch{i:02d}" for i in range(N_CHANNELS)]


def _group(i: int) -> int:
    return i % N_GROUPS


def _lean(rng_val: float, i: int) -> float:
    # deterministic spread over [-1, 1], decoupled from the group id
    return -1.0 + 2.0 * ((i * 7) % N_CHANNELS) / (N_CHANNELS - 1)


def _subreddits():
    return [f"sr{j:02d}" for j in range(N_GROUPS * SUBS_PER_GROUP)]


def _subreddit_vectors() -> EmbeddingTable:
    """Structured subreddit space: group axes plus polarity/intensity axes."""
    rng = np.random.default_rng(derive_seed(MINI_SEED, "mini", "subreddit-vectors"))
    subs = _subreddits()
    vecs = np.zeros((len(subs), S_DIM))
    pol_axis = np.zeros(S_DIM)
    pol_axis[3] = 1.0
    int_axis = np.zeros(S_DIM)
    int_axis[4] = 1.0
    pol_local = {0: -1.0, 1: -0.5, 2: 0.5, 3: 1.0}
    int_local = {0: 1.0, 1: -1.0, 2: -1.0, 3: 1.0}
    for j, _sub in enumerate(subs):
        g, local = divmod(j, SUBS_PER_GROUP)
        group_axis = np.zeros(S_DIM)
        group_axis[g] = 1.0
        vecs[j] = (
            2.0 * group_axis
            + pol_local[local] * pol_axis
            + int_local[local] * int_axis
            + 0.05 * rng.standard_normal(S_DIM)
        )
    return EmbeddingTable(subs, vecs, provenance="external")


def _build_channels() -> list[ChannelRecord]:
    channels = []
    rng = np.random.default_rng(derive_seed(MINI_SEED, "mini", "channels"))
    for i, cid in enumerate(_channel_ids()):
        g = _group(i)
        category = GROUP_CATEGORIES[g]
        videos = []
        for v in range(VIDEOS_PER_CHANNEL):
            vid = f"v{i:02d}_{v}"
            # one channel gets a split vote so the majority rule has work to do
            vcat = category
            if cid == "ch06" and v == 2:
                vcat = "Comedy"
            videos.append(
                VideoRecord(vid, f"clip {vid}", f"about {vid}", vcat, int(rng.integers(100, 10000)))
            )
        subscribers: int | None = int(150_000 + 10_000 * i)
        language = "en"
        if cid == _LOW_SUBS:
            subscribers = 90_000
        elif cid == _NO_SUBS:
            subscribers = None
        elif cid == _WRONG_LANG:
            language = "de"
        elif cid == _OVERRIDE_LANG:
            language = "zz"
        elif cid == _EXACT_FLOOR:
            subscribers = 100_000
        elif cid == "ch40":
            language = "en-US"
        channels.append(
            ChannelRecord(
                channel_id=cid,
                name=f"channel {i}",
                description=f"synthetic channel {i}",
                subscribers=subscribers,
                views=int(rng.integers(10_000, 1_000_000)),
                created_at=1300000000 + i * 1000,
                language=language,
                videos=tuple(videos),
            )
        )
    return channels


def _mention_weights(g: int, lean: float, extremity: float) -> dict[str, float]:
    """Mention mass over the group's four subreddits, shaped by lean."""
    left = (1.0 - lean) / 2.0
    right = (1.0 + lean) / 2.0
    inner = 1.0 - extremity
    base = g * SUBS_PER_GROUP
    return {
        f"sr{base:02d}": left * extremity,
        f"sr{base + 1:02d}": left * inner,
        f"sr{base + 2:02d}": right * inner,
        f"sr{base + 3:02d}": right * extremity,
    }


def _build_tuples(channels: list[ChannelRecord]) -> list[SharingTuple]:
    rng = np.random.default_rng(derive_seed(MINI_SEED, "mini", "tuples"))
    tuples = []
    ts = ingest.WINDOW_START + 10_000
    for i, rec in enumerate(channels):
        g = _group(i)
        lean = _lean(0.0, i)
        extremity = 0.35 + 0.5 * abs(lean)
        weights = _mention_weights(g, lean, extremity)
        subs = sorted(weights)
        probs = np.array([weights[s] for s in subs])
        probs = probs / probs.sum()
        n_mentions = 30
        draws = rng.multinomial(n_mentions, probs)
        author_pool = [f"u{(i * 3 + a) % 60:03d}" for a in range(6)]
        for sub, count in zip(subs, draws):
            for _ in range(int(count)):
                video = rec.videos[int(rng.integers(0, len(rec.videos)))].video_id
                author = author_pool[int(rng.integers(0, len(author_pool)))]
                source = "post" if rng.random() < 0.5 else "comment"
                ts += 60
                tuples.append(SharingTuple(sub, video, author, source, ts))
    # a spam author sharing over a thousand distinct videos
    for k in range(1001):
        ts += 5
        tuples.append(SharingTuple("sr00", f"vx{k:04d}", "sp_am", "post", ts))
    return tuples


def _retained_ids(channels: list[ChannelRecord]) -> list[str]:
    overrides = {_OVERRIDE_LANG: "en"}
    kept = ingest.filter_channels(channels, language_overrides=overrides)
    return sorted(rec.channel_id for rec in kept)


def _build_crawl(channels: list[ChannelRecord], retained: list[str]) -> list[CrawlRecord]:
    rng = np.random.default_rng(derive_seed(MINI_SEED, "mini", "crawl"))
    by_id = {rec.channel_id: rec for rec in channels}
    index = {cid: i for i, cid in enumerate(_channel_ids())}
    records = []
    ts = ingest.WINDOW_START + 500_000
    sources = list(retained) + [_WRONG_LANG]  # one non-retained source, dropped downstream
    for cid in sources:
        rec = by_id[cid]
        g = _group(index[cid])
        peers_in = [c for c in retained if _group(index[c]) == g and c != cid]
        peers_out = [c for c in retained if _group(index[c]) != g]
        for video in rec.videos:
            ts += 120
            recs = []
            for _ in range(5):
                if rng.random() < 0.85:
                    target = peers_in[int(rng.integers(0, len(peers_in)))]
                else:
                    target = peers_out[int(rng.integers(0, len(peers_out)))]
                tvid = by_id[target].videos[int(rng.integers(0, VIDEOS_PER_CHANNEL))].video_id
                recs.append((tvid, target))
            if rng.random() < 0.1:
                recs.append((by_id[_EXACT_FLOOR].videos[0].video_id, _EXACT_FLOOR))
            records.append(CrawlRecord(video.video_id, cid, ts, tuple(recs)))
    return records


def _build_video_vectors(channels: list[ChannelRecord], retained: list[str]) -> list[VideoVectors]:
    rng = np.random.default_rng(derive_seed(MINI_SEED, "mini", "video-vectors"))
    index = {cid: i for i, cid in enumerate(_channel_ids())}
    out = []
    skip_vectors = {"ch44", "ch45"}  # mapped channels left without vectors
    for rec in channels:
        if rec.channel_id not in retained or rec.channel_id in skip_vectors:
            continue
        i = index[rec.channel_id]
        g = _group(i)
        lean = _lean(0.0, i)
        center = np.zeros(VIDEO_DIM)
        center[g] = 3.0
        center[N_GROUPS] = 1.5 * lean
        for video in rec.videos:
            title = center + 0.3 * rng.standard_normal(VIDEO_DIM)
            if rng.random() < 0.8:
                desc = center + 0.3 * rng.standard_normal(VIDEO_DIM)
            else:
                desc = None
            out.append(VideoVectors(video.video_id, title, desc))
    return out


def _label_for(lean: float) -> str:
    edges = (-0.72, -0.43, -0.14, 0.14, 0.43, 0.72)
    rank = int(np.searchsorted(edges, lean, side="left"))
    return LABEL_ORDER[rank]


def _soc_table(channels, tuples, retained) -> EmbeddingTable:
    video_map = {v.video_id: rec.channel_id for rec in channels for v in rec.videos}
    clean = ingest.filter_spam(tuples)
    w, _report = ingest.build_sharing_matrix(clean, video_map, retained)
    return embed_social(w, _subreddit_vectors()).table


def generate(out_dir) -> dict[str, Path]:
    """Write the full mini-dataset into out_dir and return the file map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    channels = _build_channels()
    tuples = _build_tuples(channels)
    retained = _retained_ids(channels)

    paths = {}

    def text_file(name: str, writer) -> Path:
        buf = io.StringIO()
        writer(buf)
        p = out / name
        p.write_text(buf.getvalue(), encoding="utf-8")
        paths[name] = p
        return p

    text_file("tuples.tsv", lambda fh: ingest.write_tuples(tuples, fh))
    text_file("channels.jsonl", lambda fh: ingest.write_channels(channels, fh))
    video_map = {v.video_id: rec.channel_id for rec in channels for v in rec.videos}
    text_file(
        "video_map.tsv",
        lambda fh: fh.write("".join(f"{v}\t{c}\n" for v, c in sorted(video_map.items()))),
    )
    text_file(
        "language_overrides.tsv", lambda fh: fh.write(f"{_OVERRIDE_LANG}\ten\n")
    )

    write_embedding(_subreddit_vectors(), out / "subreddit_vectors.txt")
    paths["subreddit_vectors.txt"] = out / "subreddit_vectors.txt"

    text_file(
        "video_vectors.txt",
        lambda fh: write_video_vectors(_build_video_vectors(channels, retained), fh),
    )
    text_file(
        "crawl.tsv", lambda fh: write_crawl_records(_build_crawl(channels, retained), fh)
    )
    text_file(
        "seeds.csv",
        lambda fh: fh.write(
            "partisan,sr00,sr03\n"
            "partisan,sr04,sr07\n"
            "partisan,sr08,sr11\n"
            "partisanness,sr01,sr00\n"
            "partisanness,sr05,sr04\n"
            "partisanness,sr09,sr08\n"
        ),
    )

    index = {cid: i for i, cid in enumerate(_channel_ids())}
    true_scores = {cid: float(np.exp(1.5 * _lean(0.0, index[cid]))) for cid in retained}
    comparisons = sample_comparisons(
        true_scores, 400, seed=derive_seed(MINI_SEED, "mini", "comparisons"), dimension="partisan"
    )
    write_comparisons(out / "comparisons.csv", comparisons)
    paths["comparisons.csv"] = out / "comparisons.csv"

    labels = {cid: _label_for(_lean(0.0, index[cid])) for cid in retained}
    write_labels(out / "labels.csv", labels)
    paths["labels.csv"] = out / "labels.csv"

    soc = _soc_table(channels, tuples, retained)
    sample = sample_triplets(
        soc, k=TRIPLET_K, n=TRIPLET_N, seed=derive_seed(MINI_SEED, "mini", "triplets")
    )
    write_triplets(out / "triplets.csv", sample.triplets)
    paths["triplets.csv"] = out / "triplets.csv"

    vrng = np.random.default_rng(derive_seed(MINI_SEED, "mini", "judgments"))
    judgments = {}
    for i, t in enumerate(sample.triplets):
        pick = predict_odd(t, soc)
        others = [cid for cid in t.ids if cid != pick]
        votes = {}
        for _ in range(5):
            choice = pick if vrng.random() < 0.8 else others[int(vrng.integers(0, 2))]
            votes[choice] = votes.get(choice, 0) + 1
        judgments[f"t{i:05d}"] = TripletJudgment(t, votes)
    write_judgments(out / "judgments.csv", judgments)
    paths["judgments.csv"] = out / "judgments.csv"
    return paths
