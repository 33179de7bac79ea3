"""Parse sharing tuples and channel records, filter them, build the sharing matrix."""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from collections.abc import Iterable, Mapping

import numpy as np
from scipy import sparse

log = logging.getLogger(__name__)

SOURCES = ("post", "comment")

# Collection window, inclusive start / exclusive end, seconds since epoch.
WINDOW_START = int(datetime(2010, 1, 1, tzinfo=timezone.utc).timestamp())
WINDOW_END = int(datetime(2022, 9, 1, tzinfo=timezone.utc).timestamp())

# The platform's fixed set of 15 video categories.
CATEGORIES = frozenset(
    {
        "Film & Animation",
        "Autos & Vehicles",
        "Music",
        "Pets & Animals",
        "Sports",
        "Travel & Events",
        "Gaming",
        "People & Blogs",
        "Comedy",
        "Entertainment",
        "News & Politics",
        "Howto & Style",
        "Education",
        "Science & Technology",
        "Nonprofits & Activism",
    }
)

DEFAULT_MAX_VIDEOS_PER_AUTHOR = 1000
DEFAULT_MIN_SUBSCRIBERS = 100_000


@dataclass(frozen=True)
class SharingTuple:
    subreddit: str
    video_id: str
    author_id: str
    source: str
    timestamp: int


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    title: str
    description: str
    category: str
    views: int


@dataclass(frozen=True)
class ChannelRecord:
    channel_id: str
    name: str
    description: str
    subscribers: int | None
    views: int
    created_at: int
    language: str
    videos: tuple[VideoRecord, ...]
    category_votes: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.category_votes:
            votes = dict(Counter(v.category for v in self.videos))
            object.__setattr__(self, "category_votes", votes)
        elif sum(self.category_votes.values()) != len(self.videos):
            raise ValueError(
                f"channel {self.channel_id}: category_votes do not sum to the video count"
            )


@dataclass
class ParseResult:
    """Parsed records plus how many input lines were skipped as malformed."""

    records: list
    skipped: int
    total: int


class MalformedLine(ValueError):
    pass


def _parse_tuple_line(line: str) -> SharingTuple:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 5:
        raise MalformedLine(f"expected 5 tab-separated fields, got {len(parts)}")
    subreddit, video_id, author_id, source, ts_raw = parts
    if not subreddit or not video_id or not author_id:
        raise MalformedLine("empty id field")
    if source not in SOURCES:
        raise MalformedLine(f"bad source {source!r}")
    try:
        timestamp = int(ts_raw)
    except ValueError as exc:
        raise MalformedLine(f"bad timestamp {ts_raw!r}") from exc
    if not WINDOW_START <= timestamp < WINDOW_END:
        raise MalformedLine(f"timestamp {timestamp} outside collection window")
    return SharingTuple(subreddit, video_id, author_id, source, timestamp)


def parse_tuples(stream: Iterable[str]) -> ParseResult:
    """Parse tab-separated sharing tuples, skipping and counting malformed lines.

    Raises ValueError when more than half of the non-blank lines are
    malformed, which almost always means the wrong file was supplied.
    """
    tuples = []
    skipped = 0
    total = 0
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            tuples.append(_parse_tuple_line(line))
        except MalformedLine as exc:
            skipped += 1
            log.debug("tuples line %d skipped: %s", lineno, exc)
    if total and skipped * 2 > total:
        raise ValueError(f"{skipped} of {total} lines malformed; wrong file?")
    return ParseResult(tuples, skipped, total)


def write_tuples(tuples: Iterable[SharingTuple], fh) -> None:
    for t in tuples:
        fh.write(f"{t.subreddit}\t{t.video_id}\t{t.author_id}\t{t.source}\t{t.timestamp}\n")


def _parse_video(obj) -> VideoRecord:
    video_id = obj["video_id"]
    category = obj["category"]
    if not video_id:
        raise MalformedLine("empty video_id")
    if category not in CATEGORIES:
        raise MalformedLine(f"unknown category {category!r}")
    views = int(obj.get("views", 0))
    if views < 0:
        raise MalformedLine("negative view count")
    return VideoRecord(video_id, obj.get("title", ""), obj.get("description", ""), category, views)


def _parse_channel_obj(obj) -> ChannelRecord:
    channel_id = obj["channel_id"]
    if not channel_id:
        raise MalformedLine("empty channel_id")
    videos = tuple(_parse_video(v) for v in obj.get("videos", []))
    if len(videos) > 50:
        raise MalformedLine(f"{len(videos)} videos, limit is 50")
    if len({v.video_id for v in videos}) != len(videos):
        raise MalformedLine("duplicate video_id within channel")
    votes = obj.get("category_votes")
    if votes is None:
        votes = dict(Counter(v.category for v in videos))
    else:
        votes = {str(k): int(v) for k, v in votes.items()}
        if sum(votes.values()) != len(videos):
            raise MalformedLine("category_votes do not sum to the video count")
    subscribers = obj.get("subscribers")
    if subscribers is not None:
        subscribers = int(subscribers)
        if subscribers < 0:
            raise MalformedLine("negative subscriber count")
    return ChannelRecord(
        channel_id=channel_id,
        name=obj.get("name", ""),
        description=obj.get("description", ""),
        subscribers=subscribers,
        views=int(obj.get("views", 0)),
        created_at=int(obj.get("created_at", 0)),
        language=str(obj.get("language", "")),
        videos=videos,
        category_votes=votes,
    )


def parse_channels(stream: Iterable[str]) -> ParseResult:
    """Parse one JSON channel record per line, skipping malformed ones."""
    records = []
    skipped = 0
    total = 0
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            records.append(_parse_channel_obj(json.loads(line)))
        except (MalformedLine, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            skipped += 1
            log.debug("channels line %d skipped: %s", lineno, exc)
    if total and skipped * 2 > total:
        raise ValueError(f"{skipped} of {total} channel records malformed; wrong file?")
    return ParseResult(records, skipped, total)


def write_channels(records: Iterable[ChannelRecord], fh) -> None:
    for rec in records:
        obj = {
            "channel_id": rec.channel_id,
            "name": rec.name,
            "description": rec.description,
            "subscribers": rec.subscribers,
            "views": rec.views,
            "created_at": rec.created_at,
            "language": rec.language,
            "category_votes": dict(rec.category_votes),
            "videos": [
                {
                    "video_id": v.video_id,
                    "title": v.title,
                    "description": v.description,
                    "category": v.category,
                    "views": v.views,
                }
                for v in rec.videos
            ],
        }
        fh.write(json.dumps(obj, sort_keys=True) + "\n")


def channel_category(record: ChannelRecord) -> str | None:
    """Majority-vote category over a channel's recent videos.

    Ties are broken by the total views of the tied categories' videos,
    then lexicographically, so the result is deterministic.
    """
    if not record.category_votes:
        return None
    top = max(record.category_votes.values())
    tied = [c for c, n in record.category_votes.items() if n == top]
    if len(tied) == 1:
        return tied[0]
    views = {c: 0 for c in tied}
    for v in record.videos:
        if v.category in views:
            views[v.category] += v.views
    best_views = max(views.values())
    return min(c for c in tied if views[c] == best_views)


def filter_spam(
    tuples: list[SharingTuple], max_videos_per_author: int = DEFAULT_MAX_VIDEOS_PER_AUTHOR
) -> list[SharingTuple]:
    """Drop every tuple of authors who shared strictly more than the cap of distinct videos."""
    videos_by_author = defaultdict(set)
    for t in tuples:
        videos_by_author[t.author_id].add(t.video_id)
    spammers = {a for a, vids in videos_by_author.items() if len(vids) > max_videos_per_author}
    if spammers:
        log.info("spam filter removed %d authors", len(spammers))
    return [t for t in tuples if t.author_id not in spammers]


def _language_matches(tag: str, wanted: str) -> bool:
    tag = tag.lower()
    wanted = wanted.lower()
    return tag == wanted or tag.startswith(wanted + "-")


def filter_channels(
    channels: Iterable[ChannelRecord],
    min_subscribers: int = DEFAULT_MIN_SUBSCRIBERS,
    language: str = "en",
    language_overrides: Mapping[str, str] | None = None,
) -> list[ChannelRecord]:
    """Keep channels strictly above the subscriber floor with a matching language tag.

    The language decision uses the record's metadata tag, optionally
    replaced by a precomputed per-channel override (for channels whose
    metadata tag is missing or wrong). Channels without a subscriber
    count are excluded and logged.
    """
    overrides = language_overrides or {}
    kept = []
    for rec in channels:
        if rec.subscribers is None:
            log.warning("channel %s excluded: missing subscriber count", rec.channel_id)
            continue
        if rec.subscribers <= min_subscribers:
            continue
        tag = overrides.get(rec.channel_id, rec.language)
        if _language_matches(tag, language):
            kept.append(rec)
    return kept


class SharingMatrix:
    """Row-normalized sparse channel x subreddit mention matrix."""

    def __init__(self, channels, subreddits, matrix: sparse.csr_matrix):
        self.channels = tuple(channels)
        self.subreddits = tuple(subreddits)
        matrix = sparse.csr_matrix(matrix, dtype=np.float64)
        if matrix.shape != (len(self.channels), len(self.subreddits)):
            raise ValueError("matrix shape does not match the id indexes")
        if matrix.nnz and matrix.data.min() < 0:
            raise ValueError("negative weight")
        self.matrix = matrix

    @property
    def shape(self):
        return self.matrix.shape

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SharingMatrix)
            and self.channels == other.channels
            and self.subreddits == other.subreddits
            and (self.matrix != other.matrix).nnz == 0
        )


@dataclass
class MatrixReport:
    unresolved_mentions: int
    zero_mention_channels: list[str]


def build_sharing_matrix(
    tuples: Iterable[SharingTuple],
    video_to_channel: Mapping[str, str],
    retained_channels: Iterable[str],
) -> tuple[SharingMatrix, MatrixReport]:
    """Count channel mentions per subreddit and row-normalize.

    Entry (i, j) is the number of mentions of channel i on subreddit j
    divided by the channel's total mentions, so every retained row sums
    to one. Tuples whose video id cannot be resolved are dropped and
    counted, never guessed.
    """
    retained = set(retained_channels)
    counts = Counter()
    unresolved = 0
    mentioned = set()
    for t in tuples:
        channel = video_to_channel.get(t.video_id)
        if channel is None:
            unresolved += 1
            continue
        if channel not in retained:
            continue
        mentioned.add(channel)
        counts[(channel, t.subreddit)] += 1

    channels = sorted(mentioned)
    subreddits = sorted({sub for (_, sub) in counts})
    zero_mention = sorted(retained - mentioned)
    if zero_mention:
        log.warning("%d retained channels had no resolvable mentions", len(zero_mention))

    chan_row = {c: i for i, c in enumerate(channels)}
    sub_col = {s: j for j, s in enumerate(subreddits)}
    rows = np.fromiter((chan_row[c] for (c, s) in counts), dtype=np.int64, count=len(counts))
    cols = np.fromiter((sub_col[s] for (c, s) in counts), dtype=np.int64, count=len(counts))
    vals = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(len(channels), len(subreddits)))

    totals = np.asarray(matrix.sum(axis=1)).ravel()
    inv = sparse.diags(1.0 / totals) if len(channels) else sparse.csr_matrix((0, 0))
    normalized = sparse.csr_matrix(inv @ matrix) if len(channels) else matrix
    return SharingMatrix(channels, subreddits, normalized), MatrixReport(unresolved, zero_mention)


_W_FMT = "%.17g"


def write_sharing_matrix(w: SharingMatrix, path) -> None:
    """Write "n m" then "row col weight" triplets, plus .rows/.cols id indexes."""
    coo = w.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{w.shape[0]} {w.shape[1]}\n")
        for k in order:
            fh.write(f"{coo.row[k]} {coo.col[k]} {_W_FMT % coo.data[k]}\n")
    for suffix, ids in ((".rows", w.channels), (".cols", w.subreddits)):
        with open(str(path) + suffix, "w", encoding="utf-8") as fh:
            for cid in ids:
                fh.write(cid + "\n")


def read_sharing_matrix(path) -> SharingMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        n, m = (int(x) for x in fh.readline().split())
        rows, cols, vals = [], [], []
        for line in fh:
            r, c, v = line.split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    with open(str(path) + ".rows", "r", encoding="utf-8") as fh:
        channels = [line.rstrip("\n") for line in fh if line.strip()]
    with open(str(path) + ".cols", "r", encoding="utf-8") as fh:
        subreddits = [line.rstrip("\n") for line in fh if line.strip()]
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(n, m))
    return SharingMatrix(channels, subreddits, matrix)


def read_video_map(stream: Iterable[str]) -> dict[str, str]:
    """Two-column tab-separated video_id -> channel_id map."""
    mapping = {}
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"video map line {lineno}: expected video_id<TAB>channel_id")
        mapping[parts[0]] = parts[1]
    return mapping


def read_language_overrides(stream: Iterable[str]) -> dict[str, str]:
    """Two-column tab-separated channel_id -> language tag overrides."""
    overrides = {}
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"override line {lineno}: expected channel_id<TAB>language")
        overrides[parts[0]] = parts[1]
    return overrides
