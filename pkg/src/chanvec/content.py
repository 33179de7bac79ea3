"""Aggregate per-video text vectors into content channel vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from collections.abc import Iterable, Mapping

import numpy as np

from chanvec.embedding import EmbeddingTable

log = logging.getLogger(__name__)

_TAGS = ("title", "description")


@dataclass
class VideoVectors:
    """Title and description vectors of one video; a missing field is the zero vector."""

    video_id: str
    title_vector: np.ndarray | None = None
    description_vector: np.ndarray | None = None

    def combined(self) -> np.ndarray:
        vecs = [v for v in (self.title_vector, self.description_vector) if v is not None]
        if not vecs:
            raise ValueError(f"video {self.video_id} has no vectors")
        total = vecs[0].astype(np.float64, copy=True)
        for v in vecs[1:]:
            if v.shape != total.shape:
                raise ValueError(f"video {self.video_id}: mismatched vector dimensions")
            total += v
        return total


@dataclass
class ContentEmbedResult:
    table: EmbeddingTable
    omitted: list[str]


def read_video_vectors(stream: Iterable[str]) -> dict[str, VideoVectors]:
    """Read "video_id tag components..." lines into per-video vector pairs."""
    videos: dict[str, VideoVectors] = {}
    dim = None
    for lineno, line in enumerate(stream, start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 3:
            raise ValueError(f"video vectors line {lineno}: expected id, tag, components")
        video_id, tag = parts[0], parts[1]
        if tag not in _TAGS:
            raise ValueError(f"video vectors line {lineno}: unknown tag {tag!r}")
        vec = np.array([float(p) for p in parts[2:]], dtype=np.float64)
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ValueError(f"video vectors line {lineno}: dimension {vec.size} != {dim}")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"video vectors line {lineno}: non-finite component")
        entry = videos.setdefault(video_id, VideoVectors(video_id))
        if tag == "title":
            entry.title_vector = vec
        else:
            entry.description_vector = vec
    return videos


def write_video_vectors(videos: Iterable[VideoVectors], fh, fmt: str = "%.8g") -> None:
    for vv in videos:
        for tag, vec in (("title", vv.title_vector), ("description", vv.description_vector)):
            if vec is None:
                continue
            fh.write(f"{vv.video_id} {tag} " + " ".join(fmt % x for x in vec) + "\n")


def aggregate_content(
    per_video: Mapping[str, VideoVectors],
    channel_index: Mapping[str, Iterable[str]],
) -> ContentEmbedResult:
    """Sum title+description per video, then average per channel.

    Channels with no vectorized videos are omitted and reported. No
    normalization happens here; downstream similarity is cosine, so the
    global scale is irrelevant.
    """
    ids = []
    rows = []
    omitted = []
    dim = None
    for channel in sorted(channel_index):
        vecs = []
        for vid in channel_index[channel]:
            vv = per_video.get(vid)
            if vv is None:
                continue
            combined = vv.combined()
            if dim is None:
                dim = combined.size
            elif combined.size != dim:
                raise ValueError(f"channel {channel}: mixed vector dimensions")
            vecs.append(combined)
        if not vecs:
            omitted.append(channel)
            continue
        ids.append(channel)
        rows.append(np.mean(vecs, axis=0))
    if omitted:
        log.warning("%d channels omitted: no vectorized videos", len(omitted))
    if not ids:
        raise ValueError("no channel had any vectorized video")
    return ContentEmbedResult(EmbeddingTable(ids, np.asarray(rows), provenance="con"), omitted)
