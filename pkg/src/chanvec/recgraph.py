"""Weighted undirected co-recommendation graph built from crawl records."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from collections import Counter
from collections.abc import Iterable

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrawlRecord:
    source_video: str
    source_channel: str
    timestamp: int
    recommendations: tuple[tuple[str, str], ...]  # (video_id, channel_id) pairs


class RecGraph:
    """Undirected graph on channel ids with positive integer edge weights.

    Self-loops are allowed (a channel can recommend itself) but flagged
    on construction so callers can report them.
    """

    def __init__(self, nodes: Iterable[str], edges: dict[tuple[str, str], int]):
        self.nodes = tuple(sorted(set(nodes)))
        node_set = set(self.nodes)
        canonical = {}
        for (u, v), w in edges.items():
            if int(w) < 1:
                raise ValueError(f"edge ({u}, {v}) has weight {w}")
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u}, {v}) references unknown node")
            key = (u, v) if u <= v else (v, u)
            canonical[key] = canonical.get(key, 0) + int(w)
        self.edges = dict(sorted(canonical.items()))
        self.self_loops = tuple(u for (u, v) in self.edges if u == v)

    def weight(self, u, v) -> int:
        key = (u, v) if u <= v else (v, u)
        return self.edges.get(key, 0)

    def degree(self, u) -> int:
        return sum(w for (a, b), w in self.edges.items() if u in (a, b))

    def neighbors(self, u) -> list[str]:
        out = set()
        for (a, b) in self.edges:
            if a == u:
                out.add(b)
            if b == u:
                out.add(a)
        return sorted(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RecGraph)
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class GraphReport:
    dropped_records: int
    dropped_edges: int
    self_loops: int


def parse_crawl_records(stream: Iterable[str]) -> list[CrawlRecord]:
    """Parse crawl lines: source_video, source_channel, timestamp, then video:channel pairs."""
    records = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) < 3 or not parts[0] or not parts[1]:
            raise ValueError(f"crawl line {lineno}: expected source_video, source_channel, timestamp")
        try:
            ts = int(parts[2])
        except ValueError:
            raise ValueError(f"crawl line {lineno}: bad timestamp {parts[2]!r}") from None
        recs = []
        for token in parts[3:]:
            if not token:
                continue
            if ":" not in token:
                raise ValueError(f"crawl line {lineno}: bad recommendation {token!r}")
            vid, chan = token.split(":", 1)
            recs.append((vid, chan))
        records.append(CrawlRecord(parts[0], parts[1], ts, tuple(recs)))
    return records


def write_crawl_records(records: Iterable[CrawlRecord], fh) -> None:
    for r in records:
        pairs = "\t".join(f"{v}:{c}" for v, c in r.recommendations)
        tail = "\t" + pairs if pairs else ""
        fh.write(f"{r.source_video}\t{r.source_channel}\t{r.timestamp}{tail}\n")


def build_rec_graph(
    records: Iterable[CrawlRecord], retained_channels: Iterable[str]
) -> tuple[RecGraph, GraphReport]:
    """Count co-recommendation observations between retained channels.

    weight(u, v) is the number of times a video of v appeared in the
    recommendations of a video of u or vice versa. Observations touching
    channels outside the retained set are dropped and counted. The result
    is independent of record order.
    """
    retained = set(retained_channels)
    weights = Counter()
    nodes = set()
    dropped_records = 0
    dropped_edges = 0
    for rec in records:
        if rec.source_channel not in retained:
            dropped_records += 1
            dropped_edges += len(rec.recommendations)
            continue
        nodes.add(rec.source_channel)
        for _, rec_channel in rec.recommendations:
            if rec_channel not in retained:
                dropped_edges += 1
                continue
            nodes.add(rec_channel)
            key = tuple(sorted((rec.source_channel, rec_channel)))
            weights[key] += 1
    graph = RecGraph(nodes, dict(weights))
    if dropped_edges:
        log.info("dropped %d observations outside the retained channel set", dropped_edges)
    return graph, GraphReport(dropped_records, dropped_edges, len(graph.self_loops))
