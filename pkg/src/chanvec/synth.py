"""Seeded synthetic fixtures: planted-partition graphs, blob embeddings,
and comparison streams drawn from known ground-truth scores."""

from __future__ import annotations

import numpy as np

from chanvec.embedding import EmbeddingTable
from chanvec.ranking import ComparisonRecord
from chanvec.recgraph import RecGraph


def planted_partition(
    n_nodes: int = 150,
    n_communities: int = 3,
    p_intra: float = 0.3,
    p_inter: float = 0.01,
    seed: int = 0,
) -> tuple[RecGraph, dict[str, int]]:
    """Random graph with equal-size planted communities.

    Node ids carry no community hint; the returned map holds the truth.
    Isolated nodes are attached to a random same-community peer so the
    walk corpus covers every node.
    """
    if n_nodes < 2 * n_communities:
        raise ValueError("need at least two nodes per community")
    if not (0 <= p_inter <= p_intra <= 1):
        raise ValueError("expected 0 <= p_inter <= p_intra <= 1")
    rng = np.random.default_rng(seed)
    width = len(str(n_nodes - 1))
    names = [f"n{i:0{width}d}" for i in range(n_nodes)]
    community = {names[i]: i % n_communities for i in range(n_nodes)}

    edges: dict[tuple[str, str], float] = {}
    degree = np.zeros(n_nodes, dtype=np.int64)
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            p = p_intra if community[names[i]] == community[names[j]] else p_inter
            if rng.random() < p:
                edges[(names[i], names[j])] = 1.0
                degree[i] += 1
                degree[j] += 1
    for i in np.flatnonzero(degree == 0):
        peers = [j for j in range(n_nodes) if j != i and community[names[j]] == community[names[i]]]
        j = int(rng.choice(peers))
        key = (names[min(i, j)], names[max(i, j)])
        edges[key] = edges.get(key, 0.0) + 1.0
    return RecGraph(names, edges), community


def random_embedding(
    n: int, d: int, seed: int = 0, provenance: str = "external", prefix: str = "p"
) -> EmbeddingTable:
    """Standard-normal embedding with zero-padded ids."""
    rng = np.random.default_rng(seed)
    width = len(str(max(n - 1, 1)))
    ids = [f"{prefix}{i:0{width}d}" for i in range(n)]
    return EmbeddingTable(ids, rng.standard_normal((n, d)), provenance=provenance)


def blob_embedding(
    n_per_class: int,
    n_classes: int,
    d: int,
    separation: float = 4.0,
    noise: float = 1.0,
    seed: int = 0,
    provenance: str = "external",
    prefix: str = "c",
) -> tuple[EmbeddingTable, dict[str, str]]:
    """Gaussian blobs, one isotropic cluster per class.

    Returns the embedding and a channel→class-name map; class names are
    cat0, cat1, ...
    """
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_classes, d))
    centers *= separation / np.maximum(np.linalg.norm(centers, axis=1, keepdims=True), 1e-12)
    n = n_per_class * n_classes
    width = len(str(n - 1))
    ids, labels, rows = [], {}, []
    for k in range(n_classes):
        pts = centers[k] + noise * rng.standard_normal((n_per_class, d))
        for m in range(n_per_class):
            cid = f"{prefix}{k * n_per_class + m:0{width}d}"
            ids.append(cid)
            labels[cid] = f"cat{k}"
            rows.append(pts[m])
    return EmbeddingTable(ids, np.stack(rows), provenance=provenance), labels


def log_uniform_scores(n_items: int, low: float = -2.0, high: float = 2.0, seed: int = 0) -> dict[str, float]:
    """Ground-truth win scores with log(score) uniform in [low, high]."""
    rng = np.random.default_rng(seed)
    width = len(str(max(n_items - 1, 1)))
    return {f"i{k:0{width}d}": float(np.exp(rng.uniform(low, high))) for k in range(n_items)}


def sample_comparisons(
    true_scores: dict[str, float],
    n: int,
    seed: int = 0,
    dimension: str = "dim",
    n_raters: int = 20,
) -> list[ComparisonRecord]:
    """Pairwise comparisons drawn from Pr(A beats B) = s(A)/(s(A)+s(B))."""
    items = sorted(true_scores)
    if len(items) < 2:
        raise ValueError("need at least two items")
    rng = np.random.default_rng(seed)
    out = []
    for t in range(n):
        i, j = rng.choice(len(items), size=2, replace=False)
        a, b = items[int(i)], items[int(j)]
        p = true_scores[a] / (true_scores[a] + true_scores[b])
        winner, loser = (a, b) if rng.random() < p else (b, a)
        out.append(ComparisonRecord(dimension, winner, loser, f"r{t % n_raters:03d}"))
    return out
