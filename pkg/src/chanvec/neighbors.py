"""Brute-force cosine similarity and nearest-neighbor helpers.

All similarity computations in the package flow through this module so
that every caller agrees on the metric and on tie handling (stable
index order).
"""

from __future__ import annotations

import numpy as np


def unit_rows(x: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm; zero rows are rejected."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-d array of row vectors")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise ValueError(f"{int(np.sum(norms == 0))} zero rows have no direction")
    return x / norms[:, None]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity matrix between rows of a and rows of b."""
    return unit_rows(np.atleast_2d(a)) @ unit_rows(np.atleast_2d(b)).T


def cosine_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 1.0 - cosine_similarity(a, b)


def neighbor_ranking(distances: np.ndarray, self_index: int | None = None) -> np.ndarray:
    """Indices sorted by ascending distance, ties by ascending index."""
    d = np.asarray(distances, dtype=np.float64).copy()
    if self_index is not None:
        d[self_index] = np.inf
    order = np.argsort(d, kind="stable")
    if self_index is not None:
        order = order[order != self_index]
    return order


def one_nn_accuracy(vectors: np.ndarray, labels) -> float:
    """Leave-one-out 1-nearest-neighbor accuracy under cosine distance."""
    labels = np.asarray(labels)
    u = unit_rows(vectors)
    if labels.shape != (u.shape[0],):
        raise ValueError("one label per vector required")
    if u.shape[0] < 2:
        raise ValueError("need at least two vectors")
    d = 1.0 - u @ u.T
    np.fill_diagonal(d, np.inf)
    nearest = np.argmin(d, axis=1)
    return float(np.mean(labels[nearest] == labels))
