"""Alias-method tables for O(1) draws from discrete distributions."""

from __future__ import annotations

import numpy as np


def build_alias_table(weights) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias construction; returns (accept probability, alias index) arrays."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-d array")
    if w.min() < 0 or w.sum() <= 0:
        raise ValueError("weights must be non-negative with positive sum")
    k = w.size
    prob = w * (k / w.sum())
    accept = np.zeros(k, dtype=np.float64)
    alias = np.zeros(k, dtype=np.int32)
    small = [i for i in range(k) if prob[i] < 1.0]
    large = [i for i in range(k) if prob[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        accept[s] = prob[s]
        alias[s] = l
        prob[l] = (prob[l] + prob[s]) - 1.0
        if prob[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for rest in (large, small):
        for i in rest:
            accept[i] = 1.0
            alias[i] = i
    return accept, alias


def draw_alias(rng: np.random.Generator, accept: np.ndarray, alias: np.ndarray) -> int:
    i = int(rng.integers(accept.size))
    if rng.random() < accept[i]:
        return i
    return int(alias[i])
