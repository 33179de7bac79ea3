"""Second-order biased random walks over the co-recommendation graph.

The walk bias follows the return/in-out scheme: stepping from `cur` with
previous node `prev`, a candidate `nxt` is weighted by edge weight times
1/p if nxt == prev, times 1 if nxt is adjacent to prev, and times 1/q
otherwise. p = q = 1 reduces to a weight-proportional first-order walk.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from chanvec.recgraph import RecGraph
from chanvec.sampling import build_alias_table, draw_alias

log = logging.getLogger(__name__)

# Cap on precomputed per-(prev, cur) alias entries; beyond it we fall back
# to rejection sampling so hub-heavy graphs do not exhaust memory.
DEFAULT_ALIAS_BUDGET = 20_000_000

_REJECTION_TRIES = 50


@dataclass(frozen=True)
class WalkConfig:
    p: float = 1.0
    q: float = 1.0
    walk_length: int = 80
    walks_per_node: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.walk_length < 2:
            raise ValueError("walk_length must be at least 2")
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be at least 1")


class _IndexedGraph:
    """Adjacency arrays plus alias tables for sampling steps."""

    def __init__(self, g: RecGraph, p: float, q: float, alias_budget: int):
        self.nodes = g.nodes
        self.index = {u: i for i, u in enumerate(self.nodes)}
        n = len(self.nodes)
        nbrs: list[list[int]] = [[] for _ in range(n)]
        wts: list[list[float]] = [[] for _ in range(n)]
        for (u, v), w in g.edges.items():
            ui, vi = self.index[u], self.index[v]
            nbrs[ui].append(vi)
            wts[ui].append(float(w))
            if ui != vi:
                nbrs[vi].append(ui)
                wts[vi].append(float(w))
        self.neighbors = [np.array(a, dtype=np.int64) for a in nbrs]
        self.weights = [np.array(a, dtype=np.float64) for a in wts]
        for i in range(n):
            order = np.argsort(self.neighbors[i])
            self.neighbors[i] = self.neighbors[i][order]
            self.weights[i] = self.weights[i][order]
        self.edge_set = set()
        for i in range(n):
            for j in self.neighbors[i]:
                self.edge_set.add((i, int(j)))
        self.p = p
        self.q = q
        self.max_bias = max(1.0 / p, 1.0, 1.0 / q)
        self.node_alias = [
            build_alias_table(self.weights[i]) if self.weights[i].size else None for i in range(n)
        ]
        # Precompute second-order tables only when the total entry count
        # stays within the budget.
        cost = sum(self.neighbors[int(j)].size for i in range(n) for j in self.neighbors[i])
        self.edge_alias: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] | None
        if cost <= alias_budget:
            self.edge_alias = {}
            for prev in range(n):
                for cur in self.neighbors[prev]:
                    cur = int(cur)
                    self.edge_alias[(prev, cur)] = build_alias_table(
                        self._biased_weights(prev, cur)
                    )
        else:
            log.info("second-order alias tables over budget (%d entries); using rejection", cost)
            self.edge_alias = None

    def _bias(self, prev: int, nxt: int) -> float:
        if nxt == prev:
            return 1.0 / self.p
        if (prev, nxt) in self.edge_set:
            return 1.0
        return 1.0 / self.q

    def _biased_weights(self, prev: int, cur: int) -> np.ndarray:
        nbrs = self.neighbors[cur]
        out = np.empty(nbrs.size, dtype=np.float64)
        for k, nxt in enumerate(nbrs):
            out[k] = self.weights[cur][k] * self._bias(prev, int(nxt))
        return out

    def first_step(self, rng, cur: int) -> int | None:
        table = self.node_alias[cur]
        if table is None:
            return None
        k = draw_alias(rng, *table)
        return int(self.neighbors[cur][k])

    def next_step(self, rng, prev: int, cur: int) -> int | None:
        nbrs = self.neighbors[cur]
        if nbrs.size == 0:
            return None
        if self.edge_alias is not None:
            k = draw_alias(rng, *self.edge_alias[(prev, cur)])
            return int(nbrs[k])
        # Rejection sampling: propose weight-proportionally, accept with
        # bias/max_bias. Each attempt is an exact draw from the target
        # distribution given acceptance, so the fallback stays exact.
        for _ in range(_REJECTION_TRIES):
            k = draw_alias(rng, *self.node_alias[cur])
            nxt = int(nbrs[k])
            if rng.random() * self.max_bias <= self._bias(prev, nxt):
                return nxt
        biased = self._biased_weights(prev, cur)
        cdf = np.cumsum(biased)
        u = rng.random() * cdf[-1]
        return int(nbrs[np.searchsorted(cdf, u, side="right")])


def _one_walk(graph: _IndexedGraph, start: int, length: int, rng) -> list[int]:
    walk = [start]
    nxt = graph.first_step(rng, start)
    if nxt is None:
        return walk
    walk.append(nxt)
    while len(walk) < length:
        step = graph.next_step(rng, walk[-2], walk[-1])
        if step is None:
            break
        walk.append(step)
    return walk


def generate_walks(
    g: RecGraph,
    cfg: WalkConfig,
    alias_budget: int = DEFAULT_ALIAS_BUDGET,
    workers: int = 1,
) -> list[list[str]]:
    """Run `walks_per_node` biased walks from every node.

    Each walk draws from its own generator seeded by (seed, round, node),
    so results are reproducible and independent of the degree of
    parallelism. Isolated nodes yield single-node walks.
    """
    if len(g) == 0:
        raise ValueError("graph has no nodes")
    graph = _IndexedGraph(g, cfg.p, cfg.q, alias_budget)
    n = len(graph.nodes)
    tasks = [(r, i) for r in range(cfg.walks_per_node) for i in range(n)]

    def run(task):
        r, i = task
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(r, i)))
        return _one_walk(graph, i, cfg.walk_length, rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            walks = list(pool.map(run, tasks))
    else:
        walks = [run(t) for t in tasks]
    return [[graph.nodes[i] for i in walk] for walk in walks]


def write_walks(walks, fh) -> None:
    for walk in walks:
        fh.write(" ".join(walk) + "\n")


def read_walks(stream) -> list[list[str]]:
    return [line.split() for line in stream if line.strip()]
