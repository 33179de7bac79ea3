"""Semantic-similarity evaluation harnesses.

Two experiments: a category-prediction F1 loop (sample balanced channel
sets, split 70/30, fit a forest, repeat) and an odd-channel-out triplet
task (sample anchor/neighbor/far triplets under cosine distance, compare
the embedding's pick against crowd majorities).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from chanvec.embedding import PROVENANCES, EmbeddingTable
from chanvec.forest import ForestConfig, f1_binary, fit_classifier
from chanvec.neighbors import neighbor_ranking, unit_rows

log = logging.getLogger(__name__)

RATERS_PER_TRIPLET = 5
K_GRID = (110, 220, 440)
_MAX_ATTEMPT_FACTOR = 100


@dataclass(frozen=True)
class Triplet:
    a: str
    b: str
    c: str
    source_embedding: str
    k: int

    def __post_init__(self):
        if len({self.a, self.b, self.c}) != 3:
            raise ValueError("triplet ids must be distinct")
        if self.source_embedding not in PROVENANCES:
            raise ValueError(f"unknown source embedding {self.source_embedding!r}")
        if self.k < 2:
            raise ValueError("k must be at least 2 so the far channel differs from the near one")

    @property
    def ids(self) -> tuple[str, str, str]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class TripletJudgment:
    triplet: Triplet
    votes: dict[str, int]

    def __post_init__(self):
        if sum(self.votes.values()) != RATERS_PER_TRIPLET:
            raise ValueError(f"votes must sum to {RATERS_PER_TRIPLET}")
        if not set(self.votes) <= set(self.triplet.ids):
            raise ValueError("votes name channels outside the triplet")
        if any(v < 0 for v in self.votes.values()):
            raise ValueError("negative vote count")

    def modal_count(self) -> int:
        return max(self.votes.values())

    def modal_choice(self) -> str:
        best = self.modal_count()
        return min(cid for cid, v in self.votes.items() if v == best)


@dataclass
class TripletSample:
    triplets: list[Triplet]
    attempts: int
    exhausted: bool


def sample_triplets(c: EmbeddingTable, k: int, n: int, seed: int = 0) -> TripletSample:
    """Draw triplets (anchor a, nearest b, k-th neighbor c) under cosine distance.

    Draws violating dist(a,b) < dist(b,c) are rejected and redrawn, up
    to 100n attempts; a short list plus a warning results if the budget
    runs out.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if n < 1:
        raise ValueError("must request at least one triplet")
    if len(c) <= k + 1:
        raise ValueError(f"embedding of {len(c)} channels cannot support k={k}")
    # canonical sorted-id order, so results ignore table insertion order
    ids = sorted(c.ids)
    u = unit_rows(np.stack([c[cid] for cid in ids]))
    rng = np.random.default_rng(seed)
    triplets: list[Triplet] = []
    attempts = 0
    budget = _MAX_ATTEMPT_FACTOR * n
    while len(triplets) < n and attempts < budget:
        attempts += 1
        ai = int(rng.integers(0, len(ids)))
        d = 1.0 - u @ u[ai]
        order = neighbor_ranking(d, self_index=ai)
        bi = int(order[0])
        ci = int(order[k - 1])
        if len({ai, bi, ci}) != 3:
            continue
        d_ab = d[bi]
        d_bc = 1.0 - float(u[bi] @ u[ci])
        if not d_ab < d_bc:
            continue
        triplets.append(Triplet(ids[ai], ids[bi], ids[ci], c.provenance, k))
    exhausted = len(triplets) < n
    if exhausted:
        log.warning(
            "sample_triplets: produced %d of %d triplets in %d attempts",
            len(triplets), n, attempts,
        )
    return TripletSample(triplets, attempts, exhausted)


def predict_odd(t: Triplet, c: EmbeddingTable) -> str:
    """The channel outside the closest pair; distance ties break to the
    lexicographically smallest odd channel."""
    missing = [cid for cid in t.ids if cid not in c]
    if missing:
        raise KeyError(f"triplet channels missing from the embedding: {', '.join(missing)}")
    u = unit_rows(np.stack([c[cid] for cid in t.ids]))
    d_ab = 1.0 - float(u[0] @ u[1])
    d_ac = 1.0 - float(u[0] @ u[2])
    d_bc = 1.0 - float(u[1] @ u[2])
    candidates = [(d_bc, t.a), (d_ac, t.b), (d_ab, t.c)]  # pair distance, excluded channel
    return min(candidates)[1]


class EmptyStratumError(ValueError):
    pass


@dataclass(frozen=True)
class AgreementRow:
    min_workers: int
    rate: float
    n: int


def agreement_table(
    judgments: list[TripletJudgment], c: EmbeddingTable, min_workers: int
) -> AgreementRow:
    """Agreement of predict_odd with modal crowd votes, restricted to
    judgments whose modal vote count is at least min_workers."""
    if not 1 <= min_workers <= RATERS_PER_TRIPLET:
        raise ValueError(f"min_workers must be in 1..{RATERS_PER_TRIPLET}")
    kept = [j for j in judgments if j.modal_count() >= min_workers]
    if not kept:
        raise EmptyStratumError(f"no judgments with modal agreement >= {min_workers}")
    hits = sum(predict_odd(j.triplet, c) == j.modal_choice() for j in kept)
    return AgreementRow(min_workers, hits / len(kept), len(kept))


def agreement_sweep(
    judgments: list[TripletJudgment],
    c: EmbeddingTable,
    w_values=(2, 3, 4, 5),
    k: int | None = None,
) -> list[AgreementRow]:
    """Agreement rows over a grid of modal-vote thresholds; k restricts
    to triplets built with that neighbor rank."""
    pool = judgments if k is None else [j for j in judgments if j.triplet.k == k]
    rows = []
    for w in w_values:
        try:
            rows.append(agreement_table(pool, c, w))
        except EmptyStratumError:
            rows.append(AgreementRow(w, float("nan"), 0))
    return rows


def render_agreement(rows: list[AgreementRow], title: str) -> str:
    lines = [title, f"{'w':>3} {'agreement':>10} {'n':>6}"]
    for r in rows:
        rate = "   nan" if r.n == 0 else f"{r.rate:6.3f}"
        lines.append(f"{r.min_workers:>3} {rate:>10} {r.n:>6}")
    return "\n".join(lines)


@dataclass
class CategoryEval:
    mean_f1: float
    per_rep: list[float]


def eval_category(
    c: EmbeddingTable,
    categories: dict[str, str],
    target: str,
    reps: int = 100,
    seed: int = 0,
    per_class: int = 100,
    forest_cfg: ForestConfig | None = None,
    train_fraction: float = 0.7,
) -> CategoryEval:
    """Mean F1 of a forest separating a target category from the rest.

    Each repetition samples per_class channels inside and outside the
    target, splits 70/30, fits a fresh classifier, and scores F1 of the
    positive class on the held-out split.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    labeled = [cid for cid in c.ids if cid in categories]
    pos_pool = np.array([cid for cid in labeled if categories[cid] == target])
    neg_pool = np.array([cid for cid in labeled if categories[cid] != target])
    if pos_pool.size < per_class or neg_pool.size < per_class:
        raise ValueError(
            f"category {target!r} has {pos_pool.size} in / {neg_pool.size} out; "
            f"need {per_class} of each"
        )
    base_cfg = forest_cfg or ForestConfig()
    scores = []
    for rep in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))
        pos = rng.choice(pos_pool, size=per_class, replace=False)
        neg = rng.choice(neg_pool, size=per_class, replace=False)
        ids = np.concatenate([pos, neg])
        y = np.concatenate([np.ones(per_class, dtype=np.int64), np.zeros(per_class, dtype=np.int64)])
        x = np.stack([c[cid] for cid in ids])
        perm = rng.permutation(ids.size)
        n_train = int(round(train_fraction * ids.size))
        train, test = perm[:n_train], perm[n_train:]
        cfg = replace(base_cfg, seed=int(rng.integers(0, 2**62)))
        if np.unique(y[train]).size < 2:
            scores.append(0.0)
            continue
        model = fit_classifier(x[train], y[train], cfg)
        pred = model.predict(x[test])
        scores.append(f1_binary(y[test], pred, positive=1))
    return CategoryEval(float(np.mean(scores)), scores)


def write_triplets(path, triplets: list[Triplet]) -> None:
    """Triplet file: comma-separated id, a, b, c, source_embedding, k."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, t in enumerate(triplets):
            fh.write(f"t{i:05d},{t.a},{t.b},{t.c},{t.source_embedding},{t.k}\n")


def read_triplets(path) -> dict[str, Triplet]:
    out: dict[str, Triplet] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected id,a,b,c,source,k")
            tid, a, b, c, src, k = parts
            if tid in out:
                raise ValueError(f"{path}:{lineno}: duplicate triplet id {tid!r}")
            out[tid] = Triplet(a, b, c, src, int(k))
    return out


def write_judgments(path, judgments: dict[str, TripletJudgment]) -> None:
    """Judgment file: comma-separated triplet id then five rater choices."""
    with open(path, "w", encoding="utf-8") as fh:
        for tid in sorted(judgments):
            j = judgments[tid]
            choices = []
            for cid in sorted(j.votes):
                choices.extend([cid] * j.votes[cid])
            fh.write(tid + "," + ",".join(choices) + "\n")


def read_judgments(path, triplets: dict[str, Triplet]) -> dict[str, TripletJudgment]:
    out: dict[str, TripletJudgment] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 1 + RATERS_PER_TRIPLET:
                raise ValueError(
                    f"{path}:{lineno}: expected triplet id and {RATERS_PER_TRIPLET} choices"
                )
            tid = parts[0]
            if tid not in triplets:
                raise ValueError(f"{path}:{lineno}: unknown triplet id {tid!r}")
            votes: dict[str, int] = {}
            for choice in parts[1:]:
                votes[choice] = votes.get(choice, 0) + 1
            out[tid] = TripletJudgment(triplets[tid], votes)
    return out
