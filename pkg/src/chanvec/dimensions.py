"""Social dimensions: seed-pair directions, projection, transfer, binning.

A dimension is the unit-normalized mean difference between paired
community vectors (low side, high side). Channels are scored by cosine
similarity against that direction in the social-sharing space; a tree
ensemble transfers the scores into other embedding spaces.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from chanvec.embedding import EmbeddingTable
from chanvec.forest import ForestConfig, fit_regressor
from chanvec.neighbors import unit_rows

log = logging.getLogger(__name__)

_STD_TOL = 1e-9
_SCORE_FMT = "%.12g"
DEFAULT_DIM_EDGES = (-5.0, -1.25, -0.5, 0.5, 1.25, 5.0)
DEFAULT_NESS_EDGES = (-5.0, 0.0, 5.0)
DEFAULT_PER_BIN = 10


@dataclass(frozen=True)
class DimensionSpec:
    name: str
    seed_pairs: tuple[tuple[str, str], ...]
    vector: np.ndarray

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise ValueError("dimension name must be non-empty without whitespace")
        if not self.seed_pairs:
            raise ValueError("a dimension needs at least one seed pair")
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1 or not np.isclose(np.linalg.norm(v), 1.0, atol=1e-9):
            raise ValueError("dimension vector must be 1-d with unit norm")
        object.__setattr__(self, "vector", v)
        self.vector.setflags(write=False)


@dataclass(frozen=True)
class DimensionScores:
    dimension: str
    scores: dict[str, float]
    standardized: bool = False

    def __post_init__(self):
        if not self.scores:
            raise ValueError("empty score set")
        if self.standardized:
            vals = np.fromiter(self.scores.values(), dtype=np.float64)
            if abs(vals.mean()) > _STD_TOL or abs(vals.std() - 1.0) > _STD_TOL:
                raise ValueError("scores marked standardized but are not")

    def items_sorted(self):
        return sorted(self.scores.items())


def build_dimension(s: EmbeddingTable, pairs, name: str) -> DimensionSpec:
    """Unit direction from low→high seed pairs in the subreddit space."""
    pairs = tuple((str(lo), str(hi)) for lo, hi in pairs)
    missing = sorted({m for p in pairs for m in p if m not in s})
    if missing:
        raise KeyError(f"seed subreddits missing from the space: {', '.join(missing)}")
    diffs = np.stack([s[hi] - s[lo] for lo, hi in pairs])
    mean = diffs.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0:
        raise ValueError(f"dimension {name!r}: seed differences cancel to zero")
    return DimensionSpec(name, pairs, mean / norm)


@dataclass
class ProjectResult:
    scores: DimensionScores
    omitted: tuple[str, ...]


def project(c: EmbeddingTable, dim: DimensionSpec) -> ProjectResult:
    """Cosine similarity of each channel against the dimension direction.

    Zero channel vectors have no direction; they are omitted and
    reported rather than scored.
    """
    norms = np.linalg.norm(c.vectors, axis=1)
    keep = norms > 0
    omitted = tuple(c.ids[i] for i in np.flatnonzero(~keep))
    if omitted:
        log.warning("project %s: omitted %d zero-vector channels", dim.name, len(omitted))
    if not keep.any():
        raise ValueError("no channels with nonzero vectors to project")
    sims = unit_rows(c.vectors[keep]) @ dim.vector
    ids = [c.ids[i] for i in np.flatnonzero(keep)]
    return ProjectResult(DimensionScores(dim.name, dict(zip(ids, sims.tolist()))), omitted)


def standardize(scores: DimensionScores) -> DimensionScores:
    """Shift/scale scores to mean 0, standard deviation 1."""
    ids = sorted(scores.scores)
    vals = np.array([scores.scores[i] for i in ids], dtype=np.float64)
    std = vals.std()
    if std == 0:
        raise ValueError(f"dimension {scores.dimension!r}: constant scores cannot be standardized")
    z = (vals - vals.mean()) / std
    z = (z - z.mean()) / z.std()  # second pass absorbs rounding drift
    return DimensionScores(scores.dimension, dict(zip(ids, z.tolist())), standardized=True)


@dataclass
class TransferResult:
    scores: DimensionScores
    oob_r2: float | None
    n_train: int


def transfer_dimension(
    target: EmbeddingTable,
    train_scores: DimensionScores,
    cfg: ForestConfig | None = None,
    min_overlap: int = 100,
) -> TransferResult:
    """Carry scores into another embedding space with a tree-ensemble regressor."""
    overlap = sorted(set(train_scores.scores) & set(target.ids))
    if len(overlap) < min_overlap:
        raise ValueError(
            f"only {len(overlap)} channels overlap between the score set and the "
            f"target embedding; need at least {min_overlap}"
        )
    x_train = np.stack([target[c] for c in overlap])
    y_train = np.array([train_scores.scores[c] for c in overlap])
    model = fit_regressor(x_train, y_train, cfg or ForestConfig())
    preds = model.predict(target.vectors)
    scores = DimensionScores(train_scores.dimension, dict(zip(target.ids, preds.tolist())))
    return TransferResult(scores, model.oob_r2, len(overlap))


@dataclass
class BinSample:
    selected: tuple[str, ...]
    bins: dict[tuple[int, int], tuple[str, ...]]
    out_of_range: tuple[str, ...]
    short_bins: tuple[tuple[int, int], ...]


def _interval_index(value: float, edges: np.ndarray) -> int:
    """Index of the (low, high] interval holding value, -1 if outside."""
    j = int(np.searchsorted(edges, value, side="left")) - 1
    if j < 0 or j >= edges.size - 1:
        return -1
    return j


def sample_bins(
    scores: DimensionScores,
    ness: DimensionScores,
    dim_edges=DEFAULT_DIM_EDGES,
    ness_edges=DEFAULT_NESS_EDGES,
    per_bin: int = DEFAULT_PER_BIN,
    seed: int = 0,
) -> BinSample:
    """Stratified channel sample over dimension × salience score bins.

    Intervals are half-open (low, high]. Channels outside the outermost
    edges are excluded and reported. Bins with fewer than per_bin
    members contribute all of them, with a warning.
    """
    if not scores.standardized or not ness.standardized:
        raise ValueError("bin sampling expects standardized scores")
    de = np.asarray(dim_edges, dtype=np.float64)
    ne = np.asarray(ness_edges, dtype=np.float64)
    if de.size < 2 or ne.size < 2 or np.any(np.diff(de) <= 0) or np.any(np.diff(ne) <= 0):
        raise ValueError("bin edges must be strictly increasing with at least two values")
    if per_bin < 1:
        raise ValueError("per_bin must be positive")

    common = sorted(set(scores.scores) & set(ness.scores))
    members: dict[tuple[int, int], list[str]] = {
        (i, j): [] for i in range(de.size - 1) for j in range(ne.size - 1)
    }
    out_of_range = []
    for cid in common:
        i = _interval_index(scores.scores[cid], de)
        j = _interval_index(ness.scores[cid], ne)
        if i < 0 or j < 0:
            out_of_range.append(cid)
        else:
            members[(i, j)].append(cid)
    if out_of_range:
        log.warning("sample_bins: %d channels outside the outermost edges", len(out_of_range))

    bins = {}
    short = []
    selected = []
    for key in sorted(members):
        pool = members[key]
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
        if len(pool) <= per_bin:
            take = tuple(pool)
            short.append(key)
            log.warning("sample_bins: bin %s has %d of %d requested", key, len(pool), per_bin)
        else:
            take = tuple(sorted(rng.choice(pool, size=per_bin, replace=False).tolist()))
        bins[key] = take
        selected.extend(take)
    return BinSample(tuple(selected), bins, tuple(out_of_range), tuple(short))


def read_dimension_seeds(path) -> dict[str, list[tuple[str, str]]]:
    """Seed file: comma-separated dimension_name, low_subreddit, high_subreddit."""
    out: dict[str, list[tuple[str, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3 or not all(parts):
                raise ValueError(f"{path}:{lineno}: expected name,low,high")
            out.setdefault(parts[0], []).append((parts[1], parts[2]))
    if not out:
        raise ValueError(f"{path}: no seed pairs")
    return out


def write_scores(path, scores: DimensionScores) -> None:
    flag = "true" if scores.standardized else "false"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dimension,{scores.dimension},standardized,{flag}\n")
        for cid, val in scores.items_sorted():
            fh.write(f"{cid},{_SCORE_FMT % val}\n")


def read_scores(path) -> DimensionScores:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 4 or header[0] != "dimension" or header[2] != "standardized":
            raise ValueError(f"{path}: bad scores header")
        if header[3] not in ("true", "false"):
            raise ValueError(f"{path}: standardized flag must be true or false")
        vals = {}
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            cid, _, sval = line.partition(",")
            if not cid or not sval:
                raise ValueError(f"{path}:{lineno}: expected channel_id,score")
            vals[cid] = float(sval)
    return DimensionScores(header[1], vals, standardized=header[3] == "true")
