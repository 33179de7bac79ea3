"""Pairwise-comparison score fitting and tied-rank correlation.

Latent win scores follow the pairwise choice model
Pr(A beats B) = s(A) / (s(A) + s(B)), fitted by a minorization-
maximization fixed point whose regularized log-likelihood is monotone
in every iteration. Rank agreement between tied sequences uses the
Stuart tau-c statistic 2m(P - Q) / (n^2 (m - 1)).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

log = logging.getLogger(__name__)

LABEL_ORDER = (
    "extreme-left",
    "left",
    "center-left",
    "center",
    "center-right",
    "right",
    "extreme-right",
)
_SCORE_EPS = 1e-12


@dataclass(frozen=True)
class ComparisonRecord:
    dimension: str
    winner: str
    loser: str
    rater: str

    def __post_init__(self):
        if self.winner == self.loser:
            raise ValueError(f"comparison of {self.winner!r} against itself")
        if not self.winner or not self.loser:
            raise ValueError("winner and loser ids must be non-empty")


@dataclass
class PLScores:
    scores: dict[str, float]
    log_likelihood: float
    iterations: int
    converged: bool
    history: list[float]

    def __post_init__(self):
        if any(v <= 0 for v in self.scores.values()):
            raise ValueError("fitted scores must be positive")


def _connected(n_items: int, pairs) -> bool:
    parent = list(range(n_items))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    return len({find(i) for i in range(n_items)}) == 1


def fit_plackett_luce(
    comparisons: list[ComparisonRecord],
    tol: float = 1e-8,
    max_iter: int = 10000,
    prior: float = 0.1,
) -> PLScores:
    """Fit latent win scores by MM iteration.

    With prior > 0 every item receives that many virtual wins and losses
    against a shared anchor item, which keeps disconnected comparison
    graphs identifiable. Scores are normalized so the log-scores of the
    real items sum to zero.
    """
    if not comparisons:
        raise ValueError("no comparisons to fit")
    if prior < 0:
        raise ValueError("prior must be non-negative")
    items = sorted({c.winner for c in comparisons} | {c.loser for c in comparisons})
    index = {item: i for i, item in enumerate(items)}
    n = len(items)

    wins = np.zeros((n, n), dtype=np.float64)  # wins[i, j] = times i beat j
    for c in comparisons:
        wins[index[c.winner], index[c.loser]] += 1.0

    real_pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if wins[i, j] + wins[j, i] > 0]
    if not _connected(n, real_pairs):
        if prior == 0:
            raise ValueError(
                "comparison graph is disconnected and prior is 0; relative scores "
                "across components are undefined"
            )
        log.warning("comparison graph is disconnected; the prior anchors the components")

    use_anchor = prior > 0
    size = n + 1 if use_anchor else n
    full = np.zeros((size, size), dtype=np.float64)
    full[:n, :n] = wins
    if use_anchor:
        full[:n, n] = prior
        full[n, :n] = prior

    games = full + full.T
    win_totals = full.sum(axis=1)
    s = np.ones(size, dtype=np.float64)

    def regularized_ll(sv):
        with np.errstate(divide="ignore"):
            ls = np.log(sv)
        pair_i, pair_j = np.nonzero(games)
        mask = pair_i < pair_j
        pi, pj = pair_i[mask], pair_j[mask]
        return float(
            np.sum(full[pi, pj] * ls[pi] + full[pj, pi] * ls[pj])
            - np.sum(games[pi, pj] * np.log(sv[pi] + sv[pj]))
        )

    history = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        denom = np.zeros(size, dtype=np.float64)
        for i in range(size):
            js = np.nonzero(games[i])[0]
            denom[i] = np.sum(games[i, js] / (s[i] + s[js]))
        new = np.where(denom > 0, win_totals / np.maximum(denom, _SCORE_EPS), s)
        new = np.maximum(new, _SCORE_EPS)
        new /= np.exp(np.mean(np.log(new[:n])))
        history.append(regularized_ll(new))
        delta = np.max(np.abs(np.log(new[:n]) - np.log(np.maximum(s[:n], _SCORE_EPS))))
        s = new
        if delta < tol:
            converged = True
            break
    if not converged:
        log.warning("score fit did not converge in %d iterations", max_iter)

    # data log-likelihood, without the virtual-anchor terms
    ls = np.log(s)
    data_ll = 0.0
    for i, j in real_pairs:
        total = wins[i, j] + wins[j, i]
        data_ll += wins[i, j] * ls[i] + wins[j, i] * ls[j] - total * np.log(s[i] + s[j])

    return PLScores(
        scores={item: float(s[index[item]]) for item in items},
        log_likelihood=float(data_ll),
        iterations=iterations,
        converged=converged,
        history=history,
    )


def win_probability(scores: PLScores, a: str, b: str) -> float:
    sa, sb = scores.scores[a], scores.scores[b]
    return sa / (sa + sb)


def tau_c(x, y) -> float:
    """Stuart-Kendall rank correlation for tied ordinal sequences."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d with equal length")
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    m = min(np.unique(x).size, np.unique(y).size)
    if m == 1:
        raise ValueError("a constant sequence has no rank ordering")
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    prod = dx * dy
    upper = np.triu_indices(n, k=1)
    vals = prod[upper]
    p = int(np.sum(vals > 0))
    q = int(np.sum(vals < 0))
    return 2 * m * (p - q) / (n * n * (m - 1))


def label_rank(label: str) -> int:
    """Rank 1-7 of an ordinal stance label."""
    try:
        return LABEL_ORDER.index(label) + 1
    except ValueError:
        raise ValueError(
            f"unknown label {label!r}; expected one of: {', '.join(LABEL_ORDER)}"
        ) from None


def label_correlation(scores, labels: dict[str, str]) -> float:
    """tau-c between channel scores and ordinal label ranks.

    Only channels present in both inputs are used; the label strings
    must come from the fixed 7-step scale.
    """
    score_map = scores.scores if hasattr(scores, "scores") else dict(scores)
    common = sorted(set(score_map) & set(labels))
    if len(common) < 2:
        raise ValueError("need at least two channels scored and labeled")
    x = np.array([score_map[c] for c in common], dtype=np.float64)
    y = np.array([label_rank(labels[c]) for c in common], dtype=np.float64)
    return tau_c(x, y)


@dataclass(frozen=True)
class ZTestResult:
    z: float
    p_value: float
    significant: bool


def two_proportion_ztest(hits1: int, n1: int, hits2: int, n2: int, alpha: float = 0.05) -> ZTestResult:
    """Two-sided pooled-proportion z-test for hits1/n1 vs hits2/n2."""
    for hits, n in ((hits1, n1), (hits2, n2)):
        if n < 1:
            raise ValueError("sample sizes must be at least 1")
        if not 0 <= hits <= n:
            raise ValueError(f"hit count {hits} outside [0, {n}]")
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    p1 = hits1 / n1
    p2 = hits2 / n2
    if p1 == p2:
        return ZTestResult(0.0, 1.0, False)
    pooled = (hits1 + hits2) / (n1 + n2)
    se = np.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (p1 - p2) / se
    p_value = 2.0 * (1.0 - NormalDist().cdf(abs(z)))
    return ZTestResult(float(z), float(p_value), p_value < alpha)


@dataclass(frozen=True)
class BootstrapDelta:
    delta: float
    low: float
    high: float
    n_effective: int


def bootstrap_tau_difference(
    x_a,
    x_b,
    y,
    n_boot: int = 1000,
    seed: int = 0,
    alpha: float = 0.05,
) -> BootstrapDelta:
    """Percentile bootstrap interval for tau_c(x_a, y) - tau_c(x_b, y).

    Resamples observations with replacement; resamples that collapse to
    a constant sequence are skipped (they have no defined tau).
    """
    x_a = np.asarray(x_a, dtype=np.float64)
    x_b = np.asarray(x_b, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (x_a.shape == x_b.shape == y.shape) or x_a.ndim != 1:
        raise ValueError("inputs must be aligned 1-d sequences")
    delta = tau_c(x_a, y) - tau_c(x_b, y)
    rng = np.random.default_rng(seed)
    deltas = []
    for _ in range(n_boot):
        idx = rng.integers(0, y.size, size=y.size)
        try:
            deltas.append(tau_c(x_a[idx], y[idx]) - tau_c(x_b[idx], y[idx]))
        except ValueError:
            continue
    if not deltas:
        raise ValueError("no valid bootstrap resamples")
    lo, hi = np.quantile(deltas, [alpha / 2, 1 - alpha / 2])
    return BootstrapDelta(float(delta), float(lo), float(hi), len(deltas))


def write_comparisons(path, comparisons: list[ComparisonRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in comparisons:
            fh.write(f"{c.dimension},{c.winner},{c.loser},{c.rater}\n")


def read_comparisons(path) -> list[ComparisonRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected dimension,winner,loser,rater")
            out.append(ComparisonRecord(*parts))
    return out


def write_labels(path, labels: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for cid in sorted(labels):
            fh.write(f"{cid},{labels[cid]}\n")


def read_labels(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cid, _, label = line.partition(",")
            if not cid or not label:
                raise ValueError(f"{path}:{lineno}: expected channel_id,label")
            label_rank(label)
            out[cid] = label
    return out
