"""Skip-gram with negative sampling, trained over random-walk corpora.

For a (center, context) pair with negative samples n_1..n_K the per-pair
loss is -log sigma(u.v) - sum_k log sigma(-u.n_k) with u the center's
input vector and v, n_k output vectors. Negatives are drawn from the
unigram distribution raised to 0.75.
"""

from __future__ import annotations

import logging
import threading
from collections import Counter
from dataclasses import dataclass

import numpy as np
from numba import njit

from chanvec.embedding import EmbeddingTable
from chanvec.sampling import build_alias_table

log = logging.getLogger(__name__)

NOISE_POWER = 0.75
LR_FLOOR_FRACTION = 1e-4


@dataclass(frozen=True)
class SgnsConfig:
    d: int = 128
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("embedding dimension must be at least 2")
        if self.negatives < 1:
            raise ValueError("need at least one negative sample")
        if self.window < 1 or self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("bad training configuration")


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def _log_sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, -np.log1p(np.exp(-np.abs(x))), x - np.log1p(np.exp(-np.abs(x))))


def pair_loss(center, context, negatives) -> float:
    """Loss of one training pair; `negatives` is a (K, d) matrix."""
    center = np.asarray(center, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    negatives = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    pos = float(_log_sigmoid(center @ context))
    neg = float(_log_sigmoid(-(negatives @ center)).sum())
    return -(pos + neg)


def pair_grad(center, context, negatives):
    """Analytic gradients of `pair_loss` wrt center, context, and negatives."""
    center = np.asarray(center, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    negatives = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    s_pos = sigmoid(center @ context)
    s_neg = sigmoid(negatives @ center)  # sigma(u . n_k)
    g_center = -(1.0 - s_pos) * context + s_neg @ negatives
    g_context = -(1.0 - s_pos) * center
    g_negatives = s_neg[:, None] * center[None, :]
    return g_center, g_context, g_negatives


@njit(cache=True, inline="always")
def _lcg(state):
    return state * 6364136223846793005 + 1442695040888963407


@njit(cache=True, inline="always")
def _uniform(state):
    state = _lcg(state)
    return state, ((state >> 33) & 0x3FFFFFFF) / 1073741824.0


@njit(cache=True, nogil=True)
def _train_chunk(
    walks,
    lengths,
    order,
    w_in,
    w_out,
    noise_accept,
    noise_alias,
    window,
    negatives,
    lr0,
    lr_floor,
    pairs_before,
    total_pairs,
    seed,
):
    """One sequential pass over the walks listed in `order`.

    Returns (loss sum, pair count). Deterministic for a fixed seed; the
    learning rate decays linearly with the number of pairs processed.
    """
    k_noise = noise_accept.size
    d = w_in.shape[1]
    state = seed * 2 + 1
    acc = np.empty(d, dtype=np.float64)
    loss_sum = 0.0
    pairs = 0
    for oi in range(order.size):
        wk = order[oi]
        length = lengths[wk]
        for i in range(length):
            center = walks[wk, i]
            lo = i - window
            if lo < 0:
                lo = 0
            hi = i + window
            if hi > length - 1:
                hi = length - 1
            for jpos in range(lo, hi + 1):
                if jpos == i:
                    continue
                context = walks[wk, jpos]
                frac = (pairs_before + pairs) / total_pairs
                lr = lr0 * (1.0 - frac)
                if lr < lr_floor:
                    lr = lr_floor
                for c in range(d):
                    acc[c] = 0.0
                # positive update
                dot = 0.0
                for c in range(d):
                    dot += w_in[center, c] * w_out[context, c]
                if dot >= 0:
                    f = 1.0 / (1.0 + np.exp(-dot))
                    loss_sum += np.log1p(np.exp(-dot))
                else:
                    e = np.exp(dot)
                    f = e / (1.0 + e)
                    loss_sum += np.log1p(e) - dot
                g = (1.0 - f) * lr
                for c in range(d):
                    acc[c] += g * w_out[context, c]
                    w_out[context, c] += g * w_in[center, c]
                # negative updates; draws that hit the positive target are skipped
                for _k in range(negatives):
                    state, u1 = _uniform(state)
                    state, u2 = _uniform(state)
                    cand = int(u1 * k_noise)
                    if cand >= k_noise:
                        cand = k_noise - 1
                    if u2 >= noise_accept[cand]:
                        cand = noise_alias[cand]
                    if cand == context:
                        continue
                    dot = 0.0
                    for c in range(d):
                        dot += w_in[center, c] * w_out[cand, c]
                    if dot >= 0:
                        f = 1.0 / (1.0 + np.exp(-dot))
                        loss_sum += dot + np.log1p(np.exp(-dot))
                    else:
                        e = np.exp(dot)
                        f = e / (1.0 + e)
                        loss_sum += np.log1p(e)
                    g = -f * lr
                    for c in range(d):
                        acc[c] += g * w_out[cand, c]
                        w_out[cand, c] += g * w_in[center, c]
                for c in range(d):
                    w_in[center, c] += acc[c]
                pairs += 1
    return loss_sum, pairs


@njit(cache=True)
def _draw_noise(noise_accept, noise_alias, n_draws, seed):
    """Histogram of noise draws, for checking the sampler's distribution."""
    k = noise_accept.size
    counts = np.zeros(k, dtype=np.int64)
    state = seed * 2 + 1
    for _ in range(n_draws):
        state, u1 = _uniform(state)
        state, u2 = _uniform(state)
        cand = int(u1 * k)
        if cand >= k:
            cand = k - 1
        if u2 >= noise_accept[cand]:
            cand = noise_alias[cand]
        counts[cand] += 1
    return counts


def noise_distribution(counts: np.ndarray) -> np.ndarray:
    """Unigram^0.75 negative-sampling distribution."""
    w = np.asarray(counts, dtype=np.float64) ** NOISE_POWER
    return w / w.sum()


@dataclass
class SgnsResult:
    table: EmbeddingTable
    epoch_losses: list[float]


def _count_pairs(lengths: np.ndarray, window: int) -> int:
    total = 0
    for length in lengths:
        length = int(length)
        for i in range(length):
            total += min(i + window, length - 1) - max(i - window, 0)
    return total


def train_sgns(walks: list[list[str]], cfg: SgnsConfig, workers: int = 1) -> SgnsResult:
    """Train vectors over walk corpora.

    Single-worker mode is bit-reproducible for a fixed seed. With
    workers > 1 the chunks update the shared matrices without locks, so
    results are only reproducible at the convergence level.
    """
    if not walks:
        raise ValueError("no walks to train on")
    counts = Counter(tok for walk in walks for tok in walk)
    vocab = sorted(counts, key=lambda tok: (-counts[tok], tok))
    if len(vocab) < cfg.negatives + 1:
        raise ValueError(f"vocabulary of {len(vocab)} too small for {cfg.negatives} negatives")
    tok_index = {tok: i for i, tok in enumerate(vocab)}

    n_walks = len(walks)
    max_len = max(len(w) for w in walks)
    walk_mat = np.zeros((n_walks, max_len), dtype=np.int32)
    lengths = np.zeros(n_walks, dtype=np.int32)
    for i, walk in enumerate(walks):
        lengths[i] = len(walk)
        walk_mat[i, : len(walk)] = [tok_index[t] for t in walk]

    freq = np.array([counts[tok] for tok in vocab], dtype=np.float64)
    accept, alias = build_alias_table(freq**NOISE_POWER)

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    w_in = rng.uniform(-0.5 / cfg.d, 0.5 / cfg.d, size=(len(vocab), cfg.d))
    w_out = np.zeros((len(vocab), cfg.d), dtype=np.float64)

    pairs_per_epoch = _count_pairs(lengths, cfg.window)
    total_pairs = max(1, pairs_per_epoch * cfg.epochs)
    lr_floor = cfg.learning_rate * LR_FLOOR_FRACTION

    epoch_losses = []
    pairs_done = 0
    for epoch in range(cfg.epochs):
        erng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1, epoch)))
        order = erng.permutation(n_walks).astype(np.int64)
        kernel_seed = int(erng.integers(1, 2**62))
        if workers <= 1 or n_walks < 2 * workers:
            loss_sum, pairs = _train_chunk(
                walk_mat, lengths, order, w_in, w_out, accept, alias,
                cfg.window, cfg.negatives, cfg.learning_rate, lr_floor,
                pairs_done, total_pairs, kernel_seed,
            )
        else:
            chunks = np.array_split(order, workers)
            results = [None] * len(chunks)
            offset = pairs_done

            def run(ci, chunk, start):
                results[ci] = _train_chunk(
                    walk_mat, lengths, chunk, w_in, w_out, accept, alias,
                    cfg.window, cfg.negatives, cfg.learning_rate, lr_floor,
                    start, total_pairs, kernel_seed + ci,
                )

            threads = []
            for ci, chunk in enumerate(chunks):
                threads.append(threading.Thread(target=run, args=(ci, chunk, offset)))
                offset += _count_pairs(lengths[chunk], cfg.window)
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            loss_sum = sum(r[0] for r in results)
            pairs = sum(r[1] for r in results)
        pairs_done += pairs
        avg = loss_sum / max(1, pairs)
        epoch_losses.append(avg)
        log.info("epoch %d: %d pairs, avg loss %.6f", epoch + 1, pairs, avg)

    order = sorted(range(len(vocab)), key=lambda i: vocab[i])
    table = EmbeddingTable([vocab[i] for i in order], w_in[order], provenance="rec")
    return SgnsResult(table, epoch_losses)
