"""Social-sharing channel vectors: the sharing matrix times subreddit vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from chanvec.embedding import EmbeddingTable
from chanvec.ingest import SharingMatrix

log = logging.getLogger(__name__)


@dataclass
class SocialEmbedResult:
    table: EmbeddingTable
    omitted: list[str]


def embed_social(
    w: SharingMatrix, s: EmbeddingTable, min_coverage: float = 0.5
) -> SocialEmbedResult:
    """Embed each channel as the weighted average of its subreddits' vectors.

    Subreddits absent from `s` contribute nothing; the row is then
    re-normalized over the surviving mass. Channels keeping less than
    `min_coverage` of their mention mass are omitted and reported.
    """
    present = np.array([sub in s for sub in w.subreddits], dtype=bool)
    if present.any():
        col_rows = np.array([s.row(sub) for sub, keep in zip(w.subreddits, present) if keep])
        sub_vectors = s.vectors[col_rows]
        w_present = sparse.csr_matrix(w.matrix[:, present])
    else:
        sub_vectors = np.zeros((0, s.d))
        w_present = sparse.csr_matrix((w.shape[0], 0))

    coverage = np.asarray(w_present.sum(axis=1)).ravel()
    keep = coverage >= min_coverage
    omitted = [c for c, k in zip(w.channels, keep) if not k]
    if omitted:
        log.warning("%d channels omitted: too much mention mass on unknown subreddits", len(omitted))

    raw = w_present[keep] @ sub_vectors
    vectors = np.asarray(raw) / coverage[keep, None]
    ids = [c for c, k in zip(w.channels, keep) if k]
    return SocialEmbedResult(EmbeddingTable(ids, vectors, provenance="soc"), omitted)
