"""Dense id -> vector tables and their on-disk text format."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np

PROVENANCES = ("soc", "con", "rec", "external")

# 12 significant digits survive a decimal -> float64 -> decimal round trip,
# so write(read(write(x))) is byte-identical.
_FMT = "%.12g"


class EmbeddingTable:
    """Ordered id -> vector map with one fixed dimensionality.

    Rows live in a read-only (n, d) float64 array; ids keep the order in
    which they were given. Every component must be finite and every id
    unique and free of whitespace (ids are written space-separated).
    """

    def __init__(self, ids: Iterable[str], vectors, provenance: str = "external"):
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        ids = tuple(str(i) for i in ids)
        vectors = np.ascontiguousarray(vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if len(ids) != vectors.shape[0]:
            raise ValueError(f"{len(ids)} ids but {vectors.shape[0]} vectors")
        if vectors.shape[1] < 1:
            raise ValueError("dimensionality must be at least 1")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("non-finite vector component")
        index = {}
        for row, cid in enumerate(ids):
            if not cid or cid != cid.strip() or any(ch.isspace() for ch in cid):
                raise ValueError(f"bad id {cid!r}")
            if cid in index:
                raise ValueError(f"duplicate id {cid!r}")
            index[cid] = row
        vectors.setflags(write=False)
        self.ids = ids
        self.vectors = vectors
        self.provenance = provenance
        self._index = index

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Iterable[float]], provenance: str = "external"):
        ids = list(mapping)
        rows = np.asarray([np.asarray(mapping[i], dtype=np.float64) for i in ids])
        return cls(ids, rows, provenance)

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, cid) -> bool:
        return cid in self._index

    def __getitem__(self, cid) -> np.ndarray:
        return self.vectors[self._index[cid]]

    def row(self, cid) -> int:
        return self._index[cid]

    def items(self):
        for cid in self.ids:
            yield cid, self.vectors[self._index[cid]]

    def subset(self, ids: Iterable[str]) -> "EmbeddingTable":
        ids = list(ids)
        rows = np.asarray([self[i] for i in ids])
        return EmbeddingTable(ids, rows, self.provenance)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EmbeddingTable)
            and self.ids == other.ids
            and self.provenance == other.provenance
            and np.array_equal(self.vectors, other.vectors)
        )


def write_embedding(table: EmbeddingTable, path) -> None:
    """Write "n d" then one "id c1 .. cd" line per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.d}\n")
        for cid, vec in table.items():
            comps = " ".join(_FMT % v for v in vec)
            fh.write(f"{cid} {comps}\n")


def read_embedding(path, provenance: str = "external") -> EmbeddingTable:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: bad embedding header")
        n, d = int(header[0]), int(header[1])
        ids = []
        vectors = np.empty((n, d), dtype=np.float64)
        for row in range(n):
            parts = fh.readline().split()
            if len(parts) != d + 1:
                raise ValueError(f"{path}: line {row + 2}: expected id plus {d} components")
            ids.append(parts[0])
            vectors[row] = [float(p) for p in parts[1:]]
        if fh.readline():
            raise ValueError(f"{path}: trailing data after {n} entries")
    return EmbeddingTable(ids, vectors, provenance)
