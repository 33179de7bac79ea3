"""Text items and the vector-line file format."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

FIELDS = ("title", "description")
VECTOR_DIM = 384
TRUNCATE_WORDS = 256


@dataclass(frozen=True)
class TextItem:
    video_id: str
    field: str
    text: str

    def __post_init__(self):
        if not self.video_id or any(ch.isspace() for ch in self.video_id):
            raise ValueError(f"video id {self.video_id!r} must be non-empty without whitespace")
        if self.field not in FIELDS:
            raise ValueError(f"field {self.field!r} not one of: {', '.join(FIELDS)}")


def truncate_words(text: str) -> str:
    """First TRUNCATE_WORDS whitespace-separated words, single-spaced.

    Words past the cutoff are discarded, not encoded separately.
    """
    return " ".join(text.split()[:TRUNCATE_WORDS])


def read_items(path) -> list[TextItem]:
    """Read video_id<TAB>field<TAB>text lines; text may contain tabs."""
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t", 2)
            if len(parts) != 3:
                raise ValueError(
                    f"{path}:{lineno}: expected video_id<TAB>field<TAB>text"
                )
            try:
                items.append(TextItem(*parts))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return items


def encode_items(items: list[TextItem], encoder, batch_size: int = 64) -> np.ndarray:
    """Encode items into an (n, VECTOR_DIM) array, one row per item.

    Each text is truncated to TRUNCATE_WORDS words first; items whose
    text is then empty become zero rows without touching the encoder.
    The rest are encoded in input order, batch_size texts at a time.
    """
    if batch_size < 1:
        raise ValueError("batch size must be at least 1")
    out = np.zeros((len(items), VECTOR_DIM), dtype=np.float64)
    rows: list[int] = []
    texts: list[str] = []
    for i, item in enumerate(items):
        text = truncate_words(item.text)
        if text:
            rows.append(i)
            texts.append(text)
    for start in range(0, len(texts), batch_size):
        chunk = texts[start : start + batch_size]
        vectors = np.asarray(encoder.encode(chunk), dtype=np.float64)
        if vectors.shape != (len(chunk), VECTOR_DIM):
            raise ValueError(
                f"backend returned shape {vectors.shape}, "
                f"expected {(len(chunk), VECTOR_DIM)}"
            )
        if not np.all(np.isfinite(vectors)):
            raise ValueError("backend returned non-finite components")
        out[rows[start : start + batch_size]] = vectors
    return out


def write_vectors(path, items: list[TextItem], vectors: np.ndarray, fmt: str = "%.8g") -> None:
    """One "video_id field components..." line per item, input order."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.shape != (len(items), VECTOR_DIM):
        raise ValueError(f"{len(items)} items but vector array of shape {vectors.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        for item, vec in zip(items, vectors):
            fh.write(f"{item.video_id} {item.field} " + " ".join(fmt % x for x in vec) + "\n")


def encode_file(input_path, output_path, encoder, batch_size: int = 64) -> int:
    """Encode a whole item file; returns the number of lines written."""
    items = read_items(input_path)
    vectors = encode_items(items, encoder, batch_size=batch_size)
    write_vectors(Path(output_path), items, vectors)
    log.info("encoded %d items from %s into %s", len(items), input_path, output_path)
    return len(items)
