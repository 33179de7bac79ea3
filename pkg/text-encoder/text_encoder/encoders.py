"""Encoding backends: a sentence-transformer wrapper and an offline stand-in."""

import hashlib
import logging

import numpy as np

from .items import VECTOR_DIM

log = logging.getLogger(__name__)

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"
BACKENDS = ("model", "hash")


class EncoderError(RuntimeError):
    """A backend could not be constructed or loaded."""


class HashEncoder:
    """Deterministic bag-of-words feature hashing, no model assets.

    Each word lands in a digest-chosen component with a digest-chosen
    sign. Vectors carry no semantics beyond token overlap; the backend
    exists so pipelines run on hosts without model files.
    """

    name = "hash"

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), VECTOR_DIM), dtype=np.float64)
        for row, text in enumerate(texts):
            for word in text.split():
                digest = hashlib.sha256(word.casefold().encode("utf-8")).digest()
                index = int.from_bytes(digest[:8], "big") % VECTOR_DIM
                sign = 1.0 if digest[8] & 1 else -1.0
                out[row, index] += sign
        return out


class SentenceEncoder:
    """Sentence-transformer checkpoint producing VECTOR_DIM components."""

    name = "model"

    def __init__(self, model_path=None):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                "the 'model' backend needs the sentence-transformers package; "
                "install text-encoder[model] or switch to --backend hash"
            ) from exc
        source = str(model_path) if model_path else DEFAULT_MODEL
        try:
            self._model = SentenceTransformer(source)
        except Exception as exc:
            raise EncoderError(
                f"could not load model assets from {source!r}: {exc}; download "
                "the checkpoint to local disk and point --model-path at it"
            ) from exc
        # method name changed across sentence-transformers releases
        probe = getattr(self._model, "get_embedding_dimension", None)
        if probe is None:
            probe = self._model.get_sentence_embedding_dimension
        dim = probe()
        if dim != VECTOR_DIM:
            raise EncoderError(
                f"model at {source!r} produces {dim}-component vectors, need {VECTOR_DIM}"
            )
        log.info("loaded sentence encoder from %s", source)

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            list(texts),
            batch_size=len(texts),
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float64)


def get_encoder(backend: str, model_path=None):
    if backend == "hash":
        if model_path is not None:
            raise EncoderError("--model-path only applies to the 'model' backend")
        return HashEncoder()
    if backend == "model":
        return SentenceEncoder(model_path)
    raise EncoderError(f"unknown backend {backend!r}; expected one of: {', '.join(BACKENDS)}")
