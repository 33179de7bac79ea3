"""Batch text encoder for video titles and descriptions.

Reads tab-separated (video_id, field, text) items, encodes each text
into a 384-component vector, and writes one "video_id field
components..." line per item, in input order. Empty and
whitespace-only texts become zero vectors; everything else is
truncated to the first 256 words before encoding.

Two backends: "model" wraps a local sentence-transformer checkpoint,
"hash" is a deterministic offline stand-in that needs no model assets.
"""

from .encoders import (
    DEFAULT_MODEL,
    EncoderError,
    HashEncoder,
    SentenceEncoder,
    get_encoder,
)
from .items import (
    FIELDS,
    TRUNCATE_WORDS,
    VECTOR_DIM,
    TextItem,
    encode_file,
    encode_items,
    read_items,
    truncate_words,
    write_vectors,
)

__all__ = [
    "DEFAULT_MODEL",
    "EncoderError",
    "FIELDS",
    "HashEncoder",
    "SentenceEncoder",
    "TRUNCATE_WORDS",
    "TextItem",
    "VECTOR_DIM",
    "encode_file",
    "encode_items",
    "get_encoder",
    "read_items",
    "truncate_words",
    "write_vectors",
]
