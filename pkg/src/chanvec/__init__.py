"""Channel embedding toolkit.

Builds three kinds of latent channel representations from plain record
files (social-sharing, content, recommendation), scores channels along
social dimensions, and evaluates every embedding with category
prediction, odd-one-out triplets, and rank correlation against pairwise
human judgments.
"""

from chanvec.embedding import EmbeddingTable, read_embedding, write_embedding

__version__ = "0.1.0"

__all__ = ["EmbeddingTable", "read_embedding", "write_embedding", "__version__"]
