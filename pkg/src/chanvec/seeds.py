"""Named seed derivation so every stage is independently reproducible."""

from __future__ import annotations

import hashlib


def derive_seed(root: int, *names) -> int:
    """Map a root seed plus a name path to a stable 63-bit seed.

    The same (root, names) always yields the same seed, and distinct
    name paths yield unrelated streams.
    """
    tag = ":".join([str(int(root))] + [str(n) for n in names])
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & 0x7FFFFFFFFFFFFFFF
