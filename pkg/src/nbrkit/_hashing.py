"""Stable 64-bit hashing used for seed derivation and feature bucketing.

Python's builtin ``hash`` is salted per process, so everything that must be
reproducible across runs and machines goes through blake2b instead.
"""

from __future__ import annotations

import hashlib

_SEP = b"\x1f"  # unit separator; cannot appear in well-formed UTF-8 ids by convention


def stable_hash64(*parts: str | int) -> int:
    """Hash the parts to an unsigned 64-bit integer, independent of platform."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(_SEP)
    return int.from_bytes(h.digest(), "little")


class GramHasher:
    """Bucketing hash for short strings with a per-instance memo table.

    Character n-grams repeat heavily in natural text; the memo keeps the
    embedding hot path off hashlib for all but the first occurrence.
    """

    def __init__(self, buckets: int):
        if buckets < 1:
            raise ValueError("buckets must be >= 1")
        self.buckets = buckets
        self._memo: dict[str, int] = {}

    def bucket(self, gram: str) -> int:
        b = self._memo.get(gram)
        if b is None:
            b = stable_hash64(gram) % self.buckets
            self._memo[gram] = b
        return b
