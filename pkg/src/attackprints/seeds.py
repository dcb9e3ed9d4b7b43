"""Deterministic seed derivation.

One global seed fans out to per-stage and per-item seeds by stable hashing,
so any stage (or any single attack) can be re-run in isolation and still
produce the exact bytes a full pipeline run would have produced.
"""

import hashlib


def derive_seed(*parts: object) -> int:
    """Map an ordered tuple of parts (stage names, seeds, ids) to a u64 seed.

    Uses SHA-256 over a canonical text encoding; stable across runs,
    platforms and Python versions (unlike ``hash()``).
    """
    text = "\x1f".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
