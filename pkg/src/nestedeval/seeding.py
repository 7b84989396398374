"""Deterministic derivation of per-stage child seeds from one root seed.

Every randomized unit of work (a fold split, a grid candidate fit, a tree in a
forest) gets its own seed derived from the root seed and the unit's identity.
Results then depend only on (root seed, unit identity), never on scheduling
order or worker count.
"""

from __future__ import annotations

import hashlib

_SEED_BITS = 63


def child_seed(root: int, *parts: str | int) -> int:
    """Derive a stable child seed from a root seed and a stage path.

    Parts are stage names and fold/candidate indices, e.g.
    ``child_seed(42, "tuning", fold, candidate)``. The derivation hashes a
    canonical token string with SHA-256, so identical inputs give identical
    seeds on every platform and process.
    """
    if not isinstance(root, int) or isinstance(root, bool) or root < 0:
        raise ValueError(f"root seed must be a nonnegative integer, got {root!r}")
    tokens = [str(root)]
    for part in parts:
        if isinstance(part, bool) or not isinstance(part, (str, int)):
            raise TypeError(f"seed path parts must be str or int, got {part!r}")
        tokens.append(str(part))
    digest = hashlib.sha256("/".join(tokens).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> (64 - _SEED_BITS)
