"""Deterministic seed derivation.

Every pipeline stage receives one master seed; per-component seeds are
derived by hashing the master seed together with a short label, so adding
a component never shifts the random stream of another.
"""

from __future__ import annotations

import hashlib

__all__ = ["derive_seed"]


def derive_seed(master_seed: int, label: str) -> int:
    """Derive a 63-bit child seed from ``master_seed`` and a label.

    Uses SHA-256 over ``"{master_seed}:{label}"``; stable across platforms
    and Python versions.
    """
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF
