"""Deterministic seed fan-out.

One master seed is stretched into independent named streams so that
adding a query or a sweep cell never shifts the randomness of another.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(label: str, *parts) -> int:
    """A 64-bit seed determined by the label and the parts."""
    text = repr((label,) + tuple(parts)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big")


def stream(label: str, *parts) -> random.Random:
    """A fresh stdlib RNG on the derived seed."""
    return random.Random(derive_seed(label, *parts))
