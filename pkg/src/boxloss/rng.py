"""Deterministic random-stream derivation.

Streams are derived from string-able labels via SHA-256, so every consumer
(trajectories, dataset samples, noisy labels) gets an independent,
platform-stable stream and results never depend on execution order or
thread count.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed", "stream"]


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from a sequence of labels."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(*parts: object) -> np.random.Generator:
    """Independent generator for the given labels."""
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))
