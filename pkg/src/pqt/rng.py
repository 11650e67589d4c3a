"""Deterministic random streams.

All sampling in this package runs on numpy's Philox bit generator, a
counter-based generator with a fixed, platform-independent algorithm.
The platform-default generator is never used.

A stream is identified by a 64-bit root seed plus a component path such
as ``"chsh/correlator/2"``.  The path is hashed to a 64-bit stream index
with SHA-256, and ``(seed, stream index)`` forms the Philox key.  Streams
with distinct paths are independent, so adding a new component never
perturbs the draws of an existing one.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_index(path: str) -> int:
    """Map a component path to a stable 64-bit stream index."""
    digest = hashlib.sha256(path.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, path: str = "") -> np.random.Generator:
    """Return the Philox stream for ``(seed, path)``.

    The same pair always yields the same sequence of draws, on any
    platform supported by numpy.
    """
    key = [int(seed) & _MASK64, stream_index(path)]
    return np.random.Generator(np.random.Philox(key=key))
