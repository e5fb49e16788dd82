"""Deterministic seed derivation.

One root seed plus a path of labels and indices maps to an independent
stream; the same (root, path) always yields the same stream, and streams
for distinct paths are statistically independent, so replications can run
in any order or in parallel.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_part(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & 0xFFFFFFFF


def seed_sequence(root: int, *path) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(root), spawn_key=tuple(_key_part(p) for p in path))


def generator(root: int, *path) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(root, *path)))
