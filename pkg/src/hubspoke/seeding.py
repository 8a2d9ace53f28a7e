"""Reproducible random streams.

Every stream is derived from (seed, stage, index) through numpy's
SeedSequence, so any stage can be recomputed in isolation and replication
streams never depend on how many other stages ran before them.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, stage: str, index: int = 0) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFF, zlib.crc32(stage.encode("utf-8")), int(index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
