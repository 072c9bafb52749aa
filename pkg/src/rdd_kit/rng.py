"""Counter-based random number streams.

Every random draw in the toolkit comes from a Philox counter-based
generator keyed by (seed, stream id). Streams are independent by key, so
the same seed reproduces each variable's draws bit-for-bit regardless of
which regime is generated, how work is chunked, or how many workers run.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "STREAM_CONFOUNDER",
    "STREAM_ASSIGNMENT",
    "STREAM_NOISE",
    "STREAM_COMPLIANCE",
    "STREAM_BOOTSTRAP",
    "stream_generator",
    "repetition_seed",
]

STREAM_CONFOUNDER = 1
STREAM_ASSIGNMENT = 2
STREAM_NOISE = 3
STREAM_COMPLIANCE = 4
STREAM_BOOTSTRAP = 5

_MASK64 = (1 << 64) - 1


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    """Generator for one named stream under one seed."""
    key = np.array([int(seed) & _MASK64, int(stream) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def repetition_seed(base_seed: int, repetition: int) -> int:
    """Per-repetition seed for Monte Carlo studies.

    Distinct keys give independent Philox streams, so a plain offset is
    enough and keeps the mapping order- and worker-independent.
    """
    return (int(base_seed) + int(repetition)) & _MASK64
