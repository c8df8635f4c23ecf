"""Counter-based noise streams for the path simulator.

Each path owns an independent stream addressed by (seed, stream_id).  The
generator is stateless: word k of a stream is the splitmix64 finalizer
applied to ``base + k * GAMMA``, where ``base`` mixes the seed and stream id
with distinct odd constants.  Gaussians come from Box-Muller over pairs of
words.  Because draws are pure functions of (seed, stream_id, index), any
chunking or path-level parallelism reproduces the exact same increments,
and increment sequences for a shorter horizon are prefixes of longer ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "unit_normals", "normal_increments"]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM_GAMMA = np.uint64(0xD1342543DE82EF95)
_TWO53 = float(2.0 ** -53)

def _mix64(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2^64, exactly what the mixer wants
    z = np.bitwise_xor(z, np.right_shift(z, np.uint64(30))) * _MIX1
    z = np.bitwise_xor(z, np.right_shift(z, np.uint64(27))) * _MIX2
    return np.bitwise_xor(z, np.right_shift(z, np.uint64(31)))


def _stream_base(seed: int, stream_id: int) -> np.uint64:
    with np.errstate(over="ignore"):
        s = _mix64(np.uint64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GAMMA))
        return _mix64(np.uint64(s + np.uint64(stream_id & 0xFFFFFFFFFFFFFFFF) * _STREAM_GAMMA))


@dataclass(frozen=True)
class RngStream:
    """Address of one reproducible noise stream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must fit in 64 bits")
        if not (0 <= self.stream_id < 2 ** 64):
            raise ValueError("stream_id must fit in 64 bits")


def unit_normals(stream: RngStream, start: int, count: int) -> np.ndarray:
    """Standard normal draws with absolute indices start .. start+count-1.

    Draw k consumes words 2k and 2k+1 of the stream: Box-Muller with
    u1 in (0, 1] (safe for the log) and u2 in [0, 1).
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    base = _stream_base(stream.seed, stream.stream_id)
    k = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        w1 = _mix64(base + (np.uint64(2) * k) * _GAMMA)
        w2 = _mix64(base + (np.uint64(2) * k + np.uint64(1)) * _GAMMA)
    u1 = ((w1 >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO53
    u2 = (w2 >> np.uint64(11)).astype(np.float64) * _TWO53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos((2.0 * np.pi) * u2)


def normal_increments(stream: RngStream, n_steps: int, dt: float) -> np.ndarray:
    """Wiener increments: n_steps i.i.d. N(0, dt) draws for this stream."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return np.sqrt(dt) * unit_normals(stream, 0, n_steps)
