"""Rayleigh channel and AWGN draws on counter-based random streams.

Every draw comes from a Philox generator keyed by the master seed whose
counter is offset by ``(trial, purpose)``.  A stream therefore depends only
on its identity, never on which worker asks for it or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PURPOSES = {"channel": 1, "noise": 2, "bits": 3, "verify": 4}

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    trial: int
    purpose: str = "channel"

    def __post_init__(self):
        if not 0 <= self.seed <= _SEED_MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.trial < 0:
            raise ValueError("trial index must be non-negative")
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose {self.purpose!r}")

    def generator(self) -> np.random.Generator:
        # Philox counts up from the low word; the high words carry the stream id.
        counter = [0, 0, self.trial, PURPOSES[self.purpose]]
        return np.random.Generator(np.random.Philox(key=self.seed, counter=counter))


def standard_complex_normal(gen: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: independent N(0, 1/2) real and imaginary parts."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    z = gen.standard_normal((2,) + shape)
    return (z[0] + 1j * z[1]) * np.sqrt(0.5)


def sample_channel(stream: RngStream, Nr: int, N: int) -> np.ndarray:
    """Nr x N matrix of i.i.d. CN(0, 1) gains."""
    if Nr < 1 or N < 1:
        raise ValueError("Nr and N must be >= 1")
    return standard_complex_normal(stream.generator(), (Nr, N))


def sample_noise(stream: RngStream, Nr: int, N0: float) -> np.ndarray:
    """Length-Nr vector of CN(0, N0) noise."""
    if N0 < 0:
        raise ValueError("N0 must be non-negative")
    return np.sqrt(N0) * standard_complex_normal(stream.generator(), Nr)


def sample_word(stream: RngStream, rate: int) -> int:
    return int(stream.generator().integers(0, 1 << rate))
