"""Physical parameters shared by every stage of the link."""

from __future__ import annotations

import math
from dataclasses import dataclass


def effective_gain(n_elements: int) -> float:
    """Mean end-to-end amplitude gain ``N*sqrt(pi)/2`` of the RIS link."""
    return n_elements * math.sqrt(math.pi) / 2.0


def sqrt_order(M: int) -> int:
    """Return sqrt(M) for a square QAM order, rejecting anything else."""
    k = math.isqrt(M)
    if M < 4 or k * k != M or (k & (k - 1)) != 0:
        raise ValueError(f"M must be a perfect-square power of 4, got {M}")
    return k


@dataclass(frozen=True)
class SystemConfig:
    """One operating point of the link.

    ``N`` RIS elements, ``Nr`` receive antennas, ``M``-QAM, average symbol
    energy ``es`` and noise PSD ``n0`` (so the SNR is ``es / n0``).
    """

    N: int
    Nr: int
    M: int
    es: float = 1.0
    n0: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.Nr < 1 or (self.Nr & (self.Nr - 1)) != 0:
            raise ValueError(f"Nr must be a power of 2, got {self.Nr}")
        sqrt_order(self.M)
        if self.es <= 0:
            raise ValueError("es must be positive")
        if self.n0 < 0:
            raise ValueError("n0 must be non-negative")

    @classmethod
    def from_snr_db(cls, N: int, Nr: int, M: int, snr_db: float, es: float = 1.0) -> "SystemConfig":
        return cls(N=N, Nr=Nr, M=M, es=es, n0=es / 10.0 ** (snr_db / 10.0))

    @property
    def sqrt_m(self) -> int:
        return sqrt_order(self.M)

    @property
    def rate(self) -> int:
        """Bits per channel use, ``log2(M) + 2*log2(Nr)``."""
        return int(round(math.log2(self.M))) + 2 * int(round(math.log2(self.Nr)))

    @property
    def beta(self) -> float:
        return effective_gain(self.N)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.es / self.n0)
