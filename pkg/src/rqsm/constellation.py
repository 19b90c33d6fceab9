"""Square QAM built from two identical, possibly non-uniform, PAM dimensions.

A dimension is described by its normalized distances ``d_0, ..., d_{K/2-1}``
(K = sqrt(M)): the innermost level sits at ``d_0*sqrt(Es)`` and consecutive
positive levels are ``d_i*sqrt(Es)`` apart.  Labels are binary-reflected Gray
codes over the ascending level index, so moving points never relabels them.

Bit words are laid out MSB first as ``[m | n | real | imag]``.  Antenna
indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import sqrt_order

ENERGY_SLACK = 1e-9


def gray_encode(index):
    index = np.asarray(index)
    return index ^ (index >> 1)


def gray_decode(label):
    label = np.asarray(label).copy()
    shift = label >> 1
    while np.any(shift):
        label ^= shift
        shift >>= 1
    return label


def energy_sum(distances) -> float:
    """Left-hand side of the per-dimension energy constraint, sum_i (sum_{j<=i} d_j)^2."""
    cum = np.cumsum(np.asarray(distances, dtype=float))
    return float(np.sum(cum * cum))


@dataclass(frozen=True, eq=False)
class PamDimension:
    distances: np.ndarray
    es: float
    levels: np.ndarray = field(init=False, repr=False)
    labels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        d.setflags(write=False)
        pos = np.cumsum(d) * math.sqrt(self.es)
        levels = np.concatenate([-pos[::-1], pos])
        levels.setflags(write=False)
        labels = gray_encode(np.arange(levels.size))
        labels.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.levels.size

    @property
    def bits(self) -> int:
        return int(round(math.log2(self.size)))

    @property
    def positive_levels(self) -> np.ndarray:
        return self.levels[self.size // 2:]

    def index_of_label(self, label):
        return gray_decode(label)

    def hamming_table(self) -> np.ndarray:
        """Pairwise Hamming distances between the labels of level i and level j."""
        x = self.labels[:, None] ^ self.labels[None, :]
        return np.array([[bin(int(v)).count("1") for v in row] for row in x])


@dataclass(frozen=True, eq=False)
class QamConstellation:
    real_dim: PamDimension
    imag_dim: PamDimension
    order: int
    es: float

    @property
    def distances(self) -> np.ndarray:
        return self.real_dim.distances

    @property
    def sqrt_m(self) -> int:
        return self.real_dim.size

    def symbols(self) -> np.ndarray:
        """All M points as a (sqrt(M), sqrt(M)) grid indexed by (real index, imag index)."""
        return self.real_dim.levels[:, None] + 1j * self.imag_dim.levels[None, :]

    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.symbols()) ** 2))

    def is_normalized(self, tol: float = ENERGY_SLACK) -> bool:
        return abs(energy_sum(self.distances) - self.sqrt_m / 4.0) <= tol

    def to_dict(self) -> dict:
        return {"M": self.order, "Es": self.es, "distances": [float(v) for v in self.distances]}

    @classmethod
    def from_dict(cls, data: dict) -> "QamConstellation":
        return from_distances(data["distances"], int(data["M"]), float(data["Es"]))


def from_distances(distances, M: int, Es: float = 1.0) -> QamConstellation:
    """Build a constellation from normalized distances, validating the energy budget."""
    k = sqrt_order(M)
    d = np.asarray(distances, dtype=float).ravel()
    if d.size != k // 2:
        raise ValueError(f"{M}-QAM needs {k // 2} distances, got {d.size}")
    if np.any(d < 0) or not d[0] > 0:
        raise ValueError("distances must be non-negative with d0 > 0")
    if Es <= 0:
        raise ValueError("Es must be positive")
    lhs = energy_sum(d)
    if lhs > k / 4.0 + ENERGY_SLACK:
        raise ValueError(f"energy constraint violated: {lhs:.12g} > {k / 4.0:g}")
    dim = PamDimension(d, Es)
    return QamConstellation(real_dim=dim, imag_dim=dim, order=M, es=float(Es))


def conventional(M: int, Es: float = 1.0) -> QamConstellation:
    """Uniform square QAM with odd-integer levels scaled to mean energy ``Es``."""
    k = sqrt_order(M)
    d0 = math.sqrt(3.0 / (2.0 * (M - 1)))
    d = np.full(k // 2, 2.0 * d0)
    d[0] = d0
    return from_distances(d, M, Es)


def delta_sets(c: QamConstellation) -> dict:
    """Map each real level xi to the ratios |xi / x_I| over the positive imaginary levels."""
    pos = c.imag_dim.positive_levels
    return {float(xi): np.abs(xi / pos) for xi in c.real_dim.levels}


def field_widths(M: int, Nr: int) -> tuple[int, int]:
    """(bits per antenna index, bits per PAM dimension)."""
    k = sqrt_order(M)
    if Nr < 1 or (Nr & (Nr - 1)) != 0:
        raise ValueError(f"Nr must be a power of 2, got {Nr}")
    return Nr.bit_length() - 1, k.bit_length() - 1


def word_length(M: int, Nr: int) -> int:
    a, b = field_widths(M, Nr)
    return 2 * a + 2 * b


def split_words(words, M: int, Nr: int):
    """Split integer words into (m, n, real level index, imag level index)."""
    a, b = field_widths(M, Nr)
    w = np.asarray(words, dtype=np.int64)
    lab_i = w & ((1 << b) - 1)
    lab_r = (w >> b) & ((1 << b) - 1)
    n = (w >> (2 * b)) & ((1 << a) - 1)
    m = (w >> (2 * b + a)) & ((1 << a) - 1)
    return m, n, gray_decode(lab_r), gray_decode(lab_i)


def join_words(m, n, ir, ii, M: int, Nr: int):
    """Inverse of :func:`split_words`."""
    a, b = field_widths(M, Nr)
    m, n = np.asarray(m, dtype=np.int64), np.asarray(n, dtype=np.int64)
    lab_r = gray_encode(np.asarray(ir, dtype=np.int64))
    lab_i = gray_encode(np.asarray(ii, dtype=np.int64))
    return (((m << a) | n) << (2 * b)) | (lab_r << b) | lab_i


def bits_to_word(bits) -> int:
    word = 0
    for bit in bits:
        if bit not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        word = (word << 1) | int(bit)
    return word


def word_to_bits(word: int, length: int) -> np.ndarray:
    return np.array([(int(word) >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8)


def map_bits(bits, c: QamConstellation, Nr: int):
    """Map one word of ``log2(M) + 2*log2(Nr)`` bits to (m, n, x)."""
    bits = list(bits)
    R = word_length(c.order, Nr)
    if len(bits) != R:
        raise ValueError(f"expected {R} bits, got {len(bits)}")
    m, n, ir, ii = split_words(bits_to_word(bits), c.order, Nr)
    x = complex(c.real_dim.levels[ir], c.imag_dim.levels[ii])
    return int(m), int(n), x
