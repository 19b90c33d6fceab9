"""Greedy (energy-based) and maximum-likelihood detection.

The greedy detector looks only at the receive vector and the scalar gain
``beta``; it never touches the channel.  ML searches every (m, n, x)
hypothesis, recomputing the transmitter's phases for each one through the
same kernel the transmitter uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import SystemConfig
from .constellation import PamDimension, QamConstellation, join_words, split_words, word_length, word_to_bits


@dataclass(frozen=True)
class Detection:
    m_hat: int
    n_hat: int
    x_hat: complex
    word: int
    real_index: int
    imag_index: int


def greedy_detect(y) -> tuple[int, int]:
    """Antenna with the strongest real part and antenna with the strongest imaginary part."""
    y = np.asarray(y, dtype=complex)
    # np.argmax returns the first maximum, which is the lowest-index tie rule.
    return int(np.argmax(y.real ** 2)), int(np.argmax(y.imag ** 2))


def demod_dimension(y_comp: float, beta: float, dim: PamDimension) -> int:
    """Index of the level nearest to ``y_comp / beta``; ties go to the lower level."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return int(np.argmin((y_comp - beta * dim.levels) ** 2))


def _detection(m, n, ir, ii, c: QamConstellation, Nr: int) -> Detection:
    word = int(join_words(m, n, ir, ii, c.order, Nr))
    x = complex(c.real_dim.levels[ir], c.imag_dim.levels[ii])
    return Detection(int(m), int(n), x, word, int(ir), int(ii))


def gd_detect(y, beta: float, c: QamConstellation) -> Detection:
    y = np.asarray(y, dtype=complex)
    m, n = greedy_detect(y)
    ir = demod_dimension(y[m].real, beta, c.real_dim)
    ii = demod_dimension(y[n].imag, beta, c.imag_dim)
    return _detection(m, n, ir, ii, c, y.size)


def ml_detect(y, H, cfg: SystemConfig, c: QamConstellation) -> Detection:
    y = np.asarray(y, dtype=complex)
    H = np.asarray(H, dtype=complex)
    word = int(detect_block(y[None], H[None], cfg.beta, c, "ml")[0])
    m, n, ir, ii = (int(v) for v in split_words(word, c.order, cfg.Nr))
    return _detection(m, n, ir, ii, c, cfg.Nr)


def demap(det: Detection, c: QamConstellation, Nr: int) -> np.ndarray:
    """Bits of the detected word, the inverse of :func:`constellation.map_bits`."""
    return word_to_bits(det.word, word_length(c.order, Nr))


def detect_block(y, H, beta: float, c: QamConstellation, detector: str = "gd"):
    """Vectorized detection of a block of receive vectors; returns detected words."""
    Nr = y.shape[1]
    if detector == "gd":
        m, n, ir, ii = kernels.gd_block(y, beta, c.real_dim.levels, c.imag_dim.levels)
    elif detector == "ml":
        pos = np.ascontiguousarray(c.real_dim.positive_levels)
        class_id, class_delta = kernels.delta_classes(pos)
        m, n, ir, ii = kernels.ml_block(y, H, beta, pos, class_id, class_delta)
    else:
        raise ValueError(f"unknown detector {detector!r}")
    return join_words(m, n, ir, ii, c.order, Nr)
