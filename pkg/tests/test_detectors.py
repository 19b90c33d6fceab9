import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rqsm.config import SystemConfig, effective_gain
from rqsm.constellation import PamDimension, conventional, join_words, map_bits, split_words, word_length, word_to_bits
from rqsm.detectors import demap, demod_dimension, detect_block, gd_detect, greedy_detect, ml_detect
from rqsm.ris_core import solve_phases, transmit

from conftest import channel


def test_greedy_picks_dominant_components():
    assert greedy_detect([3 + 0.1j, 0.2 + 5j]) == (0, 1)


def test_greedy_ties_go_to_lowest_index():
    assert greedy_detect([1 + 1j, -1 - 1j, 1 - 1j]) == (0, 0)


def test_demod_nearest_scaled_level():
    dim = PamDimension(np.array([1.0, 2.0]), 1.0)      # levels -3 -1 1 3
    assert dim.levels[demod_dimension(2.1, 2.0, dim)] == 1.0


def test_demod_midpoint_goes_to_lower_level():
    dim = PamDimension(np.array([1.0, 2.0]), 1.0)
    assert dim.levels[demod_dimension(0.0, 2.0, dim)] == -1.0
    assert dim.levels[demod_dimension(4.0, 2.0, dim)] == 1.0


def test_demod_rejects_bad_gain():
    with pytest.raises(ValueError):
        demod_dimension(0.0, 0.0, conventional(16).real_dim)


@pytest.mark.parametrize("N", [64, 256])
def test_noiseless_gd_recovers_every_word(N):
    c = conventional(16, 1.0)
    beta = effective_gain(N)
    for w in range(256):
        m, n, x = map_bits(word_to_bits(w, 8), c, 4)
        y = transmit(channel(w, Nr=4, N=N), m, n, x)
        det = gd_detect(y, beta, c)
        assert det.word == w, (w, det)
        assert (det.m_hat, det.n_hat, det.x_hat) == (m, n, x)


def test_gd_block_does_not_need_the_channel():
    c = conventional(16, 1.0)
    y = np.stack([transmit(channel(s), 1, 2, 1 - 3j) for s in range(3)])
    words = detect_block(y, None, effective_gain(256), c, "gd")
    assert words.shape == (3,)


def _ml_oracle(y, H, cfg, c):
    """Exhaustive search over (m, n, real level, imag level) through the single-instance solver."""
    best, arg = np.inf, None
    K = c.sqrt_m
    for m, n, ir, ii in itertools.product(range(cfg.Nr), range(cfg.Nr), range(K), range(K)):
        x = complex(c.real_dim.levels[ir], c.imag_dim.levels[ii])
        sol = solve_phases(H, m, n, x)
        metric = np.sum(np.abs(y - H @ sol.theta * sol.gain * abs(x)) ** 2)
        if metric < best:
            best, arg = metric, (m, n, ir, ii)
    return arg


@pytest.mark.filterwarnings("ignore::rqsm.ris_core.LambdaBracketWarning")  # m == n hypotheses sit at a bracket end
def test_ml_matches_exhaustive_oracle_under_noise():
    cfg = SystemConfig(N=16, Nr=2, M=16, n0=1.0)
    c = conventional(16, 1.0)
    rng = np.random.default_rng(5)
    agree = 0
    for s in range(25):
        H = channel(s, Nr=2, N=16)
        m, n, x = map_bits(word_to_bits(int(rng.integers(0, 64)), 6), c, 2)
        y = transmit(H, m, n, x) + 2.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        det = ml_detect(y, H, cfg, c)
        agree += (det.m_hat, det.n_hat, det.real_index, det.imag_index) == _ml_oracle(y, H, cfg, c)
    assert agree == 25


def test_ml_noiseless_is_exact():
    cfg = SystemConfig(N=64, Nr=4, M=16)
    c = conventional(16, 1.0)
    for w in range(0, 256, 7):
        H = channel(w, Nr=4, N=64)
        m, n, x = map_bits(word_to_bits(w, 8), c, 4)
        assert ml_detect(transmit(H, m, n, x), H, cfg, c).word == w


def test_ml_hypothesis_count():
    # every (m, n, level pair) is reachable as an ML output, so all Nr^2 * M are searched
    cfg = SystemConfig(N=32, Nr=4, M=16)
    c = conventional(16, 1.0)
    assert cfg.Nr ** 2 * cfg.M == 256
    hits = set()
    for w in range(256):
        H = channel(w, Nr=4, N=32)
        m, n, x = map_bits(word_to_bits(w, 8), c, 4)
        hits.add(ml_detect(transmit(H, m, n, x), H, cfg, c).word)
    assert len(hits) == 256


def test_unknown_detector():
    with pytest.raises(ValueError):
        detect_block(np.zeros((1, 2), complex), None, 1.0, conventional(16), "zf")


@pytest.mark.parametrize("M,Nr", [(16, 4), (64, 8), (4, 2)])
def test_demap_inverts_map_exhaustively(M, Nr):
    c = conventional(M, 1.0)
    R = word_length(M, Nr)
    beta = 1.0
    for w in range(1 << R):
        bits = word_to_bits(w, R)
        m, n, x = map_bits(bits, c, Nr)
        y = np.zeros(Nr, complex)
        y[m] += x.real * 10
        y[n] += 1j * x.imag * 10
        det = gd_detect(y, 10.0, c)
        np.testing.assert_array_equal(demap(det, c, Nr), bits)
    assert beta == 1.0


@given(st.integers(0, (1 << 12) - 1))
def test_demap_roundtrip_fuzz(w):
    c = conventional(64, 1.0)
    m, n, ir, ii = (int(v) for v in split_words(w, 64, 8))
    from rqsm.detectors import Detection

    det = Detection(m, n, 0j, int(join_words(m, n, ir, ii, 64, 8)), ir, ii)
    np.testing.assert_array_equal(demap(det, c, 8), word_to_bits(w, 12))


def test_antenna_error_touches_only_its_field():
    c = conventional(16, 1.0)
    from rqsm.detectors import Detection

    a = Detection(1, 2, 0j, int(join_words(1, 2, 3, 0, 16, 4)), 3, 0)
    b = Detection(2, 2, 0j, int(join_words(2, 2, 3, 0, 16, 4)), 3, 0)
    diff = demap(a, c, 4) ^ demap(b, c, 4)
    assert diff[2:].sum() == 0 and diff[:2].sum() > 0
