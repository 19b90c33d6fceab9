import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rqsm.analysis import (
    AsymptoticCoeffs,
    IiTerms,
    PepParams,
    abep_asymptotic,
    abep_bound_distances,
    abep_upper_bound,
    integral_Ii,
    pe_m,
    pe_m_distances,
    pep_iq,
    q_chiani,
    q_exact,
)
from rqsm.config import SystemConfig
from rqsm.constellation import conventional, from_distances, gray_encode
from rqsm.designer import design_kkt

# (snr_db, d0, d1, abep) rows of the analytic design table for N=256, Nr=4, 64-QAM
TABLE = [(-23, 0.2481, 0.2632, 7.62e-4), (-21, 0.2661, 0.2543, 6.67e-5),
         (-19, 0.2891, 0.2426, 2.96e-6), (-17, 0.3179, 0.2278, 5.82e-8)]

# Largest relative error of the two-exponential Q approximation on [0.5, 5],
# from a 100001-point sweep; the peak sits near x = 1.86.
CHIANI_BAND = 0.2620


def cfg64(snr):
    return SystemConfig.from_snr_db(256, 4, 64, snr)


def test_q_values():
    assert q_exact(0.0) == 0.5
    assert q_chiani(0.0) == pytest.approx(1 / 3)
    assert q_exact(1.0) == pytest.approx(0.15865525393145707, rel=1e-12)


def test_chiani_band():
    x = np.linspace(0.5, 5, 100001)
    rel = np.abs(q_chiani(x) - q_exact(x)) / q_exact(x)
    assert rel.max() == pytest.approx(CHIANI_BAND, abs=5e-4)


def test_pep_iq_limits():
    assert pep_iq(0.3, 0.3, 10.0, 1.0) == 0.5
    assert pep_iq(0.3, 0.1, 10.0, 0.0) == 0.0
    assert pep_iq(0.3, 0.1, 10.0, 1e-12) == pytest.approx(0.0, abs=1e-300)


def test_pep_iq_two_paths():
    beta, gap, n0 = 226.87, 0.2481, 10 ** 2.3
    direct = 0.5 * math.erfc(math.sqrt(beta ** 2 * gap ** 2 / (2 * n0)) / math.sqrt(2))
    assert pep_iq(gap, 0.0, beta, n0) == pytest.approx(direct, rel=1e-12)
    assert 256 * math.sqrt(math.pi) / 2 == pytest.approx(226.87, abs=0.01)


def test_quadrature_at_zero_mean_matches_orthant_probability():
    # Z1 ~ N(0, s^2), Z2 ~ N(0, r^2): 2 P(Z1 > 0, Z2 > Z1) = atan(r / s) / pi
    s, r = 1.3, 0.7
    assert integral_Ii(0.0, s, r, "quadrature") == pytest.approx(math.atan(r / s) / math.pi, rel=1e-8)
    # the closed form assumes a large mean and is off here
    assert abs(integral_Ii(0.0, s, r) - math.atan(r / s) / math.pi) > 0.05


def test_small_rho_vanishes():
    for v in ("closed_form", "intermediate", "quadrature"):
        assert integral_Ii(50.0, 5.0, 1e-9, v) < 1e-9


def test_integral_rejects_bad_widths():
    with pytest.raises(ValueError):
        integral_Ii(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        integral_Ii(1.0, 1.0, 1.0, "simpson")


@settings(max_examples=80, deadline=None)
@given(mu=st.floats(0.5, 80), sigma=st.floats(0.3, 10), rho=st.floats(0.3, 30))
def test_intermediate_form_equals_quadrature_with_approximate_q(mu, sigma, rho):
    exact_q_free = integral_Ii(mu, sigma, rho, "quadrature", q="chiani")
    assert integral_Ii(mu, sigma, rho, "intermediate") == pytest.approx(exact_q_free, rel=1e-7, abs=1e-300)


@settings(max_examples=80, deadline=None)
@given(mu=st.floats(0.5, 80), sigma=st.floats(0.3, 10), rho=st.floats(0.3, 30))
def test_closed_form_drops_only_the_tail_factors(mu, sigma, rho):
    t = IiTerms.build(mu, sigma, rho)
    closed = integral_Ii(mu, sigma, rho)
    inter = integral_Ii(mu, sigma, rho, "intermediate")
    assert inter <= closed * (1 + 1e-12)
    if min(t.m0 / t.s0, t.m1 / t.s1) > 4:
        assert inter == pytest.approx(closed, rel=1e-4)


def test_closed_form_agrees_with_exact_quadrature_in_the_large_mean_regime():
    """Where mu1/sigma1 > 5 and m0/s0 > 3 the two should agree within 5%."""
    worst = 0.0
    for snr, d0, d1, _ in TABLE:
        cfg = cfg64(snr)
        p = PepParams.build(256, d0, d0 / (d0 + 3 * d1), cfg.n0)
        s = math.sqrt(p.sigma1_sq)
        for rho in (math.sqrt(p.rho1_sq), math.sqrt(p.rho2_sq)):
            t = IiTerms.build(p.mu1, s, rho)
            assert p.mu1 / s > 5 and t.m0 / t.s0 > 3
            q = integral_Ii(p.mu1, s, rho, "quadrature")
            worst = max(worst, abs(integral_Ii(p.mu1, s, rho) - q) / q)
    assert worst < 0.05, f"largest relative gap {worst:.3f}"


def test_pep_params_ordering_and_extreme_ratio_identity():
    c = cfg64(-21)
    d0, d1 = 0.2661, 0.2543
    dmin = d0 / (d0 + 3 * d1)
    p = PepParams.build(256, d0, dmin, c.n0)
    assert p.rho1_sq >= p.rho2_sq > 0 and p.sigma1_sq > 0
    assert p.rho1_sq == pytest.approx(256 / 2 * (d0 ** 2 + (d0 + 3 * d1) ** 2) + c.n0 / 2, rel=1e-12)


def test_pe_m_single_antenna_is_zero():
    cfg = SystemConfig.from_snr_db(256, 1, 16, -25)
    assert pe_m(cfg, conventional(16)) == 0.0


def test_pe_m_positive_floor_without_noise():
    c = conventional(64)
    vals = [pe_m(SystemConfig(256, 4, 64, n0=n0), c) for n0 in (1e-6, 1e-9, 1e-12)]
    assert vals[0] > 0
    assert vals[1] == pytest.approx(vals[2], rel=1e-3)
    assert vals[2] > 1e-4


def test_pe_m_keeps_tail_factors_below_closed_form():
    cfg = cfg64(-23)
    a = pe_m(cfg, conventional(64))
    b = pe_m(cfg, conventional(64), variant="intermediate")
    assert b <= a
    assert b == pytest.approx(a, rel=0.01)


def _plain_pam_union(d, cfg):
    lv = np.concatenate([-np.cumsum(d)[::-1], np.cumsum(d)]) * math.sqrt(cfg.es)
    lab = gray_encode(np.arange(lv.size))
    tot = 0.0
    for i in range(lv.size):
        for j in range(lv.size):
            if i != j:
                tot += q_exact(cfg.beta * abs(lv[i] - lv[j]) / math.sqrt(2 * cfg.n0)) * bin(int(lab[i] ^ lab[j])).count("1")
    return tot / (lv.size * math.log2(lv.size * cfg.Nr))


def test_without_index_errors_bound_is_plain_pam_union_bound():
    cfg = cfg64(-23)
    c = conventional(64)
    assert abep_upper_bound(cfg, c, pe_override=0.0) == pytest.approx(_plain_pam_union(c.distances, cfg), rel=1e-12)


@pytest.mark.parametrize("snr,d0,d1,expected", TABLE)
def test_bound_at_table_designs(snr, d0, d1, expected):
    got = abep_bound_distances([d0, d1, d1, d1], cfg64(snr))[0]
    assert got == pytest.approx(expected, rel=0.05)


def test_bound_decreases_with_snr():
    vals = [abep_upper_bound(cfg64(s), conventional(64)) for s, *_ in TABLE]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_bound_is_clipped(caplog):
    cfg = SystemConfig.from_snr_db(4, 8, 64, -60)
    with caplog.at_level("INFO"):
        v = abep_upper_bound(cfg, conventional(64))
    assert 0.0 <= v <= 0.5


def test_bound_checks_constellation_matches_config():
    with pytest.raises(ValueError):
        abep_upper_bound(cfg64(-23), conventional(16))


def test_asymptotic_coefficients():
    co = AsymptoticCoeffs.build(cfg64(-23))
    assert co.a2 == pytest.approx(0.1)
    assert co.m_prime == 3
    assert co.eps_m == pytest.approx(3 * (64 - 16 + 2) / (2 * 63))
    assert AsymptoticCoeffs.build(SystemConfig(256, 4, 16)).eps_m == pytest.approx(1.0)
    assert all(v > 0 for v in (co.a0, co.a1, co.a2, co.b0, co.b1, co.b2))


def test_asymptotic_rejects_4qam():
    with pytest.raises(ValueError):
        abep_asymptotic(SystemConfig(256, 4, 4), 0.7, 0.0)


def test_asymptotic_value_at_last_table_row():
    # Frozen from the formula itself.  The table's 5.82e-8 is the full bound
    # at this design (checked in test_bound_at_table_designs).
    assert abep_asymptotic(cfg64(-17), 0.3179, 0.2278) == pytest.approx(7.3643e-8, rel=1e-3)


def test_asymptotic_tracks_bound_at_table_points():
    """The asymptotic objective and the full bound agree within 25% of the bound."""
    gaps = []
    for snr, *_ in TABLE:
        r = design_kkt(cfg64(snr))
        a = abep_asymptotic(cfg64(snr), r.d0, r.d1)
        gaps.append(abs(a - r.abep) / r.abep)
    assert max(gaps) < 0.25, [round(g, 3) for g in gaps]


def test_bound_upper_limits_the_pam_term_only_for_optimized_designs():
    r = design_kkt(cfg64(-21))
    c = from_distances(r.distances, 64)
    assert abep_upper_bound(cfg64(-21), c) < abep_upper_bound(cfg64(-21), conventional(64))
