"""Closed-form error-rate analysis of the greedy detector.

The bound splits errors into two events: picking the wrong antenna index
(probability ``P_e(m)``, charged half the bits) and, given the right
antenna, confusing PAM levels (a Gray-weighted union bound).  ``P_e(m)``
rests on an integral ``I_i`` that has three evaluations here: adaptive
quadrature, the exponential-Q manipulation with its two Gaussian tails, and
the final closed form that also drops those tails.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .config import SystemConfig, effective_gain, sqrt_order
from .constellation import QamConstellation, gray_encode

log = logging.getLogger(__name__)

QUAD_EPSREL = 1e-10
QUAD_SPAN = 10.0


def q_exact(x):
    """Gaussian tail probability via the complementary error function."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def q_chiani(x):
    """Two-exponential approximation ``exp(-x^2/2)/12 + exp(-2x^2/3)/4``."""
    x2 = np.asarray(x, dtype=float) ** 2
    out = np.exp(-0.5 * x2) / 12.0 + np.exp(-2.0 * x2 / 3.0) / 4.0
    return float(out) if np.ndim(out) == 0 else out


_Q = {"exact": q_exact, "chiani": q_chiani}


def pep_iq(x_r, x_r_hat, beta, N0):
    """Probability of demodulating level ``x_r`` as ``x_r_hat`` once the antenna is right."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    gap = np.abs(np.asarray(x_r, dtype=float) - np.asarray(x_r_hat, dtype=float))
    if N0 == 0:
        return np.where(gap > 0, 0.0, 0.5) if np.ndim(gap) else (0.0 if gap > 0 else 0.5)
    return q_exact(beta * gap / math.sqrt(2.0 * N0))


@dataclass(frozen=True)
class PepParams:
    """Gaussian statistics of the competing decision variables for one (x_R, delta)."""

    mu1: float
    sigma1_sq: float
    rho1_sq: float
    rho2_sq: float

    @classmethod
    def build(cls, N: int, x_r: float, delta: float, N0: float) -> "PepParams":
        lam_bar = delta * delta / (1.0 + delta * delta)
        x2 = x_r * x_r
        return cls(
            mu1=effective_gain(N) * abs(x_r),
            sigma1_sq=N * x2 * (4.0 - math.pi) / 4.0 + N0 / 2.0,
            rho1_sq=N * x2 / (2.0 * lam_bar) + N0 / 2.0,
            rho2_sq=N * x2 / 2.0 + N0 / 2.0,
        )


@dataclass(frozen=True)
class IiTerms:
    """Exponents, widths and centres of the two Gaussian pieces of ``I_i``."""

    u0: float
    s0: float
    m0: float
    u1: float
    s1: float
    m1: float

    @classmethod
    def build(cls, mu1: float, sigma1: float, rho: float) -> "IiTerms":
        s2, r2 = sigma1 * sigma1, rho * rho
        a = s2 + r2
        b = 4.0 / 3.0 * s2 + r2
        return cls(
            u0=-0.5 * mu1 * mu1 / a,
            s0=sigma1 * rho / math.sqrt(a),
            m0=mu1 * r2 / a,
            u1=-2.0 / 3.0 * mu1 * mu1 / b,
            s1=sigma1 * rho / math.sqrt(b),
            m1=mu1 * r2 / b,
        )


def _closed_form(mu1, sigma1, rho):
    s2 = np.square(sigma1)
    r2 = np.square(rho)
    a = s2 + r2
    b = 4.0 / 3.0 * s2 + r2
    mu2 = np.square(mu1)
    return rho / (6.0 * np.sqrt(a)) * np.exp(-0.5 * mu2 / a) + rho / (2.0 * np.sqrt(b)) * np.exp(-2.0 / 3.0 * mu2 / b)


def integral_Ii(mu1: float, sigma1: float, rho: float, variant: str = "closed_form", q: str = "exact") -> float:
    """Probability mass where the wrong antenna outshines the right one.

    Parameters
    ----------
    mu1, sigma1 : mean and standard deviation of the correct antenna's real part.
    rho : standard deviation of the competing antenna's real part.
    variant : ``closed_form`` (drops the Gaussian tails), ``intermediate``
        (keeps them) or ``quadrature`` (adaptive integration).
    q : Q-function used inside the quadrature, ``exact`` or ``chiani``.
    """
    if not (sigma1 > 0 and rho > 0):
        raise ValueError("sigma1 and rho must be positive")
    if variant == "closed_form":
        out = float(_closed_form(mu1, sigma1, rho))
    elif variant == "intermediate":
        t = IiTerms.build(mu1, sigma1, rho)
        out = (math.exp(t.u0) * t.s0 * q_exact(-t.m0 / t.s0) / 6.0
               + math.exp(t.u1) * t.s1 * q_exact(-t.m1 / t.s1) / 2.0) / sigma1
    elif variant == "quadrature":
        qf = _Q[q]

        def integrand(a):
            return math.exp(-0.5 * ((mu1 - a) / sigma1) ** 2) * qf(a / rho)

        upper = max(mu1, 0.0) + QUAD_SPAN * sigma1
        # the product peaks between 0 and mu1; hint the Gaussian centre and its pull toward 0
        t = IiTerms.build(mu1, sigma1, rho)
        hints = sorted({p for p in (t.m0, t.m1, mu1) if 0.0 < p < upper})
        val, _ = integrate.quad(integrand, 0.0, upper, points=hints or None,
                                epsabs=0.0, epsrel=QUAD_EPSREL, limit=500)
        out = math.sqrt(2.0) / (sigma1 * math.sqrt(math.pi)) * val
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if not math.isfinite(out):
        raise ValueError("non-finite I_i for the given parameters")
    return out


def _as_batch(distances) -> np.ndarray:
    d = np.asarray(distances, dtype=float)
    return d[None, :] if d.ndim == 1 else d


def _positive_levels(d, es):
    return np.cumsum(d, axis=-1) * math.sqrt(es)


def pe_m_distances(distances, cfg: SystemConfig, variant: str = "closed_form") -> np.ndarray:
    """Antenna-index error probability for a batch of distance vectors (shape (B, sqrt(M)/2))."""
    d = _as_batch(distances)
    pos = _positive_levels(d, cfg.es)
    N, Nr, N0 = cfg.N, cfg.Nr, cfg.n0
    xr = pos[:, :, None]
    xi = pos[:, None, :]
    delta = xr / xi
    lam_bar = delta ** 2 / (1.0 + delta ** 2)
    x2 = xr ** 2
    mu1 = effective_gain(N) * xr
    sigma1 = np.sqrt(N * x2 * (4.0 - math.pi) / 4.0 + N0 / 2.0)
    rho1 = np.sqrt(N * x2 / (2.0 * lam_bar) + N0 / 2.0)
    rho2 = np.broadcast_to(np.sqrt(N * x2 / 2.0 + N0 / 2.0), rho1.shape)
    if variant == "closed_form":
        i1 = _closed_form(mu1, sigma1, rho1)
        i2 = _closed_form(mu1, sigma1, rho2)
    else:
        mu1b = np.broadcast_to(mu1, rho1.shape)
        sigb = np.broadcast_to(sigma1, rho1.shape)
        vec = np.vectorize(lambda m, s, r: integral_Ii(m, s, r, variant))
        i1 = vec(mu1b, sigb, rho1)
        i2 = vec(mu1b, sigb, rho2)
    terms = (Nr - 1) / Nr * i1 + i2 / Nr
    # negative real levels mirror the positive ones, so the sum over all levels doubles
    return 2.0 * (Nr - 1) / cfg.M * 2.0 * terms.sum(axis=(1, 2))


def pe_m(cfg: SystemConfig, c: QamConstellation, variant: str = "closed_form") -> float:
    return float(pe_m_distances(c.distances, cfg, variant)[0])


def _hamming(K: int) -> np.ndarray:
    lab = gray_encode(np.arange(K))
    x = lab[:, None] ^ lab[None, :]
    return np.vectorize(lambda v: bin(int(v)).count("1"))(x)


def level_union_term(distances, cfg: SystemConfig) -> np.ndarray:
    """Gray-weighted sum of level PEPs, before the leading factor."""
    d = _as_batch(distances)
    pos = _positive_levels(d, cfg.es)
    levels = np.concatenate([-pos[:, ::-1], pos], axis=1)
    K = levels.shape[1]
    gap = np.abs(levels[:, :, None] - levels[:, None, :])
    if cfg.n0 == 0:
        pep = np.where(gap > 0, 0.0, 0.5)
    else:
        pep = q_exact(cfg.beta * gap / math.sqrt(2.0 * cfg.n0))
    return (pep * _hamming(K)[None]).sum(axis=(1, 2))


def abep_bound_distances(distances, cfg: SystemConfig, pe_override=None, clip: bool = True) -> np.ndarray:
    """Upper bound on the bit error probability for a batch of distance vectors."""
    d = _as_batch(distances)
    K = 2 * d.shape[1]
    if K != cfg.sqrt_m:
        raise ValueError(f"{cfg.M}-QAM needs {cfg.sqrt_m // 2} distances, got {d.shape[1]}")
    pe = pe_m_distances(d, cfg) if pe_override is None else np.broadcast_to(np.asarray(pe_override, float), (d.shape[0],))
    lead = (1.0 - pe) / (K * math.log2(K * cfg.Nr))
    out = lead * level_union_term(d, cfg) + 0.5 * pe
    if clip:
        bad = (out < 0) | (out > 0.5)
        if np.any(bad):
            log.info("ABEP bound clipped to [0, 0.5] for %d of %d designs", int(bad.sum()), bad.size)
        out = np.clip(out, 0.0, 0.5)
    return out


def abep_upper_bound(cfg: SystemConfig, c: QamConstellation, pe_override=None) -> float:
    if c.order != cfg.M:
        raise ValueError("constellation order does not match the config")
    if abs(c.es - cfg.es) > 1e-12 * cfg.es:
        raise ValueError("constellation Es does not match the config")
    return float(abep_bound_distances(c.distances, cfg, pe_override)[0])


# --- asymptotic objective used by the analytic design --------------------------------


@dataclass(frozen=True)
class AsymptoticCoeffs:
    a0: float
    a1: float
    a2: float
    b0: float
    b1: float
    b2: float
    m_prime: int
    eps_m: float

    @classmethod
    def build(cls, cfg: SystemConfig) -> "AsymptoticCoeffs":
        M, N, Nr, es, N0 = cfg.M, cfg.N, cfg.Nr, cfg.es, cfg.n0
        k = sqrt_order(M)
        if M < 16:
            raise ValueError("the asymptotic objective needs M >= 16; 4-QAM has nothing to design")
        eps = 3.0 * (M - 2 * k + 2) / (2.0 * (M - 1))
        ne = N * es * eps
        return cls(
            a0=(Nr - 1) ** 2 / (3.0 * M * Nr) * math.sqrt((ne + N0) / (ne + 2.0 * N0)),
            a1=(Nr - 1) ** 2 / (M * Nr) * math.sqrt((ne + N0) / (ne + 7.0 / 3.0 * N0)),
            a2=4.0 / (k * math.log2(k * Nr)),
            b0=math.pi * N * N * es / (4.0 * ne + 8.0 * N0),
            b1=math.pi * N * N * es / (3.0 * ne + 7.0 * N0),
            b2=math.pi * N * N * es / (16.0 * N0) if N0 > 0 else math.inf,
            m_prime=k // 2 - 1,
            eps_m=eps,
        )

    def value(self, d0, d1):
        d02, d12 = np.square(d0), np.square(d1)
        return (self.a0 * np.exp(-self.b0 * d02) + self.a1 * np.exp(-self.b1 * d02)
                + self.m_prime * self.a2 * (np.exp(-self.b2 * d12) / 12.0 + np.exp(-4.0 / 3.0 * self.b2 * d12) / 4.0))


def abep_asymptotic(cfg: SystemConfig, d0: float, d1: float) -> float:
    """High-SNR approximation of the bound for inner distance d0 and equal outer spacing d1."""
    return float(AsymptoticCoeffs.build(cfg).value(d0, d1))
