"""Non-uniform PAM design that minimizes the bit error bound.

Two routes:

* ``design_kkt`` uses the high-SNR objective with equal outer spacing and
  reduces the KKT system to one scalar equation in the outer spacing.
* ``design_grid`` searches the full bound over the energy-constraint
  surface, eliminating the last distance through the equality constraint.
  It is slow and only used as an oracle for the analytic route.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import AsymptoticCoeffs, abep_bound_distances
from .config import SystemConfig
from .constellation import conventional, energy_sum

CERTIFY_RATIO = 1.15
SCAN_POINTS = 4000
ROOT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DesignResult:
    distances: np.ndarray
    abep: float
    method: str
    snr_db: float
    certified: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def d0(self) -> float:
        return float(self.distances[0])

    @property
    def d1(self) -> float:
        return float(self.distances[1])


def _cfg_at(cfg: SystemConfig, snr_db: float) -> SystemConfig:
    return SystemConfig.from_snr_db(cfg.N, cfg.Nr, cfg.M, snr_db, cfg.es)


def constraint_coeff(m_prime: int) -> float:
    """Coefficient of d1^2 in the equal-spacing energy constraint."""
    return m_prime * (2 * m_prime + 1) / 3.0


def d0_from_d1(d1, m_prime: int):
    """Inner distance that puts the equal-spacing design on the energy boundary."""
    c = constraint_coeff(m_prime)
    d1 = np.asarray(d1, dtype=float)
    disc = 4.0 * m_prime ** 2 * d1 ** 2 - 8.0 * (c * d1 ** 2 - 1.0)
    return (-2.0 * m_prime * d1 + np.sqrt(np.maximum(disc, 0.0))) / 4.0


def d1_max(m_prime: int) -> float:
    return math.sqrt(1.0 / constraint_coeff(m_prime))


def multiplier(co: AsymptoticCoeffs, d0, d1):
    """Energy-constraint multiplier from the d0 stationarity condition."""
    e0, e1 = np.exp(-co.b0 * d0 ** 2), np.exp(-co.b1 * d0 ** 2)
    e2, e3 = np.exp(-co.b2 * d1 ** 2), np.exp(-4.0 / 3.0 * co.b2 * d1 ** 2)
    return (co.a0 * co.b0 * d0 ** 2 * e0 + co.a1 * co.b1 * d0 ** 2 * e1
            + co.m_prime * co.a2 * co.b2 * d1 ** 2 * (e2 / 12.0 + e3 / 3.0))


def kkt_residual(co: AsymptoticCoeffs, d1):
    """d1 stationarity condition after substituting d0(d1) and the multiplier."""
    mp = co.m_prime
    d0 = d0_from_d1(d1, mp)
    e2, e3 = np.exp(-co.b2 * d1 ** 2), np.exp(-4.0 / 3.0 * co.b2 * d1 ** 2)
    grad = -mp * co.a2 * co.b2 * d1 * (e2 / 6.0 + 2.0 / 3.0 * e3)
    return grad + multiplier(co, d0, d1) * (2.0 * constraint_coeff(mp) * d1 + 2.0 * mp * d0)


def kkt_conditions(co: AsymptoticCoeffs, d0: float, d1: float) -> dict:
    """Residuals of the full KKT system at (d0, d1).

    Stationarity is written for the Lagrangian ``f + nu*(g - 1)`` with
    ``g = 2 d0^2 + c d1^2 + 2 M' d0 d1``.
    """
    mp, c = co.m_prime, constraint_coeff(co.m_prime)
    e0, e1 = math.exp(-co.b0 * d0 ** 2), math.exp(-co.b1 * d0 ** 2)
    e2, e3 = math.exp(-co.b2 * d1 ** 2), math.exp(-4.0 / 3.0 * co.b2 * d1 ** 2)
    df0 = -2.0 * d0 * (co.a0 * co.b0 * e0 + co.a1 * co.b1 * e1)
    df1 = -2.0 * mp * co.a2 * co.b2 * d1 * (e2 / 12.0 + e3 / 3.0)
    g = 2.0 * d0 ** 2 + c * d1 ** 2 + 2.0 * mp * d0 * d1
    dg0 = 4.0 * d0 + 2.0 * mp * d1
    dg1 = 2.0 * c * d1 + 2.0 * mp * d0
    # least-squares multiplier over both stationarity equations
    nu = -(df0 * dg0 + df1 * dg1) / (dg0 ** 2 + dg1 ** 2)
    scale = max(abs(df0), abs(df1), 1e-300)
    return {
        "nu": nu,
        "primal": g - 1.0,
        "stationarity_d0": (df0 + nu * dg0) / scale,
        "stationarity_d1": (df1 + nu * dg1) / scale,
        "slackness": nu * (g - 1.0),
    }


def convexity_ok(co: AsymptoticCoeffs, d0: float, d1: float) -> bool:
    """Each exponential is convex in its distance beyond 1/sqrt(2b)."""
    return (d0 >= 1.0 / math.sqrt(2.0 * co.b0) and d0 >= 1.0 / math.sqrt(2.0 * co.b1)
            and d1 >= 1.0 / math.sqrt(2.0 * co.b2))


def equal_spacing(d0: float, d1: float, M: int) -> np.ndarray:
    k2 = math.isqrt(M) // 2
    d = np.full(k2, d1)
    d[0] = d0
    return d


def _bisect(fn, lo, hi, f_lo, tol=ROOT_TOL, max_iter=200):
    it = 0
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid, it
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi), it


def design_kkt(cfg: SystemConfig, snr_db: float | None = None) -> DesignResult:
    """Minimize the asymptotic objective over (d0, d1) with equal outer spacing."""
    if snr_db is not None:
        cfg = _cfg_at(cfg, snr_db)
    co = AsymptoticCoeffs.build(cfg)
    mp = co.m_prime
    hi = d1_max(mp) * (1.0 - 1e-12)
    # log-spaced scan: the residual varies on the scale 1/sqrt(b2), far below d1_max at low noise
    xs = np.geomspace(hi * 1e-6, hi, SCAN_POINTS)
    gs = kkt_residual(co, xs)
    flips = np.nonzero(np.sign(gs[:-1]) * np.sign(gs[1:]) < 0)[0]
    roots = []
    iters = 0
    for i in flips:
        r, it = _bisect(lambda x: float(kkt_residual(co, x)), xs[i], xs[i + 1], gs[i])
        iters += it
        roots.append(r)
    fallback = not roots
    if fallback:
        # no sign change: take the best point of the scan
        vals = co.value(d0_from_d1(xs, mp), xs)
        roots = [float(xs[int(np.argmin(vals))])]
    cands = [(float(co.value(d0_from_d1(r, mp), r)), r) for r in roots]
    obj, d1 = min(cands)
    d0 = float(d0_from_d1(d1, mp))
    d = equal_spacing(d0, d1, cfg.M)
    diag = {
        "iterations": iters,
        "residual": float(kkt_residual(co, d1)),
        "roots": [(float(d0_from_d1(r, mp)), r) for r in roots],
        "objective": obj,
        "fallback_scan": fallback,
        "kkt": kkt_conditions(co, d0, d1),
        "constraint": energy_sum(d) - math.isqrt(cfg.M) / 4.0,
    }
    return DesignResult(
        distances=d,
        abep=float(abep_bound_distances(d, cfg)[0]),
        method="kkt",
        snr_db=cfg.snr_db,
        certified=convexity_ok(co, d0, d1) and not fallback,
        diagnostics=diag,
    )


def complete_distances(free, M: int):
    """Append the last distance so the energy constraint holds with equality.

    ``free`` has shape (B, sqrt(M)/2 - 1).  Returns (distances, feasible).
    The last cumulative level ``s`` satisfies ``s^2 = sqrt(M)/4 - sum(prefix^2)``.
    """
    free = np.atleast_2d(np.asarray(free, dtype=float))
    k = math.isqrt(M)
    cum = np.cumsum(free, axis=1)
    rem = k / 4.0 - np.sum(cum ** 2, axis=1)
    last_level = np.sqrt(np.maximum(rem, 0.0))
    last = last_level - cum[:, -1]
    feasible = (rem >= 0) & (last >= 0) & (free[:, 0] > 0) & np.all(free >= 0, axis=1)
    return np.concatenate([free, last[:, None]], axis=1), feasible


def _evaluate(free, cfg):
    d, ok = complete_distances(free, cfg.M)
    vals = np.full(d.shape[0], np.inf)
    if np.any(ok):
        vals[ok] = abep_bound_distances(d[ok], cfg, clip=False)
    return d, vals


def _scan(axes, cfg, batch=20000):
    best_val, best_d, count = np.inf, None, 0
    combos = itertools.product(*axes)
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            break
        d, vals = _evaluate(np.array(chunk), cfg)
        count += int(np.isfinite(vals).sum())
        i = int(np.argmin(vals))  # first minimum keeps the lowest-index tie rule
        if vals[i] < best_val:
            best_val, best_d = float(vals[i]), d[i]
    return best_val, best_d, count


def design_grid(cfg: SystemConfig, snr_db: float | None = None, resolution: float = 0.002,
                coarse: float = 0.01, span: int = 3) -> DesignResult:
    """Grid search of the full bound over the energy-constraint surface.

    A coarse pass at ``coarse`` spacing covers the whole surface; a fine pass
    at ``resolution`` then covers ``span`` coarse cells around the coarse
    optimum in every free coordinate.
    """
    if snr_db is not None:
        cfg = _cfg_at(cfg, snr_db)
    if cfg.M not in (16, 64):
        raise ValueError("grid search supports M in {16, 64}")
    if not (0 < resolution <= coarse):
        raise ValueError("need 0 < resolution <= coarse")
    k = math.isqrt(cfg.M)
    n_free = k // 2 - 1
    top = math.sqrt(k / 4.0)
    coarse_axis = np.arange(coarse, top + coarse / 2, coarse)
    val, d, count = _scan([coarse_axis] * n_free, cfg)
    if d is None:
        raise ValueError("no feasible point on the coarse grid; refine the resolution")
    fine_axes = []
    for x in d[:n_free]:
        lo = max(resolution, x - span * coarse)
        fine_axes.append(np.arange(lo, x + span * coarse + resolution / 2, resolution))
    fval, fd, fcount = _scan(fine_axes, cfg)
    if fval < val:
        val, d = fval, fd
    return DesignResult(
        distances=np.asarray(d, dtype=float),
        abep=float(np.clip(val, 0.0, 0.5)),
        method="grid",
        snr_db=cfg.snr_db,
        diagnostics={"evaluated": count + fcount, "resolution": resolution, "coarse": coarse},
    )


def design(cfg: SystemConfig, snr_db: float | None = None, method: str = "kkt") -> DesignResult:
    if method == "kkt":
        return design_kkt(cfg, snr_db)
    if method == "grid":
        return design_grid(cfg, snr_db)
    raise ValueError(f"unknown design method {method!r}")


def conventional_result(cfg: SystemConfig, snr_db: float | None = None) -> DesignResult:
    if snr_db is not None:
        cfg = _cfg_at(cfg, snr_db)
    d = conventional(cfg.M, cfg.es).distances
    return DesignResult(distances=np.array(d), abep=float(abep_bound_distances(d, cfg)[0]),
                        method="conventional", snr_db=cfg.snr_db)


@dataclass(frozen=True)
class CertifyReport:
    kkt_abep: float
    grid_abep: float
    ratio: float
    passed: bool


def certify(result: DesignResult, cfg: SystemConfig, snr_db: float | None = None,
            grid: DesignResult | None = None, limit: float = CERTIFY_RATIO) -> CertifyReport:
    """Compare the bound at an analytic design with the bound at the grid optimum."""
    if snr_db is not None:
        cfg = _cfg_at(cfg, snr_db)
    if grid is None:
        grid = design_grid(cfg)
    k_val = float(abep_bound_distances(result.distances, cfg)[0])
    g_val = float(abep_bound_distances(grid.distances, cfg)[0])
    ratio = k_val / g_val
    return CertifyReport(k_val, g_val, ratio, ratio <= limit)
