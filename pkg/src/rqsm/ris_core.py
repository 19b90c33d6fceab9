"""RIS phase design for one (channel, antenna pair, target symbol).

The transmitter picks unit-modulus phases that maximize
``min(Y_R, delta*Y_I)``, where ``Y_R`` is the signed real part seen at
antenna m and ``Y_I`` the signed imaginary part at antenna n.  The optimum
is a convex mix, weighted by ``lambda``, of the two single-antenna
matched phases, and ``lambda`` is the root of a monotone scalar equation.
A one-tap gain ``G`` then pins the link gain to its ensemble mean so the
receiver only needs ``beta = N*sqrt(pi)/2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .channel import RngStream, standard_complex_normal
from .config import effective_gain


class LambdaBracketWarning(RuntimeWarning):
    """The lambda equation has no sign change inside (0, 1)."""


@dataclass(frozen=True, eq=False)
class AbcdVectors:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    delta: float
    sign_r: float
    sign_i: float

    @property
    def lambda_bar(self) -> float:
        return mean_lambda(self.delta)


@dataclass(frozen=True, eq=False)
class PhaseSolution:
    theta_re: np.ndarray
    theta_im: np.ndarray
    lam: float
    y_r_star: float
    y_i_star: float
    gain: float | None = None
    status: int = kernels.STATUS_ROOT

    @property
    def theta(self) -> np.ndarray:
        return self.theta_re + 1j * self.theta_im


@dataclass(frozen=True)
class EffectiveChannel:
    beta: float
    lambda_bar: float


def mean_lambda(delta: float) -> float:
    return delta * delta / (1.0 + delta * delta)


def effective_channel(N: int, delta: float) -> EffectiveChannel:
    return EffectiveChannel(beta=effective_gain(N), lambda_bar=mean_lambda(delta))


def _split_symbol(x: complex):
    xr, xi = float(np.real(x)), float(np.imag(x))
    if xr == 0.0 or xi == 0.0:
        raise ValueError(f"symbol {x!r} has a zero component; sign and ratio are undefined")
    return xr, xi


def compute_abcd(h_m, h_n, x: complex) -> AbcdVectors:
    xr, xi = _split_symbol(x)
    h_m = np.asarray(h_m, dtype=complex)
    h_n = np.asarray(h_n, dtype=complex)
    sr = 1.0 if xr > 0 else -1.0
    si = 1.0 if xi > 0 else -1.0
    delta = abs(xr / xi)
    return AbcdVectors(
        A=sr * h_m.real,
        B=delta * si * h_n.imag,
        C=-sr * h_m.imag,
        D=delta * si * h_n.real,
        delta=delta,
        sign_r=sr,
        sign_i=si,
    )


def lambda_equation(abcd: AbcdVectors, lam: float) -> float:
    """The function whose root is the optimal mixing weight."""
    A, B, C, D = abcd.A, abcd.B, abcd.C, abcd.D
    p = lam * A + (1 - lam) * B
    q = lam * C + (1 - lam) * D
    r = np.hypot(p, q)
    ok = r > 0
    return float(np.sum(((A - B) * p + (C - D) * q)[ok] / r[ok]))


def solve_lambda(abcd: AbcdVectors, *, return_status: bool = False):
    lam, status = kernels.solve_lambda(
        abcd.A[None, :], abcd.B[None, :], abcd.C[None, :], abcd.D[None, :],
        np.array([abcd.lambda_bar]))
    lam, status = float(lam[0]), int(status[0])
    if status == kernels.STATUS_ENDPOINT:
        warnings.warn(f"lambda equation not bracketed in (0, 1); using endpoint {lam:.3g}",
                      LambdaBracketWarning, stacklevel=2)
    return (lam, status) if return_status else lam


def optimal_phases(abcd: AbcdVectors, lam: float, status: int = kernels.STATUS_ROOT) -> PhaseSolution:
    A, B, C, D = abcd.A, abcd.B, abcd.C, abcd.D
    p = lam * A + (1 - lam) * B
    q = lam * C + (1 - lam) * D
    r = np.sqrt(p * p + q * q)
    zero = r == 0
    rs = np.where(zero, 1.0, r)
    tr = np.where(zero, 1.0, p / rs)
    ti = np.where(zero, 0.0, q / rs)
    y_r = float(np.sum(A * tr + C * ti))
    y_i = float(np.sum(B * tr + D * ti)) / abcd.delta
    return PhaseSolution(theta_re=tr, theta_im=ti, lam=float(lam), y_r_star=y_r, y_i_star=y_i, status=status)


def pre_equalizer(h_m, phase: PhaseSolution, delta: float) -> float:
    """One-tap gain ``E{Y_R*} / Y_R*`` using the large-N mean as numerator."""
    assert phase.y_r_star > 0, "Y_R* must be positive after optimization"
    N = np.asarray(h_m).shape[-1]
    return math.sqrt(mean_lambda(delta)) * effective_gain(N) / phase.y_r_star


def solve_phases(H, m: int, n: int, x: complex) -> PhaseSolution:
    """Full transmitter solve for one symbol: lambda, phases and gain."""
    H = np.asarray(H, dtype=complex)
    abcd = compute_abcd(H[m], H[n], x)
    lam, status = solve_lambda(abcd, return_status=True)
    sol = optimal_phases(abcd, lam, status)
    return replace(sol, gain=pre_equalizer(H[m], sol, abcd.delta))


def transmit(H, m: int, n: int, x: complex) -> np.ndarray:
    """Noiseless receive vector ``H @ theta * G * |x|`` (length Nr)."""
    H = np.asarray(H, dtype=complex)
    xr, xi = _split_symbol(x)
    y, _, _ = kernels.transmit_block(
        H[None], np.array([m]), np.array([n]), np.array([xr]), np.array([xi]), effective_gain(H.shape[1]))
    return y[0]


# --- Monte Carlo checks of the large-N behaviour ------------------------------------


def _channel_pairs(N: int, trials: int, seed: int):
    """Independent row pairs (h_m, h_n) with m != n, one per realization."""
    h = np.empty((trials, 2, N), dtype=complex)
    for t in range(trials):
        h[t] = standard_complex_normal(RngStream(seed, t, "verify").generator(), (2, N))
    return h[:, 0], h[:, 1]


def monte_carlo_solutions(N: int, delta: float, trials: int, seed: int = 0) -> dict:
    """Solve ``trials`` independent instances with target x = delta + 1j.

    Returns arrays of lambda, Y_R*, Y_I*, G and solver status.
    """
    hm, hn = _channel_pairs(N, trials, seed)
    A, B, C, D = hm.real, delta * hn.imag, -hm.imag, delta * hn.real
    lam, status = kernels.solve_lambda(A, B, C, D, np.full(trials, mean_lambda(delta)))
    lm = lam[:, None]
    p = lm * A + (1 - lm) * B
    q = lm * C + (1 - lm) * D
    r = np.hypot(p, q)
    tr, ti = p / r, q / r
    y_r = np.sum(A * tr + C * ti, axis=1)
    y_i = np.sum(B * tr + D * ti, axis=1) / delta
    gain = math.sqrt(mean_lambda(delta)) * effective_gain(N) / y_r
    return {"lam": lam, "y_r": y_r, "y_i": y_i, "gain": gain, "status": status}


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    target: float
    estimate: float
    tol: float

    @property
    def rel_err(self) -> float:
        return abs(self.estimate - self.target) / abs(self.target)

    @property
    def passed(self) -> bool:
        return self.rel_err <= self.tol

    def csv(self) -> str:
        return f"{self.quantity},{self.target:.6g},{self.estimate:.6g},{self.rel_err:.4g},{int(self.passed)}"


def large_n_report(Ns=(64, 256), deltas=(1 / 3, 1.0, 3.0), trials: int = 1000, seed: int = 0,
                   gain_N: int = 256, tol: float = 0.02) -> list[ReportRow]:
    """Mean objective against sqrt(lambda_bar)*beta, and E{G}, E{G^2} against 1."""
    rows = []
    for N in Ns:
        for delta in deltas:
            sol = monte_carlo_solutions(N, delta, trials, seed)
            target = math.sqrt(mean_lambda(delta)) * effective_gain(N)
            rows.append(ReportRow(f"E[Y_R*] N={N} delta={delta:.4g}", target, float(sol["y_r"].mean()), tol))
    sol = monte_carlo_solutions(gain_N, 1.0, trials, seed)
    rows.append(ReportRow(f"E[G] N={gain_N}", 1.0, float(sol["gain"].mean()), tol))
    rows.append(ReportRow(f"E[G^2] N={gain_N}", 1.0, float(np.mean(sol["gain"] ** 2)), tol))
    return rows


def element_mean_targets(delta: float) -> tuple[float, float]:
    """Closed-form per-element means of the two summand types of Y_R*."""
    lb = mean_lambda(delta)
    w1 = math.sqrt(math.pi) / 4 * (2 * lb ** 0.5 - lb ** 1.5)
    w3 = -math.sqrt(math.pi) / 4 * lb ** 0.5 * (1 - lb)
    return w1, w3


def verify_element_means(delta: float = 1.0, N: int = 256, trials: int = 1000,
                                 seed: int = 0, tol: float = 0.03) -> list[ReportRow]:
    """Monte Carlo means of W1 = lb*A^2/sqrt(Z) and W3 = (1-lb)*A*B/sqrt(Z) at lambda = lambda_bar."""
    if trials < 1000:
        raise ValueError("trials must be >= 1000")
    lb = mean_lambda(delta)
    hm, hn = _channel_pairs(N, trials, seed)
    A, B, C, D = hm.real, delta * hn.imag, -hm.imag, delta * hn.real
    root_z = np.hypot(lb * A + (1 - lb) * B, lb * C + (1 - lb) * D)
    w1 = lb * A * A / root_z
    w3 = (1 - lb) * A * B / root_z
    t1, t3 = element_mean_targets(delta)
    sol = monte_carlo_solutions(N, delta, trials, seed)
    return [
        ReportRow(f"E[W1] delta={delta:.4g}", t1, float(w1.mean()), tol),
        ReportRow(f"E[W3] delta={delta:.4g}", t3, float(w3.mean()), tol),
        ReportRow(f"2N(E[W1]+E[W3]) vs mean Y_R* N={N}", 2 * N * (t1 + t3), float(sol["y_r"].mean()), 0.02),
    ]
