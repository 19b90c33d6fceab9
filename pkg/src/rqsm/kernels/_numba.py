"""numba kernels.  Keep in step with ``_numpy.py``; both are tested against each other."""

import math

import numpy as np
from numba import njit

from ._common import LAM_HI, LAM_LO, LAM_TOL, MAX_ITER, STATUS_DEGENERATE, STATUS_ENDPOINT, STATUS_ROOT


@njit(cache=True)
def _f_slope(A, B, C, D, lam):
    f = 0.0
    df = 0.0
    for i in range(A.shape[0]):
        p = lam * A[i] + (1.0 - lam) * B[i]
        q = lam * C[i] + (1.0 - lam) * D[i]
        r2 = p * p + q * q
        if r2 == 0.0:
            continue
        r = math.sqrt(r2)
        u = A[i] - B[i]
        v = C[i] - D[i]
        f += (u * p + v * q) / r
        w = u * q - v * p
        df += w * w / (r2 * r)
    return f, df


@njit(cache=True)
def solve_lambda_row(A, B, C, D, lam0):
    degenerate = True
    for i in range(A.shape[0]):
        if A[i] != B[i] or C[i] != D[i]:
            degenerate = False
            break
    if degenerate:
        return lam0, STATUS_DEGENERATE

    lo = LAM_LO
    hi = LAM_HI
    f_lo, _ = _f_slope(A, B, C, D, lo)
    if f_lo >= 0.0:
        return lo, STATUS_ROOT if f_lo == 0.0 else STATUS_ENDPOINT
    f_hi, _ = _f_slope(A, B, C, D, hi)
    if f_hi <= 0.0:
        return hi, STATUS_ROOT if f_hi == 0.0 else STATUS_ENDPOINT

    # f is the derivative of a convex function, so it is non-decreasing and
    # Newton steps can be safeguarded by the sign bracket.
    lam = min(max(lam0, lo), hi)
    for _ in range(MAX_ITER):
        f, df = _f_slope(A, B, C, D, lam)
        if f > 0.0:
            hi = lam
        elif f < 0.0:
            lo = lam
        else:
            return lam, STATUS_ROOT
        nxt = lam - f / df if df > 0.0 else 0.5 * (lo + hi)
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - lam) <= LAM_TOL or hi - lo <= LAM_TOL:
            return nxt, STATUS_ROOT
        lam = nxt
    return lam, STATUS_ROOT


@njit(cache=True)
def solve_lambda(A, B, C, D, lam0):
    T = A.shape[0]
    lam = np.empty(T)
    status = np.empty(T, dtype=np.int64)
    for t in range(T):
        lam[t], status[t] = solve_lambda_row(A[t], B[t], C[t], D[t], lam0[t])
    return lam, status


@njit(cache=True)
def phase_solution(hm, hn, sr, si, delta):
    """Optimal unit-modulus phases for target signs (sr, si) and ratio delta.

    Returns (theta, lambda, Y_R*, status).  Shared by the transmitter and the
    ML hypothesis loop so both see bit-identical phases.
    """
    N = hm.shape[0]
    A = np.empty(N)
    B = np.empty(N)
    C = np.empty(N)
    D = np.empty(N)
    for i in range(N):
        A[i] = sr * hm[i].real
        B[i] = delta * si * hn[i].imag
        C[i] = -sr * hm[i].imag
        D[i] = delta * si * hn[i].real
    lam_bar = delta * delta / (1.0 + delta * delta)
    lam, status = solve_lambda_row(A, B, C, D, lam_bar)
    theta = np.empty(N, dtype=np.complex128)
    yr = 0.0
    for i in range(N):
        p = lam * A[i] + (1.0 - lam) * B[i]
        q = lam * C[i] + (1.0 - lam) * D[i]
        r = math.sqrt(p * p + q * q)
        if r == 0.0:
            tr, ti = 1.0, 0.0
        else:
            tr, ti = p / r, q / r
        theta[i] = complex(tr, ti)
        yr += A[i] * tr + C[i] * ti
    return theta, lam, yr, status


@njit(cache=True)
def transmit_block(H, m, n, xr, xi, beta):
    T, Nr, N = H.shape
    y = np.empty((T, Nr), dtype=np.complex128)
    gain = np.empty(T)
    status = np.empty(T, dtype=np.int64)
    for t in range(T):
        sr = 1.0 if xr[t] > 0 else -1.0
        si = 1.0 if xi[t] > 0 else -1.0
        delta = abs(xr[t] / xi[t])
        theta, lam, yr, st = phase_solution(H[t, m[t]], H[t, n[t]], sr, si, delta)
        g = delta / math.sqrt(1.0 + delta * delta) * beta / yr
        s = math.sqrt(xr[t] * xr[t] + xi[t] * xi[t])
        for l in range(Nr):
            acc = 0j
            for i in range(N):
                acc += H[t, l, i] * theta[i]
            y[t, l] = acc * g * s
        gain[t] = g
        status[t] = st
    return y, gain, status


@njit(cache=True)
def gd_block(y, beta, levels_r, levels_i):
    T, Nr = y.shape
    mh = np.empty(T, dtype=np.int64)
    nh = np.empty(T, dtype=np.int64)
    ir = np.empty(T, dtype=np.int64)
    ii = np.empty(T, dtype=np.int64)
    for t in range(T):
        bm = 0
        bn = 0
        em = y[t, 0].real ** 2
        en = y[t, 0].imag ** 2
        for l in range(1, Nr):
            er = y[t, l].real ** 2
            ei = y[t, l].imag ** 2
            if er > em:
                em = er
                bm = l
            if ei > en:
                en = ei
                bn = l
        mh[t] = bm
        nh[t] = bn
        ir[t] = _nearest(y[t, bm].real, beta, levels_r)
        ii[t] = _nearest(y[t, bn].imag, beta, levels_i)
    return mh, nh, ir, ii


@njit(cache=True)
def _nearest(v, beta, levels):
    best = 0
    bd = (v - beta * levels[0]) ** 2
    for k in range(1, levels.shape[0]):
        d = (v - beta * levels[k]) ** 2
        if d < bd:
            bd = d
            best = k
    return best


@njit(cache=True)
def ml_block(y, H, beta, pos, class_id, class_delta):
    T, Nr, N = H.shape
    K2 = pos.shape[0]
    K = 2 * K2
    mh = np.empty(T, dtype=np.int64)
    nh = np.empty(T, dtype=np.int64)
    ir = np.empty(T, dtype=np.int64)
    ii = np.empty(T, dtype=np.int64)
    v = np.empty(Nr, dtype=np.complex128)
    for t in range(T):
        best = np.inf
        best_idx = np.iinfo(np.int64).max
        for m in range(Nr):
            for n in range(Nr):
                for c in range(class_delta.shape[0]):
                    delta = class_delta[c]
                    for sp in (1.0, -1.0):
                        theta, lam, yr, st = phase_solution(H[t, m], H[t, n], 1.0, sp, delta)
                        g = delta / math.sqrt(1.0 + delta * delta) * beta / yr
                        for l in range(Nr):
                            acc = 0j
                            for i in range(N):
                                acc += H[t, l, i] * theta[i]
                            v[l] = acc * g
                        for pr in range(K2):
                            for pi in range(K2):
                                if class_id[pr, pi] != c:
                                    continue
                                s = math.sqrt(pos[pr] * pos[pr] + pos[pi] * pos[pi])
                                for sg in (1.0, -1.0):
                                    metric = 0.0
                                    for l in range(Nr):
                                        e = y[t, l] - sg * s * v[l]
                                        metric += e.real * e.real + e.imag * e.imag
                                    kr = K2 + pr if sg > 0 else K2 - 1 - pr
                                    ki = K2 + pi if sg * sp > 0 else K2 - 1 - pi
                                    idx = ((m * Nr + n) * K + kr) * K + ki
                                    if metric < best or (metric == best and idx < best_idx):
                                        best = metric
                                        best_idx = idx
        ii[t] = best_idx % K
        rest = best_idx // K
        ir[t] = rest % K
        rest //= K
        nh[t] = rest % Nr
        mh[t] = rest // Nr
    return mh, nh, ir, ii
