"""Vectorized numpy kernels, the fallback when numba is off or missing.

Same algorithms and tie rules as ``_numba.py``, batched across trials.
"""

import numpy as np

from ._common import LAM_HI, LAM_LO, LAM_TOL, MAX_ITER, STATUS_DEGENERATE, STATUS_ENDPOINT, STATUS_ROOT


def _f_slope(A, B, C, D, lam):
    lam = lam[:, None]
    p = lam * A + (1.0 - lam) * B
    q = lam * C + (1.0 - lam) * D
    r2 = p * p + q * q
    ok = r2 != 0.0
    r2s = np.where(ok, r2, 1.0)
    r = np.sqrt(r2s)
    u = A - B
    v = C - D
    w = u * q - v * p
    f = np.where(ok, (u * p + v * q) / r, 0.0).sum(axis=1)
    df = np.where(ok, w * w / (r2s * r), 0.0).sum(axis=1)
    return f, df


def solve_lambda(A, B, C, D, lam0):
    A, B, C, D = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (A, B, C, D))
    T = A.shape[0]
    lam0 = np.broadcast_to(np.asarray(lam0, dtype=float), (T,))
    lam = np.empty(T)
    status = np.full(T, STATUS_ROOT, dtype=np.int64)

    degenerate = np.all((A == B) & (C == D), axis=1)
    lam[degenerate] = lam0[degenerate]
    status[degenerate] = STATUS_DEGENERATE

    lo = np.full(T, LAM_LO)
    hi = np.full(T, LAM_HI)
    f_lo, _ = _f_slope(A, B, C, D, lo)
    f_hi, _ = _f_slope(A, B, C, D, hi)
    at_lo = ~degenerate & (f_lo >= 0.0)
    at_hi = ~degenerate & ~at_lo & (f_hi <= 0.0)
    lam[at_lo] = LAM_LO
    lam[at_hi] = LAM_HI
    status[at_lo & (f_lo != 0.0)] = STATUS_ENDPOINT
    status[at_hi & (f_hi != 0.0)] = STATUS_ENDPOINT

    active = ~(degenerate | at_lo | at_hi)
    idx = np.flatnonzero(active)
    cur = np.clip(lam0[idx], LAM_LO, LAM_HI)
    lo, hi = lo[idx], hi[idx]
    a, b, c, d = A[idx], B[idx], C[idx], D[idx]
    for _ in range(MAX_ITER):
        if idx.size == 0:
            break
        f, df = _f_slope(a, b, c, d, cur)
        hi = np.where(f > 0.0, cur, hi)
        lo = np.where(f < 0.0, cur, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = np.where(df > 0.0, cur - f / df, 0.5 * (lo + hi))
        nxt = np.where((nxt > lo) & (nxt < hi), nxt, 0.5 * (lo + hi))
        exact = f == 0.0
        nxt = np.where(exact, cur, nxt)
        done = exact | (np.abs(nxt - cur) <= LAM_TOL) | (hi - lo <= LAM_TOL)
        lam[idx[done]] = nxt[done]
        keep = ~done
        idx, cur, lo, hi = idx[keep], nxt[keep], lo[keep], hi[keep]
        a, b, c, d = a[keep], b[keep], c[keep], d[keep]
    lam[idx] = cur
    return lam, status


def phase_solutions(hm, hn, sr, si, delta):
    """Batched twin of ``_numba.phase_solution``: rows of hm/hn are trials."""
    sr = np.asarray(sr, dtype=float)[:, None]
    si = np.asarray(si, dtype=float)[:, None]
    delta = np.asarray(delta, dtype=float)
    dl = delta[:, None]
    A = sr * hm.real
    B = dl * si * hn.imag
    C = -sr * hm.imag
    D = dl * si * hn.real
    lam, status = solve_lambda(A, B, C, D, delta * delta / (1.0 + delta * delta))
    lm = lam[:, None]
    p = lm * A + (1.0 - lm) * B
    q = lm * C + (1.0 - lm) * D
    r = np.sqrt(p * p + q * q)
    zero = r == 0.0
    rs = np.where(zero, 1.0, r)
    tr = np.where(zero, 1.0, p / rs)
    ti = np.where(zero, 0.0, q / rs)
    yr = (A * tr + C * ti).sum(axis=1)
    return tr + 1j * ti, lam, yr, status


def transmit_block(H, m, n, xr, xi, beta):
    T = H.shape[0]
    rows = np.arange(T)
    xr = np.asarray(xr, dtype=float)
    xi = np.asarray(xi, dtype=float)
    sr = np.where(xr > 0, 1.0, -1.0)
    si = np.where(xi > 0, 1.0, -1.0)
    delta = np.abs(xr / xi)
    theta, lam, yr, status = phase_solutions(H[rows, m], H[rows, n], sr, si, delta)
    g = delta / np.sqrt(1.0 + delta * delta) * beta / yr
    s = np.sqrt(xr * xr + xi * xi)
    y = np.einsum("tln,tn->tl", H, theta) * (g * s)[:, None]
    return y, g, status


def _nearest(v, beta, levels):
    return np.argmin((v[:, None] - beta * levels[None, :]) ** 2, axis=1)


def gd_block(y, beta, levels_r, levels_i):
    rows = np.arange(y.shape[0])
    mh = np.argmax(y.real ** 2, axis=1)
    nh = np.argmax(y.imag ** 2, axis=1)
    ir = _nearest(y[rows, mh].real, beta, np.asarray(levels_r))
    ii = _nearest(y[rows, nh].imag, beta, np.asarray(levels_i))
    return mh, nh, ir, ii


def ml_block(y, H, beta, pos, class_id, class_delta):
    T, Nr, N = H.shape
    K2 = pos.shape[0]
    K = 2 * K2
    big = np.iinfo(np.int64).max
    best = np.full(T, np.inf)
    best_idx = np.full(T, big, dtype=np.int64)
    for m in range(Nr):
        for n in range(Nr):
            for c, delta in enumerate(class_delta):
                for sp in (1.0, -1.0):
                    theta, lam, yr, _ = phase_solutions(
                        H[:, m], H[:, n], np.ones(T), np.full(T, sp), np.full(T, delta))
                    g = delta / np.sqrt(1.0 + delta * delta) * beta / yr
                    v = np.einsum("tln,tn->tl", H, theta) * g[:, None]
                    for pr in range(K2):
                        for pi in range(K2):
                            if class_id[pr, pi] != c:
                                continue
                            s = np.sqrt(pos[pr] ** 2 + pos[pi] ** 2)
                            for sg in (1.0, -1.0):
                                e = y - sg * s * v
                                metric = (e.real ** 2 + e.imag ** 2).sum(axis=1)
                                kr = K2 + pr if sg > 0 else K2 - 1 - pr
                                ki = K2 + pi if sg * sp > 0 else K2 - 1 - pi
                                idx = ((m * Nr + n) * K + kr) * K + ki
                                take = (metric < best) | ((metric == best) & (idx < best_idx))
                                best = np.where(take, metric, best)
                                best_idx = np.where(take, idx, best_idx)
    ii = best_idx % K
    rest = best_idx // K
    ir = rest % K
    rest //= K
    return rest // Nr, rest % Nr, ir, ii
