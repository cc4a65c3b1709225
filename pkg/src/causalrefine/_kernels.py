"""Fused per-epoch kernels for the descent loop.

Each batch row is one epoch's latent point; rows never interact, and
all accumulation within a row is sequential in node order, so results
are identical however epochs are batched or threaded. The public
operations in refine.py keep a plain numpy implementation of the same
formulas; test_refine_solver cross-checks the two paths.

Node roles: 0 free (confidence from its logit), 1 key (pinned to 1),
2 missing (pinned to 0).
"""

import math

import numpy as np
from numba import njit, prange

ROLE_FREE, ROLE_KEY, ROLE_MISSING = 0, 1, 2


@njit(cache=True, inline="always")
def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True, inline="always")
def _fill_row(z, eps, role, eps_col, floor, y, alpha):
    for n in range(z.size):
        y[n] = _sigmoid(z[n])
        if role[n] == ROLE_FREE:
            alpha[n] = floor + (1.0 - floor) * _sigmoid(eps[eps_col[n]])
        elif role[n] == ROLE_KEY:
            alpha[n] = 1.0
        else:
            alpha[n] = 0.0


@njit(cache=True, parallel=True)
def objective_rows(z, eps, s, role, eps_col, floor, mu, c, cons, nbr, starts, out):
    B, N = z.shape
    for b in prange(B):
        y = np.empty(N)
        alpha = np.empty(N)
        _fill_row(z[b], eps[b], role, eps_col, floor, y, alpha)
        den_a = 0.0
        num_a = 0.0
        for n in range(N):
            r = s[b, n] - y[n]
            den_a += alpha[n]
            num_a += alpha[n] * r * r
        pen = 0.0
        for ci in range(cons.size):
            lo, hi = starts[ci], starts[ci + 1]
            m = y[nbr[lo]]
            for e in range(lo + 1, hi):
                if y[nbr[e]] > m:
                    m = y[nbr[e]]
            den = 0.0
            num = 0.0
            for e in range(lo, hi):
                v = y[nbr[e]]
                w = math.exp(c * (v - m))
                den += w
                num += v * w
            gap = y[cons[ci]] - num / den
            if gap > 0.0:
                pen += gap * gap * gap
        out[b] = num_a / den_a + mu * pen


@njit(cache=True, parallel=True)
def gradient_rows(z, eps, s, role, eps_col, floor, mu, c, cons, nbr, starts,
                  gz, geps, gnorm):
    B, N = z.shape
    for b in prange(B):
        y = np.empty(N)
        alpha = np.empty(N)
        gy = np.empty(N)
        _fill_row(z[b], eps[b], role, eps_col, floor, y, alpha)
        den_a = 0.0
        num_a = 0.0
        for n in range(N):
            r = y[n] - s[b, n]
            den_a += alpha[n]
            num_a += alpha[n] * r * r
        for n in range(N):
            gy[n] = 2.0 * alpha[n] * (y[n] - s[b, n]) / den_a
        for ci in range(cons.size):
            lo, hi = starts[ci], starts[ci + 1]
            m = y[nbr[lo]]
            for e in range(lo + 1, hi):
                if y[nbr[e]] > m:
                    m = y[nbr[e]]
            den = 0.0
            num = 0.0
            for e in range(lo, hi):
                v = y[nbr[e]]
                w = math.exp(c * (v - m))
                den += w
                num += v * w
            sm = num / den
            gap = y[cons[ci]] - sm
            if gap > 0.0:
                coeff = 3.0 * mu * gap * gap
                gy[cons[ci]] += coeff
                for e in range(lo, hi):
                    v = y[nbr[e]]
                    w = math.exp(c * (v - m)) / den
                    gy[nbr[e]] -= coeff * w * (1.0 + c * v - c * sm)
        sq = 0.0
        for n in range(N):
            g = gy[n] * y[n] * (1.0 - y[n])
            gz[b, n] = g
            sq += g * g
        for n in range(N):
            if role[n] == ROLE_FREE:
                r = y[n] - s[b, n]
                dalpha = (r * r * den_a - num_a) / (den_a * den_a)
                sig = (alpha[n] - floor) / (1.0 - floor)
                g = dalpha * (1.0 - floor) * sig * (1.0 - sig)
                geps[b, eps_col[n]] = g
                sq += g * g
        gnorm[b] = math.sqrt(sq)


@njit(cache=True, parallel=True)
def map_rows(z, eps, role, eps_col, floor, y, alpha):
    for b in prange(z.shape[0]):
        _fill_row(z[b], eps[b], role, eps_col, floor, y[b], alpha[b])
