"""Pure-Python (numpy) twins of the compiled grid kernels.

Same recurrences and rescaling rules as ``_kernels.pyx``; the loops over
Fock indices stay in Python while phase-space points are vectorized in
chunks.
"""

import math

import numpy as np

BIG = 1e150
BIG2 = 1e300
LOG_BIG = 345.38776394910684
_CHUNK = 65536


def _chunks(P):
    for start in range(0, P, _CHUNK):
        yield slice(start, min(P, start + _CHUNK))


def quasi_grid(rho, beta, sigma):
    rho = np.ascontiguousarray(rho, dtype=complex)
    beta = np.ascontiguousarray(beta, dtype=complex)
    N = rho.shape[0]
    q = -(1.0 - sigma) / sigma
    lgam = np.array([math.lgamma(k + 1.0) for k in range(N + 1)])
    live = [bool(np.any(np.diagonal(rho, -k))) for k in range(N)]
    out = np.empty(beta.size)
    for sl in _chunks(beta.size):
        b = beta[sl]
        v = np.abs(b) ** 2
        y = v / sigma**2
        z = y / (-q) if q != 0.0 else np.zeros_like(y)
        base = -v / sigma
        with np.errstate(divide="ignore"):
            lu = np.where(v > 0, 0.5 * np.log(np.where(v > 0, y, 1.0)), -np.inf)
        ph = np.arctan2(-b.imag, b.real)
        tot = np.zeros(b.size)
        for d in range(N):
            if not live[d]:
                continue
            M = N - d
            diag = np.diagonal(rho, -d)
            sc = base + d * lu - 0.5 * lgam[d] if d > 0 else base.copy()
            s0 = np.ones(b.size)
            acc = diag[0] * s0.astype(complex)
            if M > 1:
                s1 = q * (1.0 + d - z) / math.sqrt(d + 1) if q != 0.0 else y / math.sqrt(d + 1)
                acc = acc + diag[1] * s1
            for m in range(1, M - 1):
                w = 1.0 / math.sqrt((m + 1) * (m + 1 + d))
                if q != 0.0:
                    s2 = (q * w * (2 * m + 1 + d) - q * w * z) * s1 - q * q * math.sqrt(m * (m + d)) * w * s0
                else:
                    s2 = y * w * s1
                s0, s1 = s1, s2
                acc = acc + diag[m + 1] * s2
                big = np.abs(s2) > BIG
                if big.any():
                    s0[big] /= BIG
                    s1[big] /= BIG
                    acc[big] /= BIG
                    sc[big] += LOG_BIG
            with np.errstate(under="ignore", over="ignore", invalid="ignore"):
                val = np.where(sc > -745.0, (acc * np.exp(1j * d * ph)).real * np.exp(sc), 0.0)
            tot += val if d == 0 else 2.0 * val
        out[sl] = tot / (np.pi * sigma)
    return out


def quasi_diag_grid(pops, beta, sigma):
    pops = np.asarray(pops, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    N = pops.size
    q = -(1.0 - sigma) / sigma
    x = np.abs(beta) ** 2 / sigma**2
    logsc = -np.abs(beta) ** 2 / sigma
    g0 = np.ones_like(x)
    acc = np.full_like(x, pops[0])
    if N > 1:
        g1 = q + x
        acc = acc + pops[1] * g1
        for n in range(1, N - 1):
            g0, g1 = g1, ((q * (2 * n + 1) + x) * g1 - q * q * n * g0) / (n + 1)
            acc = acc + pops[n + 1] * g1
            big = np.abs(g1) > BIG
            if big.any():
                g0[big] /= BIG
                g1[big] /= BIG
                acc[big] /= BIG
                logsc[big] += LOG_BIG
    return acc * np.exp(logsc) / (np.pi * sigma)


def husimi_pure_grid(coeffs, beta):
    coeffs = np.asarray(coeffs, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    bc = np.conj(beta)
    logsc = -0.5 * np.abs(beta) ** 2
    term = np.ones_like(bc)
    amp = np.full_like(bc, coeffs[0])
    for n in range(1, coeffs.size):
        term = term * bc / np.sqrt(n)
        amp = amp + coeffs[n] * term
        big = np.abs(term) ** 2 > BIG2
        if big.any():
            term[big] /= BIG
            amp[big] /= BIG
            logsc[big] += LOG_BIG
    return np.abs(amp) ** 2 * np.exp(2.0 * logsc) / np.pi


def _pairwise(x, lo, hi):
    n = hi - lo
    if n <= 8:
        s = 0.0
        for i in range(lo, hi):
            s = s + x[i]
        return s
    half = n // 2
    return _pairwise(x, lo, lo + half) + _pairwise(x, lo + half, hi)


def pairwise_sum(x):
    x = np.ascontiguousarray(x, dtype=float).tolist()
    if not x:
        return 0.0
    return _pairwise(x, 0, len(x))
