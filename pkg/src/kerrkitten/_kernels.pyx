# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels.

Every kernel evaluates one phase-space point at a time with a private
shared-exponent accumulator, so results do not depend on evaluation order.
The pure-Python twin lives in ``_pykernels`` and implements the same
recurrences.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, log, fabs, lgamma, atan2, cos, sin

cnp.import_array()

cdef double BIG = 1e150
cdef double BIG2 = 1e300
cdef double INV_BIG = 1e-150
cdef double LOG_BIG = 345.38776394910684
cdef double PI = 3.141592653589793


cdef inline double abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


DEF BLK = 16


def quasi_grid(const double complex[:, ::1] rho, const double complex[::1] beta,
               double sigma):
    """Sigma-smoothed quasiprobability of a Hermitian ``rho`` at each ``beta``.

    The sum runs over diagonals ``d = n - m``.  On each diagonal the kernel
    is ``u^d q^m l_m`` with ``u = β*/σ``, ``q = -(1-σ)/σ`` and the
    normalized Laguerre sequence ``l_m = sqrt(m!/(m+d)!) L_m^(d)(z)``,
    ``z = |β|²/(σ²|q|)``, run forward in ``m``.  That direction is stable,
    unlike a two-index recurrence, whose wanted solution becomes recessive
    at large ``d``.  Each point and diagonal carries its own log scale;
    points are processed in blocks of ``BLK`` for instruction-level
    parallelism only, so results do not depend on the blocking.
    """
    cdef Py_ssize_t N = rho.shape[0]
    cdef Py_ssize_t P = beta.shape[0]
    cdef Py_ssize_t p0, m, d, j, nb, M
    cdef double q = -(1.0 - sigma) / sigma
    cdef double c1, c2, c0, w
    cdef double z[BLK]
    cdef double y[BLK]
    cdef double lu[BLK]
    cdef double ph[BLK]
    cdef double base[BLK]
    cdef double s0[BLK]
    cdef double s1[BLK]
    cdef double ar[BLK]
    cdef double ai[BLK]
    cdef double sc[BLK]
    cdef double tot[BLK]
    cdef double s2, br, bi, cr, ci, v
    out = np.empty(P, dtype=np.float64)
    cdef double[::1] res = out
    if N == 0:
        out[:] = 0.0
        return out
    cdef double[:, ::1] Rr = np.ascontiguousarray(np.asarray(rho).real)
    cdef double[:, ::1] Ri = np.ascontiguousarray(np.asarray(rho).imag)
    # diagonals that carry no weight (e.g. odd d for parity states) are skipped
    cdef unsigned char[::1] live = np.ascontiguousarray(
        [1 if np.any(np.diagonal(np.asarray(rho), -k)) else 0 for k in range(N)], dtype=np.uint8)
    cdef double[::1] lgam = np.asarray([lgamma_py(k + 1) for k in range(N + 1)], dtype=np.float64)
    with nogil:
        for p0 in range(0, P, BLK):
            nb = BLK if p0 + BLK <= P else P - p0
            for j in range(BLK):
                if j < nb:
                    br = beta[p0 + j].real
                    bi = beta[p0 + j].imag
                else:
                    br = 0.0
                    bi = 0.0
                v = br * br + bi * bi
                y[j] = v / (sigma * sigma)
                z[j] = y[j] / (-q) if q != 0.0 else 0.0
                base[j] = -v / sigma
                lu[j] = 0.5 * log(y[j]) if v > 0.0 else -1e300
                ph[j] = atan2(-bi, br)
                tot[j] = 0.0
            for d in range(N):
                if not live[d]:
                    continue
                M = N - d
                for j in range(BLK):
                    if d > 0 and lu[j] < -1e299:
                        sc[j] = -1e300
                    else:
                        sc[j] = base[j] + d * lu[j] - 0.5 * lgam[d] if d > 0 else base[j]
                    s0[j] = 1.0
                    ar[j] = Rr[d, 0]
                    ai[j] = Ri[d, 0]
                if M > 1:
                    for j in range(BLK):
                        if q != 0.0:
                            s1[j] = q * (1.0 + d - z[j]) / sqrt(<double> (d + 1))
                        else:
                            s1[j] = y[j] / sqrt(<double> (d + 1))
                        ar[j] += Rr[d + 1, 1] * s1[j]
                        ai[j] += Ri[d + 1, 1] * s1[j]
                for m in range(1, M - 1):
                    w = 1.0 / sqrt(<double> ((m + 1) * (m + 1 + d)))
                    c1 = q * w
                    c0 = (2 * m + 1 + d) * c1
                    c2 = q * q * sqrt(<double> (m * (m + d))) * w
                    cr = Rr[m + 1 + d, m + 1]
                    ci = Ri[m + 1 + d, m + 1]
                    for j in range(BLK):
                        if q != 0.0:
                            s2 = (c0 - c1 * z[j]) * s1[j] - c2 * s0[j]
                        else:
                            s2 = y[j] * w * s1[j]
                        s0[j] = s1[j]
                        s1[j] = s2
                        ar[j] += cr * s2
                        ai[j] += ci * s2
                        if fabs(s2) > BIG:
                            s0[j] *= INV_BIG
                            s1[j] *= INV_BIG
                            ar[j] *= INV_BIG
                            ai[j] *= INV_BIG
                            sc[j] += LOG_BIG
                for j in range(BLK):
                    if sc[j] > -745.0:
                        v = (ar[j] * cos(d * ph[j]) - ai[j] * sin(d * ph[j])) * exp(sc[j])
                        tot[j] += v if d == 0 else 2.0 * v
            for j in range(nb):
                res[p0 + j] = tot[j] / (PI * sigma)
    return out


def lgamma_py(double x):
    return lgamma(x)


def quasi_diag_grid(const double[::1] pops, const double complex[::1] beta,
                    double sigma):
    """Same as :func:`quasi_grid` for a diagonal density matrix, O(N) per point."""
    cdef Py_ssize_t N = pops.shape[0]
    cdef Py_ssize_t P = beta.shape[0]
    cdef Py_ssize_t p, n
    cdef double q = -(1.0 - sigma) / sigma
    cdef double x, g0, g1, g2, acc, logsc
    out = np.empty(P, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for p in range(P):
            x = abs2(beta[p]) / (sigma * sigma)
            logsc = -abs2(beta[p]) / sigma
            g0 = 1.0
            acc = pops[0]
            if N > 1:
                g1 = q + x
                acc = acc + pops[1] * g1
                for n in range(1, N - 1):
                    g2 = ((q * (2 * n + 1) + x) * g1 - q * q * n * g0) / (n + 1)
                    g0 = g1
                    g1 = g2
                    acc = acc + pops[n + 1] * g1
                    if fabs(g1) > BIG:
                        g0 = g0 * INV_BIG
                        g1 = g1 * INV_BIG
                        acc = acc * INV_BIG
                        logsc = logsc + LOG_BIG
            res[p] = acc * exp(logsc) / (PI * sigma)
    return out


def husimi_pure_grid(const double complex[::1] coeffs, const double complex[::1] beta):
    """Husimi function of a pure state from its Fock amplitudes, O(N) per point."""
    cdef Py_ssize_t N = coeffs.shape[0]
    cdef Py_ssize_t P = beta.shape[0]
    cdef Py_ssize_t p, n
    cdef double complex bc, term, amp
    cdef double logsc
    out = np.empty(P, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for p in range(P):
            bc = beta[p].conjugate()
            logsc = -0.5 * abs2(beta[p])
            term = 1.0
            amp = coeffs[0]
            for n in range(1, N):
                term = term * bc / sqrt(<double> n)
                amp = amp + coeffs[n] * term
                if abs2(term) > BIG2:
                    term = term * INV_BIG
                    amp = amp * INV_BIG
                    logsc = logsc + LOG_BIG
            res[p] = abs2(amp) * exp(2.0 * logsc) / PI
    return out


cdef double _pairwise(const double *x, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, half
    cdef double s
    if n <= 8:
        s = 0.0
        for i in range(n):
            s = s + x[i]
        return s
    half = n // 2
    return _pairwise(x, half) + _pairwise(x + half, n - half)


def pairwise_sum(const double[::1] x):
    """Pairwise tree sum with sequential leaves of at most 8 terms."""
    if x.shape[0] == 0:
        return 0.0
    return _pairwise(&x[0], x.shape[0])
