# cython: language_level=3
"""Compiled inner loops.  Signatures mirror ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, fabs, INFINITY

cnp.import_array()


cdef inline double _h(double p) nogil:
    return -p * log(p) if p > 0.0 else 0.0


def ba_solve(const double[::1] px, const double[:, ::1] pyx, const double[:, ::1] enc0,
             double gamma, double tol, long max_iter):
    """Iterate the self-consistent IB update from ``enc0``.

    Returns ``(encoder, iterations, converged)``.
    """
    cdef Py_ssize_t nx = pyx.shape[0], ny = pyx.shape[1], nu = enc0.shape[1]
    cdef Py_ssize_t x, y, u
    cdef long it = 0
    cdef bint converged = False
    cdef double s, m, d, delta, t
    enc_arr = np.array(enc0, dtype=np.float64, copy=True)
    new_arr = np.empty_like(enc_arr)
    cdef double[:, ::1] enc = enc_arr
    cdef double[:, ::1] new = new_arr
    cdef double[::1] pu = np.empty(nu)
    cdef double[::1] logpu = np.empty(nu)
    cdef double[:, ::1] logpyu = np.empty((nu, ny))
    cdef double[::1] score = np.empty(nu)

    with nogil:
        while it < max_iter:
            it += 1
            for u in range(nu):
                s = 0.0
                for x in range(nx):
                    s += px[x] * enc[x, u]
                pu[u] = s
                logpu[u] = log(s) if s > 0.0 else -INFINITY
                for y in range(ny):
                    if s > 0.0:
                        t = 0.0
                        for x in range(nx):
                            t += px[x] * enc[x, u] * pyx[x, y]
                        t = t / s
                        logpyu[u, y] = log(t) if t > 0.0 else -INFINITY
                    else:
                        logpyu[u, y] = -INFINITY
            delta = 0.0
            for x in range(nx):
                m = -INFINITY
                for u in range(nu):
                    if pu[u] > 0.0:
                        d = logpu[u]
                        if gamma > 0.0:
                            for y in range(ny):
                                if pyx[x, y] > 0.0:
                                    d += gamma * pyx[x, y] * logpyu[u, y]
                    else:
                        d = -INFINITY
                    score[u] = d
                    if d > m:
                        m = d
                s = 0.0
                for u in range(nu):
                    if score[u] > -INFINITY:
                        t = exp(score[u] - m)
                    else:
                        t = 0.0
                    new[x, u] = t
                    s += t
                for u in range(nu):
                    new[x, u] = new[x, u] / s
                    d = fabs(new[x, u] - enc[x, u])
                    if d > delta:
                        delta = d
            for x in range(nx):
                for u in range(nu):
                    enc[x, u] = new[x, u]
            if delta < tol:
                converged = True
                break
    return enc_arr, int(it), bool(converged)


def ib_grid_block(const double[::1] px, const double[:, ::1] pxy, const double[:, ::1] cand,
                  long first_lo, long first_hi):
    """(I(U;X), I(U;Y)) for every encoder whose rows are drawn from ``cand``.

    Row 0 ranges over ``cand[first_lo:first_hi]``; the remaining rows range
    over all candidates, last row fastest.
    """
    cdef Py_ssize_t nx = pxy.shape[0], ny = pxy.shape[1]
    cdef Py_ssize_t nc = cand.shape[0], nu = cand.shape[1]
    cdef Py_ssize_t x, y, u, k
    cdef long total = first_hi - first_lo
    for x in range(1, nx):
        total *= nc
    rel_arr = np.empty(total)
    cpx_arr = np.empty(total)
    cdef double[::1] rel = rel_arr
    cdef double[::1] cpx = cpx_arr
    cdef double[::1] hrow = np.empty(nc)
    cdef double[::1] py = np.zeros(ny)
    cdef long[::1] idx = np.zeros(nx, dtype=np.int64)
    cdef double hy = 0.0, hu, hux, huy, s, t
    for k in range(nc):
        s = 0.0
        for u in range(nu):
            s += _h(cand[k, u])
        hrow[k] = s
    for y in range(ny):
        for x in range(nx):
            py[y] += pxy[x, y]
        hy += _h(py[y])

    with nogil:
        idx[0] = first_lo
        for k in range(total):
            hu = 0.0
            huy = 0.0
            for u in range(nu):
                s = 0.0
                for x in range(nx):
                    s += px[x] * cand[idx[x], u]
                hu += _h(s)
                for y in range(ny):
                    t = 0.0
                    for x in range(nx):
                        t += cand[idx[x], u] * pxy[x, y]
                    huy += _h(t)
            hux = 0.0
            for x in range(nx):
                hux += px[x] * hrow[idx[x]]
            s = hu - hux
            cpx[k] = s if s > 0.0 else 0.0
            s = hu + hy - huy
            rel[k] = s if s > 0.0 else 0.0
            # odometer, last row fastest
            x = nx - 1
            while x > 0:
                idx[x] += 1
                if idx[x] < nc:
                    break
                idx[x] = 0
                x -= 1
            if x == 0:
                idx[0] += 1
    return cpx_arr, rel_arr


def dib_pair_block(const double[::1] py, const double[:, :, ::1] c1, const double[:, :, ::1] c2,
                   long lo, long hi):
    """I(Y; U1, U2) for candidate pairs ``(i, j)``, ``i`` in ``[lo, hi)``.

    ``c1[i, y, a]`` is P(U1=a|Y=y) for candidate ``i`` (same for ``c2``).
    """
    cdef Py_ssize_t n2 = c2.shape[0], ny = py.shape[0]
    cdef Py_ssize_t na = c1.shape[2], nb = c2.shape[2]
    cdef Py_ssize_t i, j, y, a, b
    cdef double hy = 0.0, hab, hyab, s, t
    out_arr = np.empty((hi - lo, n2))
    cdef double[:, ::1] out = out_arr
    for y in range(ny):
        hy += _h(py[y])
    with nogil:
        for i in range(lo, hi):
            for j in range(n2):
                hab = 0.0
                hyab = 0.0
                for a in range(na):
                    for b in range(nb):
                        s = 0.0
                        for y in range(ny):
                            t = py[y] * c1[i, y, a] * c2[j, y, b]
                            s += t
                            hyab += _h(t)
                        hab += _h(s)
                s = hy + hab - hyab
                out[i - lo, j] = s if s > 0.0 else 0.0
    return out_arr
