# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Behaviour must match ``_fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot, copysign, cos, sin, cosh, sinh, NAN

cnp.import_array()

cdef double EPS = 2.220446049250313e-16

# stage layout shared with _fallback.RATIO_FIELDS
cdef enum:
    F_ALPHA_P = 0
    F_ALPHA_M = 1
    F_BETA_P = 2
    F_BETA_M = 3
    F_GAMMA_P = 4
    F_GAMMA_M = 5
    F_RHO = 6
    F_SIGMA = 7
    N_FIELDS = 8


def tql2(diag, offdiag, bint vectors=True, int max_iter=80):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    Returns ``(w, Z, ok)``; ``Z`` columns are eigenvectors (unsorted),
    ``ok`` is False when an eigenvalue exhausted ``max_iter``.
    """
    cdef Py_ssize_t n = len(diag)
    e_arr = np.zeros(n, dtype=np.float64)
    if n > 1:
        e_arr[:n - 1] = np.asarray(offdiag, dtype=np.float64)[:n - 1]
    cdef double[::1] d = np.array(diag, dtype=np.float64)
    cdef double[::1] e = e_arr
    cdef Py_ssize_t i, k, l, m
    zt_arr = np.eye(n) if vectors else np.empty((0, 0))
    cdef double[:, ::1] zt = zt_arr
    cdef double f, g, r, s, c, p, b, dd, zf
    cdef int it
    cdef bint ok = True
    with nogil:
        for l in range(n):
            it = 0
            while True:
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) <= EPS * dd:
                        break
                    m += 1
                if m == l:
                    break
                if it == max_iter:
                    ok = False
                    break
                it += 1
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                g = d[m] - d[l] + e[l] / (g + copysign(r, g))
                s = 1.0
                c = 1.0
                p = 0.0
                i = m - 1
                while i >= l:
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b
                    if vectors:
                        for k in range(n):
                            zf = zt[i + 1, k]
                            zt[i + 1, k] = s * zt[i, k] + c * zf
                            zt[i, k] = c * zt[i, k] - s * zf
                    i -= 1
                if r == 0.0 and i >= l:
                    continue
                d[l] -= p
                e[l] = g
                e[m] = 0.0
            if not ok:
                break
    return np.asarray(d), (zt_arr.T if vectors else None), ok


def ratio_stages(double[::1] mu2, complex[::1] a1p, complex[::1] a1m,
                 complex[::1] b1p, complex[::1] b1m, complex[::1] g0p,
                 complex[::1] g0m, complex[::1] rho0, complex[::1] sig0,
                 Py_ssize_t n):
    """Run the ratio recursions to stage ``n`` for every energy.

    Returns ``(out, ok)`` with ``out[j, 0]`` the stage ``n-1`` fields and
    ``out[j, 1]`` the stage ``n`` fields, in RATIO_FIELDS order.
    """
    cdef Py_ssize_t ne = mu2.shape[0]
    out_arr = np.full((ne, 2, N_FIELDS), complex(NAN, NAN), dtype=np.complex128)
    ok_arr = np.ones(ne, dtype=np.uint8)
    cdef complex[:, :, ::1] out = out_arr
    cdef unsigned char[::1] ok = ok_arr
    cdef Py_ssize_t j, q, st
    cdef double z, c1, c2, d1, d2
    cdef complex ap, am, bp, bm, gp, gm, rho, sig
    cdef complex cnan = complex(NAN, NAN)
    with nogil:
        for j in range(ne):
            z = mu2[j]
            gp = g0p[j]
            gm = g0m[j]
            rho = rho0[j]
            sig = sig0[j]
            ap = a1p[j]
            am = a1m[j]
            bp = b1p[j]
            bm = b1m[j]
            if n == 1:
                out[j, 0, F_GAMMA_P] = gp
                out[j, 0, F_GAMMA_M] = gm
                out[j, 0, F_RHO] = rho
                out[j, 0, F_SIGMA] = sig
            for q in range(1, n + 1):
                if q > 1:
                    if ap == 0 or am == 0 or bp == 0 or bm == 0:
                        ok[j] = 0
                        break
                    c1 = (2.0 * (q - 1) + 0.5 - z) / sqrt(q * (q - 0.5))
                    c2 = sqrt((q - 1) * (q - 1.5) / (q * (q - 0.5)))
                    d1 = (2.0 * (q - 1) + 1.5 - z) / sqrt(q * (q + 0.5))
                    d2 = sqrt((q - 1) * (q - 0.5) / (q * (q + 0.5)))
                    ap = c1 - c2 / ap
                    am = c1 - c2 / am
                    bp = d1 - d2 / bp
                    bm = d1 - d2 / bm
                if bp == 0 or bm == 0 or ap == 0:
                    ok[j] = 0
                    break
                gp = gp * ap / bp
                gm = gm * am / bm
                rho = rho * am / ap
                sig = sig * bm / bp
                if q >= n - 1:
                    st = q - (n - 1)
                    out[j, st, F_ALPHA_P] = ap
                    out[j, st, F_ALPHA_M] = am
                    out[j, st, F_BETA_P] = bp
                    out[j, st, F_BETA_M] = bm
                    out[j, st, F_GAMMA_P] = gp
                    out[j, st, F_GAMMA_M] = gm
                    out[j, st, F_RHO] = rho
                    out[j, st, F_SIGMA] = sig
            if not ok[j]:
                for st in range(2):
                    for q in range(N_FIELDS):
                        out[j, st, q] = cnan
    return out_arr, ok_arr.astype(bool)


def transfer_matrices(double[::1] energies, double[::1] v, double[::1] widths):
    """Product of piecewise-constant propagators for (psi, psi') per energy.

    Segment ``i`` has constant potential ``v[i]`` and length ``widths[i]``.
    Returns a real array of shape ``(len(energies), 2, 2)``.
    """
    cdef Py_ssize_t ne = energies.shape[0]
    cdef Py_ssize_t ns = v.shape[0]
    out_arr = np.empty((ne, 2, 2), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t j, i
    cdef double E, t, q, h, pc, ps1, ps2, m00, m01, m10, m11, n00, n01, n10, n11
    with nogil:
        for j in range(ne):
            E = energies[j]
            m00 = 1.0
            m01 = 0.0
            m10 = 0.0
            m11 = 1.0
            for i in range(ns):
                h = widths[i]
                t = 2.0 * (E - v[i])
                if t > 0.0:
                    q = sqrt(t)
                    pc = cos(q * h)
                    ps1 = sin(q * h) / q
                    ps2 = -q * sin(q * h)
                elif t < 0.0:
                    q = sqrt(-t)
                    pc = cosh(q * h)
                    ps1 = sinh(q * h) / q
                    ps2 = q * sinh(q * h)
                else:
                    pc = 1.0
                    ps1 = h
                    ps2 = 0.0
                n00 = pc * m00 + ps1 * m10
                n01 = pc * m01 + ps1 * m11
                n10 = ps2 * m00 + pc * m10
                n11 = ps2 * m01 + pc * m11
                m00 = n00
                m01 = n01
                m10 = n10
                m11 = n11
            out[j, 0, 0] = m00
            out[j, 0, 1] = m01
            out[j, 1, 0] = m10
            out[j, 1, 1] = m11
    return out_arr
