"""Pure-Python versions of the compiled kernels.

Same signatures and results as ``_kernels``; loops that the compiled
module runs element by element are vectorized with numpy here wherever the
algorithm allows it.
"""

import math

import numpy as np

EPS = np.finfo(float).eps

RATIO_FIELDS = ("alpha_p", "alpha_m", "beta_p", "beta_m", "gamma_p", "gamma_m", "rho", "sigma")


def tql2(diag, offdiag, vectors=True, max_iter=80):
    n = len(diag)
    d = [float(v) for v in diag]
    e = [float(v) for v in offdiag] + [0.0] * (n - len(offdiag))
    zt = np.eye(n) if vectors else None
    ok = True
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                ok = False
                break
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
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
                    zi = zt[i].copy()
                    zt[i] = c * zi - s * zt[i + 1]
                    zt[i + 1] = s * zi + c * zt[i + 1]
                i -= 1
            if r == 0.0 and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
        if not ok:
            break
    return np.array(d), (zt.T if vectors else None), ok


def ratio_stages(mu2, a1p, a1m, b1p, b1m, g0p, g0m, rho0, sig0, n):
    mu2 = np.asarray(mu2, dtype=float)
    ne = mu2.shape[0]
    out = np.full((ne, 2, len(RATIO_FIELDS)), complex(np.nan, np.nan))
    ok = np.ones(ne, dtype=bool)
    ap, am, bp, bm = (np.array(v, dtype=complex) for v in (a1p, a1m, b1p, b1m))
    gp, gm, rho, sig = (np.array(v, dtype=complex) for v in (g0p, g0m, rho0, sig0))
    if n == 1:
        out[:, 0, 4:] = np.stack([gp, gm, rho, sig], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        for q in range(1, n + 1):
            if q > 1:
                ok &= (ap != 0) & (am != 0) & (bp != 0) & (bm != 0)
                c1 = (2.0 * (q - 1) + 0.5 - mu2) / math.sqrt(q * (q - 0.5))
                c2 = math.sqrt((q - 1) * (q - 1.5) / (q * (q - 0.5)))
                d1 = (2.0 * (q - 1) + 1.5 - mu2) / math.sqrt(q * (q + 0.5))
                d2 = math.sqrt((q - 1) * (q - 0.5) / (q * (q + 0.5)))
                ap = c1 - c2 / ap
                am = c1 - c2 / am
                bp = d1 - d2 / bp
                bm = d1 - d2 / bm
            ok &= (bp != 0) & (bm != 0) & (ap != 0)
            gp = gp * ap / bp
            gm = gm * am / bm
            rho = rho * am / ap
            sig = sig * bm / bp
            if q >= n - 1:
                out[:, q - (n - 1)] = np.stack([ap, am, bp, bm, gp, gm, rho, sig], axis=1)
    out[~ok] = complex(np.nan, np.nan)
    return out, ok


def transfer_matrices(energies, v, widths):
    energies = np.asarray(energies, dtype=float)
    v = np.asarray(v, dtype=float)
    widths = np.asarray(widths, dtype=float)
    ne = energies.shape[0]
    m00 = np.ones(ne)
    m01 = np.zeros(ne)
    m10 = np.zeros(ne)
    m11 = np.ones(ne)
    for vi, h in zip(v, widths):
        t = 2.0 * (energies - vi)
        q = np.sqrt(np.abs(t))
        qh = q * h
        with np.errstate(divide="ignore", invalid="ignore"):
            pc = np.where(t > 0, np.cos(qh), np.cosh(qh))
            sn = np.where(t > 0, np.sin(qh), np.sinh(qh))
            ps1 = np.where(t != 0, sn / q, h)
            ps2 = np.where(t > 0, -q * sn, q * sn)
        m00, m01, m10, m11 = (
            pc * m00 + ps1 * m10,
            pc * m01 + ps1 * m11,
            ps2 * m00 + pc * m10,
            ps2 * m01 + pc * m11,
        )
    out = np.empty((ne, 2, 2))
    out[:, 0, 0] = m00
    out[:, 0, 1] = m01
    out[:, 1, 0] = m10
    out[:, 1, 1] = m11
    return out
