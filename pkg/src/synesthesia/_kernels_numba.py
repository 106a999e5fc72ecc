"""Numba stroke rasterization kernels.

Scalar twin of _kernels_numpy.py; the math must stay in lockstep.  Kernels
are sequential (no prange) so results are bitwise reproducible run to run.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

BACKEND_NAME = "numba"

_DEG_EPS = 1e-10
_TINY = 1e-30


@njit(cache=True)
def _sigmoid(z):
    if z >= 0.0:
        e = math.exp(-z)
        return 1.0 / (1.0 + e)
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _cbrt(x):
    if x < 0.0:
        return -((-x) ** (1.0 / 3.0))
    return x ** (1.0 / 3.0)


@njit(cache=True)
def _d2_at(t, dx, dy, ax, ay, bx, by):
    fx = dx + 2.0 * ax * t + bx * t * t
    fy = dy + 2.0 * ay * t + by * t * t
    return fx * fx + fy * fy


@njit(cache=True)
def _polish(t, dx, dy, ax, ay, bx, by):
    for _ in range(2):
        fx = dx + 2.0 * ax * t + bx * t * t
        fy = dy + 2.0 * ay * t + by * t * t
        dfx = 2.0 * (ax + bx * t)
        dfy = 2.0 * (ay + by * t)
        h = fx * dfx + fy * dfy
        hp = dfx * dfx + dfy * dfy + 2.0 * (fx * bx + fy * by)
        if abs(hp) > _TINY:
            t = t - h / hp
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    return t


@njit(cache=True)
def _nearest(dx, dy, ax, ay, bx, by):
    """Nearest parameter and distance for one pixel. dx, dy = P0 - pixel."""
    k3 = bx * bx + by * by
    k1 = 2.0 * (ax * ax + ay * ay) + (dx * bx + dy * by)
    k0 = dx * ax + dy * ay
    if k3 < _DEG_EPS:
        if abs(k1) > _TINY:
            c1 = -k0 / k1
        else:
            c1 = 0.0
        if c1 < 0.0:
            c1 = 0.0
        elif c1 > 1.0:
            c1 = 1.0
        c2 = c1
        c3 = c1
    else:
        k2 = 3.0 * (ax * bx + ay * by)
        a = k2 / k3
        b = k1 / k3
        c = k0 / k3
        p = b - a * a / 3.0
        q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c
        disc = 0.25 * q * q + p * p * p / 27.0
        if disc >= 0.0:
            sq = math.sqrt(disc)
            s = _cbrt(-0.5 * q + sq) + _cbrt(-0.5 * q - sq)
            c1 = s - a / 3.0
            c2 = c1
            c3 = c1
        else:
            r = math.sqrt(-p / 3.0)
            r3 = r * r * r
            if r3 > _TINY:
                arg = -0.5 * q / r3
            else:
                arg = 0.0
            if arg < -1.0:
                arg = -1.0
            elif arg > 1.0:
                arg = 1.0
            phi = math.acos(arg)
            tp = 2.0 * r
            c1 = tp * math.cos(phi / 3.0) - a / 3.0
            c2 = tp * math.cos((phi - 2.0 * math.pi) / 3.0) - a / 3.0
            c3 = tp * math.cos((phi - 4.0 * math.pi) / 3.0) - a / 3.0
        if c1 < 0.0:
            c1 = 0.0
        elif c1 > 1.0:
            c1 = 1.0
        if c2 < 0.0:
            c2 = 0.0
        elif c2 > 1.0:
            c2 = 1.0
        if c3 < 0.0:
            c3 = 0.0
        elif c3 > 1.0:
            c3 = 1.0
        c1 = _polish(c1, dx, dy, ax, ay, bx, by)
        c2 = _polish(c2, dx, dy, ax, ay, bx, by)
        c3 = _polish(c3, dx, dy, ax, ay, bx, by)

    best_t = 0.0
    best = _d2_at(0.0, dx, dy, ax, ay, bx, by)
    d2 = _d2_at(1.0, dx, dy, ax, ay, bx, by)
    if d2 < best:
        best = d2
        best_t = 1.0
    d2 = _d2_at(c1, dx, dy, ax, ay, bx, by)
    if d2 < best:
        best = d2
        best_t = c1
    d2 = _d2_at(c2, dx, dy, ax, ay, bx, by)
    if d2 < best:
        best = d2
        best_t = c2
    d2 = _d2_at(c3, dx, dy, ax, ay, bx, by)
    if d2 < best:
        best = d2
        best_t = c3
    return best_t, math.sqrt(best)


@njit(cache=True)
def render_forward(p0, p1, p2, thick_px, colors, opac, bg, height, width,
                   sigma_px, want_alpha):
    n = p0.shape[0]
    img = np.empty((height, width, 3), dtype=np.float64)
    for i in range(height):
        for j in range(width):
            img[i, j, 0] = bg[0]
            img[i, j, 1] = bg[1]
            img[i, j, 2] = bg[2]
    m = n if want_alpha else 0
    alphas = np.zeros((m, height, width), dtype=np.float64)
    for k in range(n):
        x0 = p0[k, 0]
        y0 = p0[k, 1]
        ax = p1[k, 0] - x0
        ay = p1[k, 1] - y0
        bx = p2[k, 0] - 2.0 * p1[k, 0] + x0
        by = p2[k, 1] - 2.0 * p1[k, 1] + y0
        tk = thick_px[k]
        ok = opac[k]
        cr = colors[k, 0]
        cg = colors[k, 1]
        cb = colors[k, 2]
        for i in range(height):
            py = float(i)
            for j in range(width):
                px = float(j)
                _, d = _nearest(x0 - px, y0 - py, ax, ay, bx, by)
                a = ok * _sigmoid((tk - d) / sigma_px)
                if want_alpha:
                    alphas[k, i, j] = a
                one = 1.0 - a
                img[i, j, 0] = one * img[i, j, 0] + a * cr
                img[i, j, 1] = one * img[i, j, 1] + a * cg
                img[i, j, 2] = one * img[i, j, 2] + a * cb
    return img, alphas


@njit(cache=True)
def render_backward(p0, p1, p2, thick_px, colors, opac, bg, height, width,
                    sigma_px, alphas, upstream):
    n = p0.shape[0]
    g_p0 = np.zeros((n, 2))
    g_p1 = np.zeros((n, 2))
    g_p2 = np.zeros((n, 2))
    g_thick = np.zeros(n)
    g_col = np.zeros((n, 3))
    g_opac = np.zeros(n)
    g_bg = np.zeros(3)

    trans = np.empty((n, height, width), dtype=np.float64)
    if n > 0:
        for i in range(height):
            for j in range(width):
                trans[n - 1, i, j] = 1.0
        for k in range(n - 2, -1, -1):
            for i in range(height):
                for j in range(width):
                    trans[k, i, j] = trans[k + 1, i, j] * (1.0 - alphas[k + 1, i, j])
    for i in range(height):
        for j in range(width):
            if n > 0:
                tb = trans[0, i, j] * (1.0 - alphas[0, i, j])
            else:
                tb = 1.0
            g_bg[0] += upstream[i, j, 0] * tb
            g_bg[1] += upstream[i, j, 1] * tb
            g_bg[2] += upstream[i, j, 2] * tb

    canvas = np.empty((height, width, 3), dtype=np.float64)
    for i in range(height):
        for j in range(width):
            canvas[i, j, 0] = bg[0]
            canvas[i, j, 1] = bg[1]
            canvas[i, j, 2] = bg[2]
    for k in range(n):
        x0 = p0[k, 0]
        y0 = p0[k, 1]
        ax = p1[k, 0] - x0
        ay = p1[k, 1] - y0
        bx = p2[k, 0] - 2.0 * p1[k, 0] + x0
        by = p2[k, 1] - 2.0 * p1[k, 1] + y0
        tk = thick_px[k]
        ok = opac[k]
        cr = colors[k, 0]
        cg = colors[k, 1]
        cb = colors[k, 2]
        gx0 = 0.0
        gy0 = 0.0
        gx1 = 0.0
        gy1 = 0.0
        gx2 = 0.0
        gy2 = 0.0
        gthick = 0.0
        gcr = 0.0
        gcg = 0.0
        gcb = 0.0
        gop = 0.0
        for i in range(height):
            py = float(i)
            for j in range(width):
                px = float(j)
                dx = x0 - px
                dy = y0 - py
                t, d = _nearest(dx, dy, ax, ay, bx, by)
                s = _sigmoid((tk - d) / sigma_px)
                a = alphas[k, i, j]
                tr = trans[k, i, j]
                u0 = upstream[i, j, 0] * tr
                u1 = upstream[i, j, 1] * tr
                u2 = upstream[i, j, 2] * tr
                ga = (u0 * (cr - canvas[i, j, 0])
                      + u1 * (cg - canvas[i, j, 1])
                      + u2 * (cb - canvas[i, j, 2]))
                gcr += u0 * a
                gcg += u1 * a
                gcb += u2 * a
                gop += ga * s
                gz = ga * (ok * s * (1.0 - s))
                gthick += gz / sigma_px
                if d > 1e-12:
                    gd = -gz / sigma_px
                    fx = dx + 2.0 * ax * t + bx * t * t
                    fy = dy + 2.0 * ay * t + by * t * t
                    gnx = gd * fx / d
                    gny = gd * fy / d
                    w0 = (1.0 - t) * (1.0 - t)
                    w1 = 2.0 * t * (1.0 - t)
                    w2 = t * t
                    gx0 += gnx * w0
                    gy0 += gny * w0
                    gx1 += gnx * w1
                    gy1 += gny * w1
                    gx2 += gnx * w2
                    gy2 += gny * w2
                one = 1.0 - a
                canvas[i, j, 0] = one * canvas[i, j, 0] + a * cr
                canvas[i, j, 1] = one * canvas[i, j, 1] + a * cg
                canvas[i, j, 2] = one * canvas[i, j, 2] + a * cb
        g_p0[k, 0] = gx0
        g_p0[k, 1] = gy0
        g_p1[k, 0] = gx1
        g_p1[k, 1] = gy1
        g_p2[k, 0] = gx2
        g_p2[k, 1] = gy2
        g_thick[k] = gthick
        g_col[k, 0] = gcr
        g_col[k, 1] = gcg
        g_col[k, 2] = gcb
        g_opac[k] = gop
    return g_p0, g_p1, g_p2, g_thick, g_col, g_opac, g_bg
