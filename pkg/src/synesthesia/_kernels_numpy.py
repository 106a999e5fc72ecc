"""Pure-numpy stroke rasterization kernels.

Semantics reference for the numba twin (_kernels_numba.py); keep the two in
lockstep.  Pixel (row i, col j) has center (x=j, y=i).  A stroke is the
quadratic curve B(t) = P0 + 2 t A + t^2 Bv, t in [0,1], with A = P1 - P0 and
Bv = P0 - 2 P1 + P2.  Per-pixel coverage is

    alpha = opacity * sigmoid((thick_px - d) / sigma_px)

where d is the true nearest-point distance from the pixel center to the
curve, and strokes composite source-over in order onto the background.

The nearest parameter solves the cubic  k3 t^3 + k2 t^2 + k1 t + k0 = 0
(the stationarity condition of |B(t) - P|^2) via Cardano, clamps candidate
roots to [0,1], polishes each with two Newton steps, and picks the best of
{0, 1, roots} by actual squared distance.  The backward pass recomputes the
solve through the same routine so distances match the forward pass bitwise.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

_DEG_EPS = 1e-10   # ||Bv||^2 below this: treat stroke as a straight segment
_TINY = 1e-30


def _sigmoid(z):
    # Branch on sign so exp never overflows; same branch structure as numba.
    pos = z >= 0.0
    e = np.exp(np.where(pos, -z, z))
    return np.where(pos, 1.0 / (1.0 + e), e / (1.0 + e))


def _d2_at(t, dx, dy, ax, ay, bx, by):
    fx = dx + 2.0 * ax * t + bx * t * t
    fy = dy + 2.0 * ay * t + by * t * t
    return fx * fx + fy * fy


def _polish(t, dx, dy, ax, ay, bx, by):
    # Two clamped Newton steps on h(t) = f(t) . f'(t).
    for _ in range(2):
        fx = dx + 2.0 * ax * t + bx * t * t
        fy = dy + 2.0 * ay * t + by * t * t
        dfx = 2.0 * (ax + bx * t)
        dfy = 2.0 * (ay + by * t)
        h = fx * dfx + fy * dfy
        hp = dfx * dfx + dfy * dfy + 2.0 * (fx * bx + fy * by)
        ok = np.abs(hp) > _TINY
        t = np.where(ok, t - h / np.where(ok, hp, 1.0), t)
        t = np.clip(t, 0.0, 1.0)
    return t


def _nearest(dx, dy, ax, ay, bx, by):
    """Nearest parameter and distance for pixel offset grids (dx, dy).

    dx, dy are P0 - pixel_center grids; ax..by are per-stroke scalars.
    Returns (t, d) grids.
    """
    k3 = bx * bx + by * by
    k1 = 2.0 * (ax * ax + ay * ay) + (dx * bx + dy * by)
    k0 = dx * ax + dy * ay
    if k3 < _DEG_EPS:
        safe = np.abs(k1) > _TINY
        c1 = np.where(safe, -k0 / np.where(safe, k1, 1.0), 0.0)
        c1 = np.clip(c1, 0.0, 1.0)
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
        c1 = np.zeros_like(dx)
        c2 = np.zeros_like(dx)
        c3 = np.zeros_like(dx)
        one = disc >= 0.0
        if np.any(one):
            qd = q[one]
            sq = np.sqrt(disc[one])
            s = np.cbrt(-0.5 * qd + sq) + np.cbrt(-0.5 * qd - sq)
            r = s - a / 3.0
            c1[one] = r
            c2[one] = r
            c3[one] = r
        three = ~one
        if np.any(three):
            pt = p[three]
            qd = q[three]
            r = np.sqrt(-pt / 3.0)
            r3 = r * r * r
            arg = np.clip(-0.5 * qd / np.where(r3 > _TINY, r3, 1.0), -1.0, 1.0)
            phi = np.arccos(arg)
            tp = 2.0 * r
            c1[three] = tp * np.cos(phi / 3.0) - a / 3.0
            c2[three] = tp * np.cos((phi - 2.0 * np.pi) / 3.0) - a / 3.0
            c3[three] = tp * np.cos((phi - 4.0 * np.pi) / 3.0) - a / 3.0
        c1 = _polish(np.clip(c1, 0.0, 1.0), dx, dy, ax, ay, bx, by)
        c2 = _polish(np.clip(c2, 0.0, 1.0), dx, dy, ax, ay, bx, by)
        c3 = _polish(np.clip(c3, 0.0, 1.0), dx, dy, ax, ay, bx, by)

    zeros = np.zeros_like(dx)
    ones = np.ones_like(dx)
    cands = np.stack([zeros, ones, c1, c2, c3])
    d2s = np.stack([_d2_at(tt, dx, dy, ax, ay, bx, by) for tt in cands])
    pick = np.argmin(d2s, axis=0)
    t = np.take_along_axis(cands, pick[None], axis=0)[0]
    d2 = np.take_along_axis(d2s, pick[None], axis=0)[0]
    return t, np.sqrt(d2)


def _grids(height, width):
    px = np.arange(width, dtype=np.float64)[None, :].repeat(height, axis=0)
    py = np.arange(height, dtype=np.float64)[:, None].repeat(width, axis=1)
    return px, py


def _stroke_scalars(p0, p1, p2, k):
    x0 = p0[k, 0]
    y0 = p0[k, 1]
    ax = p1[k, 0] - x0
    ay = p1[k, 1] - y0
    bx = p2[k, 0] - 2.0 * p1[k, 0] + x0
    by = p2[k, 1] - 2.0 * p1[k, 1] + y0
    return x0, y0, ax, ay, bx, by


def render_forward(p0, p1, p2, thick_px, colors, opac, bg, height, width,
                   sigma_px, want_alpha):
    n = p0.shape[0]
    img = np.empty((height, width, 3), dtype=np.float64)
    img[:, :] = bg
    px, py = _grids(height, width)
    alphas = np.zeros((n if want_alpha else 0, height, width), dtype=np.float64)
    for k in range(n):
        x0, y0, ax, ay, bx, by = _stroke_scalars(p0, p1, p2, k)
        _, d = _nearest(x0 - px, y0 - py, ax, ay, bx, by)
        a = opac[k] * _sigmoid((thick_px[k] - d) / sigma_px)
        if want_alpha:
            alphas[k] = a
        img = (1.0 - a)[:, :, None] * img + a[:, :, None] * colors[k]
    return img, alphas


def render_backward(p0, p1, p2, thick_px, colors, opac, bg, height, width,
                    sigma_px, alphas, upstream):
    n = p0.shape[0]
    g_p0 = np.zeros((n, 2))
    g_p1 = np.zeros((n, 2))
    g_p2 = np.zeros((n, 2))
    g_thick = np.zeros(n)
    g_col = np.zeros((n, 3))
    g_opac = np.zeros(n)

    # Suffix transmissions trans[k] = prod_{j>k} (1 - alpha_j).
    trans = np.empty_like(alphas)
    if n > 0:
        trans[n - 1] = 1.0
        for k in range(n - 2, -1, -1):
            trans[k] = trans[k + 1] * (1.0 - alphas[k + 1])
        t_bg = trans[0] * (1.0 - alphas[0])
    else:
        t_bg = np.ones((height, width))
    g_bg = np.array([np.sum(upstream[:, :, c] * t_bg) for c in range(3)])

    px, py = _grids(height, width)
    canvas = np.empty((height, width, 3), dtype=np.float64)
    canvas[:, :] = bg
    for k in range(n):
        x0, y0, ax, ay, bx, by = _stroke_scalars(p0, p1, p2, k)
        dx = x0 - px
        dy = y0 - py
        t, d = _nearest(dx, dy, ax, ay, bx, by)
        s = _sigmoid((thick_px[k] - d) / sigma_px)
        a = alphas[k]
        u = upstream * trans[k][:, :, None]
        diff = colors[k][None, None, :] - canvas
        ga = np.sum(u * diff, axis=2)
        g_col[k] = np.sum(u * a[:, :, None], axis=(0, 1))
        g_opac[k] = np.sum(ga * s)
        gz = ga * (opac[k] * s * (1.0 - s))
        g_thick[k] = np.sum(gz) / sigma_px
        gd = -gz / sigma_px
        safe = d > 1e-12
        inv_d = np.where(safe, 1.0 / np.where(safe, d, 1.0), 0.0)
        fx = dx + 2.0 * ax * t + bx * t * t
        fy = dy + 2.0 * ay * t + by * t * t
        gnx = gd * fx * inv_d
        gny = gd * fy * inv_d
        w0 = (1.0 - t) * (1.0 - t)
        w1 = 2.0 * t * (1.0 - t)
        w2 = t * t
        g_p0[k, 0] = np.sum(gnx * w0)
        g_p0[k, 1] = np.sum(gny * w0)
        g_p1[k, 0] = np.sum(gnx * w1)
        g_p1[k, 1] = np.sum(gny * w1)
        g_p2[k, 0] = np.sum(gnx * w2)
        g_p2[k, 1] = np.sum(gny * w2)
        canvas = (1.0 - a)[:, :, None] * canvas + a[:, :, None] * colors[k]
    return g_p0, g_p1, g_p2, g_thick, g_col, g_opac, g_bg
