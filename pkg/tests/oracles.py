"""Independent reference implementations used as oracles.

Everything here is deliberately naive — dense sampling and direct
double-loop sums, sharing no code with the package — so agreement is
evidence, not tautology.
"""

import math

import numpy as np


def bezier_control_points(stroke, width_px, height_px):
    diag = math.hypot(width_px, height_px)
    ll = stroke.length * diag
    bb = stroke.bend * diag
    ct, st = math.cos(stroke.orientation), math.sin(stroke.orientation)
    p0 = np.array([stroke.x * width_px, stroke.y * height_px])
    p1 = p0 + 0.5 * ll * np.array([ct, st]) + bb * np.array([-st, ct])
    p2 = p0 + ll * np.array([ct, st])
    return p0, p1, p2


def brute_force_render(plan, n_samples=10000):
    """Renderer with distance-to-curve by dense curve sampling."""
    w, h = plan.canvas_width_px, plan.canvas_height_px
    diag = math.hypot(w, h)
    sigma = plan.softness * diag
    img = np.empty((h, w, 3))
    img[:] = plan.background
    t = np.linspace(0.0, 1.0, n_samples)
    px = np.arange(w, dtype=float)
    py = np.arange(h, dtype=float)
    for s in plan.strokes:
        p0, p1, p2 = bezier_control_points(s, w, h)
        omt = 1.0 - t
        bx = omt * omt * p0[0] + 2 * t * omt * p1[0] + t * t * p2[0]
        by = omt * omt * p0[1] + 2 * t * omt * p1[1] + t * t * p2[1]
        d = np.empty((h, w))
        for i in range(h):
            d2 = (px[:, None] - bx) ** 2 + (py[i] - by) ** 2
            d[i] = np.sqrt(d2.min(axis=1))
        cov = s.opacity / (1.0 + np.exp(-(s.thickness * diag - d) / sigma))
        img = (1.0 - cov[..., None]) * img + cov[..., None] * np.asarray(s.color)
    return np.clip(img, 0.0, 1.0)


def naive_dct2_orthonormal(row, n_keep):
    """Direct double-sum orthonormal DCT-II of one vector."""
    n = len(row)
    out = np.empty(n_keep)
    for k in range(n_keep):
        acc = 0.0
        for j in range(n):
            acc += row[j] * math.cos(math.pi * (j + 0.5) * k / n)
        out[k] = acc * (math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n))
    return out


def direct_dft_power(frame):
    """Sum of |X[k]|^2 over the full two-sided spectrum, direct O(N^2) DFT."""
    n = len(frame)
    j = np.arange(n)
    total = 0.0
    for k in range(n):
        z = np.exp(-2j * math.pi * k * j / n)
        total += abs(np.dot(frame, z)) ** 2
    return total


def hz_to_pitch_class(f):
    return int(round(12.0 * math.log2(f / 440.0))) % 12
