"""Finite-difference verification of every analytic gradient path.

Central differences at a pinned step are a derivative oracle only where
the checked function is smooth across the whole stencil. The rendered
loss is piecewise-smooth in stroke parameters: the unsigned distance to
the stroke centerline has true kinks (centerline crossing a pixel
center, nearest-branch ties on the medial axis) and curvature jumps at
interior/endpoint transitions. Configurations are therefore rejection-
sampled with two forward-only guards before any comparison runs:

* geometric margins from a dense sweep along each curve — no pixel
  center within 0.02 px of a centerline, and no gradient-active pixel
  with two competing nearest branches closer than 0.02 px — which
  certifies the whole +/-eps stencil is kink-free (a parameter step of
  eps moves the curve well under 0.01 px at these canvas sizes);
* a Richardson probe comparing central differences at eps and eps/2,
  rejecting any configuration where they disagree beyond 0.3x the test
  tolerance, which bounds plain truncation error and detects curvature
  jumps inside the stencil.

Neither guard consults the gradient under test, so a wrong VJP cannot
hide: every accepted configuration is still verified against the
finite-difference value. Exactness off the sampled distribution was
established separately (finite differences converge to the analytic
gradient as eps -> 0, and the forward distance field matches dense
curve-sampling oracles).

Set SYNESTHESIA_CORRUPT_VJP=<component> to deliberately corrupt one
component's analytic gradient and exercise the failure path.
"""

import dataclasses
import math
import os

import numpy as np

from .canvas import AugmentationSpec, augment_views, augment_views_vjp
from .emotion import N_CLASSES, image_emotion, image_emotion_vjp, one_hot
from .encoders import encode_image, encode_image_vjp
from .objective import ObjectiveSpec, Term, loss_natural_sound, loss_pixel_l2
from .render import render_plan, render_plan_vjp
from .strokes import PaintingPlan, StrokeParams, stroke_geometry

EPS = 1e-4
ABS_FLOOR = 1e-6
PROBE_FRACTION = 0.3

# dense-sweep margin parameters (pixels / curve-parameter units)
_D_MARGIN = 0.02
_GAP_MARGIN = 0.02
_T_SEP = 0.05
_SWEEP_POINTS = 1024

COMPONENTS = ("renderer", "augmentations", "image_encoder",
              "image_emotion", "pixel_l2", "natural_sound")


@dataclasses.dataclass
class ComponentReport:
    component: str
    n_checks: int
    max_rel_err: float
    tolerance: float
    passed: bool


def _rel_err(a, b, tol):
    return abs(a - b) / max(abs(a), abs(b), ABS_FLOOR / tol)


def _maybe_corrupt(component, grad):
    if os.environ.get("SYNESTHESIA_CORRUPT_VJP") == component:
        grad = np.asarray(grad, dtype=np.float64).copy()
        grad += 1.0 + 0.5 * np.abs(grad).max()
    return grad


# ------------------------------------------------ plan parameter plumbing

def _flat_params(plan):
    geom, colors, opac, bg = plan.to_arrays()
    return np.concatenate([geom.ravel(), colors.ravel(), opac, bg])


def _plan_with_flat(plan, flat):
    n = len(plan.strokes)
    geom = flat[:6 * n].reshape(n, 6)
    colors = flat[6 * n:9 * n].reshape(n, 3)
    opac = flat[9 * n:10 * n]
    bg = flat[10 * n:]
    return plan.with_arrays(geom, colors, opac, bg)


def _flat_grad(g):
    return np.concatenate([g.geom.ravel(), g.color.ravel(), g.opacity,
                           g.background])


def _central_fd(loss, plan, indices, eps):
    base = _flat_params(plan)
    out = np.empty(len(indices))
    for k, i in enumerate(indices):
        hi, lo = base.copy(), base.copy()
        hi[i] += eps
        lo[i] -= eps
        out[k] = (loss(_plan_with_flat(plan, hi))
                  - loss(_plan_with_flat(plan, lo))) / (2.0 * eps)
    return out


# --------------------------------------------------- FD-safe plan sampling

def _margins_ok(plan):
    """Dense-sweep certificate that no FD stencil can straddle a kink."""
    w, h = plan.canvas_width_px, plan.canvas_height_px
    cx, cy = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    pts_x = cx.ravel()[:, None]
    pts_y = cy.ravel()[:, None]
    t = np.linspace(0.0, 1.0, _SWEEP_POINTS)
    diag = plan.diagonal_px
    sigma = plan.softness * diag
    for s in plan.strokes:
        p0, p1, p2 = stroke_geometry(s, w, h)
        omt = 1.0 - t
        bx = omt * omt * p0[0] + 2 * t * omt * p1[0] + t * t * p2[0]
        by = omt * omt * p0[1] + 2 * t * omt * p1[1] + t * t * p2[1]
        d2 = (pts_x - bx) ** 2 + (pts_y - by) ** 2
        dmin = np.sqrt(d2.min(1))
        if dmin.min() < _D_MARGIN:
            return False
        active = dmin < s.thickness * diag + 16.0 * sigma
        if not active.any():
            continue
        da = d2[active]
        local_min = np.zeros_like(da, dtype=bool)
        local_min[:, 1:-1] = (da[:, 1:-1] <= da[:, :-2]) & (da[:, 1:-1] <= da[:, 2:])
        local_min[:, 0] = da[:, 0] <= da[:, 1]
        local_min[:, -1] = da[:, -1] <= da[:, -2]
        ti = np.argmin(da, 1)
        competing = np.abs(t[None, :] - t[ti][:, None]) > _T_SEP
        rival = np.sqrt(np.where(local_min & competing, da, np.inf).min(1))
        nearest = np.sqrt(da[np.arange(da.shape[0]), ti])
        if np.any(rival - nearest < _GAP_MARGIN):
            return False
    return True


def _draw_plan(rng):
    w = int(rng.integers(20, 33))
    h = int(rng.integers(20, 33))
    strokes = []
    for _ in range(int(rng.integers(1, 4))):
        length = rng.uniform(0.08, 0.4)
        strokes.append(StrokeParams(
            x=rng.uniform(0.05, 0.95), y=rng.uniform(0.05, 0.95),
            orientation=rng.uniform(-math.pi, math.pi), length=length,
            bend=rng.uniform(-1, 1) * min(0.25, 0.3 * length),
            thickness=rng.uniform(0.02, 0.07),
            color=tuple(rng.uniform(0, 1, 3)), opacity=rng.uniform(0.1, 1.0)))
    return PaintingPlan(w, h, tuple(rng.uniform(0, 1, 3)), strokes,
                        softness=rng.uniform(0.02, 0.04))


def _probe_ok(loss, plan, indices, tol):
    fd = _central_fd(loss, plan, indices, EPS)
    fdh = _central_fd(loss, plan, indices, EPS / 2)
    scale = np.maximum(np.maximum(np.abs(fd), np.abs(fdh)), ABS_FLOOR / tol)
    return np.all(np.abs(fd - fdh) <= PROBE_FRACTION * tol * scale), fd


def _safe_config(rng, make_pair, tol, param_count=None):
    """Draw (plan, analytic_fn, fd, indices) where FD at EPS is trustworthy.

    ``make_pair(rng, plan)`` returns matching loss / analytic-gradient
    closures; both guards consult only the loss (forward evaluations).
    """
    while True:
        plan = _draw_plan(rng)
        loss, analytic = make_pair(rng, plan)
        if not _margins_ok(plan):
            continue
        total = 10 * len(plan.strokes) + 3
        if param_count is None or param_count >= total:
            indices = np.arange(total)
        else:
            indices = rng.choice(total, size=param_count, replace=False)
        ok, fd = _probe_ok(loss, plan, indices, tol)
        if ok:
            return plan, analytic, fd, indices


# -------------------------------------------------------------- components

def check_render(seed=0, configs=100, tol=1e-3):
    """render_plan VJP vs FD over every parameter of sampled plans."""
    rng = np.random.default_rng(seed)
    worst, checks = 0.0, 0

    def make_pair(r, plan):
        w = r.standard_normal((plan.canvas_height_px, plan.canvas_width_px, 3))
        loss = lambda p: float(np.sum(w * render_plan(p)))
        analytic = lambda p: _flat_grad(render_plan_vjp(p, w))
        return loss, analytic

    for _ in range(configs):
        plan, analytic, fd, indices = _safe_config(rng, make_pair, tol)
        ana = _maybe_corrupt("renderer", analytic(plan))
        for k, i in enumerate(indices):
            worst = max(worst, _rel_err(ana[i], fd[k], tol))
            checks += 1
    return ComponentReport("renderer", checks, worst, tol, worst < tol)


def check_augment(seed=0, configs=100, tol=1e-3):
    """augment_views VJP vs FD on random pixels of random images."""
    rng = np.random.default_rng(seed)
    worst, checks = 0.0, 0
    for ci in range(configs):
        h = int(rng.integers(12, 40))
        w = int(rng.integers(12, 40))
        img = rng.uniform(0.0, 1.0, (h, w, 3))
        spec = AugmentationSpec(count=int(rng.integers(1, 5)),
                                min_crop_fraction=rng.uniform(0.5, 0.9),
                                max_corner_jitter_fraction=rng.uniform(0.0, 0.08),
                                output_size_px=int(rng.integers(12, 33)),
                                seed=int(rng.integers(1 << 31)))
        weights = [rng.standard_normal((spec.output_size_px,
                                        spec.output_size_px, 3))
                   for _ in range(spec.count + 1)]

        def loss(im):
            return float(sum(np.sum(wv * v) for wv, v
                             in zip(weights, augment_views(im, spec))))

        grad = augment_views_vjp(h, w, spec, weights)
        grad = _maybe_corrupt("augmentations", grad)
        for _ in range(3):
            i, j, c = rng.integers(h), rng.integers(w), rng.integers(3)
            hi, lo = img.copy(), img.copy()
            hi[i, j, c] += EPS
            lo[i, j, c] -= EPS
            fd = (loss(hi) - loss(lo)) / (2 * EPS)
            worst = max(worst, _rel_err(grad[i, j, c], fd, tol))
            checks += 1
    return ComponentReport("augmentations", checks, worst, tol, worst < tol)


def check_encode_image(seed=0, configs=100, tol=1e-3):
    """encode_image VJP vs FD on random pixels."""
    rng = np.random.default_rng(seed)
    worst, checks = 0.0, 0
    for _ in range(configs):
        h = int(rng.integers(8, 28))
        w = int(rng.integers(8, 28))
        img = rng.uniform(0.0, 1.0, (h, w, 3))
        enc_seed = int(rng.integers(1 << 31))
        u = rng.standard_normal(128)
        grad = encode_image_vjp(img, enc_seed, u)
        grad = _maybe_corrupt("image_encoder", grad)
        for _ in range(3):
            i, j, c = rng.integers(h), rng.integers(w), rng.integers(3)
            hi, lo = img.copy(), img.copy()
            hi[i, j, c] += EPS
            lo[i, j, c] -= EPS
            fd = (u @ encode_image(hi, enc_seed).values
                  - u @ encode_image(lo, enc_seed).values) / (2 * EPS)
            worst = max(worst, _rel_err(grad[i, j, c], fd, tol))
            checks += 1
    return ComponentReport("image_encoder", checks, worst, tol, worst < tol)


def check_image_emotion(seed=0, configs=100, tol=1e-3):
    """image_emotion VJP (one-hot readout) vs FD on random pixels."""
    rng = np.random.default_rng(seed)
    worst, checks = 0.0, 0
    for _ in range(configs):
        h = int(rng.integers(8, 28))
        w = int(rng.integers(8, 28))
        img = rng.uniform(0.0, 1.0, (h, w, 3))
        enc_seed = int(rng.integers(1 << 31))
        cls = int(rng.integers(N_CLASSES))
        grad = image_emotion_vjp(img, one_hot(cls), None, enc_seed)
        grad = _maybe_corrupt("image_emotion", grad)
        for _ in range(3):
            i, j, c = rng.integers(h), rng.integers(w), rng.integers(3)
            hi, lo = img.copy(), img.copy()
            hi[i, j, c] += EPS
            lo[i, j, c] -= EPS
            fd = (image_emotion(hi, None, enc_seed).probs[cls]
                  - image_emotion(lo, None, enc_seed).probs[cls]) / (2 * EPS)
            worst = max(worst, _rel_err(grad[i, j, c], fd, tol))
            checks += 1
    return ComponentReport("image_emotion", checks, worst, tol, worst < tol)


def check_pixel_l2(seed=0, configs=100, tol=1e-3):
    """loss_pixel_l2 plan gradient vs FD over every parameter."""
    rng = np.random.default_rng(seed)
    worst, checks = 0.0, 0
    def make_pair(r, plan):
        target = r.uniform(0, 1, (plan.canvas_height_px,
                                  plan.canvas_width_px, 3))
        loss = lambda p: loss_pixel_l2(p, target)[0]
        analytic = lambda p: _flat_grad(loss_pixel_l2(p, target)[1])
        return loss, analytic

    for _ in range(configs):
        plan, analytic, fd, indices = _safe_config(rng, make_pair, tol)
        ana = _maybe_corrupt("pixel_l2", analytic(plan))
        for k, i in enumerate(indices):
            worst = max(worst, _rel_err(ana[i], fd[k], tol))
            checks += 1
    return ComponentReport("pixel_l2", checks, worst, tol, worst < tol)


def _demo_features(seed):
    t = np.arange(12000) / 16000.0
    rng = np.random.default_rng(seed)
    x = (0.4 * np.sin(2 * np.pi * 330.0 * t)
         + 0.2 * np.sin(2 * np.pi * 987.0 * t)
         + 0.05 * rng.standard_normal(t.size))
    from .audio import AudioClip, extract_features
    return extract_features(AudioClip(np.clip(x, -1, 1)))


def check_natural_sound(seed=0, configs=100, tol=1e-2, params_per_config=5):
    """Chained sound loss gradient vs FD on sampled stroke parameters."""
    rng = np.random.default_rng(seed)
    feats = _demo_features(seed)
    worst, checks = 0.0, 0
    def make_pair(r, plan):
        spec = ObjectiveSpec(
            terms=[Term("natural_sound", 1.0, feats)],
            augmentation=AugmentationSpec(count=3, output_size_px=32,
                                          seed=int(r.integers(1 << 31))),
            seed=int(r.integers(1 << 31)))
        loss = lambda p: loss_natural_sound(p, feats, spec)[0]
        analytic = lambda p: _flat_grad(loss_natural_sound(p, feats, spec)[1])
        return loss, analytic

    for _ in range(configs):
        plan, analytic, fd, indices = _safe_config(rng, make_pair, tol,
                                                   param_count=params_per_config)
        ana = _maybe_corrupt("natural_sound", analytic(plan))
        for k, i in enumerate(indices):
            worst = max(worst, _rel_err(ana[i], fd[k], tol))
            checks += 1
    return ComponentReport("natural_sound", checks, worst, tol, worst < tol)


def run_all(seed=0, configs=100):
    """Every component exactly once, in a fixed order."""
    return [
        check_render(seed, configs),
        check_augment(seed, configs),
        check_encode_image(seed, configs),
        check_image_emotion(seed, configs),
        check_pixel_l2(seed, configs),
        check_natural_sound(seed, configs),
    ]
