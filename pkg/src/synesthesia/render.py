"""Differentiable plan renderer.

Forward: composite every stroke in order over the background, with per-pixel
coverage alpha = opacity * sigmoid((T - d) / sigma).  T and sigma are the
stroke thickness and plan softness scaled to pixels by the canvas diagonal;
d is the nearest-point distance from the pixel center to the stroke curve.

Backward (``render_plan_vjp``): exact gradient of <upstream, image> with
respect to every stroke parameter and the background.  Geometry gradients
use the envelope theorem (the nearest parameter t* is held fixed), which is
exact wherever the distance field is differentiable.  The hot loops live in
the backend kernels; this module maps pixel-space control point gradients
back to the normalized stroke parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ParameterError
from .strokes import PaintingPlan


@dataclass
class PlanGrad:
    """Gradients in plan parameter layout (matching PaintingPlan.to_arrays)."""
    geom: np.ndarray        # (n, 6): x, y, orientation, length, bend, thickness
    color: np.ndarray       # (n, 3)
    opacity: np.ndarray     # (n,)
    background: np.ndarray  # (3,)

    def scaled(self, w: float) -> "PlanGrad":
        return PlanGrad(self.geom * w, self.color * w,
                        self.opacity * w, self.background * w)

    def add_(self, other: "PlanGrad", w: float = 1.0) -> "PlanGrad":
        self.geom += w * other.geom
        self.color += w * other.color
        self.opacity += w * other.opacity
        self.background += w * other.background
        return self

    @staticmethod
    def zeros(n: int) -> "PlanGrad":
        return PlanGrad(np.zeros((n, 6)), np.zeros((n, 3)), np.zeros(n), np.zeros(3))

    def all_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.geom)) and np.all(np.isfinite(self.color))
                    and np.all(np.isfinite(self.opacity))
                    and np.all(np.isfinite(self.background)))


@dataclass
class RenderCtx:
    plan: PaintingPlan
    geom: np.ndarray
    colors: np.ndarray
    opac: np.ndarray
    bg: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    thick_px: np.ndarray
    sigma_px: float
    alphas: np.ndarray
    image: np.ndarray


def _control_points(plan: PaintingPlan, geom: np.ndarray):
    w = plan.canvas_width_px
    h = plan.canvas_height_px
    diag = plan.diagonal_px
    x = geom[:, 0] * w
    y = geom[:, 1] * h
    ct = np.cos(geom[:, 2])
    st = np.sin(geom[:, 2])
    ll = geom[:, 3] * diag
    bb = geom[:, 4] * diag
    p0 = np.stack([x, y], axis=1)
    p1 = np.stack([x + 0.5 * ll * ct - bb * st, y + 0.5 * ll * st + bb * ct], axis=1)
    p2 = np.stack([x + ll * ct, y + ll * st], axis=1)
    thick_px = geom[:, 5] * diag
    return p0, p1, p2, thick_px


def render_with_ctx(plan: PaintingPlan, keep_alpha: bool = True,
                    kernels=None) -> RenderCtx:
    plan.validate_structure()
    kern = kernels if kernels is not None else backend.get_kernels()
    geom, colors, opac, bg = plan.to_arrays()
    p0, p1, p2, thick_px = _control_points(plan, geom)
    sigma_px = plan.softness * plan.diagonal_px
    img, alphas = kern.render_forward(
        p0, p1, p2, thick_px, colors, opac, bg,
        plan.canvas_height_px, plan.canvas_width_px, sigma_px, keep_alpha)
    return RenderCtx(plan=plan, geom=geom, colors=colors, opac=opac, bg=bg,
                     p0=p0, p1=p1, p2=p2, thick_px=thick_px, sigma_px=sigma_px,
                     alphas=alphas, image=img)


def render_plan(plan: PaintingPlan, kernels=None) -> np.ndarray:
    """Render a plan to an (H, W, 3) float image in [0, 1]."""
    return render_with_ctx(plan, keep_alpha=False, kernels=kernels).image


def render_vjp_ctx(ctx: RenderCtx, upstream: np.ndarray, kernels=None) -> PlanGrad:
    plan = ctx.plan
    upstream = np.asarray(upstream, dtype=np.float64)
    shape = (plan.canvas_height_px, plan.canvas_width_px, 3)
    if upstream.shape != shape:
        raise ParameterError(f"upstream must have shape {shape}, got {upstream.shape}")
    if ctx.alphas.shape[0] != len(plan.strokes):
        raise ParameterError("render context was built without stored coverage")
    kern = kernels if kernels is not None else backend.get_kernels()
    gp0, gp1, gp2, g_thick_px, g_col, g_opac, g_bg = kern.render_backward(
        ctx.p0, ctx.p1, ctx.p2, ctx.thick_px, ctx.colors, ctx.opac, ctx.bg,
        plan.canvas_height_px, plan.canvas_width_px, ctx.sigma_px,
        ctx.alphas, upstream)

    w = plan.canvas_width_px
    h = plan.canvas_height_px
    diag = plan.diagonal_px
    geom = ctx.geom
    ct = np.cos(geom[:, 2])
    st = np.sin(geom[:, 2])
    ll = geom[:, 3] * diag
    bb = geom[:, 4] * diag

    # P0 shifts every control point; e = (ct, st) and eperp = (-st, ct).
    g_x = (gp0[:, 0] + gp1[:, 0] + gp2[:, 0]) * w
    g_y = (gp0[:, 1] + gp1[:, 1] + gp2[:, 1]) * h
    gp1_e = gp1[:, 0] * ct + gp1[:, 1] * st
    gp1_perp = -gp1[:, 0] * st + gp1[:, 1] * ct
    gp2_e = gp2[:, 0] * ct + gp2[:, 1] * st
    gp2_perp = -gp2[:, 0] * st + gp2[:, 1] * ct
    g_len = diag * (0.5 * gp1_e + gp2_e)
    g_bend = diag * gp1_perp
    # dP1/dtheta = (L/2) eperp - B e ; dP2/dtheta = L eperp.
    g_orient = gp1_perp * 0.5 * ll - gp1_e * bb + gp2_perp * ll
    g_thick = g_thick_px * diag

    geom_grad = np.stack([g_x, g_y, g_orient, g_len, g_bend, g_thick], axis=1)
    return PlanGrad(geom=geom_grad, color=g_col, opacity=g_opac, background=g_bg)


def render_plan_vjp(plan: PaintingPlan, upstream: np.ndarray,
                    kernels=None) -> PlanGrad:
    """Gradient of sum(upstream * render_plan(plan)) w.r.t. all parameters."""
    ctx = render_with_ctx(plan, keep_alpha=True, kernels=kernels)
    return render_vjp_ctx(ctx, upstream, kernels=kernels)
