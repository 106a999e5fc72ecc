"""Objective terms over rendered plans and the Adam loop that fits a plan.

Every term bottoms out in a gradient w.r.t. the rendered pixels, so one
composite evaluation renders once, sums the weighted per-term pixel
gradients, and runs a single renderer VJP. Terms with weight 0 are
skipped entirely (bitwise-equivalent to being absent).
"""

import dataclasses
import math

import numpy as np

from ._optim import Adam
from .canvas import AugmentationSpec, augment_views, augment_views_vjp, validate_image
from .emotion import EmotionDistribution, image_emotion, image_emotion_vjp
from .encoders import Embedding, encode_audio, encode_image, encode_image_vjp, encode_text
from .errors import NumericError, ParameterError
from .render import PlanGrad, render_vjp_ctx, render_with_ctx
from .strokes import RANGES, wrap_orientation

TERM_KINDS = ("natural_sound", "speech_text", "speech_emotion",
              "pixel_l2", "direct_emotion")

_TINY_NORM = 1e-30


@dataclasses.dataclass
class Term:
    kind: str
    weight: float
    payload: object   # FeatureStack | str | CanvasImage | EmotionDistribution


@dataclasses.dataclass
class ObjectiveSpec:
    terms: list
    augmentation: AugmentationSpec = dataclasses.field(default_factory=AugmentationSpec)
    seed: int = 0
    emotion_head: dict = None   # optional loaded "we"/"be" tensors

    def validate(self):
        if not self.terms:
            raise ParameterError("objective needs at least one term")
        for t in self.terms:
            if t.kind not in TERM_KINDS:
                raise ParameterError(f"unknown term kind {t.kind!r}")
            if not (math.isfinite(t.weight) and t.weight >= 0.0):
                raise ParameterError(f"term {t.kind!r} has invalid weight {t.weight}")
        if not any(t.weight > 0.0 for t in self.terms):
            raise ParameterError("objective needs at least one term with weight > 0")
        self.augmentation.validate()
        return self


@dataclasses.dataclass
class OptimizerConfig:
    iterations: int
    lr_geometry: float = 1e-2
    lr_color: float = 5e-2
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def validate(self):
        if self.iterations < 1:
            raise ParameterError("iterations must be >= 1")
        if not (self.lr_geometry > 0.0 and self.lr_color > 0.0):
            raise ParameterError("learning rates must be positive")
        return self


def _as_vector(x):
    if isinstance(x, Embedding):
        return x.values
    if isinstance(x, EmotionDistribution):
        return x.probs
    return np.asarray(x, dtype=np.float64)


def cosine_distance(u, v):
    """1 - cos(u, v), in [0, 2]."""
    u, v = _as_vector(u), _as_vector(v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < _TINY_NORM or nv < _TINY_NORM:
        raise NumericError("cosine distance of a zero vector")
    return float(1.0 - (u @ v) / (nu * nv))


def _cosine_distance_grad_u(u, v):
    """d cosine_distance(u, v) / du, including the normalization term."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < _TINY_NORM or nv < _TINY_NORM:
        raise NumericError("cosine distance of a zero vector")
    return -v / (nu * nv) + (u @ v) * u / (nu ** 3 * nv)


# ------------------------------------------------------- term evaluation

def _view_embedding_loss(img, spec, target):
    """Mean cosine distance of augmented-view embeddings to one target."""
    views = augment_views(img, spec.augmentation)
    n = len(views)
    t = target.values
    total = 0.0
    upstream_views = []
    for view in views:
        e = encode_image(view, spec.seed)
        total += cosine_distance(e, target) / n
        upstream_views.append(
            encode_image_vjp(view, spec.seed,
                             _cosine_distance_grad_u(e.values, t) / n))
    g_img = augment_views_vjp(img.shape[0], img.shape[1], spec.augmentation,
                              upstream_views)
    return total, g_img


def _emotion_loss(img, spec, target_dist):
    p = image_emotion(img, spec.emotion_head, spec.seed)
    value = cosine_distance(p, target_dist)
    gp = _cosine_distance_grad_u(p.probs, _as_vector(target_dist))
    return value, image_emotion_vjp(img, gp, spec.emotion_head, spec.seed)


def _pixel_l2_loss(img, target):
    target = validate_image(np.asarray(target, dtype=np.float64))
    if target.shape != img.shape:
        raise ParameterError(
            f"target shape {target.shape} does not match canvas {img.shape}")
    diff = img - target
    return float(np.mean(diff * diff)), (2.0 / diff.size) * diff


def _eval_term(term, img, spec):
    """(raw value, gradient w.r.t. rendered pixels) of one term."""
    if term.kind == "natural_sound":
        return _view_embedding_loss(img, spec,
                                    encode_audio(term.payload, spec.seed))
    if term.kind == "speech_text":
        return _view_embedding_loss(img, spec,
                                    encode_text(term.payload, spec.seed))
    if term.kind in ("speech_emotion", "direct_emotion"):
        return _emotion_loss(img, spec, term.payload)
    if term.kind == "pixel_l2":
        return _pixel_l2_loss(img, term.payload)
    raise ParameterError(f"unknown term kind {term.kind!r}")


def term_names(spec):
    """CSV column names for the active (weight > 0) terms, in term order."""
    active = [t.kind for t in spec.terms if t.weight > 0.0]
    names = []
    for i, kind in enumerate(active):
        names.append(kind if active.count(kind) == 1
                     else f"{kind}_{sum(k == kind for k in active[:i])}")
    return names


@dataclasses.dataclass
class CompositeResult:
    total: float
    grad: PlanGrad
    term_values: list   # [(name, raw value)] for active terms, in order


def composite_loss(plan, spec, kernels=None):
    """Weighted sum of active terms with one shared render and VJP."""
    spec.validate()
    ctx = render_with_ctx(plan, keep_alpha=True, kernels=kernels)
    img = ctx.image
    total = 0.0
    g_img = np.zeros_like(img)
    values = []
    names = term_names(spec)
    for name, term in zip(names, (t for t in spec.terms if t.weight > 0.0)):
        value, g = _eval_term(term, img, spec)
        total += term.weight * value
        g_img += term.weight * g
        values.append((name, value))
    return CompositeResult(total=total,
                           grad=render_vjp_ctx(ctx, g_img, kernels=kernels),
                           term_values=values)


# ------------------------------------------------- spec'd standalone ops

def loss_natural_sound(plan, audio_features, spec, kernels=None):
    """Mean-over-views cosine distance between view and audio embeddings."""
    ctx = render_with_ctx(plan, keep_alpha=True, kernels=kernels)
    value, g_img = _view_embedding_loss(
        ctx.image, spec, encode_audio(audio_features, spec.seed))
    return value, render_vjp_ctx(ctx, g_img, kernels=kernels)


def loss_speech(plan, transcript_text, speech_emotion_dist, spec, kernels=None):
    """Transcript-embedding term plus emotion-agreement term."""
    ctx = render_with_ctx(plan, keep_alpha=True, kernels=kernels)
    v1, g1 = _view_embedding_loss(ctx.image, spec,
                                  encode_text(transcript_text, spec.seed))
    v2, g2 = _emotion_loss(ctx.image, spec, speech_emotion_dist)
    return v1 + v2, render_vjp_ctx(ctx, g1 + g2, kernels=kernels)


def loss_pixel_l2(plan, target, kernels=None):
    """Mean squared pixel error against a target canvas."""
    ctx = render_with_ctx(plan, keep_alpha=True, kernels=kernels)
    value, g_img = _pixel_l2_loss(ctx.image, target)
    return value, render_vjp_ctx(ctx, g_img, kernels=kernels)


# -------------------------------------------------------------- optimizer

def _project_arrays(geom, colors, opac, background):
    np.clip(geom[:, 0], *RANGES["x"], out=geom[:, 0])
    np.clip(geom[:, 1], *RANGES["y"], out=geom[:, 1])
    geom[:, 2] = wrap_orientation(geom[:, 2])
    np.clip(geom[:, 3], *RANGES["length"], out=geom[:, 3])
    np.clip(geom[:, 4], *RANGES["bend"], out=geom[:, 4])
    np.clip(geom[:, 5], *RANGES["thickness"], out=geom[:, 5])
    np.clip(colors, 0.0, 1.0, out=colors)
    np.clip(opac, *RANGES["opacity"], out=opac)
    np.clip(background, 0.0, 1.0, out=background)


def optimize(plan0, spec, cfg, kernels=None, on_iteration=None):
    """Adam descent on the composite objective.

    Records the loss of each pre-update iterate and returns the iterate
    with the lowest recorded loss plus the full history. `on_iteration`
    (if given) is called with (iteration, total, term_values) per step.
    """
    spec.validate()
    cfg.validate()
    plan0.validate_structure()
    geom, colors, opac, bg = plan0.to_arrays()
    params = [geom, colors, opac, bg]
    lrs = [cfg.lr_geometry, cfg.lr_color, cfg.lr_color, cfg.lr_color]
    opt = Adam(params, lr=cfg.lr_color, beta1=cfg.beta1, beta2=cfg.beta2,
               eps=cfg.epsilon)
    history = []
    best_loss = math.inf
    best_plan = None
    plan = plan0.with_arrays(geom, colors, opac, bg)
    for it in range(cfg.iterations):
        res = composite_loss(plan, spec, kernels=kernels)
        if not math.isfinite(res.total) or not res.grad.all_finite():
            raise NumericError(f"non-finite loss or gradient at iteration {it}")
        history.append(res.total)
        if res.total < best_loss:
            best_loss = res.total
            best_plan = plan
        if on_iteration is not None:
            on_iteration(it, res.total, res.term_values)
        opt.step(params, [res.grad.geom, res.grad.color,
                          res.grad.opacity, res.grad.background], lrs=lrs)
        _project_arrays(geom, colors, opac, bg)
        plan = plan0.with_arrays(geom, colors, opac, bg)
    return best_plan, history
