"""Stroke parameterization, painting plans, and plan serialization.

A stroke is a quadratic curve in a local frame: P0 = (0, 0), P2 = (L, 0),
P1 = (L/2, B), where L = length * diagonal_px and B = bend * diagonal_px.
The frame is rotated by ``orientation`` (radians, wrapped to [-pi, pi)) and
translated so P0 lands at (x * width_px, y * height_px).  Scale-free
parameters (length, bend, thickness) are fractions of the canvas diagonal,
so a plan re-renders consistently at any resolution.

Parameter ranges (enforced by init_plan and by optimizer projection, not by
the renderer, which stays evaluable slightly outside the box for finite
difference checks):

    x, y        [0, 1]          orientation  [-pi, pi)
    length      [0.01, 0.5]     bend         [-0.25, 0.25]
    thickness   [0.002, 0.1]    (half-width) color/opacity [0, 1]
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .canvas import validate_image
from .errors import FormatError, ParameterError

DEFAULT_SOFTNESS = 0.004

# (low, high) for each scalar parameter; orientation wraps instead of clamping.
RANGES = {
    "x": (0.0, 1.0),
    "y": (0.0, 1.0),
    "orientation": (-math.pi, math.pi),
    "length": (0.01, 0.5),
    "bend": (-0.25, 0.25),
    "thickness": (0.002, 0.1),
    "opacity": (0.0, 1.0),
}

GEOM_FIELDS = ("x", "y", "orientation", "length", "bend", "thickness")


@dataclass
class StrokeParams:
    x: float
    y: float
    orientation: float
    length: float
    bend: float
    thickness: float
    color: tuple[float, float, float]
    opacity: float


@dataclass
class PaintingPlan:
    canvas_width_px: int
    canvas_height_px: int
    background: tuple[float, float, float]
    strokes: list[StrokeParams] = field(default_factory=list)
    softness: float = DEFAULT_SOFTNESS

    @property
    def diagonal_px(self) -> float:
        return math.hypot(self.canvas_width_px, self.canvas_height_px)

    def validate_structure(self) -> "PaintingPlan":
        if self.canvas_width_px < 1 or self.canvas_height_px < 1:
            raise ParameterError(
                f"canvas must be at least 1x1, got "
                f"{self.canvas_width_px}x{self.canvas_height_px}")
        if not (self.softness > 0.0 and math.isfinite(self.softness)):
            raise ParameterError(f"softness must be positive, got {self.softness}")
        vals = [v for s in self.strokes
                for v in (s.x, s.y, s.orientation, s.length, s.bend,
                          s.thickness, *s.color, s.opacity)]
        vals.extend(self.background)
        if not np.all(np.isfinite(np.asarray(vals, dtype=np.float64))):
            raise ParameterError("plan contains non-finite values")
        return self

    def to_arrays(self):
        """(geom (n,6), colors (n,3), opacity (n,), background (3,)) copies."""
        n = len(self.strokes)
        geom = np.empty((n, 6), dtype=np.float64)
        colors = np.empty((n, 3), dtype=np.float64)
        opac = np.empty(n, dtype=np.float64)
        for i, s in enumerate(self.strokes):
            geom[i] = (s.x, s.y, s.orientation, s.length, s.bend, s.thickness)
            colors[i] = s.color
            opac[i] = s.opacity
        return geom, colors, opac, np.asarray(self.background, dtype=np.float64)

    def with_arrays(self, geom, colors, opac, background) -> "PaintingPlan":
        """New plan with the same canvas but parameters taken from arrays."""
        strokes = [
            StrokeParams(x=float(g[0]), y=float(g[1]), orientation=float(g[2]),
                         length=float(g[3]), bend=float(g[4]), thickness=float(g[5]),
                         color=(float(c[0]), float(c[1]), float(c[2])),
                         opacity=float(o))
            for g, c, o in zip(geom, colors, opac)
        ]
        return PaintingPlan(
            canvas_width_px=self.canvas_width_px,
            canvas_height_px=self.canvas_height_px,
            background=(float(background[0]), float(background[1]), float(background[2])),
            strokes=strokes,
            softness=self.softness,
        )


def wrap_orientation(theta):
    """Wrap angle(s) to [-pi, pi)."""
    return (np.asarray(theta) + math.pi) % (2.0 * math.pi) - math.pi


def stroke_geometry(stroke: StrokeParams, width_px: int, height_px: int):
    """Control points P0, P1, P2 of a stroke in pixel coordinates."""
    diag = math.hypot(width_px, height_px)
    ll = stroke.length * diag
    bb = stroke.bend * diag
    ct = math.cos(stroke.orientation)
    st = math.sin(stroke.orientation)
    p0 = np.array([stroke.x * width_px, stroke.y * height_px])
    e = np.array([ct, st])
    eperp = np.array([-st, ct])
    p1 = p0 + 0.5 * ll * e + bb * eperp
    p2 = p0 + ll * e
    return p0, p1, p2


def init_plan(strategy: str, n_strokes: int, seed: int, *,
              width_px: int | None = None, height_px: int | None = None,
              target: np.ndarray | None = None,
              background=(1.0, 1.0, 1.0),
              softness: float = DEFAULT_SOFTNESS) -> PaintingPlan:
    """Seeded random plan.

    ``uniform-random`` draws every parameter uniformly in its valid range;
    ``image-seeded`` does the same but replaces each stroke color with a
    bilinear sample of ``target`` at the stroke center.  Canvas size comes
    from ``target`` when given, else from width_px/height_px.
    """
    if n_strokes < 1:
        raise ParameterError(f"n_strokes must be >= 1, got {n_strokes}")
    if strategy not in ("uniform-random", "image-seeded"):
        raise ParameterError(f"unknown init strategy {strategy!r}")
    if target is not None:
        target = validate_image(target)
        height_px, width_px = target.shape[0], target.shape[1]
    if strategy == "image-seeded" and target is None:
        raise ParameterError("image-seeded init requires a target image")
    if width_px is None or height_px is None:
        raise ParameterError("init_plan needs width_px/height_px or a target image")
    if width_px < 1 or height_px < 1:
        raise ParameterError(f"canvas must be at least 1x1, got {width_px}x{height_px}")

    from .canvas import sample_bilinear

    rng = np.random.default_rng(seed)
    strokes = []
    for _ in range(n_strokes):
        x = rng.uniform(*RANGES["x"])
        y = rng.uniform(*RANGES["y"])
        orientation = rng.uniform(*RANGES["orientation"])
        length = rng.uniform(*RANGES["length"])
        bend = rng.uniform(*RANGES["bend"])
        thickness = rng.uniform(*RANGES["thickness"])
        color = tuple(rng.uniform(0.0, 1.0, size=3))
        opacity = rng.uniform(*RANGES["opacity"])
        if strategy == "image-seeded":
            rgb = sample_bilinear(target, x * width_px, y * height_px)
            color = (float(rgb[0]), float(rgb[1]), float(rgb[2]))
        strokes.append(StrokeParams(x=x, y=y, orientation=orientation,
                                    length=length, bend=bend, thickness=thickness,
                                    color=color, opacity=opacity))
    return PaintingPlan(canvas_width_px=int(width_px), canvas_height_px=int(height_px),
                        background=tuple(float(c) for c in background),
                        strokes=strokes, softness=softness).validate_structure()


# ---------------------------------------------------------------------------
# JSON serialization.  Floats go through Python's repr (shortest exact form,
# always >= the 9 significant digits needed), so save -> load is bitwise.
# ---------------------------------------------------------------------------

_STROKE_KEYS = {"x", "y", "orientation", "length", "bend", "thickness",
                "color", "opacity"}
_PLAN_KEYS = {"canvas_width_px", "canvas_height_px", "background", "softness",
              "strokes"}


def plan_to_dict(plan: PaintingPlan) -> dict:
    return {
        "canvas_width_px": plan.canvas_width_px,
        "canvas_height_px": plan.canvas_height_px,
        "background": [float(c) for c in plan.background],
        "softness": float(plan.softness),
        "strokes": [
            {
                "x": s.x, "y": s.y, "orientation": s.orientation,
                "length": s.length, "bend": s.bend, "thickness": s.thickness,
                "color": [float(c) for c in s.color], "opacity": s.opacity,
            }
            for s in plan.strokes
        ],
    }


def _require_number(obj, key, where):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"{where}: field {key!r} must be a number, got {type(v).__name__}")
    return float(v)


def _rgb_triple(obj, key, where):
    v = obj.get(key)
    if (not isinstance(v, list) or len(v) != 3
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)):
        raise FormatError(f"{where}: field {key!r} must be a list of 3 numbers")
    return tuple(float(c) for c in v)


def plan_from_dict(doc: dict) -> PaintingPlan:
    if not isinstance(doc, dict):
        raise FormatError("plan: top level must be a JSON object")
    unknown = set(doc) - _PLAN_KEYS
    if unknown:
        raise FormatError(f"plan: unknown keys {sorted(unknown)}")
    missing = _PLAN_KEYS - set(doc)
    if missing:
        raise FormatError(f"plan: missing keys {sorted(missing)}")
    for key in ("canvas_width_px", "canvas_height_px"):
        if isinstance(doc[key], bool) or not isinstance(doc[key], int):
            raise FormatError(f"plan: {key} must be an integer")
    if not isinstance(doc["strokes"], list):
        raise FormatError("plan: strokes must be a list")
    strokes = []
    for i, sd in enumerate(doc["strokes"]):
        where = f"plan stroke {i}"
        if not isinstance(sd, dict):
            raise FormatError(f"{where}: must be an object")
        unknown = set(sd) - _STROKE_KEYS
        if unknown:
            raise FormatError(f"{where}: unknown keys {sorted(unknown)}")
        missing = _STROKE_KEYS - set(sd)
        if missing:
            raise FormatError(f"{where}: missing keys {sorted(missing)}")
        strokes.append(StrokeParams(
            x=_require_number(sd, "x", where),
            y=_require_number(sd, "y", where),
            orientation=_require_number(sd, "orientation", where),
            length=_require_number(sd, "length", where),
            bend=_require_number(sd, "bend", where),
            thickness=_require_number(sd, "thickness", where),
            color=_rgb_triple(sd, "color", where),
            opacity=_require_number(sd, "opacity", where),
        ))
    plan = PaintingPlan(
        canvas_width_px=doc["canvas_width_px"],
        canvas_height_px=doc["canvas_height_px"],
        background=_rgb_triple(doc, "background", "plan"),
        strokes=strokes,
        softness=_require_number(doc, "softness", "plan"),
    )
    try:
        plan.validate_structure()
    except ParameterError as exc:
        raise FormatError(f"plan: {exc}") from exc
    return plan


def save_plan(plan: PaintingPlan, path) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n",
                          encoding="utf-8")


def load_plan(path) -> PaintingPlan:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p}: invalid JSON: {exc}") from exc
    return plan_from_dict(doc)
