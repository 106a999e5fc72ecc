"""Canvas images, PNG I/O, bilinear sampling, and augmentation views.

An image is a float64 array of shape (height, width, 3) with channels in
[0, 1].  Continuous coordinates put the center of pixel (row i, col j) at
(u=j, v=i); sampling clamps to the edge, so out-of-range coordinates repeat
the border pixel.

Augmentation produces ``count + 1`` square views of an image: view 0 is the
full image resized to the output size, the rest are random square crops with
their four corners jittered independently (a perspective warp), resampled
bilinearly.  The warp geometry depends only on the AugmentationSpec and its
seed (not on the pixels), so each view is a linear function of the image and
the VJP is exact.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, ParameterError


def new_canvas(width_px: int, height_px: int, color=(1.0, 1.0, 1.0)) -> np.ndarray:
    if width_px < 1 or height_px < 1:
        raise ParameterError(f"canvas must be at least 1x1, got {width_px}x{height_px}")
    img = np.empty((height_px, width_px, 3), dtype=np.float64)
    img[:, :] = np.asarray(color, dtype=np.float64)
    return img


def validate_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ParameterError(f"image must have shape (H, W, 3), got {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ParameterError("image contains non-finite values")
    return img.astype(np.float64, copy=False)


def load_png(path) -> np.ndarray:
    """Load an 8-bit RGB or RGBA PNG; alpha is composited over white."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {p}")
    try:
        with Image.open(p) as im:
            if (im.format or "").upper() != "PNG":
                raise FormatError(f"{p}: not a PNG file (format={im.format})")
            mode = im.mode
            if mode not in ("RGB", "RGBA"):
                raise FormatError(f"{p}: unsupported PNG mode {mode!r}, need 8-bit RGB or RGBA")
            arr = np.asarray(im, dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise FormatError(f"{p}: cannot decode PNG: {exc}") from exc
    if mode == "RGBA":
        a = arr[:, :, 3:4]
        arr = arr[:, :, :3] * a + (1.0 - a)
    return arr


def save_png(img: np.ndarray, path) -> None:
    """Write an image as 8-bit RGB PNG; quantization is round(v*255), clamped."""
    img = validate_image(img)
    q = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(q, "RGB").save(str(path), format="PNG")


def _sample_grid(img: np.ndarray, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Bilinear gather at continuous coords (clamp to edge). us, vs same shape."""
    h, w = img.shape[0], img.shape[1]
    u = np.clip(us, 0.0, float(w - 1))
    v = np.clip(vs, 0.0, float(h - 1))
    x0 = np.floor(u).astype(np.int64)
    y0 = np.floor(v).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (u - x0)[..., None]
    fy = (v - y0)[..., None]
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def _scatter_grid(g_img: np.ndarray, us: np.ndarray, vs: np.ndarray,
                  upstream: np.ndarray) -> None:
    """Transpose of _sample_grid: scatter-add upstream into g_img in place."""
    h, w = g_img.shape[0], g_img.shape[1]
    u = np.clip(us, 0.0, float(w - 1))
    v = np.clip(vs, 0.0, float(h - 1))
    x0 = np.floor(u).astype(np.int64)
    y0 = np.floor(v).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (u - x0)[..., None]
    fy = (v - y0)[..., None]
    np.add.at(g_img, (y0, x0), upstream * (1.0 - fx) * (1.0 - fy))
    np.add.at(g_img, (y0, x1), upstream * fx * (1.0 - fy))
    np.add.at(g_img, (y1, x0), upstream * (1.0 - fx) * fy)
    np.add.at(g_img, (y1, x1), upstream * fx * fy)


def sample_bilinear(img: np.ndarray, u: float, v: float) -> np.ndarray:
    """Bilinearly interpolated RGB at continuous (u, v), clamped to the edge."""
    img = validate_image(img)
    return _sample_grid(img, np.asarray(float(u)), np.asarray(float(v)))


@dataclass(frozen=True)
class AugmentationSpec:
    """Parameters of the random crop / perspective view stack."""
    count: int = 8
    min_crop_fraction: float = 0.7
    max_corner_jitter_fraction: float = 0.05
    output_size_px: int = 64
    seed: int = 0

    def validate(self) -> "AugmentationSpec":
        if self.count < 0:
            raise ParameterError(f"augmentation count must be >= 0, got {self.count}")
        if not (0.0 < self.min_crop_fraction <= 1.0):
            raise ParameterError(
                f"min_crop_fraction must be in (0, 1], got {self.min_crop_fraction}")
        if not (0.0 <= self.max_corner_jitter_fraction <= 0.2):
            raise ParameterError(
                "max_corner_jitter_fraction must be in [0, 0.2], got "
                f"{self.max_corner_jitter_fraction}")
        if self.output_size_px < 8:
            raise ParameterError(
                f"output_size_px must be >= 8, got {self.output_size_px}")
        return self


def _homography(src_corners: np.ndarray, out_size: int) -> np.ndarray:
    """3x3 map sending output corner pixel centers onto src_corners."""
    s = float(out_size - 1)
    oc = np.array([[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]])
    m = np.zeros((8, 8))
    rhs = np.zeros(8)
    for i in range(4):
        xo, yo = oc[i]
        xs, ys = src_corners[i]
        m[2 * i] = [xo, yo, 1.0, 0.0, 0.0, 0.0, -xo * xs, -yo * xs]
        m[2 * i + 1] = [0.0, 0.0, 0.0, xo, yo, 1.0, -xo * ys, -yo * ys]
        rhs[2 * i] = xs
        rhs[2 * i + 1] = ys
    try:
        sol = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise ParameterError(f"degenerate perspective warp: {exc}") from exc
    return np.array([[sol[0], sol[1], sol[2]],
                     [sol[3], sol[4], sol[5]],
                     [sol[6], sol[7], 1.0]])


@functools.lru_cache(maxsize=128)
def _view_grids(width: int, height: int, spec: AugmentationSpec):
    """Per-view sampling grids (us, vs), each (S, S). Cached; treat read-only."""
    spec.validate()
    s_out = spec.output_size_px
    xo = np.arange(s_out, dtype=np.float64)[None, :].repeat(s_out, axis=0)
    yo = np.arange(s_out, dtype=np.float64)[:, None].repeat(s_out, axis=1)
    grids = []

    # View 0: the full frame, a plain axis-aligned resize.
    sx = (width - 1) / (s_out - 1)
    sy = (height - 1) / (s_out - 1)
    grids.append((xo * sx, yo * sy))

    rng = np.random.default_rng(spec.seed)
    short = float(min(width, height))
    for _ in range(spec.count):
        frac = rng.uniform(spec.min_crop_fraction, 1.0)
        side = frac * short
        if side < 2.0:
            raise ParameterError(
                f"degenerate crop: side {side:.3f} px < 2 px "
                f"(image {width}x{height}, fraction {frac:.4f})")
        cx = rng.uniform(0.0, width - side)
        cy = rng.uniform(0.0, height - side)
        r = side - 1.0
        corners = np.array([[cx, cy], [cx + r, cy], [cx + r, cy + r], [cx, cy + r]])
        jit = spec.max_corner_jitter_fraction * side
        for c in range(4):
            corners[c, 0] += rng.uniform(-jit, jit)
            corners[c, 1] += rng.uniform(-jit, jit)
        hm = _homography(corners, s_out)
        wdiv = hm[2, 0] * xo + hm[2, 1] * yo + hm[2, 2]
        if np.any(np.abs(wdiv) < 1e-9):
            raise ParameterError("degenerate perspective warp (vanishing denominator)")
        us = (hm[0, 0] * xo + hm[0, 1] * yo + hm[0, 2]) / wdiv
        vs = (hm[1, 0] * xo + hm[1, 1] * yo + hm[1, 2]) / wdiv
        grids.append((us, vs))
    for us, vs in grids:
        us.flags.writeable = False
        vs.flags.writeable = False
    return tuple(grids)


def augment_views(img: np.ndarray, spec: AugmentationSpec) -> list[np.ndarray]:
    """Deterministic view stack of ``spec.count + 1`` square images in [0, 1]."""
    img = validate_image(img)
    grids = _view_grids(img.shape[1], img.shape[0], spec)
    return [_sample_grid(img, us, vs) for us, vs in grids]


def augment_views_vjp(height: int, width: int, spec: AugmentationSpec,
                      upstream_views) -> np.ndarray:
    """Gradient of augment_views w.r.t. the source image.

    upstream_views must hold one (S, S, 3) gradient per view, in view order.
    """
    grids = _view_grids(width, height, spec)
    if len(upstream_views) != len(grids):
        raise ParameterError(
            f"expected {len(grids)} upstream views, got {len(upstream_views)}")
    g = np.zeros((height, width, 3), dtype=np.float64)
    for (us, vs), up in zip(grids, upstream_views):
        up = np.asarray(up, dtype=np.float64)
        if up.shape != (spec.output_size_px, spec.output_size_px, 3):
            raise ParameterError(f"upstream view has shape {up.shape}")
        _scatter_grid(g, us, vs, up)
    return g
