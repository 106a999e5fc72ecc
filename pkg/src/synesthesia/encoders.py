"""Shared-latent-space encoders for images, audio features, and text.

The reference encoders are seeded random projections followed by tanh and
L2 normalization: cheap, deterministic stand-ins that share one embedding
dimension so cosine losses are defined across modalities.  Externally
trained substitutes can be shipped through the SYNW1 weight-file format.

Image path (the only one that needs a gradient): area-average the canvas
to 32x32, flatten to 3072, project with R ~ N(0,1)/sqrt(3072), add a
fixed bias 0.1*N(0,1) drawn from the same seeded stream, tanh, normalize.
"""

import dataclasses
import struct
from functools import lru_cache

import numpy as np

from .canvas import validate_image
from .errors import FormatError, ParameterError

EMBED_DIM = 128
_IMG_SIDE = 32
_IMG_FLAT = _IMG_SIDE * _IMG_SIDE * 3      # 3072
_AUDIO_POOL = 2 * (64 + 12)                # 152
_TEXT_BINS = 4096

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1

MAGIC = b"SYNW1"


@dataclasses.dataclass
class Embedding:
    values: np.ndarray   # (EMBED_DIM,), unit L2 norm


# ----------------------------------------------------------------- image

@lru_cache(maxsize=32)
def _area_weights(n_in, n_out):
    """Row-stochastic (n_out, n_in) averaging matrix: each output cell is
    the mean of the input interval it covers (partial pixels weighted by
    overlap)."""
    w = np.zeros((n_out, n_in))
    scale = n_in / n_out
    for i in range(n_out):
        lo, hi = i * scale, (i + 1) * scale
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, n_in)):
            overlap = min(hi, j + 1) - max(lo, j)
            if overlap > 0:
                w[i, j] = overlap / scale
    w.setflags(write=False)
    return w


def _pool_image(img):
    wr = _area_weights(img.shape[0], _IMG_SIDE)
    wc = _area_weights(img.shape[1], _IMG_SIDE)
    return np.einsum("ih,hwc,jw->ijc", wr, img, wc, optimize=True)


def _pool_image_vjp(grad_pooled, height, width):
    wr = _area_weights(height, _IMG_SIDE)
    wc = _area_weights(width, _IMG_SIDE)
    return np.einsum("ih,ijc,jw->hwc", wr, grad_pooled, wc, optimize=True)


@lru_cache(maxsize=8)
def _image_proj(seed):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((EMBED_DIM, _IMG_FLAT)) / np.sqrt(_IMG_FLAT)
    bias = 0.1 * rng.standard_normal(EMBED_DIM)
    r.setflags(write=False)
    bias.setflags(write=False)
    return r, bias


def encode_image(img, seed):
    validate_image(img)
    r, bias = _image_proj(seed)
    z = r @ _pool_image(img).ravel() + bias
    e = np.tanh(z)
    return Embedding(e / np.linalg.norm(e))


def encode_image_vjp(img, seed, upstream):
    """Gradient of upstream . encode_image(img) w.r.t. the pixels."""
    validate_image(img)
    upstream = np.asarray(upstream, dtype=np.float64)
    r, bias = _image_proj(seed)
    z = r @ _pool_image(img).ravel() + bias
    e = np.tanh(z)
    n = np.linalg.norm(e)
    # d(e/n) pullback, then tanh, then the linear stack
    ge = upstream / n - e * (e @ upstream) / n**3
    gz = ge * (1.0 - e * e)
    gflat = r.T @ gz
    return _pool_image_vjp(gflat.reshape(_IMG_SIDE, _IMG_SIDE, 3),
                           img.shape[0], img.shape[1])


# ----------------------------------------------------------------- audio

@lru_cache(maxsize=8)
def _audio_proj(seed):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((EMBED_DIM, _AUDIO_POOL)) / np.sqrt(_AUDIO_POOL)
    r.setflags(write=False)
    return r


def encode_audio(feats, seed):
    """Embedding of pooled audio features.

    Pooling order: mel mean (64), mel std (64), chroma mean (12),
    chroma std (12); population std.
    """
    if feats.n_frames < 1:
        raise ParameterError("cannot encode an empty feature stack")
    pooled = np.concatenate([feats.mel.mean(0), feats.mel.std(0),
                             feats.chroma.mean(0), feats.chroma.std(0)])
    e = np.tanh(_audio_proj(seed) @ pooled)
    return Embedding(e / np.linalg.norm(e))


# ------------------------------------------------------------------ text

def _fnv1a64(data):
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def text_trigram_counts(text):
    """4096-bin hashed character-trigram counts of the folded text."""
    if not text:
        raise ParameterError("cannot encode empty text")
    wrapped = "\x02" + text.lower() + "\x03"
    counts = np.zeros(_TEXT_BINS)
    for i in range(len(wrapped) - 2):
        counts[_fnv1a64(wrapped[i:i + 3].encode("utf-8")) % _TEXT_BINS] += 1.0
    return counts


@lru_cache(maxsize=8)
def _text_proj(seed):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((EMBED_DIM, _TEXT_BINS)) / np.sqrt(_TEXT_BINS)
    r.setflags(write=False)
    return r


def encode_text(text, seed):
    e = np.tanh(_text_proj(seed) @ text_trigram_counts(text))
    return Embedding(e / np.linalg.norm(e))


# ----------------------------------------------------------- weight files

def save_weight_file(path, tensors):
    """Write named float32 tensors in the SYNW1 layout."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype="<f4")
            nb = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<I", arr.ndim))
            for d in arr.shape:
                fh.write(struct.pack("<I", d))
            fh.write(arr.tobytes())


def load_weight_file(path):
    """Parse a SYNW1 file into {name: float32 array}."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:5] != MAGIC:
        raise FormatError(f"{path!r} is not a SYNW1 weight file")
    off = 5

    def take(n, what):
        nonlocal off
        if off + n > len(blob):
            raise FormatError(f"truncated weight file {path!r} while reading {what}")
        chunk = blob[off:off + n]
        off += n
        return chunk

    (count,) = struct.unpack("<I", take(4, "entry count"))
    out = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<I", take(4, "name length"))
        name = take(nlen, "name").decode("utf-8")
        if name in out:
            raise FormatError(f"duplicate tensor name {name!r} in {path!r}")
        (rank,) = struct.unpack("<I", take(4, "rank"))
        dims = struct.unpack(f"<{rank}I", take(4 * rank, "dims")) if rank else ()
        n_vals = int(np.prod(dims, dtype=np.int64)) if rank else 1
        data = np.frombuffer(take(4 * n_vals, f"data of {name!r}"), dtype="<f4")
        out[name] = data.reshape(dims).astype(np.float32)
    return out
