"""Nine-class emotion taxonomy, cross-dataset label harmonization, the
speech-emotion classifier, and the differentiable image-emotion head.

Canonical class order (index 0..8): amusement, anger, awe, contentment,
disgust, excitement, fear, sadness, something-else. Awe and contentment
are unreachable from most speech datasets (their label sets simply have
no such row); that asymmetry is deliberate, not a gap to fill.
"""

import dataclasses
from functools import lru_cache

import numpy as np

from ._optim import Adam
from .encoders import EMBED_DIM, encode_image, encode_image_vjp
from .errors import FormatError, MappingError, ParameterError

EMOTIONS = ("amusement", "anger", "awe", "contentment", "disgust",
            "excitement", "fear", "sadness", "something-else")
N_CLASSES = len(EMOTIONS)

SER_INPUT_DIM = 104
SER_HIDDEN = 64

# Harmonization table: dataset -> {label -> canonical index}. Blank cells
# in the source correspondence are absent keys, never guessed.
_TABLE = {
    "artemis": {name: i for i, name in enumerate(EMOTIONS)},
    "ravdess": {"happy": 0, "angry": 1, "calm": 3, "disgust": 4,
                "surprise": 5, "fear": 6, "sad": 7, "neutral": 8},
    "crema": {"hap": 0, "ang": 1, "dis": 4, "fea": 6, "sad": 7, "neu": 8},
    "tess": {"happy": 0, "angry": 1, "disgust": 4, "surprise": 5,
             "fear": 6, "sad": 7, "neutral": 8},
    "sav": {"a": 1, "d": 4, "su": 5, "f": 6, "sa": 7, "n": 8},
    "iemocap": {"hap": 0, "exc": 0, "fru": 1, "ang": 1, "dis": 4,
                "sur": 5, "fea": 6, "sad": 7, "neu": 8, "xxx": 8, "oth": 8},
}
# "something else" with a space is accepted for the artemis column
_TABLE["artemis"]["something else"] = 8


@dataclasses.dataclass
class EmotionDistribution:
    probs: np.ndarray   # (9,), simplex

    @property
    def argmax_name(self):
        return EMOTIONS[int(np.argmax(self.probs))]


@dataclasses.dataclass
class DatasetLabel:
    dataset: str
    label: str


def canonical_emotion(name):
    """Index of a canonical emotion name (space or hyphen both accepted)."""
    folded = name.strip().lower().replace(" ", "-")
    if folded not in EMOTIONS:
        raise MappingError(f"unknown emotion name {name!r}")
    return EMOTIONS.index(folded)


def map_label(dl):
    """Harmonize one dataset label to its canonical emotion index."""
    ds = dl.dataset.strip().lower()
    if ds not in _TABLE:
        raise MappingError(f"unknown dataset {dl.dataset!r}")
    lab = dl.label.strip().lower()
    idx = _TABLE[ds].get(lab)
    if idx is None:
        raise MappingError(f"dataset {dl.dataset!r} has no label {dl.label!r}")
    return idx


def one_hot(index):
    v = np.zeros(N_CLASSES)
    v[index] = 1.0
    return v


def softmax(logits):
    z = logits - np.max(logits)
    e = np.exp(z)
    return e / e.sum()


# --------------------------------------------------------- speech branch

_MEL_SUBSAMPLE = np.arange(20) * 64 // 20   # 20 of the 64 mel bands


def pooled_stats(feats):
    """104-dim pooled classifier input.

    Ordering: mfcc mean (20), mfcc std (20), chroma mean (12), chroma
    std (12), subsampled-mel mean (20), subsampled-mel std (20);
    population std throughout.
    """
    if feats.n_frames < 1:
        raise ParameterError("cannot pool an empty feature stack")
    mel = feats.mel[:, _MEL_SUBSAMPLE]
    return np.concatenate([
        feats.mfcc.mean(0), feats.mfcc.std(0),
        feats.chroma.mean(0), feats.chroma.std(0),
        mel.mean(0), mel.std(0),
    ])


_SER_SHAPES = {"w1": (SER_HIDDEN, SER_INPUT_DIM), "b1": (SER_HIDDEN,),
               "w2": (N_CLASSES, SER_HIDDEN), "b2": (N_CLASSES,)}


def _check_ser_weights(weights):
    for name, shape in _SER_SHAPES.items():
        if name not in weights:
            raise FormatError(f"classifier weights missing tensor {name!r}")
        got = np.asarray(weights[name])
        if got.shape != shape:
            raise FormatError(
                f"classifier tensor {name!r} has shape {got.shape}, expected {shape}")


def _ser_logits(x, weights):
    h = np.tanh(np.asarray(weights["w1"], dtype=np.float64) @ x
                + np.asarray(weights["b1"], dtype=np.float64))
    return np.asarray(weights["w2"], dtype=np.float64) @ h \
        + np.asarray(weights["b2"], dtype=np.float64), h


def speech_emotion(feats, weights):
    """Emotion distribution of one clip's features under given weights."""
    _check_ser_weights(weights)
    logits, _ = _ser_logits(pooled_stats(feats), weights)
    return EmotionDistribution(softmax(logits))


@dataclasses.dataclass
class TrainResult:
    weights: dict
    loss_history: np.ndarray   # (epochs+1,): [0] is the initial loss
    accuracy: float


def train_speech_classifier(dataset, epochs=200, lr=1e-3, seed=0):
    """Full-batch Adam on mean cross-entropy over harmonized labels."""
    if not dataset:
        raise ParameterError("empty training set")
    x = np.stack([pooled_stats(f) for f, _ in dataset])       # (n, 104)
    y = np.array([map_label(dl) for _, dl in dataset])
    if len(set(y.tolist())) < 2:
        raise ParameterError("training needs at least two distinct classes")
    n = len(y)
    onehot = np.zeros((n, N_CLASSES))
    onehot[np.arange(n), y] = 1.0

    rng = np.random.default_rng(seed)
    w1 = rng.standard_normal((SER_HIDDEN, SER_INPUT_DIM)) / np.sqrt(SER_INPUT_DIM)
    b1 = np.zeros(SER_HIDDEN)
    w2 = rng.standard_normal((N_CLASSES, SER_HIDDEN)) / np.sqrt(SER_HIDDEN)
    b2 = np.zeros(N_CLASSES)
    params = [w1, b1, w2, b2]

    def forward():
        h = np.tanh(x @ w1.T + b1)                            # (n, 64)
        logits = h @ w2.T + b2
        z = logits - logits.max(1, keepdims=True)
        ez = np.exp(z)
        p = ez / ez.sum(1, keepdims=True)
        loss = -np.mean(np.log(np.maximum(p[np.arange(n), y], 1e-300)))
        return h, p, loss

    opt = Adam(params, lr=lr)
    history = np.zeros(epochs + 1)
    for epoch in range(epochs):
        h, p, history[epoch] = forward()
        glogit = (p - onehot) / n                             # (n, 9)
        gw2 = glogit.T @ h
        gb2 = glogit.sum(0)
        gh = glogit @ w2 * (1.0 - h * h)
        gw1 = gh.T @ x
        gb1 = gh.sum(0)
        opt.step(params, [gw1, gb1, gw2, gb2])
    _, p, history[epochs] = forward()
    acc = float(np.mean(p.argmax(1) == y))
    weights = {"w1": w1, "b1": b1, "w2": w2, "b2": b2}
    return TrainResult(weights=weights, loss_history=history, accuracy=acc)


# ---------------------------------------------------------- image branch

_HEAD_SHAPES = {"we": (N_CLASSES, EMBED_DIM), "be": (N_CLASSES,)}


@lru_cache(maxsize=8)
def _default_head(seed):
    # distinct stream from the encoder projections for the same seed
    rng = np.random.default_rng([seed, N_CLASSES])
    we = rng.standard_normal((N_CLASSES, EMBED_DIM))
    be = np.zeros(N_CLASSES)
    we.setflags(write=False)
    be.setflags(write=False)
    return {"we": we, "be": be}


def _head(weights, seed):
    if weights is None:
        return _default_head(seed)
    for name, shape in _HEAD_SHAPES.items():
        if name not in weights:
            raise FormatError(f"emotion head missing tensor {name!r}")
        got = np.asarray(weights[name])
        if got.shape != shape:
            raise FormatError(
                f"emotion head tensor {name!r} has shape {got.shape}, expected {shape}")
    return weights


def image_emotion(img, weights=None, seed=0):
    """Differentiable emotion read-out of a rendered canvas."""
    head = _head(weights, seed)
    emb = encode_image(img, seed)
    logits = np.asarray(head["we"], dtype=np.float64) @ emb.values \
        + np.asarray(head["be"], dtype=np.float64)
    return EmotionDistribution(softmax(logits))


def image_emotion_vjp(img, upstream, weights=None, seed=0):
    """Gradient of upstream . image_emotion(img).probs w.r.t. pixels."""
    head = _head(weights, seed)
    we = np.asarray(head["we"], dtype=np.float64)
    emb = encode_image(img, seed)
    p = softmax(we @ emb.values + np.asarray(head["be"], dtype=np.float64))
    upstream = np.asarray(upstream, dtype=np.float64)
    glogits = p * (upstream - p @ upstream)    # softmax pullback
    gemb = we.T @ glogits
    return encode_image_vjp(img, seed, gemb)
