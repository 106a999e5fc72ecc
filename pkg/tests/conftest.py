import numpy as np
import pytest
from scipy.io import wavfile

from synesthesia.audio import FeatureStack
from synesthesia.emotion import DatasetLabel
from synesthesia.strokes import PaintingPlan, StrokeParams


def write_pcm16(path, samples, rate=16000):
    wavfile.write(path, rate, (np.asarray(samples) * 32767).astype(np.int16))
    return str(path)


def write_float32(path, samples, rate=16000):
    wavfile.write(path, rate, np.asarray(samples, dtype=np.float32))
    return str(path)


def sine(freq, seconds=1.0, rate=16000, amp=0.5):
    t = np.arange(int(round(seconds * rate))) / rate
    return amp * np.sin(2.0 * np.pi * freq * t)


def synthetic_ser_set(n_per_class=40, seed=0, separation=3.0, sigma=0.1):
    """Two linearly separable feature clusters labelled anger / sadness."""
    rng = np.random.default_rng(seed)
    data = []
    for center, label in ((+separation, DatasetLabel("ravdess", "angry")),
                          (-separation, DatasetLabel("ravdess", "sad"))):
        for _ in range(n_per_class):
            n_frames = int(rng.integers(6, 12))
            data.append((FeatureStack(
                mel=rng.normal(center, sigma, (n_frames, 64)),
                mfcc=rng.normal(center, sigma, (n_frames, 20)),
                chroma=rng.normal(center, sigma, (n_frames, 12))), label))
    return data


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def small_plan():
    return PaintingPlan(
        canvas_width_px=24, canvas_height_px=20,
        background=(1.0, 1.0, 1.0),
        strokes=[
            StrokeParams(x=0.35, y=0.45, orientation=0.4, length=0.3,
                         bend=0.05, thickness=0.04,
                         color=(0.8, 0.2, 0.1), opacity=0.9),
            StrokeParams(x=0.6, y=0.55, orientation=-1.9, length=0.22,
                         bend=-0.04, thickness=0.03,
                         color=(0.1, 0.5, 0.7), opacity=0.7),
        ],
        softness=0.01)
