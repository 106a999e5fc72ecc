"""WAV decoding and audio features: STFT, log-mel, MFCC, chromagram.

Fixed pipeline parameters (documented, not configurable): 16 kHz mono,
window 1024, hop 256, periodic Hann, 64 HTK mel bands over 0..8000 Hz,
natural-log mel with floor 1e-10, 20 MFCCs (orthonormal DCT-II), 12
chroma classes referenced to A440. Framing keeps complete frames only:
n_frames = floor((len - 1024)/256) + 1, no padded tail frame.
"""

import dataclasses
from functools import lru_cache

import numpy as np
import scipy.io.wavfile

from .errors import FormatError, ParameterError

SAMPLE_RATE = 16000
FRAME_LENGTH = 1024
FRAME_HOP = 256
N_FFT_BINS = FRAME_LENGTH // 2 + 1   # 513
N_MEL = 64
N_MFCC = 20
N_CHROMA = 12
MEL_FMIN = 0.0
MEL_FMAX = 8000.0
LOG_FLOOR = 1e-10


@dataclasses.dataclass
class AudioClip:
    samples: np.ndarray          # mono float64 in [-1, 1]
    sample_rate_hz: int = SAMPLE_RATE


@dataclasses.dataclass
class FeatureStack:
    mel: np.ndarray              # (n_frames, 64) log-mel energies
    mfcc: np.ndarray             # (n_frames, 20)
    chroma: np.ndarray           # (n_frames, 12)
    frame_hop_samples: int = FRAME_HOP
    frame_length_samples: int = FRAME_LENGTH

    @property
    def n_frames(self):
        return self.mel.shape[0]


def decode_wav(path):
    """Load a RIFF WAV (PCM16 or float32, mono/stereo) as 16 kHz mono."""
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:  # scipy raises ValueError on malformed RIFF
        raise FormatError(f"cannot decode WAV file {path!r}: {exc}") from exc
    if data.size == 0:
        raise FormatError(f"WAV file {path!r} has an empty data chunk")
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise FormatError(
            f"unsupported WAV sample encoding {data.dtype}; need PCM16 or float32")
    if x.ndim == 2:
        if x.shape[1] > 2:
            raise FormatError(
                f"WAV file {path!r} has {x.shape[1]} channels; at most 2 supported")
        x = x.mean(axis=1)
    if rate != SAMPLE_RATE:
        n_out = max(1, int(round(len(x) * SAMPLE_RATE / rate)))
        # linear interpolation onto the 16 kHz grid
        x = np.interp(np.arange(n_out) * (rate / SAMPLE_RATE),
                      np.arange(len(x)), x)
    x = np.clip(x, -1.0, 1.0)
    return AudioClip(samples=x, sample_rate_hz=SAMPLE_RATE)


def hann_window(n):
    """Periodic (DFT-even) Hann window."""
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


def stft_magnitude(clip):
    """Magnitude STFT, (n_frames, 513). Complete frames only."""
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.ndim != 1:
        raise ParameterError("clip samples must be one-dimensional")
    if len(x) < FRAME_LENGTH:
        raise ParameterError(
            f"clip too short for STFT: {len(x)} < {FRAME_LENGTH} samples")
    frames = np.lib.stride_tricks.sliding_window_view(x, FRAME_LENGTH)[::FRAME_HOP]
    win = hann_window(FRAME_LENGTH)
    return np.abs(np.fft.rfft(frames * win, axis=1))


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=1)
def mel_filterbank():
    """(64, 513) triangular filters, HTK mel scale, 0..8000 Hz, unnormalized."""
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(MEL_FMIN), hz_to_mel(MEL_FMAX),
                                     N_MEL + 2))
    bin_hz = np.arange(N_FFT_BINS) * (SAMPLE_RATE / FRAME_LENGTH)
    fb = np.zeros((N_MEL, N_FFT_BINS))
    for m in range(N_MEL):
        lo, c, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        up = (bin_hz - lo) / (c - lo)
        down = (hi - bin_hz) / (hi - c)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    fb.setflags(write=False)
    return fb


def mel_spectrogram(stft):
    """Log power-mel energies, (n_frames, 64), natural log with floor 1e-10."""
    stft = np.asarray(stft, dtype=np.float64)
    if stft.ndim != 2 or stft.shape[1] != N_FFT_BINS:
        raise ParameterError(f"expected (n_frames, {N_FFT_BINS}) magnitudes")
    power = stft * stft
    mel = power @ mel_filterbank().T
    return np.log(np.maximum(mel, LOG_FLOOR))


@lru_cache(maxsize=1)
def dct_matrix():
    """Orthonormal DCT-II, first 20 rows of the 64x64 transform."""
    n = N_MEL
    i = np.arange(N_MFCC)[:, None]
    j = np.arange(n)[None, :]
    m = np.cos(np.pi * (j + 0.5) * i / n) * np.sqrt(2.0 / n)
    m[0] *= np.sqrt(0.5)
    m.setflags(write=False)
    return m


def mfcc(mel):
    """First 20 DCT-II coefficients of each log-mel frame."""
    mel = np.asarray(mel, dtype=np.float64)
    if mel.ndim != 2 or mel.shape[1] != N_MEL:
        raise ParameterError(f"expected (n_frames, {N_MEL}) log-mel input")
    return mel @ dct_matrix().T


@lru_cache(maxsize=1)
def _chroma_bins():
    """Pitch class per FFT bin (A440 reference); class -1 marks excluded bins."""
    bin_hz = np.arange(N_FFT_BINS) * (SAMPLE_RATE / FRAME_LENGTH)
    pc = np.full(N_FFT_BINS, -1, dtype=np.int64)
    audible = bin_hz >= 32.0
    pc[audible] = np.rint(12.0 * np.log2(bin_hz[audible] / 440.0)).astype(np.int64) % 12
    pc.setflags(write=False)
    return pc


def chromagram(stft):
    """Power folded onto 12 pitch classes (0 = A), L1-normalized per frame."""
    stft = np.asarray(stft, dtype=np.float64)
    if stft.ndim != 2 or stft.shape[1] != N_FFT_BINS:
        raise ParameterError(f"expected (n_frames, {N_FFT_BINS}) magnitudes")
    power = stft * stft
    pc = _chroma_bins()
    out = np.zeros((stft.shape[0], N_CHROMA))
    for c in range(N_CHROMA):
        sel = pc == c
        if sel.any():
            out[:, c] = power[:, sel].sum(axis=1)
    norms = out.sum(axis=1, keepdims=True)
    np.divide(out, norms, out=out, where=norms > 0.0)
    return out


def extract_features(clip):
    """Full feature stack from one clip; one shared STFT drives all three."""
    mags = stft_magnitude(clip)
    mel = mel_spectrogram(mags)
    return FeatureStack(mel=mel, mfcc=mfcc(mel), chroma=chromagram(mags))
