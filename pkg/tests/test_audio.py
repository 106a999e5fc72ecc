import math

import numpy as np
import pytest
from scipy.io import wavfile

from conftest import sine, write_pcm16
from oracles import direct_dft_power, hz_to_pitch_class, naive_dct2_orthonormal
from synesthesia.audio import (FRAME_HOP, FRAME_LENGTH, LOG_FLOOR, AudioClip,
                               chromagram, decode_wav, extract_features,
                               hann_window, mel_filterbank, mel_spectrogram,
                               mfcc, stft_magnitude)
from synesthesia.errors import FormatError, ParameterError


class TestDecodeWav:
    def test_pcm16_scaling(self, tmp_path):
        p = tmp_path / "s.wav"
        wavfile.write(p, 16000, np.array([16384, -16384], dtype=np.int16))
        clip = decode_wav(p)
        assert np.array_equal(clip.samples, [0.5, -0.5])

    def test_stereo_mean_downmix(self, tmp_path):
        p = tmp_path / "st.wav"
        data = np.array([[32767, 0]], dtype=np.int16)
        wavfile.write(p, 16000, data)
        clip = decode_wav(p)
        assert clip.samples[0] == pytest.approx(0.5, abs=1e-4)

    def test_resample_preserves_low_sine(self, tmp_path):
        p = tmp_path / "8k.wav"
        n = 8000
        t8 = np.arange(n) / 8000.0
        wavfile.write(p, 8000, (0.5 * np.sin(2 * np.pi * 4.0 * t8)).astype(np.float32))
        clip = decode_wav(p)
        assert len(clip.samples) == pytest.approx(16000, abs=2)
        t16 = np.arange(len(clip.samples)) / 16000.0
        # interpolation never extrapolates past the source's last sample time
        expected = 0.5 * np.sin(2 * np.pi * 4.0 * np.minimum(t16, t8[-1]))
        assert np.abs(clip.samples - expected).max() < 0.01

    def test_float32_passthrough(self, tmp_path):
        p = tmp_path / "f.wav"
        x = np.array([0.25, -0.75], dtype=np.float32)
        wavfile.write(p, 16000, x)
        assert np.allclose(decode_wav(p).samples, x)

    def test_empty_data_rejected(self, tmp_path):
        p = tmp_path / "e.wav"
        wavfile.write(p, 16000, np.array([], dtype=np.int16))
        with pytest.raises(FormatError):
            decode_wav(p)

    def test_not_a_wav(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(b"RIFFgarbagegarbage")
        with pytest.raises(FormatError):
            decode_wav(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            decode_wav(tmp_path / "none.wav")


class TestStft:
    def test_zero_clip(self):
        mags = stft_magnitude(AudioClip(np.zeros(4096)))
        assert mags.shape == (13, 513)
        assert not mags.any()

    def test_1khz_argmax_bin_64(self):
        mags = stft_magnitude(AudioClip(sine(1000.0)))
        assert mags.shape[1] == 513
        assert np.all(np.argmax(mags, axis=1) == 64)

    def test_windowed_parseval_one_frame(self, rng):
        x = rng.uniform(-1, 1, FRAME_LENGTH)
        mags = stft_magnitude(AudioClip(x))
        windowed = hann_window(FRAME_LENGTH) * x
        two_sided = mags[0, 0] ** 2 + 2 * np.sum(mags[0, 1:-1] ** 2) + mags[0, -1] ** 2
        expected = FRAME_LENGTH * np.sum(windowed ** 2)
        assert two_sided == pytest.approx(expected, rel=1e-6)
        # and the direct O(N^2) DFT agrees with the rfft power
        assert direct_dft_power(windowed) == pytest.approx(two_sided, rel=1e-9)

    def test_magnitude_scaling_linearity(self, rng):
        x = rng.uniform(-0.25, 0.25, 3000)
        a = stft_magnitude(AudioClip(x))
        b = stft_magnitude(AudioClip(2.0 * x))
        assert np.abs(b - 2.0 * a).max() < 1e-9

    def test_short_clip_rejected(self):
        with pytest.raises(ParameterError):
            stft_magnitude(AudioClip(np.zeros(FRAME_LENGTH - 1)))

    def test_frame_count_rule(self):
        for n in (1024, 1279, 1280, 16000):
            mags = stft_magnitude(AudioClip(np.zeros(n)))
            assert mags.shape[0] == (n - FRAME_LENGTH) // FRAME_HOP + 1


class TestMel:
    def test_zero_input_hits_floor(self):
        mel = mel_spectrogram(np.zeros((3, 513)))
        assert mel.shape == (3, 64)
        assert np.allclose(mel, math.log(LOG_FLOOR))

    def test_band_center_sine_argmax(self):
        mel_of = lambda f: 2595.0 * math.log10(1.0 + f / 700.0)
        hz_of = lambda m: 700.0 * (10 ** (m / 2595.0) - 1.0)
        edges = np.linspace(0.0, mel_of(8000.0), 66)
        for band in (10, 30, 50):
            f = hz_of(edges[band + 1])
            feats = mel_spectrogram(stft_magnitude(AudioClip(sine(f))))
            assert np.all(np.argmax(feats, axis=1) == band)

    def test_filter_rows_triangular(self):
        fb = mel_filterbank()
        assert fb.shape == (64, 513)
        for row in fb:
            assert row.sum() > 0.0
            support = np.flatnonzero(row)
            assert np.array_equal(support,
                                  np.arange(support[0], support[-1] + 1))

    def test_bin_coverage(self):
        fb = mel_filterbank()
        freqs = np.arange(513) * (16000 / 1024)
        interior = (freqs > 0.0) & (freqs < 8000.0)
        weight = fb.sum(axis=0)
        uncovered = np.flatnonzero(interior & (weight == 0.0))
        assert uncovered.size <= 2   # only extreme edge bins may be uncovered


class TestMfcc:
    def test_constant_row_is_pure_dc(self):
        c = 1.7
        out = mfcc(np.full((2, 64), c))
        assert out.shape == (2, 20)
        assert out[0, 0] == pytest.approx(c * 8.0)   # c * sqrt(64)
        assert np.abs(out[:, 1:]).max() < 1e-9

    def test_matches_naive_dct(self, rng):
        row = rng.uniform(-3, 1, 64)
        ours = mfcc(row[None, :])[0]
        ref = naive_dct2_orthonormal(row, 20)
        assert np.abs(ours - ref).max() < 1e-9

    def test_dct_matrix_orthonormal(self):
        from synesthesia.audio import dct_matrix
        m = dct_matrix()
        gram = m @ m.T    # 20x20 block of the full orthonormal basis
        assert np.abs(gram - np.eye(20)).max() < 1e-9


class TestChroma:
    def test_a440_is_class_zero(self):
        ch = chromagram(stft_magnitude(AudioClip(sine(440.0))))
        assert hz_to_pitch_class(440.0) == 0
        assert np.all(np.argmax(ch, axis=1) == 0)

    def test_c4_is_class_three(self):
        ch = chromagram(stft_magnitude(AudioClip(sine(261.63))))
        assert hz_to_pitch_class(261.63) == 3
        assert np.all(np.argmax(ch, axis=1) == 3)

    def test_silent_frames_stay_zero(self):
        ch = chromagram(np.zeros((4, 513)))
        assert not ch.any()

    def test_l1_normalized(self):
        ch = chromagram(stft_magnitude(AudioClip(sine(523.25))))
        assert np.allclose(ch.sum(axis=1), 1.0)
        assert ch.min() >= 0.0


class TestExtractFeatures:
    def test_one_second_frame_count(self):
        feats = extract_features(AudioClip(sine(330.0, seconds=1.0)))
        assert feats.n_frames == 59
        assert feats.mel.shape == (59, 64)
        assert feats.mfcc.shape == (59, 20)
        assert feats.chroma.shape == (59, 12)

    def test_zero_clip_features(self):
        feats = extract_features(AudioClip(np.zeros(8000)))
        assert np.allclose(feats.mel, math.log(LOG_FLOOR))
        assert np.abs(feats.mfcc[:, 1:]).max() < 1e-9
        assert not feats.chroma.any()

    def test_deterministic(self):
        clip = AudioClip(sine(750.0, seconds=0.5))
        a = extract_features(clip)
        b = extract_features(clip)
        assert np.array_equal(a.mel, b.mel)
        assert np.array_equal(a.mfcc, b.mfcc)
        assert np.array_equal(a.chroma, b.chroma)

    def test_mel_floor_invariant(self):
        feats = extract_features(AudioClip(sine(100.0, seconds=0.3, amp=0.01)))
        assert feats.mel.min() >= math.log(LOG_FLOOR) - 1e-12
