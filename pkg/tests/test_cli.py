"""End-to-end drives of the console entry point (in-process via main())."""

import json

import numpy as np
import pytest

from conftest import sine, write_pcm16
from synesthesia.canvas import load_png, save_png
from synesthesia.cli import main
from synesthesia.emotion import EMOTIONS
from synesthesia.encoders import save_weight_file
from synesthesia.render import render_plan
from synesthesia.strokes import init_plan, load_plan, save_plan


def write_config(path, **overrides):
    doc = {
        "canvas": {"width_px": 32, "height_px": 32},
        "strokes": {"count": 8},
        "objective": {"terms": [{"kind": "pixel_l2", "weight": 1.0,
                                 "target_image_path": "target.png"}]},
        "optimizer": {"iterations": 60, "seed": 7},
        "outputs": {"dir": "run"},
    }
    doc.update(overrides)
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


@pytest.fixture
def pixel_config(tmp_path):
    target = np.zeros((32, 32, 3))
    target[:] = (0.15, 0.55, 0.85)
    save_png(target, str(tmp_path / "target.png"))
    return write_config(tmp_path / "run.json")


class TestPaint:
    def test_artifacts_and_descent(self, pixel_config, tmp_path, capsys):
        assert main(["paint", "--config", str(pixel_config)]) == 0
        out = tmp_path / "run"
        for name in ("plan.json", "painting.png", "loss.csv", "meta.json"):
            assert (out / name).exists(), name

        rows = (out / "loss.csv").read_text().strip().splitlines()
        assert rows[0] == "iteration,total,pixel_l2"
        first = float(rows[1].split(",")[1])
        last = float(rows[-1].split(",")[1])
        assert last <= 0.1 * first

        meta = json.loads((out / "meta.json").read_text())
        assert meta["iterations_run"] == 60
        assert meta["best_loss"] <= meta["initial_loss"]
        assert meta["config"]["optimizer"]["seed"] == 7
        # painting.png replays from plan.json within quantization error
        plan = load_plan(str(out / "plan.json"))
        png = load_png(str(out / "painting.png"))
        assert np.abs(png - render_plan(plan)).max() <= 1.0 / 255.0 + 1e-12

    def test_same_seed_same_bytes(self, pixel_config, tmp_path):
        assert main(["paint", "--config", str(pixel_config),
                     "--out-dir", str(tmp_path / "a")]) == 0
        assert main(["paint", "--config", str(pixel_config),
                     "--out-dir", str(tmp_path / "b")]) == 0
        for name in ("plan.json", "painting.png", "loss.csv"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes(), name

    def test_missing_wav_is_config_error(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "bad.json",
            objective={"terms": [{"kind": "natural_sound", "weight": 1.0,
                                  "wav_path": "nope.wav"}]})
        assert main(["paint", "--config", str(cfg)]) == 2
        assert "nope.wav" in capsys.readouterr().err

    def test_unknown_key_rejected(self, pixel_config, tmp_path, capsys):
        doc = json.loads(pixel_config.read_text())
        doc["brushes"] = {}
        pixel_config.write_text(json.dumps(doc))
        assert main(["paint", "--config", str(pixel_config)]) == 2
        assert "brushes" in capsys.readouterr().err

    def test_wrong_encoder_dim_rejected(self, pixel_config, capsys):
        doc = json.loads(pixel_config.read_text())
        doc["encoder"] = {"dim": 64}
        pixel_config.write_text(json.dumps(doc))
        assert main(["paint", "--config", str(pixel_config)]) == 2

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["paint", "--config", str(tmp_path / "ghost.json")]) == 3


class TestRender:
    def test_replay(self, tmp_path):
        plan = init_plan("uniform-random", 5, 3, width_px=40, height_px=28)
        save_plan(plan, str(tmp_path / "p.json"))
        out = tmp_path / "r.png"
        assert main(["render", "--plan", str(tmp_path / "p.json"),
                     "--out", str(out)]) == 0
        assert np.abs(load_png(str(out)) - render_plan(plan)).max() \
            <= 1.0 / 255.0 + 1e-12

    def test_empty_plan_renders_background(self, tmp_path):
        plan = init_plan("uniform-random", 1, 0, width_px=10, height_px=10)
        plan.strokes.clear()
        plan.background = (1.0, 0.0, 0.0)
        save_plan(plan, str(tmp_path / "p.json"))
        assert main(["render", "--plan", str(tmp_path / "p.json"),
                     "--out", str(tmp_path / "r.png")]) == 0
        img = load_png(str(tmp_path / "r.png"))
        assert np.abs(img - np.array([1.0, 0.0, 0.0])).max() <= 1.0 / 255.0

    def test_malformed_plan(self, tmp_path):
        (tmp_path / "p.json").write_text("{not json")
        assert main(["render", "--plan", str(tmp_path / "p.json"),
                     "--out", str(tmp_path / "r.png")]) == 2


class TestFeatures:
    def test_sine_chroma(self, tmp_path):
        wav = tmp_path / "a.wav"
        write_pcm16(str(wav), sine(440.0, seconds=0.5))
        out = tmp_path / "f.json"
        assert main(["features", "--wav", str(wav), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        chroma = np.array(doc["chroma"])
        assert doc["n_frames"] == chroma.shape[0]
        assert (chroma.argmax(axis=1) == 0).all()  # every frame lands on A
        assert len(doc["mfcc"][0]) == 20
        assert len(doc["log_mel"][0]) == 64

    def test_silence_has_empty_chroma(self, tmp_path):
        wav = tmp_path / "s.wav"
        write_pcm16(str(wav), np.zeros(16000))
        out = tmp_path / "f.json"
        assert main(["features", "--wav", str(wav), "--out", str(out)]) == 0
        assert np.array(json.loads(out.read_text())["chroma"]).max() == 0.0

    def test_missing_wav(self, tmp_path):
        assert main(["features", "--wav", str(tmp_path / "no.wav"),
                     "--out", str(tmp_path / "f.json")]) == 3


class TestEmotion:
    def _weights(self, path, bias_class=None):
        tensors = {"w1": np.zeros((64, 104)), "b1": np.zeros(64),
                   "w2": np.zeros((9, 64)), "b2": np.zeros(9)}
        if bias_class is not None:
            tensors["b2"][EMOTIONS.index(bias_class)] = 10.0
        save_weight_file(str(path), tensors)

    def test_zero_weights_uniform(self, tmp_path):
        wav, wts, out = tmp_path / "a.wav", tmp_path / "w.synw", tmp_path / "e.json"
        write_pcm16(str(wav), sine(300.0, seconds=0.3))
        self._weights(wts)
        assert main(["emotion", "--wav", str(wav), "--weights", str(wts),
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["emotions"] == list(EMOTIONS)
        assert np.allclose(doc["probs"], 1.0 / 9.0)

    def test_bias_sets_argmax(self, tmp_path):
        wav, wts, out = tmp_path / "a.wav", tmp_path / "w.synw", tmp_path / "e.json"
        write_pcm16(str(wav), sine(200.0, seconds=0.3))
        self._weights(wts, bias_class="anger")
        assert main(["emotion", "--wav", str(wav), "--weights", str(wts),
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["argmax"] == "anger"

    def test_bad_shapes(self, tmp_path):
        wav, wts = tmp_path / "a.wav", tmp_path / "w.synw"
        write_pcm16(str(wav), sine(200.0, seconds=0.3))
        save_weight_file(str(wts), {"w1": np.zeros((3, 3))})
        assert main(["emotion", "--wav", str(wav), "--weights", str(wts),
                     "--out", str(tmp_path / "e.json")]) == 2


class TestGradcheck:
    def test_passes_and_reports_each_component(self, capsys):
        assert main(["gradcheck", "--configs", "2", "--seed", "1"]) == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if l]
        assert len(lines) == 6
        names = [l.split()[0] for l in lines]
        assert sorted(names) == sorted(["renderer", "augmentations",
                                        "image_encoder", "image_emotion",
                                        "pixel_l2", "natural_sound"])
        assert all(l.endswith("PASS") for l in lines)

    def test_corrupt_hook_fails(self, monkeypatch, capsys):
        monkeypatch.setenv("SYNESTHESIA_CORRUPT_VJP", "renderer")
        assert main(["gradcheck", "--configs", "2", "--seed", "1"]) == 4
        out = capsys.readouterr().out
        assert "renderer" in out and "FAIL" in out


class TestUsage:
    def test_no_command(self, capsys):
        assert main([]) == 2

    def test_unknown_command(self, capsys):
        assert main(["compose"]) == 2

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert capsys.readouterr().out.strip()
