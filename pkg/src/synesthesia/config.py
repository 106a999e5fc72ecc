"""Strict JSON run configuration for the paint pipeline.

Validation is schema-strict: unknown keys are rejected so a typo cannot
silently fall back to a default, and every file a config references must
exist when the config is loaded. ``load_config`` only validates;
``build_objective`` / ``build_initial_plan`` read the referenced files.
The fully-resolved settings (every default filled in) are kept on the
returned ``PaintConfig.resolved`` for the run's meta.json.
"""

import copy
import dataclasses
import json
import math
import os

import numpy as np

from .audio import decode_wav, extract_features
from .canvas import AugmentationSpec, load_png
from .emotion import EmotionDistribution, canonical_emotion, one_hot, speech_emotion
from .encoders import EMBED_DIM, load_weight_file
from .errors import FormatError, ParameterError
from .objective import ObjectiveSpec, OptimizerConfig, Term
from .strokes import DEFAULT_SOFTNESS, init_plan

_TERM_KEYS = {
    "natural_sound": {"wav_path"},
    "speech_text": {"transcript_path", "text"},
    "speech_emotion": {"wav_path", "ser_weights"},
    "pixel_l2": {"target_image_path"},
    "direct_emotion": {"emotion"},
}

_DEFAULTS = {
    "canvas": {"width_px": 64, "height_px": 64,
               "background_rgb": [1.0, 1.0, 1.0]},
    "strokes": {"count": 20, "init": "uniform-random",
                "softness": DEFAULT_SOFTNESS},
    "objective": {"terms": None,
                  "augmentation": {"count": 8, "min_crop_fraction": 0.7,
                                   "max_corner_jitter_fraction": 0.05,
                                   "output_size_px": 64, "seed": 0}},
    "optimizer": {"iterations": 250, "lr_geometry": 1e-2, "lr_color": 5e-2,
                  "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8, "seed": 0},
    "encoder": {"dim": EMBED_DIM, "seed": 0, "weight_file": None},
    "outputs": {"dir": "out"},
}


@dataclasses.dataclass
class PaintConfig:
    canvas: dict
    strokes: dict
    terms: list          # normalized term dicts, paths made absolute
    augmentation: AugmentationSpec
    optimizer: OptimizerConfig
    encoder_seed: int
    weight_file: str
    out_dir: str
    resolved: dict       # full config with every default filled in


def _reject_unknown(obj, allowed, where):
    extra = set(obj) - set(allowed)
    if extra:
        raise ParameterError(
            f"unknown key(s) {sorted(extra)} in {where}; allowed: {sorted(allowed)}")


def _merged(section, user, where):
    if not isinstance(user, dict):
        raise ParameterError(f"{where} must be an object")
    _reject_unknown(user, _DEFAULTS[section], where)
    out = copy.deepcopy(_DEFAULTS[section])
    out.update(user)
    return out


def _need_int(val, where, lo=None):
    if not isinstance(val, int) or isinstance(val, bool):
        raise ParameterError(f"{where} must be an integer, got {val!r}")
    if lo is not None and val < lo:
        raise ParameterError(f"{where} must be >= {lo}, got {val}")
    return val


def _need_number(val, where, lo=None, hi=None):
    if isinstance(val, bool) or not isinstance(val, (int, float)) \
            or not math.isfinite(val):
        raise ParameterError(f"{where} must be a finite number, got {val!r}")
    if lo is not None and val < lo:
        raise ParameterError(f"{where} must be >= {lo}, got {val}")
    if hi is not None and val > hi:
        raise ParameterError(f"{where} must be <= {hi}, got {val}")
    return float(val)


def _need_rgb(val, where):
    if (not isinstance(val, (list, tuple)) or len(val) != 3
            or any(isinstance(c, bool) or not isinstance(c, (int, float))
                   for c in val)):
        raise ParameterError(f"{where} must be a list of 3 numbers")
    return [_need_number(c, f"{where}[{i}]", 0.0, 1.0)
            for i, c in enumerate(val)]


def _need_path(val, where, base_dir):
    if not isinstance(val, str) or not val:
        raise ParameterError(f"{where} must be a non-empty path string")
    path = val if os.path.isabs(val) else os.path.join(base_dir, val)
    if not os.path.isfile(path):
        raise ParameterError(f"{where}: file not found: {path}")
    return path


def _parse_terms(terms, base_dir):
    if not isinstance(terms, list) or not terms:
        raise ParameterError("objective.terms must be a non-empty list")
    out = []
    for i, t in enumerate(terms):
        where = f"objective.terms[{i}]"
        if not isinstance(t, dict):
            raise ParameterError(f"{where} must be an object")
        kind = t.get("kind")
        if kind not in _TERM_KEYS:
            raise ParameterError(
                f"{where}.kind must be one of {sorted(_TERM_KEYS)}, got {kind!r}")
        _reject_unknown(t, {"kind", "weight"} | _TERM_KEYS[kind], where)
        norm = {"kind": kind,
                "weight": _need_number(t.get("weight", 1.0),
                                       f"{where}.weight", lo=0.0)}
        if kind == "natural_sound":
            norm["wav_path"] = _need_path(t.get("wav_path"),
                                          f"{where}.wav_path", base_dir)
        elif kind == "speech_text":
            has_path = "transcript_path" in t
            has_text = "text" in t
            if has_path == has_text:
                raise ParameterError(
                    f"{where} needs exactly one of transcript_path / text")
            if has_path:
                norm["transcript_path"] = _need_path(
                    t["transcript_path"], f"{where}.transcript_path", base_dir)
            else:
                if not isinstance(t["text"], str) or not t["text"]:
                    raise ParameterError(f"{where}.text must be a non-empty string")
                norm["text"] = t["text"]
        elif kind == "speech_emotion":
            norm["wav_path"] = _need_path(t.get("wav_path"),
                                          f"{where}.wav_path", base_dir)
            norm["ser_weights"] = _need_path(t.get("ser_weights"),
                                             f"{where}.ser_weights", base_dir)
        elif kind == "pixel_l2":
            norm["target_image_path"] = _need_path(
                t.get("target_image_path"), f"{where}.target_image_path", base_dir)
        else:  # direct_emotion
            name = t.get("emotion")
            if not isinstance(name, str):
                raise ParameterError(f"{where}.emotion must be a string")
            canonical_emotion(name)   # raises MappingError on unknown names
            norm["emotion"] = name
        out.append(norm)
    return out


def load_config(path):
    """Parse and validate a run config; raises ParameterError/FormatError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParameterError("config root must be a JSON object")
    _reject_unknown(doc, _DEFAULTS, "config")
    if "objective" not in doc:
        raise ParameterError("config is missing the 'objective' section")
    base_dir = os.path.dirname(os.path.abspath(path))

    canvas = _merged("canvas", doc.get("canvas", {}), "canvas")
    _need_int(canvas["width_px"], "canvas.width_px", lo=1)
    _need_int(canvas["height_px"], "canvas.height_px", lo=1)
    canvas["background_rgb"] = _need_rgb(canvas["background_rgb"],
                                         "canvas.background_rgb")

    strokes = _merged("strokes", doc.get("strokes", {}), "strokes")
    _need_int(strokes["count"], "strokes.count", lo=1)
    if strokes["init"] not in ("uniform-random", "image-seeded"):
        raise ParameterError(
            f"strokes.init must be uniform-random or image-seeded, "
            f"got {strokes['init']!r}")
    strokes["softness"] = _need_number(strokes["softness"], "strokes.softness")
    if strokes["softness"] <= 0.0:
        raise ParameterError("strokes.softness must be positive")

    objective = doc["objective"]
    if not isinstance(objective, dict):
        raise ParameterError("objective must be an object")
    _reject_unknown(objective, ("terms", "augmentation"), "objective")
    terms = _parse_terms(objective.get("terms"), base_dir)
    aug_raw = objective.get("augmentation", {})
    if not isinstance(aug_raw, dict):
        raise ParameterError("objective.augmentation must be an object")
    _reject_unknown(aug_raw, _DEFAULTS["objective"]["augmentation"],
                    "objective.augmentation")
    aug = copy.deepcopy(_DEFAULTS["objective"]["augmentation"])
    aug.update(aug_raw)
    augmentation = AugmentationSpec(
        count=_need_int(aug["count"], "augmentation.count", lo=0),
        min_crop_fraction=_need_number(aug["min_crop_fraction"],
                                       "augmentation.min_crop_fraction"),
        max_corner_jitter_fraction=_need_number(
            aug["max_corner_jitter_fraction"],
            "augmentation.max_corner_jitter_fraction"),
        output_size_px=_need_int(aug["output_size_px"],
                                 "augmentation.output_size_px", lo=1),
        seed=_need_int(aug["seed"], "augmentation.seed")).validate()

    if strokes["init"] == "image-seeded" \
            and not any(t["kind"] == "pixel_l2" for t in terms):
        raise ParameterError(
            "strokes.init image-seeded needs a pixel_l2 term to seed from")

    opt = _merged("optimizer", doc.get("optimizer", {}), "optimizer")
    optimizer = OptimizerConfig(
        iterations=_need_int(opt["iterations"], "optimizer.iterations", lo=1),
        lr_geometry=_need_number(opt["lr_geometry"], "optimizer.lr_geometry"),
        lr_color=_need_number(opt["lr_color"], "optimizer.lr_color"),
        beta1=_need_number(opt["beta1"], "optimizer.beta1", 0.0, 1.0),
        beta2=_need_number(opt["beta2"], "optimizer.beta2", 0.0, 1.0),
        epsilon=_need_number(opt["epsilon"], "optimizer.epsilon"),
        seed=_need_int(opt["seed"], "optimizer.seed")).validate()

    enc = _merged("encoder", doc.get("encoder", {}), "encoder")
    if _need_int(enc["dim"], "encoder.dim", lo=1) != EMBED_DIM:
        raise ParameterError(
            f"encoder.dim must be {EMBED_DIM} (the built-in projection width), "
            f"got {enc['dim']}")
    _need_int(enc["seed"], "encoder.seed")
    weight_file = None
    if enc["weight_file"] is not None:
        weight_file = _need_path(enc["weight_file"], "encoder.weight_file",
                                 base_dir)

    outputs = _merged("outputs", doc.get("outputs", {}), "outputs")
    if not isinstance(outputs["dir"], str) or not outputs["dir"]:
        raise ParameterError("outputs.dir must be a non-empty string")
    out_dir = outputs["dir"]
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(base_dir, out_dir)

    resolved = {
        "canvas": canvas,
        "strokes": strokes,
        "objective": {"terms": copy.deepcopy(terms),
                      "augmentation": dataclasses.asdict(augmentation)},
        "optimizer": dataclasses.asdict(optimizer),
        "encoder": {"dim": EMBED_DIM, "seed": enc["seed"],
                    "weight_file": weight_file},
        "outputs": {"dir": out_dir},
    }
    return PaintConfig(canvas=canvas, strokes=strokes, terms=terms,
                       augmentation=augmentation, optimizer=optimizer,
                       encoder_seed=enc["seed"], weight_file=weight_file,
                       out_dir=out_dir, resolved=resolved)


def _load_emotion_head(path):
    tensors = load_weight_file(path)
    missing = {"we", "be"} - set(tensors)
    if missing:
        raise FormatError(
            f"emotion head file {path!r} is missing tensor(s) {sorted(missing)}")
    return {"we": tensors["we"], "be": tensors["be"]}


def _term_payload(term):
    kind = term["kind"]
    if kind == "natural_sound":
        return extract_features(decode_wav(term["wav_path"]))
    if kind == "speech_text":
        if "text" in term:
            return term["text"]
        with open(term["transcript_path"], "r", encoding="utf-8") as fh:
            text = fh.read().strip()
        if not text:
            raise ParameterError(
                f"transcript {term['transcript_path']!r} is empty")
        return text
    if kind == "speech_emotion":
        feats = extract_features(decode_wav(term["wav_path"]))
        return speech_emotion(feats, load_weight_file(term["ser_weights"]))
    if kind == "pixel_l2":
        return load_png(term["target_image_path"])
    return EmotionDistribution(one_hot(canonical_emotion(term["emotion"])))


def build_objective(cfg):
    """Load every term payload and assemble the runnable ObjectiveSpec."""
    head = _load_emotion_head(cfg.weight_file) if cfg.weight_file else None
    terms = [Term(kind=t["kind"], weight=t["weight"], payload=_term_payload(t))
             for t in cfg.terms]
    spec = ObjectiveSpec(terms=terms, augmentation=cfg.augmentation,
                         seed=cfg.encoder_seed, emotion_head=head)
    for term in spec.terms:
        if term.kind == "pixel_l2":
            target = np.asarray(term.payload)
            if target.shape != (cfg.canvas["height_px"],
                                cfg.canvas["width_px"], 3):
                raise ParameterError(
                    f"pixel_l2 target is {target.shape[1]}x{target.shape[0]}, "
                    f"canvas is {cfg.canvas['width_px']}x{cfg.canvas['height_px']}")
    return spec.validate()


def build_initial_plan(cfg, spec):
    """Seeded starting plan per the strokes section."""
    target = None
    if cfg.strokes["init"] == "image-seeded":
        target = next(t.payload for t in spec.terms if t.kind == "pixel_l2")
    return init_plan(cfg.strokes["init"], cfg.strokes["count"],
                     cfg.optimizer.seed,
                     width_px=cfg.canvas["width_px"],
                     height_px=cfg.canvas["height_px"],
                     target=target,
                     background=tuple(cfg.canvas["background_rgb"]),
                     softness=cfg.strokes["softness"])
