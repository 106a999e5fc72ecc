"""Command-line front end.

Exit codes are a stable contract: 0 success, 2 bad usage or config,
3 I/O failure, 4 numeric failure. meta.json records the fully-resolved
configuration (every default filled in), the package version, and the
compute backend, so a run is reproducible from its artifacts alone.
"""

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__
from .audio import decode_wav, extract_features
from .backend import backend_name
from .canvas import load_png, save_png
from .config import build_initial_plan, build_objective, load_config
from .emotion import EMOTIONS, speech_emotion
from .encoders import load_weight_file
from .errors import FormatError, NumericError, ParameterError
from .gradcheck import run_all
from .objective import optimize, term_names
from .render import render_plan
from .strokes import load_plan, save_plan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_paint(args):
    cfg = load_config(args.config)
    if args.out_dir:
        cfg.out_dir = os.path.abspath(args.out_dir)
        cfg.resolved["outputs"]["dir"] = cfg.out_dir
    spec = build_objective(cfg)
    plan0 = build_initial_plan(cfg, spec)
    os.makedirs(cfg.out_dir, exist_ok=True)

    loss_path = os.path.join(cfg.out_dir, "loss.csv")
    with open(loss_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total"] + term_names(spec))

        def on_iteration(it, total, term_values):
            writer.writerow([it, repr(total)] + [repr(v) for _, v in term_values])

        best_plan, history = optimize(plan0, spec, cfg.optimizer,
                                      on_iteration=on_iteration)

    save_plan(best_plan, os.path.join(cfg.out_dir, "plan.json"))
    save_png(render_plan(best_plan), os.path.join(cfg.out_dir, "painting.png"))
    meta = {
        "version": __version__,
        "backend": backend_name(),
        "config": cfg.resolved,
        "iterations_run": len(history),
        "initial_loss": history[0],
        "best_loss": min(history),
        "best_iteration": int(np.argmin(history)),
    }
    with open(os.path.join(cfg.out_dir, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    print(f"wrote plan.json, painting.png, loss.csv, meta.json to {cfg.out_dir}")
    return EXIT_OK


def cmd_render(args):
    plan = load_plan(args.plan)
    save_png(render_plan(plan), args.out)
    print(f"rendered {args.plan} -> {args.out}")
    return EXIT_OK


def cmd_features(args):
    feats = extract_features(decode_wav(args.wav))
    doc = {
        "sample_rate": 16000,
        "n_frames": feats.n_frames,
        "mfcc": feats.mfcc.tolist(),
        "log_mel": feats.mel.tolist(),
        "chroma": feats.chroma.tolist(),
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    print(f"wrote {feats.n_frames} frames of features to {args.out}")
    return EXIT_OK


def cmd_emotion(args):
    feats = extract_features(decode_wav(args.wav))
    dist = speech_emotion(feats, load_weight_file(args.weights))
    doc = {
        "emotions": list(EMOTIONS),
        "probs": dist.probs.tolist(),
        "argmax": dist.argmax_name,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(f"{args.wav}: {dist.argmax_name} "
          f"(p={dist.probs.max():.3f}) -> {args.out}")
    return EXIT_OK


def cmd_gradcheck(args):
    reports = run_all(seed=args.seed, configs=args.configs)
    all_ok = True
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"{rep.component:14s} max rel err {rep.max_rel_err:.3e} "
              f"(tol {rep.tolerance:.0e}, {rep.n_checks} checks) {status}")
        all_ok &= rep.passed
    return EXIT_OK if all_ok else EXIT_NUMERIC


def build_parser():
    parser = argparse.ArgumentParser(
        prog="synesthesia",
        description="Paint with brush strokes driven by audio, speech, "
                    "text, emotion, and image objectives.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paint", help="optimize a painting from a JSON config")
    p.add_argument("--config", required=True, help="path to run config JSON")
    p.add_argument("--out-dir", help="override outputs.dir from the config")
    p.set_defaults(func=cmd_paint)

    p = sub.add_parser("render", help="render a stored plan to a PNG")
    p.add_argument("--plan", required=True, help="plan JSON path")
    p.add_argument("--out", required=True, help="output PNG path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("features", help="extract audio features to JSON")
    p.add_argument("--wav", required=True, help="input WAV path")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("emotion", help="classify speech emotion")
    p.add_argument("--wav", required=True, help="input WAV path")
    p.add_argument("--weights", required=True, help="SYNW1 classifier weights")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_emotion)

    p = sub.add_parser("gradcheck", help="run the finite-difference suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--configs", type=int, default=100,
                   help="random configurations per component")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, 0 on --help/--version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParameterError, FormatError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except FileNotFoundError as exc:
        return _fail(EXIT_IO, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except NumericError as exc:
        return _fail(EXIT_NUMERIC, exc)


def entry():
    sys.exit(main())
