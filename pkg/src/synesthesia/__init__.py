"""Stroke-based painting driven by audio, speech, text, and image objectives.

A painting is a list of quadratic-Bezier brush strokes over a solid
background. The renderer is differentiable in every stroke parameter, so
perceptual objectives (audio-feature embeddings, text embeddings, emotion
distributions, pixel targets) can steer the strokes by plain gradient
descent.
"""

__version__ = "0.1.0"

from .backend import backend_name, get_kernels
from .canvas import (AugmentationSpec, augment_views, augment_views_vjp,
                     load_png, save_png, validate_image)
from .emotion import (EMOTIONS, DatasetLabel, EmotionDistribution,
                      canonical_emotion, image_emotion, image_emotion_vjp,
                      map_label, speech_emotion, train_speech_classifier)
from .encoders import (Embedding, encode_audio, encode_image,
                       encode_image_vjp, encode_text, load_weight_file,
                       save_weight_file)
from .audio import (AudioClip, FeatureStack, chromagram, decode_wav,
                    extract_features, mel_spectrogram, mfcc, stft_magnitude)
from .errors import (FormatError, MappingError, NumericError, ParameterError,
                     SynesthesiaError)
from .objective import (CompositeResult, ObjectiveSpec, OptimizerConfig, Term,
                        composite_loss, cosine_distance, loss_natural_sound,
                        loss_pixel_l2, loss_speech, optimize)
from .render import PlanGrad, render_plan, render_plan_vjp
from .strokes import (PaintingPlan, StrokeParams, init_plan, load_plan,
                      plan_from_dict, plan_to_dict, save_plan,
                      stroke_geometry)

__all__ = [
    "__version__",
    "AudioClip", "AugmentationSpec", "CompositeResult", "DatasetLabel",
    "Embedding", "EmotionDistribution", "EMOTIONS", "FeatureStack",
    "FormatError", "MappingError", "NumericError", "ObjectiveSpec",
    "OptimizerConfig", "PaintingPlan", "ParameterError", "PlanGrad",
    "StrokeParams", "SynesthesiaError", "Term",
    "augment_views", "augment_views_vjp", "backend_name", "canonical_emotion",
    "chromagram", "composite_loss", "cosine_distance", "decode_wav",
    "encode_audio", "encode_image", "encode_image_vjp", "encode_text",
    "extract_features", "get_kernels", "image_emotion", "image_emotion_vjp",
    "init_plan", "load_plan", "load_png", "load_weight_file", "loss_natural_sound",
    "loss_pixel_l2", "loss_speech", "map_label", "mel_spectrogram", "mfcc",
    "optimize", "plan_from_dict", "plan_to_dict", "render_plan",
    "render_plan_vjp", "save_plan", "save_png", "save_weight_file",
    "speech_emotion", "stft_magnitude", "stroke_geometry",
    "train_speech_classifier", "validate_image",
]
