"""Strip boundary scorers.

Two kinds share one entry point, :func:`predict`:

* ``gradient``: normalized row-direction gradient magnitude of the gray
  strip, used both as initial score and (scaled) as selection logits.
* ``external``: score maps produced elsewhere, read from a score bundle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d

from .losses import StripPrediction, compose_selection

__all__ = ["PredictorSpec", "grayscale", "gradient_scores", "predict"]

LUMA = np.array([0.299, 0.587, 0.114])
# gradients below this (intensity per px) are treated as flat; keeps float
# round-off in constant regions from being normalized up to 1
NOISE_FLOOR = 1e-6


@dataclass(frozen=True)
class PredictorSpec:
    kind: str = "gradient"
    smoothing_radius: int = 0
    alpha: float = 10.0
    score_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("gradient", "external"):
            raise ValueError(f"unknown predictor kind {self.kind!r}")
        if self.kind == "external" and not self.score_path:
            raise ValueError("external predictor needs a score_path")
        if self.kind == "gradient" and self.score_path:
            raise ValueError("gradient predictor takes no score_path")
        if self.smoothing_radius < 0:
            raise ValueError("smoothing_radius must be >= 0")

    @classmethod
    def parse(cls, text: str) -> "PredictorSpec":
        """``"gradient"``, ``"gradient:R"`` or ``"external:PATH"``."""
        kind, _, arg = text.partition(":")
        if kind == "external":
            return cls(kind="external", score_path=arg)
        if kind == "gradient":
            return cls(smoothing_radius=int(arg) if arg else 0)
        raise ValueError(f"unknown predictor {text!r}")


def grayscale(strip) -> np.ndarray:
    s = np.asarray(strip, dtype=float)
    if s.ndim == 2:
        return s
    if s.shape[-1] == 1:
        return s[..., 0]
    return s[..., :3] @ LUMA


def gradient_scores(strip, smoothing_radius: int = 0) -> np.ndarray:
    """Per-column max-normalized |d/drow| of the gray strip, in [0, 1]."""
    g = np.abs(np.gradient(grayscale(strip), axis=0))
    if smoothing_radius > 0:
        g = uniform_filter1d(g, size=2 * smoothing_radius + 1, axis=1, mode="wrap")
    peak = g.max(axis=0)
    flat = peak < NOISE_FLOOR
    x = g / np.where(flat, 1.0, peak)[None, :]
    x[:, flat] = 0.0
    return x


def predict(strip, spec: PredictorSpec) -> StripPrediction:
    if spec.kind == "gradient":
        x = gradient_scores(strip, spec.smoothing_radius)
        return compose_selection(x, spec.alpha * x)

    from .io import read_score_bundle

    scores, _ = read_score_bundle(spec.score_path)
    h, w = np.asarray(strip).shape[:2]
    if scores.shape[:2] != (h, w):
        raise ValueError("score map shape mismatch")
    x = scores[..., 0].astype(float)
    logits = scores[..., 1].astype(float) if scores.shape[2] > 1 else spec.alpha * x
    return compose_selection(x, logits)
