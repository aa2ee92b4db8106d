"""Bone-attention enhancement: blend a B-mode image with its gated map."""

import math
from dataclasses import dataclass

import numpy as np

from .bpm import BoneProbabilityMap


@dataclass(frozen=True)
class AttentionWeights:
    """Blend weights: alpha on the image, beta on the map, gamma bias."""

    alpha: float = 0.30
    beta: float = 0.09
    gamma: float = 0.50

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")


@dataclass(frozen=True)
class EnhancedImage:
    """Blend output; values kept unclamped, use .display for export."""

    values: np.ndarray
    source_weights: AttentionWeights

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("enhanced values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def display(self) -> np.ndarray:
        """Values clamped to [0, 1] for image export."""
        return np.clip(self.values, 0.0, 1.0)


def otsu_threshold(bone_map: BoneProbabilityMap) -> tuple:
    """Between-class-variance threshold over a 256-bin histogram.

    Returns (threshold, mask) with mask = values >= threshold.  A map
    whose values all fall in one bin has no valid split and degenerates
    to threshold 0 with an all-false mask.
    """
    v = bone_map.values
    counts, edges = np.histogram(v, bins=256, range=(0.0, 1.0))
    total = counts.sum()
    p = counts / total
    w0 = np.cumsum(p)
    mids = 0.5 * (edges[:-1] + edges[1:])
    mu0 = np.cumsum(p * mids)
    mu_total = mu0[-1]
    valid = (w0 > 0.0) & (w0 < 1.0)
    if not np.any(valid):
        return 0.0, np.zeros(v.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (mu_total * w0 - mu0) ** 2 / (w0 * (1.0 - w0))
    between[~valid] = -1.0
    k = int(np.argmax(between))
    threshold = float(edges[k + 1])
    return threshold, v >= threshold


def beam_enhance(image, bone_map: BoneProbabilityMap,
                 weights: AttentionWeights | None = None) -> EnhancedImage:
    """alpha*I + beta*(Otsu-gated map) + gamma, per pixel.

    Pixels outside the Otsu mask contribute nothing to the beta term, so
    there the output is exactly alpha*I + gamma.
    """
    if weights is None:
        weights = AttentionWeights()
    img = np.asarray(getattr(image, "values", image), dtype=np.float64)
    if img.shape != bone_map.values.shape:
        raise ValueError(f"image shape {img.shape} does not match map "
                         f"shape {bone_map.values.shape}")
    _, mask = otsu_threshold(bone_map)
    gated = np.where(mask, bone_map.values, 0.0)
    out = weights.alpha * img + weights.beta * gated + weights.gamma
    return EnhancedImage(values=out, source_weights=weights)
