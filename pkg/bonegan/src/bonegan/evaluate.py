"""Held-out evaluation against the enhancement targets.

The metric formulas mirror the producer's definitions on purpose: the
numbers must be comparable across the two packages, and the container
is the only shared code path, so they are restated here on float64.
"""

import math
from dataclasses import dataclass

import numpy as np
import torch


@dataclass(frozen=True)
class MetricConfig:
    n_bins: int = 256
    c1: float = 0.01
    c2: float = 0.01

    def __post_init__(self):
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("stabilizers must be positive")


def _contrast_ratio(image, fg, bg) -> float:
    mu_in = float(image[fg].mean())
    mu_out = float(image[bg].mean())
    if mu_out <= 0.0:
        raise ValueError("background mean must be > 0 for a contrast ratio")
    if mu_in == 0.0:
        return float("-inf")
    return 20.0 * math.log10(mu_in / mu_out)


def _snr(image, fg, bg) -> float:
    f = image[fg]
    b = image[bg]
    num = float(f.mean() ** 2 + f.std() ** 2)
    den = float(b.mean() ** 2 + b.std() ** 2)
    if den == 0.0:
        raise ValueError("background second moment is zero")
    return 10.0 * math.log10(num / den)


def _ssi(a, b, n_bins: int) -> float:
    # integer bin counts cross-multiplied so identical images score 1.0
    ca, _ = np.histogram(a, bins=n_bins, range=(0.0, 1.0))
    cb, _ = np.histogram(b, bins=n_bins, range=(0.0, 1.0))
    na, nb = int(a.size), int(b.size)
    overlap = sum(min(int(x) * nb, int(y) * na) for x, y in zip(ca, cb))
    return overlap / (na * nb)


def _ssim(a, b, c1: float, c2: float) -> float:
    mu_a = float(a.mean())
    mu_b = float(b.mean())
    da = a - mu_a
    db = b - mu_b
    var_a = float(np.mean(da * da))
    var_b = float(np.mean(db * db))
    cov = float(np.mean(da * db))
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def _laplacian(a: np.ndarray) -> np.ndarray:
    # 4-neighbor high-pass with edge replication, done by shifting views
    p = np.pad(a, 1, mode="edge")
    return (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]
            - 4.0 * a)


def _epi(a, b) -> float:
    ha = _laplacian(a)
    hb = _laplacian(b)
    ha = ha - ha.mean()
    hb = hb - hb.mean()
    num = float(np.sum(ha * hb))
    d1 = float(np.sum(ha * ha))
    d2 = float(np.sum(hb * hb))
    if d1 == 0.0 or d2 == 0.0:
        return 0.0
    return 100.0 * num / math.sqrt(d1 * d2)


def record_metrics(prediction, target, roi_fg, roi_bg,
                   config: MetricConfig | None = None) -> dict:
    """CR/SNR of the prediction plus similarity to the target image."""
    if config is None:
        config = MetricConfig()
    pred = np.asarray(prediction, dtype=np.float64)
    ref = np.asarray(target, dtype=np.float64)
    if pred.shape != ref.shape:
        raise ValueError("prediction and target must share one shape")
    fg = np.asarray(roi_fg, dtype=bool)
    bg = np.asarray(roi_bg, dtype=bool)
    if fg.shape != pred.shape or bg.shape != pred.shape:
        raise ValueError("ROI masks must match the image shape")
    if not fg.any() or not bg.any():
        raise ValueError("ROI is empty after windowing")
    if np.logical_and(fg, bg).any():
        raise ValueError("ROI regions must be disjoint")
    for v in (pred, ref):
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("images must be normalized to [0, 1]")
    return {
        "cr_db": _contrast_ratio(pred, fg, bg),
        "snr_db": _snr(pred, fg, bg),
        "ssi": _ssi(ref, pred, config.n_bins),
        "ssim": _ssim(ref, pred, config.c1, config.c2),
        "epi_percent": _epi(ref, pred),
    }


def evaluate(model, dataset, config: MetricConfig | None = None) -> list:
    """Per-record metric dicts for a generator over a dataset."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate an empty dataset")
    model.eval()
    reports = []
    with torch.no_grad():
        for i in range(len(dataset)):
            sample = dataset[i]
            pred = model(sample["rf"][None])[0, 0].numpy()
            reports.append(record_metrics(
                pred, sample["target"][0].numpy(),
                sample["roi_fg"][0].numpy() > 0.5,
                sample["roi_bg"][0].numpy() > 0.5, config))
    return reports
