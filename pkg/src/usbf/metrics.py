"""Image quality metrics: ROI construction, CR, SNR, SSI, SSIM, EPI."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

_LAPLACIAN = np.array([[0.0, 1.0, 0.0],
                       [1.0, -4.0, 1.0],
                       [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class RoiMask:
    """Disjoint foreground (bone) and background (adjacent tissue) masks."""

    foreground: np.ndarray
    background: np.ndarray

    def __post_init__(self):
        fg = np.asarray(self.foreground, dtype=bool)
        bg = np.asarray(self.background, dtype=bool)
        if fg.shape != bg.shape:
            raise ValueError("foreground and background shapes differ")
        if not fg.any() or not bg.any():
            raise ValueError("both ROI masks must be non-empty")
        if (fg & bg).any():
            raise ValueError("foreground and background must be disjoint")
        fg.setflags(write=False)
        bg.setflags(write=False)
        object.__setattr__(self, "foreground", fg)
        object.__setattr__(self, "background", bg)


@dataclass(frozen=True)
class MetricsReport:
    """Scalar quality metrics; similarity fields are None without a reference."""

    cr_db: float
    snr_db: float
    ssi: float | None
    ssim: float | None
    epi_percent: float | None
    roi: RoiMask


def _disk(radius: int) -> np.ndarray:
    r = int(radius)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return yy * yy + xx * xx <= r * r


def _as_array(image) -> np.ndarray:
    a = np.asarray(getattr(image, "values", image), dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a non-empty 2-D image")
    return a


def make_background(foreground, dilation_radius: int = 10) -> RoiMask:
    """Background ROI = dilation of the foreground minus the foreground."""
    fg = np.asarray(foreground, dtype=bool)
    if not fg.any():
        raise ValueError("foreground mask is empty")
    if dilation_radius < 1:
        raise ValueError("dilation_radius must be >= 1")
    dilated = ndimage.binary_dilation(fg, structure=_disk(dilation_radius))
    bg = dilated & ~fg
    if not bg.any():
        raise ValueError("dilation left no background pixels")
    return RoiMask(foreground=fg, background=bg)


def contrast_ratio(image, roi: RoiMask) -> float:
    """20 log10 of the foreground/background mean intensity ratio."""
    a = _as_array(image)
    mu_in = float(a[roi.foreground].mean())
    mu_out = float(a[roi.background].mean())
    if mu_out <= 0.0:
        raise ValueError("background mean must be > 0 for a contrast ratio")
    if mu_in < 0.0:
        raise ValueError("foreground mean must be >= 0")
    if mu_in == 0.0:
        return float("-inf")
    return 20.0 * math.log10(mu_in / mu_out)


def snr(image, roi: RoiMask) -> float:
    """10 log10 of the second-moment ratio between the two regions."""
    a = _as_array(image)
    fg = a[roi.foreground]
    bg = a[roi.background]
    num = float(fg.mean() ** 2 + fg.std() ** 2)
    den = float(bg.mean() ** 2 + bg.std() ** 2)
    if den == 0.0:
        raise ValueError("background second moment is zero")
    if num == 0.0:
        return float("-inf")
    return 10.0 * math.log10(num / den)


def ssi(ground_truth, predicted, n_bins: int = 256) -> float:
    """Histogram intersection of two [0, 1] images.

    Computed with integer bin counts cross-multiplied by the pixel
    totals, so identical images score exactly 1.0.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    a = _as_array(ground_truth)
    b = _as_array(predicted)
    for v in (a, b):
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("ssi inputs must be normalized to [0, 1]")
    ca, _ = np.histogram(a, bins=n_bins, range=(0.0, 1.0))
    cb, _ = np.histogram(b, bins=n_bins, range=(0.0, 1.0))
    na, nb = int(a.size), int(b.size)
    overlap = sum(min(int(x) * nb, int(y) * na) for x, y in zip(ca, cb))
    return overlap / (na * nb)


def ssim(ground_truth, predicted, c1: float = 0.01, c2: float = 0.01) -> float:
    """Global (single-window) structural similarity."""
    a = _as_array(ground_truth)
    b = _as_array(predicted)
    if a.shape != b.shape:
        raise ValueError("ssim inputs must share one shape")
    for v in (a, b):
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("ssim inputs must be normalized to [0, 1]")
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


def _highpass(a: np.ndarray) -> np.ndarray:
    return ndimage.convolve(a, _LAPLACIAN, mode="nearest")


def epi(ground_truth, predicted) -> float:
    """Edge preservation index: correlation of Laplacian high-pass fields.

    Returns percent in [-100, 100]; a zero-variance high-pass field on
    either side is defined as 0.
    """
    a = _as_array(ground_truth)
    b = _as_array(predicted)
    if a.shape != b.shape:
        raise ValueError("epi inputs must share one shape")
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise ValueError("epi needs at least a 3x3 image")
    ha = _highpass(a)
    hb = _highpass(b)
    ha = ha - ha.mean()
    hb = hb - hb.mean()
    num = float(np.sum(ha * hb))
    d1 = float(np.sum(ha * ha))
    d2 = float(np.sum(hb * hb))
    if d1 == 0.0 or d2 == 0.0:
        return 0.0
    return 100.0 * num / math.sqrt(d1 * d2)


def evaluate(image, reference, roi: RoiMask, n_bins: int = 256) -> MetricsReport:
    """All metrics for one image; similarity ones need a reference."""
    cr_value = contrast_ratio(image, roi)
    snr_value = snr(image, roi)
    if reference is None:
        return MetricsReport(cr_db=cr_value, snr_db=snr_value, ssi=None,
                             ssim=None, epi_percent=None, roi=roi)
    return MetricsReport(
        cr_db=cr_value, snr_db=snr_value,
        ssi=ssi(reference, image, n_bins=n_bins),
        ssim=ssim(reference, image),
        epi_percent=epi(reference, image),
        roi=roi)


def format_report(report: MetricsReport, label: str = "") -> str:
    """Line-oriented plain-text rendering of a metrics report."""
    prefix = f"{label}." if label else ""
    lines = [f"{prefix}cr_db = {report.cr_db:.6f}",
             f"{prefix}snr_db = {report.snr_db:.6f}"]
    if report.ssi is not None:
        lines.append(f"{prefix}ssi = {report.ssi:.6f}")
    if report.ssim is not None:
        lines.append(f"{prefix}ssim = {report.ssim:.6f}")
    if report.epi_percent is not None:
        lines.append(f"{prefix}epi_percent = {report.epi_percent:.6f}")
    return "\n".join(lines) + "\n"
