"""Bone probability map from a normalized B-mode image.

The map combines three cues: local phase and feature symmetry from a
multi-scale log-Gabor / monogenic-signal analysis of local phase tensors,
and an integrated-backscatter term that suppresses everything below the
first strong reflector (bone casts an acoustic shadow).
"""

import math
from dataclasses import dataclass

import numpy as np

_EPS_ENERGY = 1e-12


@dataclass(frozen=True)
class FilterBankConfig:
    """Log-Gabor scales: center wavelengths in pixels plus bandwidth."""

    wavelengths: tuple = (16.0, 32.0)
    sigma_on_f: float = 0.55

    def __post_init__(self):
        wl = tuple(float(w) for w in self.wavelengths)
        if not wl:
            raise ValueError("need at least one scale")
        if any(w < 2.0 for w in wl):
            raise ValueError("wavelengths must be >= 2 pixels")
        if any(b <= a for a, b in zip(wl[:-1], wl[1:])):
            raise ValueError("wavelengths must be strictly increasing")
        if not 0.0 < self.sigma_on_f < 1.0:
            raise ValueError("sigma_on_f must be in (0, 1)")
        object.__setattr__(self, "wavelengths", wl)


@dataclass(frozen=True)
class MonogenicField:
    """Even part m1 and Riesz (odd) parts m2, m3 of a band-passed image."""

    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray

    def __post_init__(self):
        if not (self.m1.shape == self.m2.shape == self.m3.shape):
            raise ValueError("monogenic components must share one shape")
        for comp in (self.m1, self.m2, self.m3):
            if not np.all(np.isfinite(comp)):
                raise ValueError("monogenic components must be finite")

    @property
    def odd_energy(self) -> np.ndarray:
        return np.sqrt(self.m2 ** 2 + self.m3 ** 2)


@dataclass(frozen=True)
class BoneProbabilityMap:
    """Per-pixel bone likelihood in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("map must be a non-empty 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("map values must be finite")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("map values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _as_array(image) -> np.ndarray:
    image = getattr(image, "values", image)
    a = np.asarray(image, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a non-empty 2-D image")
    return a


def integrated_backscatter(image, rescale: bool = True) -> np.ndarray:
    """Cumulative sum of squared intensity down each column.

    With rescale=True (the default) the result is divided by its global
    max so the shadow term 1 - IBS stays in [0, 1].
    """
    a = _as_array(image)
    if a.min() < 0.0 or a.max() > 1.0:
        raise ValueError("image must be normalized to [0, 1]")
    ibs = np.cumsum(a * a, axis=0)
    if rescale:
        peak = ibs.max()
        if peak > 0.0:
            ibs = ibs / peak
    return ibs


def shadow_map(image, sigma: float) -> np.ndarray:
    """Causal per-column Gaussian-weighted average of the pixels above.

    The window spans 3*sigma rows; weights exp(-i^2 / (2 sigma^2)) are
    renormalized over the rows actually available, so constants pass
    through exactly.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    a = _as_array(image)
    n_rows = a.shape[0]
    width = min(n_rows, max(1, int(3.0 * sigma)))
    num = np.zeros_like(a)
    den = np.zeros((n_rows, 1))
    for i in range(width):
        w = math.exp(-(i * i) / (2.0 * sigma * sigma))
        num[i:, :] += w * a[:n_rows - i, :]
        den[i:] += w
    return num / den


def _radial_frequency(shape):
    """|omega| grid in radians/pixel for an FFT of the given shape."""
    wy = 2.0 * math.pi * np.fft.fftfreq(shape[0])
    wx = 2.0 * math.pi * np.fft.fftfreq(shape[1])
    return np.sqrt(wy[:, np.newaxis] ** 2 + wx[np.newaxis, :] ** 2)


def _log_gabor_response(shape, wavelength: float, sigma_on_f: float):
    """Radial log-Gabor transfer function with the DC gain forced to 0."""
    radius = _radial_frequency(shape)
    radius[0, 0] = 1.0
    omega0 = 2.0 * math.pi / wavelength
    log_sigma = math.log(sigma_on_f)
    gain = np.exp(-(np.log(radius / omega0) ** 2) / (2.0 * log_sigma * log_sigma))
    gain[0, 0] = 0.0
    return gain


def log_gabor_filter(image, config: FilterBankConfig, scale_index: int = 0) -> np.ndarray:
    """Band-pass the image with one log-Gabor scale; returns the real part."""
    a = _as_array(image)
    if a.shape[0] < 8 or a.shape[1] < 8:
        raise ValueError("image must be at least 8x8")
    wavelength = config.wavelengths[scale_index]
    if wavelength > min(a.shape):
        raise ValueError(f"wavelength {wavelength} px exceeds image size {a.shape}")
    gain = _log_gabor_response(a.shape, wavelength, config.sigma_on_f)
    return np.real(np.fft.ifft2(np.fft.fft2(a) * gain))


def _diff_x(a):
    # central difference along columns, replicate boundary
    p = np.pad(a, ((0, 0), (1, 1)), mode="edge")
    return 0.5 * (p[:, 2:] - p[:, :-2])


def _diff_y(a):
    p = np.pad(a, ((1, 1), (0, 0)), mode="edge")
    return 0.5 * (p[2:, :] - p[:-2, :])


def phase_tensor(band_passed) -> tuple:
    """Symmetric and asymmetric local phase tensor magnitudes plus LPT.

    t_even is the Frobenius norm of the Hessian outer product; t_odd the
    Frobenius norm of the symmetrized gradient x grad-of-Laplacian
    product; lpt recombines them with the instantaneous phase.
    """
    a = _as_array(band_passed)
    if not np.all(np.isfinite(a)):
        raise ValueError("band-passed image must be finite")
    gx = _diff_x(a)
    gy = _diff_y(a)
    hxx = _diff_x(gx)
    hxy = _diff_y(gx)
    hyy = _diff_y(gy)
    # [H][H]^T for symmetric H: entries from a 2x2 matrix square
    sq11 = hxx * hxx + hxy * hxy
    sq12 = hxx * hxy + hxy * hyy
    sq22 = hxy * hxy + hyy * hyy
    t_even = np.sqrt(sq11 ** 2 + 2.0 * sq12 ** 2 + sq22 ** 2)
    lap = hxx + hyy
    lx = _diff_x(lap)
    ly = _diff_y(lap)
    m11 = -(gx * lx)
    m22 = -(gy * ly)
    m12 = -0.5 * (gx * ly + lx * gy)
    t_odd = np.sqrt(m11 ** 2 + 2.0 * m12 ** 2 + m22 ** 2)
    phase = np.arctan2(t_odd, t_even)
    lpt = np.sqrt(t_even ** 2 + t_odd ** 2) * np.cos(phase)
    return t_even, t_odd, lpt


def monogenic(lpt_image, config: FilterBankConfig, scale_index: int = 0) -> MonogenicField:
    """Band-pass the LPT image and attach its Riesz-transform components.

    The Riesz multiplier is (omega_x + i*omega_y)/|omega| with the DC
    term set to 0; m2 and m3 are the real and imaginary responses.
    """
    a = _as_array(lpt_image)
    if not np.all(np.isfinite(a)):
        raise ValueError("input must be finite")
    gain = _log_gabor_response(a.shape, config.wavelengths[scale_index],
                               config.sigma_on_f)
    spectrum = np.fft.fft2(a) * gain
    m1 = np.real(np.fft.ifft2(spectrum))
    wy = 2.0 * math.pi * np.fft.fftfreq(a.shape[0])[:, np.newaxis]
    wx = 2.0 * math.pi * np.fft.fftfreq(a.shape[1])[np.newaxis, :]
    radius = np.sqrt(wy ** 2 + wx ** 2)
    radius[0, 0] = 1.0
    riesz = (wx + 1j * wy) / radius
    riesz[0, 0] = 0.0
    odd = np.fft.ifft2(spectrum * riesz)
    return MonogenicField(m1=m1, m2=np.real(odd), m3=np.imag(odd))


def local_phase(field: MonogenicField) -> np.ndarray:
    """1 + atan2(odd energy, even part); bright symmetric features -> 1."""
    return 1.0 + np.arctan2(field.odd_energy, field.m1)


def feature_symmetry(t_even, t_odd, field: MonogenicField, tau: float) -> np.ndarray:
    """Rectified symmetric-minus-asymmetric evidence, energy-normalized.

    The raw ratio is rescaled by its global max and clipped to [0, 1].
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    energy = field.m1 ** 2 + field.m2 ** 2 + field.m3 ** 2
    fs = np.maximum(np.abs(t_even) - np.abs(t_odd) - tau, 0.0) / (energy + _EPS_ENERGY)
    peak = fs.max()
    if peak > 0.0:
        fs = fs / peak
    return np.clip(fs, 0.0, 1.0)


def bone_probability_map(image, config: FilterBankConfig | None = None,
                         tau_ratio: float = 0.01) -> BoneProbabilityMap:
    """Multi-scale local-phase bone map, shadow-weighted and normalized.

    Per scale: band-pass, phase tensors, monogenic decomposition, then
    LP * FS; scales are averaged, multiplied by (1 - IBS), and min-max
    normalized.  A constant input carries no structure, so it (and any
    constant product field) maps to all zeros.
    """
    if config is None:
        config = FilterBankConfig()
    a = _as_array(image)
    if a.size and a.max() == a.min():
        # band-pass output of a structure-free image is pure FFT round-off;
        # without this guard the FS rescale amplifies that noise to O(1)
        return BoneProbabilityMap(values=np.zeros_like(a))
    ibs = integrated_backscatter(a)
    acc = np.zeros_like(a)
    for s in range(len(config.wavelengths)):
        band = log_gabor_filter(a, config, s)
        t_even, t_odd, lpt = phase_tensor(band)
        field = monogenic(lpt, config, s)
        lp = local_phase(field)
        tau = tau_ratio * max(t_even.max(), t_odd.max())
        fs = feature_symmetry(t_even, t_odd, field, tau)
        acc += lp * fs
    acc /= len(config.wavelengths)
    raw = acc * (1.0 - ibs)
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return BoneProbabilityMap(values=np.zeros_like(raw))
    return BoneProbabilityMap(values=(raw - lo) / (hi - lo))
