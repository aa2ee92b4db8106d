"""Delay-and-sum reconstruction, compounding, envelope and log compression."""

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from . import kernels
from .acquisition import ArrayGeometry, ImagingGrid, PlaneWaveFrame

_WINDOW_KINDS = {
    "rectangular": kernels.WINDOW_RECT,
    "hann": kernels.WINDOW_HANN,
    "tukey": kernels.WINDOW_TUKEY,
}


@dataclass(frozen=True)
class ApodizationSpec:
    """Receive apodization: taper shape plus f-number aperture control.

    f_number 0 means full aperture; otherwise elements with
    |x_pixel - x_element| * f_number > z / 2 are masked out.
    """

    window: str = "hann"
    f_number: float = 0.0
    tukey_ratio: float = 0.5

    def __post_init__(self):
        if self.window not in _WINDOW_KINDS:
            raise ValueError(f"unknown window {self.window!r}; "
                             f"expected one of {sorted(_WINDOW_KINDS)}")
        if self.f_number < 0:
            raise ValueError("f_number must be >= 0")
        if not 0.0 <= self.tukey_ratio <= 1.0:
            raise ValueError("tukey ratio must be in [0, 1]")


@dataclass(frozen=True)
class BeamformedImage:
    """Summed-RF pixel grid, before envelope detection."""

    grid: ImagingGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid "
                             f"shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("beamformed values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class BModeImage:
    """Normalized log-compressed display image, values in [0, 1]."""

    grid: ImagingGrid
    values: np.ndarray
    dynamic_range: float

    def __post_init__(self):
        if self.dynamic_range <= 0:
            raise ValueError("dynamic_range must be > 0")
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError("values shape does not match grid shape")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValueError("B-mode values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def transmit_delay(pixel, angle: float, c: float) -> float:
    """Plane-wave transmit time-of-flight to a pixel (x, z)."""
    x, z = pixel
    return (z * math.cos(angle) + x * math.sin(angle)) / c


def receive_delay(pixel, element_x: float, c: float) -> float:
    """Return time-of-flight from pixel (x, z) back to an element at (x_k, 0)."""
    x, z = pixel
    return math.hypot(z, x - element_x) / c


def das_beamform(frame: PlaneWaveFrame, geometry: ArrayGeometry,
                 grid: ImagingGrid, apo: ApodizationSpec | None = None,
                 force_numpy: bool = False) -> BeamformedImage:
    """Delay-and-sum one plane-wave frame onto the grid.

    Pixel-parallel and deterministic: each pixel sums its per-element
    contributions in element order regardless of scheduling.
    """
    if apo is None:
        apo = ApodizationSpec()
    if frame.n_elements != geometry.element_count:
        raise ValueError(f"frame has {frame.n_elements} channels, geometry "
                         f"has {geometry.element_count} elements")
    max_depth_time = frame.t0 + (frame.n_samples - 1) / geometry.sampling_frequency
    min_roundtrip = 2.0 * grid.axial_positions[-1] / geometry.sound_speed
    if min_roundtrip > max_depth_time:
        raise ValueError(
            f"grid reaches {grid.axial_positions[-1] * 1e3:.1f} mm but the "
            f"sampled window ends at t={max_depth_time * 1e6:.1f} us")
    values = kernels.das_sum(
        frame.samples, geometry.element_positions,
        grid.lateral_positions, grid.axial_positions,
        frame.steering_angle, frame.t0, geometry.sampling_frequency,
        geometry.sound_speed, f_number=apo.f_number,
        kind=_WINDOW_KINDS[apo.window], tukey_ratio=apo.tukey_ratio,
        force_numpy=force_numpy)
    return BeamformedImage(grid=grid, values=values)


def compound(images) -> BeamformedImage:
    """Coherently sum beamformed images that share one grid.

    Inputs are summed in a content-canonical order so the float result is
    independent of the order the caller lists them in.
    """
    images = list(images)
    if not images:
        raise ValueError("compound requires at least one image")
    grid = images[0].grid
    for im in images[1:]:
        if im.grid.shape != grid.shape or \
                not np.array_equal(im.grid.lateral_positions, grid.lateral_positions) or \
                not np.array_equal(im.grid.axial_positions, grid.axial_positions):
            raise ValueError("compound inputs must share one grid")
    order = sorted(range(len(images)),
                   key=lambda i: hashlib.sha256(images[i].values.tobytes()).digest())
    total = np.zeros(grid.shape)
    for i in order:
        total += images[i].values
    return BeamformedImage(grid=grid, values=total)


def envelope_detect(image: BeamformedImage) -> BeamformedImage:
    """Per-column magnitude of the analytic signal along the axial axis."""
    if image.values.shape[0] < 8:
        raise ValueError("envelope detection needs >= 8 axial samples")
    env = np.abs(hilbert(image.values, axis=0))
    return BeamformedImage(grid=image.grid, values=env)


def log_compress(envelope: BeamformedImage, dynamic_range: float = 60.0) -> BModeImage:
    """Map an envelope image to [0, 1]: peak -> 1, -dynamic_range dB -> 0."""
    if dynamic_range <= 0:
        raise ValueError("dynamic_range must be > 0")
    v = envelope.values
    if not np.all(np.isfinite(v)):
        raise ValueError("envelope values must be finite")
    if np.any(v < 0):
        raise ValueError("envelope values must be >= 0")
    peak = v.max() if v.size else 0.0
    if peak == 0.0:
        out = np.zeros_like(v)
    else:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(v / peak)
        out = np.clip(db, -dynamic_range, 0.0) / dynamic_range + 1.0
    return BModeImage(grid=envelope.grid, values=out, dynamic_range=dynamic_range)
