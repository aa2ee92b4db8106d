"""Transducer geometry, imaging grids and RF frame containers."""

from dataclasses import dataclass, field

import numpy as np


def _require_positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be strictly positive, got {value!r}")


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array lying on z = 0, centered on x = 0."""

    element_count: int
    pitch: float            # m
    center_frequency: float  # Hz
    sampling_frequency: float  # Hz
    sound_speed: float      # m/s

    def __post_init__(self):
        if self.element_count < 2:
            raise ValueError(
                f"element_count must be >= 2, got {self.element_count}")
        _require_positive("pitch", self.pitch)
        _require_positive("center_frequency", self.center_frequency)
        _require_positive("sampling_frequency", self.sampling_frequency)
        _require_positive("sound_speed", self.sound_speed)
        if self.sampling_frequency <= 2.0 * self.center_frequency:
            raise ValueError(
                "sampling_frequency must exceed 2 x center_frequency "
                f"(got fs={self.sampling_frequency}, f0={self.center_frequency})")

    @property
    def aperture_length(self) -> float:
        return self.element_count * self.pitch

    @property
    def wavelength(self) -> float:
        return self.sound_speed / self.center_frequency

    @property
    def element_positions(self) -> np.ndarray:
        """Lateral element centers in meters, symmetric about x = 0."""
        n = self.element_count
        return (np.arange(n) - (n - 1) / 2.0) * self.pitch


@dataclass(frozen=True)
class ImagingGrid:
    """Pixel coordinates: z = 0 at the array face, z increasing with depth."""

    lateral_positions: np.ndarray   # x_i, m
    axial_positions: np.ndarray     # z_i, m

    def __post_init__(self):
        lat = np.asarray(self.lateral_positions, dtype=np.float64)
        ax = np.asarray(self.axial_positions, dtype=np.float64)
        if lat.ndim != 1 or ax.ndim != 1 or lat.size == 0 or ax.size == 0:
            raise ValueError("grid coordinate lists must be non-empty 1-D")
        if np.any(np.diff(lat) <= 0):
            raise ValueError("lateral_positions must be strictly increasing")
        if np.any(np.diff(ax) <= 0):
            raise ValueError("axial_positions must be strictly increasing")
        if ax[0] < 0:
            raise ValueError("axial positions must be >= 0")
        lat.setflags(write=False)
        ax.setflags(write=False)
        object.__setattr__(self, "lateral_positions", lat)
        object.__setattr__(self, "axial_positions", ax)

    @property
    def shape(self):
        """(axial, lateral) image shape."""
        return (self.axial_positions.size, self.lateral_positions.size)

    @classmethod
    def regular(cls, lateral_min, lateral_max, lateral_step,
                axial_min, axial_max, axial_step):
        """Evenly spaced grid covering [min, max] inclusive of the start."""
        lat = np.arange(lateral_min, lateral_max + 0.5 * lateral_step, lateral_step)
        ax = np.arange(axial_min, axial_max + 0.5 * axial_step, axial_step)
        return cls(lat, ax)


@dataclass(frozen=True)
class PlaneWaveFrame:
    """One transmission: RF channel data [n_samples x n_elements]."""

    steering_angle: float   # rad
    samples: np.ndarray
    t0: float = 0.0         # time of first sample, s

    def __post_init__(self):
        if not abs(self.steering_angle) < np.pi / 2:
            raise ValueError(
                f"steering_angle must satisfy |angle| < pi/2, got {self.steering_angle}")
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 2:
            raise ValueError("samples must be 2-D [n_samples x n_elements]")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_elements(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class RfSweep:
    """An ordered set of plane-wave transmissions sharing one geometry."""

    geometry: ArrayGeometry
    frames: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))

    def __len__(self):
        return len(self.frames)

    @property
    def angles(self) -> np.ndarray:
        return np.array([f.steering_angle for f in self.frames])


def make_linear_array(element_count: int, pitch: float, f0: float,
                      fs: float, c: float) -> ArrayGeometry:
    """Build a validated uniform linear array description."""
    return ArrayGeometry(element_count=int(element_count), pitch=pitch,
                         center_frequency=f0, sampling_frequency=fs,
                         sound_speed=c)


def steering_angle_set(geometry: ArrayGeometry, count: int) -> np.ndarray:
    """Steered-transmission angles theta_n = n * wavelength / aperture.

    The full index set is n in [-N/2, N/2 - 1] for an N-element array;
    a smaller `count` takes the center-most indices, so odd counts are
    symmetric about an exact zero and spacing is uniform at lambda/L.
    """
    if count < 1 or count > geometry.element_count:
        raise ValueError(
            f"count must be in [1, {geometry.element_count}], got {count}")
    step = geometry.wavelength / geometry.aperture_length
    if count % 2:
        n = np.arange(-(count // 2), count // 2 + 1)
    else:
        n = np.arange(-(count // 2), count // 2)
    return n * step


def validate_sweep(sweep: RfSweep) -> None:
    """Raise ValueError on the first violated sweep invariant."""
    if len(sweep.frames) == 0:
        raise ValueError("sweep has no transmissions")
    n_samples = sweep.frames[0].n_samples
    seen = set()
    for i, frame in enumerate(sweep.frames):
        if frame.n_elements != sweep.geometry.element_count:
            raise ValueError(
                f"frame {i}: {frame.n_elements} channels, geometry has "
                f"{sweep.geometry.element_count} elements")
        if frame.n_samples != n_samples:
            raise ValueError(
                f"frame {i}: {frame.n_samples} samples, expected {n_samples}")
        if frame.steering_angle in seen:
            raise ValueError(f"frame {i}: duplicate steering angle "
                             f"{frame.steering_angle}")
        seen.add(frame.steering_angle)
