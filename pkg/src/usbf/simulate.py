"""Synthetic RF channel data for point and specular-surface phantoms.

Echoes are Gaussian-modulated sinusoids deposited at the analytic
transmit + receive time of flight.  Specular surfaces are discretized
into reflector points whose amplitude falls off with the deviation from
retro-reflecting (normal) incidence, which reproduces the familiar drop
in bone-surface brightness when the beam tilts away from perpendicular.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .acquisition import ArrayGeometry, PlaneWaveFrame, RfSweep

_TAIL_SIGMAS = 6.0


@dataclass(frozen=True)
class PulseModel:
    """Gaussian-modulated sinusoid transmit pulse."""

    center_frequency: float
    fractional_bandwidth: float = 0.67

    def __post_init__(self):
        if self.center_frequency <= 0:
            raise ValueError("center_frequency must be > 0")
        if not 0.0 < self.fractional_bandwidth < 2.0:
            raise ValueError("fractional_bandwidth must be in (0, 2)")

    @property
    def sigma_time(self) -> float:
        """Gaussian envelope width in seconds.

        The fractional bandwidth is read as the -6 dB (half-amplitude)
        spectral width divided by the center frequency, the usual probe
        datasheet convention.
        """
        sigma_f = self.fractional_bandwidth * self.center_frequency \
            / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        return 1.0 / (2.0 * math.pi * sigma_f)

    def sample(self, t):
        """Evaluate the pulse at time offsets t (seconds from its center)."""
        t = np.asarray(t, dtype=np.float64)
        s = self.sigma_time
        return np.exp(-(t * t) / (2.0 * s * s)) \
            * np.cos(2.0 * math.pi * self.center_frequency * t)


@dataclass(frozen=True)
class PointScatterer:
    """Isotropic point reflector at (x, z), z below the array face."""

    position: tuple
    reflectivity: float = 1.0

    def __post_init__(self):
        x, z = self.position
        if not (math.isfinite(x) and math.isfinite(z)):
            raise ValueError("scatterer position must be finite")
        if z <= 0:
            raise ValueError("scatterer depth z must be > 0")
        if not math.isfinite(self.reflectivity):
            raise ValueError("reflectivity must be finite")
        object.__setattr__(self, "position", (float(x), float(z)))


@dataclass(frozen=True)
class SpecularSurface:
    """Piecewise-linear mirror-like reflector.

    angular_falloff sets the width (radians) of the Gaussian lobe around
    normal incidence; echoes scale by exp(-(phi_mis / angular_falloff)^2).
    """

    polyline: tuple
    reflectivity: float = 1.0
    angular_falloff: float = 0.15

    def __post_init__(self):
        pts = tuple((float(x), float(z)) for x, z in self.polyline)
        if len(pts) < 2:
            raise ValueError("polyline needs at least 2 points")
        for x, z in pts:
            if not (math.isfinite(x) and math.isfinite(z)):
                raise ValueError("polyline points must be finite")
            if z <= 0:
                raise ValueError("polyline depths must be > 0")
        for (x0, z0), (x1, z1) in zip(pts[:-1], pts[1:]):
            if x0 == x1 and z0 == z1:
                raise ValueError("polyline has a zero-length segment")
        if not math.isfinite(self.reflectivity):
            raise ValueError("reflectivity must be finite")
        if self.angular_falloff <= 0:
            raise ValueError("angular_falloff must be > 0")
        object.__setattr__(self, "polyline", pts)

    def sample_points(self, spacing: float):
        """Discretize into (positions [n,2], normals [n,2]) at ~spacing.

        Each segment contributes the midpoints of equal sub-intervals, so
        shared vertices are not double-counted and the sampling is
        deterministic.
        """
        positions = []
        normals = []
        for (x0, z0), (x1, z1) in zip(self.polyline[:-1], self.polyline[1:]):
            sx, sz = x1 - x0, z1 - z0
            length = math.hypot(sx, sz)
            n_pts = max(1, int(round(length / spacing)))
            tx, tz = sx / length, sz / length
            for i in range(n_pts):
                s = (i + 0.5) / n_pts
                positions.append((x0 + s * sx, z0 + s * sz))
                normals.append((-tz, tx))
        return np.array(positions), np.array(normals)


@dataclass(frozen=True)
class Phantom:
    """Collection of point scatterers and specular surfaces."""

    scatterers: tuple = field(default_factory=tuple)
    surfaces: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        object.__setattr__(self, "surfaces", tuple(self.surfaces))
        if not self.scatterers and not self.surfaces:
            raise ValueError("phantom must contain at least one reflector")


def _gather_targets(phantom: Phantom, angle: float, wavelength: float):
    """Flatten a phantom into per-angle reflector points.

    Returns (x, z, amplitude) arrays.  Surface points are weighted by the
    specular lobe: phi_mis is the angle between the incident propagation
    direction and the segment normal, so a surface tilted away from
    perpendicular incidence returns a weaker echo to the whole array.
    """
    xs, zs, amps = [], [], []
    for sc in phantom.scatterers:
        xs.append(sc.position[0])
        zs.append(sc.position[1])
        amps.append(sc.reflectivity)
    d = np.array([math.sin(angle), math.cos(angle)])
    for surf in phantom.surfaces:
        positions, normals = surf.sample_points(wavelength / 2.0)
        cos_mis = np.clip(np.abs(normals @ d), 0.0, 1.0)
        phi_mis = np.arccos(cos_mis)
        lobe = np.exp(-((phi_mis / surf.angular_falloff) ** 2))
        xs.extend(positions[:, 0])
        zs.extend(positions[:, 1])
        amps.extend(surf.reflectivity * lobe)
    return np.array(xs), np.array(zs), np.array(amps)


def required_samples(phantom: Phantom, geometry: ArrayGeometry, angle: float,
                     pulse: PulseModel) -> int:
    """Sample count needed to hold every echo including its pulse tail."""
    wavelength = geometry.sound_speed / pulse.center_frequency
    xs, zs, _ = _gather_targets(phantom, angle, wavelength)
    elem = geometry.element_positions
    cos_t, sin_t = math.cos(angle), math.sin(angle)
    tx = (zs * cos_t + xs * sin_t) / geometry.sound_speed
    dx = xs[:, np.newaxis] - elem[np.newaxis, :]
    rx = np.sqrt(zs[:, np.newaxis] ** 2 + dx * dx) / geometry.sound_speed
    latest = float(np.max(tx[:, np.newaxis] + rx))
    tail_time = _TAIL_SIGMAS * pulse.sigma_time
    return int(math.ceil((latest + tail_time) * geometry.sampling_frequency)) + 1


def simulate_frame(phantom: Phantom, geometry: ArrayGeometry, angle: float,
                   pulse: PulseModel, n_samples: int,
                   force_numpy: bool = False) -> PlaneWaveFrame:
    """Synthesize one plane-wave transmission over the phantom.

    Every reflector deposits reflectivity * pulse(t - [tx + rx delay])
    onto every channel; the frame is the superposition.  Raises if any
    echo would land beyond the sampled window.
    """
    needed = required_samples(phantom, geometry, angle, pulse)
    if n_samples < needed:
        raise ValueError(f"deepest target needs n_samples >= {needed}, "
                         f"got {n_samples}")
    wavelength = geometry.sound_speed / pulse.center_frequency
    xs, zs, amps = _gather_targets(phantom, angle, wavelength)
    out = np.zeros((n_samples, geometry.element_count))
    elem = geometry.element_positions
    sigma_t = pulse.sigma_time
    tail = _TAIL_SIGMAS * sigma_t * geometry.sampling_frequency
    amp_buf = np.empty(geometry.element_count)
    for x, z, a in zip(xs, zs, amps):
        if a == 0.0:
            continue
        amp_buf.fill(a)
        kernels.deposit_echo(out, elem, x, z, amp_buf, angle, 0.0,
                             geometry.sampling_frequency,
                             geometry.sound_speed, pulse.center_frequency,
                             sigma_t, tail, force_numpy=force_numpy)
    return PlaneWaveFrame(steering_angle=angle, samples=out)


def simulate_sweep(phantom: Phantom, geometry: ArrayGeometry, angles,
                   pulse: PulseModel, n_samples: int,
                   force_numpy: bool = False) -> RfSweep:
    """One simulated frame per steering angle, shared sample count."""
    frames = tuple(
        simulate_frame(phantom, geometry, float(a), pulse, n_samples,
                       force_numpy=force_numpy)
        for a in angles)
    return RfSweep(geometry=geometry, frames=frames)


def add_noise(frame: PlaneWaveFrame, snr_db: float, seed: int) -> PlaneWaveFrame:
    """Add white Gaussian noise at the requested SNR, reproducibly."""
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    signal_power = float(np.mean(frame.samples ** 2))
    if signal_power == 0.0:
        raise ValueError("cannot scale noise for an all-zero frame")
    noise_power = signal_power / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(noise_power), frame.samples.shape)
    return PlaneWaveFrame(steering_angle=frame.steering_angle,
                          samples=frame.samples + noise, t0=frame.t0)
