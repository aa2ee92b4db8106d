"""Pipeline configuration and phantom description files.

Both formats are plain-text ``key = value`` lines under ``[section]``
headers.  CLI flags override file values; the digest of a config pins
every field so exported datasets can name the exact settings that
produced them.
"""

import configparser
import hashlib
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import ArrayGeometry, ImagingGrid, make_linear_array
from .beamform import ApodizationSpec
from .bpm import FilterBankConfig
from .enhance import AttentionWeights
from .simulate import Phantom, PointScatterer, PulseModel, SpecularSurface


@dataclass(frozen=True)
class GridSpec:
    """Rectangular imaging grid bounds and pixel counts."""

    lateral_min: float = -0.019
    lateral_max: float = 0.019
    lateral_count: int = 192
    axial_min: float = 0.004
    axial_max: float = 0.032
    axial_count: int = 384

    def __post_init__(self):
        if self.lateral_min >= self.lateral_max:
            raise ValueError("lateral bounds must be increasing")
        if not 0.0 <= self.axial_min < self.axial_max:
            raise ValueError("axial bounds must be increasing and >= 0")
        if self.lateral_count < 2 or self.axial_count < 2:
            raise ValueError("grid needs at least 2 pixels per axis")

    def build(self) -> ImagingGrid:
        return ImagingGrid(
            lateral_positions=np.linspace(self.lateral_min, self.lateral_max,
                                          self.lateral_count),
            axial_positions=np.linspace(self.axial_min, self.axial_max,
                                        self.axial_count))


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the simulate/beamform/enhance/evaluate pipeline."""

    element_count: int = 128
    pitch: float = 0.3e-3
    center_frequency: float = 7.6e6
    sampling_frequency: float = 31.25e6
    sound_speed: float = 1540.0
    fractional_bandwidth: float = 0.67
    angle_count: int = 73
    seed: int = 0
    noise_snr_db: float | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    apodization: ApodizationSpec = field(default_factory=ApodizationSpec)
    filter_bank: FilterBankConfig = field(default_factory=FilterBankConfig)
    tau_ratio: float = 0.01
    shadow_sigma: float = 8.0
    weights: AttentionWeights = field(default_factory=AttentionWeights)
    dynamic_range: float = 60.0
    n_bins: int = 256
    dilation_radius: int = 10

    def __post_init__(self):
        if self.angle_count < 1 or self.angle_count > self.element_count:
            raise ValueError("angle_count must be in [1, element_count]")
        if self.tau_ratio < 0:
            raise ValueError("tau_ratio must be >= 0")
        if self.shadow_sigma <= 0:
            raise ValueError("shadow_sigma must be > 0")
        if self.dynamic_range <= 0:
            raise ValueError("dynamic_range must be > 0")
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.dilation_radius < 1:
            raise ValueError("dilation_radius must be >= 1")

    def geometry(self) -> ArrayGeometry:
        return make_linear_array(self.element_count, self.pitch,
                                 self.center_frequency,
                                 self.sampling_frequency, self.sound_speed)

    def pulse(self) -> PulseModel:
        return PulseModel(center_frequency=self.center_frequency,
                          fractional_bandwidth=self.fractional_bandwidth)

    def digest(self) -> str:
        """Hex digest pinning every config field."""
        parts = []
        for name, value in sorted(_flatten(self).items()):
            parts.append(f"{name}={value!r}")
        return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()


def _flatten(cfg: PipelineConfig) -> dict:
    out = {
        "element_count": cfg.element_count,
        "pitch": cfg.pitch,
        "center_frequency": cfg.center_frequency,
        "sampling_frequency": cfg.sampling_frequency,
        "sound_speed": cfg.sound_speed,
        "fractional_bandwidth": cfg.fractional_bandwidth,
        "angle_count": cfg.angle_count,
        "seed": cfg.seed,
        "noise_snr_db": cfg.noise_snr_db,
        "grid.lateral_min": cfg.grid.lateral_min,
        "grid.lateral_max": cfg.grid.lateral_max,
        "grid.lateral_count": cfg.grid.lateral_count,
        "grid.axial_min": cfg.grid.axial_min,
        "grid.axial_max": cfg.grid.axial_max,
        "grid.axial_count": cfg.grid.axial_count,
        "apodization.window": cfg.apodization.window,
        "apodization.f_number": cfg.apodization.f_number,
        "apodization.tukey_ratio": cfg.apodization.tukey_ratio,
        "bpm.wavelengths": cfg.filter_bank.wavelengths,
        "bpm.sigma_on_f": cfg.filter_bank.sigma_on_f,
        "bpm.tau_ratio": cfg.tau_ratio,
        "bpm.shadow_sigma": cfg.shadow_sigma,
        "enhance.alpha": cfg.weights.alpha,
        "enhance.beta": cfg.weights.beta,
        "enhance.gamma": cfg.weights.gamma,
        "display.dynamic_range": cfg.dynamic_range,
        "metrics.n_bins": cfg.n_bins,
        "metrics.dilation_radius": cfg.dilation_radius,
    }
    return out


def _parser(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    return parser


def load_config(path=None) -> PipelineConfig:
    """Build a PipelineConfig from an INI file; None gives the defaults."""
    cfg = PipelineConfig()
    if path is None:
        return cfg
    parser = _parser(path)

    def num(section, key, cast, current):
        if parser.has_option(section, key):
            return cast(parser.get(section, key))
        return current

    cfg = replace(
        cfg,
        element_count=num("geometry", "element_count", int, cfg.element_count),
        pitch=num("geometry", "pitch", float, cfg.pitch),
        center_frequency=num("geometry", "center_frequency", float,
                             cfg.center_frequency),
        sampling_frequency=num("geometry", "sampling_frequency", float,
                               cfg.sampling_frequency),
        sound_speed=num("geometry", "sound_speed", float, cfg.sound_speed),
        fractional_bandwidth=num("geometry", "fractional_bandwidth", float,
                                 cfg.fractional_bandwidth),
        angle_count=num("sweep", "angle_count", int, cfg.angle_count),
        seed=num("sweep", "seed", int, cfg.seed),
        noise_snr_db=num("sweep", "noise_snr_db", float, cfg.noise_snr_db),
        tau_ratio=num("bpm", "tau_ratio", float, cfg.tau_ratio),
        shadow_sigma=num("bpm", "shadow_sigma", float, cfg.shadow_sigma),
        dynamic_range=num("display", "dynamic_range", float, cfg.dynamic_range),
        n_bins=num("metrics", "n_bins", int, cfg.n_bins),
        dilation_radius=num("metrics", "dilation_radius", int,
                            cfg.dilation_radius),
    )
    g = cfg.grid
    cfg = replace(cfg, grid=GridSpec(
        lateral_min=num("grid", "lateral_min", float, g.lateral_min),
        lateral_max=num("grid", "lateral_max", float, g.lateral_max),
        lateral_count=num("grid", "lateral_count", int, g.lateral_count),
        axial_min=num("grid", "axial_min", float, g.axial_min),
        axial_max=num("grid", "axial_max", float, g.axial_max),
        axial_count=num("grid", "axial_count", int, g.axial_count)))
    a = cfg.apodization
    cfg = replace(cfg, apodization=ApodizationSpec(
        window=num("apodization", "window", str, a.window).strip(),
        f_number=num("apodization", "f_number", float, a.f_number),
        tukey_ratio=num("apodization", "tukey_ratio", float, a.tukey_ratio)))
    fb = cfg.filter_bank
    wavelengths = fb.wavelengths
    if parser.has_option("bpm", "wavelengths"):
        wavelengths = tuple(float(w) for w in
                            parser.get("bpm", "wavelengths").split(","))
    cfg = replace(cfg, filter_bank=FilterBankConfig(
        wavelengths=wavelengths,
        sigma_on_f=num("bpm", "sigma_on_f", float, fb.sigma_on_f)))
    w = cfg.weights
    cfg = replace(cfg, weights=AttentionWeights(
        alpha=num("enhance", "alpha", float, w.alpha),
        beta=num("enhance", "beta", float, w.beta),
        gamma=num("enhance", "gamma", float, w.gamma)))
    return cfg


def save_config(cfg: PipelineConfig, path) -> None:
    """Write a config back out in the same INI format load_config reads."""
    parser = configparser.ConfigParser()
    parser["geometry"] = {
        "element_count": str(cfg.element_count),
        "pitch": repr(cfg.pitch),
        "center_frequency": repr(cfg.center_frequency),
        "sampling_frequency": repr(cfg.sampling_frequency),
        "sound_speed": repr(cfg.sound_speed),
        "fractional_bandwidth": repr(cfg.fractional_bandwidth),
    }
    sweep = {"angle_count": str(cfg.angle_count), "seed": str(cfg.seed)}
    if cfg.noise_snr_db is not None:
        sweep["noise_snr_db"] = repr(cfg.noise_snr_db)
    parser["sweep"] = sweep
    parser["grid"] = {
        "lateral_min": repr(cfg.grid.lateral_min),
        "lateral_max": repr(cfg.grid.lateral_max),
        "lateral_count": str(cfg.grid.lateral_count),
        "axial_min": repr(cfg.grid.axial_min),
        "axial_max": repr(cfg.grid.axial_max),
        "axial_count": str(cfg.grid.axial_count),
    }
    parser["apodization"] = {
        "window": cfg.apodization.window,
        "f_number": repr(cfg.apodization.f_number),
        "tukey_ratio": repr(cfg.apodization.tukey_ratio),
    }
    parser["bpm"] = {
        "wavelengths": ", ".join(repr(w) for w in cfg.filter_bank.wavelengths),
        "sigma_on_f": repr(cfg.filter_bank.sigma_on_f),
        "tau_ratio": repr(cfg.tau_ratio),
        "shadow_sigma": repr(cfg.shadow_sigma),
    }
    parser["enhance"] = {
        "alpha": repr(cfg.weights.alpha),
        "beta": repr(cfg.weights.beta),
        "gamma": repr(cfg.weights.gamma),
    }
    parser["display"] = {"dynamic_range": repr(cfg.dynamic_range)}
    parser["metrics"] = {
        "n_bins": str(cfg.n_bins),
        "dilation_radius": str(cfg.dilation_radius),
    }
    buf = io.StringIO()
    parser.write(buf)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def load_phantom(path) -> Phantom:
    """Parse a phantom description file.

    Recognized section prefixes:

    ``[scatterer ...]``  keys x, z, reflectivity
    ``[surface ...]``    keys points ("x,z ; x,z ; ..."), reflectivity,
                         angular_falloff
    ``[speckle ...]``    keys x_min, x_max, z_min, z_max, count,
                         reflectivity, seed -- a seeded random slab of
                         point scatterers with zero-mean amplitudes
    """
    parser = _parser(path)
    scatterers = []
    surfaces = []
    for section in parser.sections():
        kind = section.split()[0].lower()
        get = lambda key, default=None: parser.get(section, key, fallback=default)
        if kind == "scatterer":
            scatterers.append(PointScatterer(
                position=(float(get("x", "0")), float(get("z"))),
                reflectivity=float(get("reflectivity", "1"))))
        elif kind == "surface":
            points = []
            for token in get("points").split(";"):
                x, z = token.split(",")
                points.append((float(x), float(z)))
            surfaces.append(SpecularSurface(
                polyline=tuple(points),
                reflectivity=float(get("reflectivity", "1")),
                angular_falloff=float(get("angular_falloff", "0.15"))))
        elif kind == "speckle":
            rng = np.random.default_rng(int(get("seed", "0")))
            count = int(get("count"))
            xs = rng.uniform(float(get("x_min")), float(get("x_max")), count)
            zs = rng.uniform(float(get("z_min")), float(get("z_max")), count)
            amps = float(get("reflectivity", "1")) * rng.standard_normal(count)
            for x, z, a in zip(xs, zs, amps):
                scatterers.append(PointScatterer(position=(x, z),
                                                 reflectivity=a))
        else:
            raise ValueError(f"unknown phantom section {section!r}")
    return Phantom(scatterers=tuple(scatterers), surfaces=tuple(surfaces))
