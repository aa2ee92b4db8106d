"""End-to-end orchestration: simulate, beamform, map, enhance, evaluate.

Also owns the on-disk shapes built on the generic array container: RF
sweep files and paired training datasets (SPW RF in, enhanced target +
map + ROI out).
"""

import os
from dataclasses import dataclass

import numpy as np

from . import beamform, bpm, container, enhance, metrics, pgm, simulate
from .acquisition import PlaneWaveFrame, RfSweep, steering_angle_set, validate_sweep
from .config import PipelineConfig, load_phantom
from .simulate import Phantom


class PipelineError(RuntimeError):
    """A pipeline stage failed; message carries the stage name."""


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(f"stage {name!r} failed: {exc}") from exc


@dataclass(frozen=True)
class DatasetRecord:
    """One training example: raw SPW RF paired with its enhanced target."""

    spw_rf: PlaneWaveFrame
    beam_target: enhance.EnhancedImage
    bone_map: bpm.BoneProbabilityMap
    roi: metrics.RoiMask
    metadata: dict

    def __post_init__(self):
        shape = self.beam_target.values.shape
        if self.bone_map.values.shape != shape:
            raise ValueError("map shape does not match target shape")
        if self.roi.foreground.shape != shape:
            raise ValueError("ROI shape does not match target shape")
        if "config_digest" not in self.metadata:
            raise ValueError("record metadata must carry config_digest")


@dataclass(frozen=True)
class PipelineResult:
    """Everything run_pipeline computes, before any file is written."""

    angles: np.ndarray
    spw_bmode: beamform.BModeImage
    cpwc_bmode: beamform.BModeImage
    spw_envelope: beamform.BeamformedImage
    cpwc_envelope: beamform.BeamformedImage
    bone_map: bpm.BoneProbabilityMap
    enhanced: enhance.EnhancedImage
    roi: metrics.RoiMask
    reports: dict
    fwhm_lateral: dict


def lateral_fwhm(values, lateral_positions) -> float:
    """Full width at half maximum of the brightest lateral profile.

    Interpolates the half-max crossings linearly; a crossing that runs
    off the grid clamps to the grid edge.
    """
    v = np.asarray(values, dtype=np.float64)
    lat = np.asarray(lateral_positions, dtype=np.float64)
    r, c = np.unravel_index(int(np.argmax(v)), v.shape)
    profile = v[r, :]
    half = profile[c] / 2.0
    left = lat[0]
    for j in range(c, 0, -1):
        if profile[j - 1] < half <= profile[j]:
            frac = (profile[j] - half) / (profile[j] - profile[j - 1])
            left = lat[j] - frac * (lat[j] - lat[j - 1])
            break
    right = lat[-1]
    for j in range(c, lat.size - 1):
        if profile[j + 1] < half <= profile[j]:
            frac = (profile[j] - half) / (profile[j] - profile[j + 1])
            right = lat[j] + frac * (lat[j + 1] - lat[j])
            break
    return float(right - left)


def _coerce_phantom(phantom) -> Phantom:
    if isinstance(phantom, Phantom):
        return phantom
    return load_phantom(phantom)


def _simulate_sweep(config: PipelineConfig, phantom: Phantom, angles,
                    force_numpy: bool) -> RfSweep:
    geometry = config.geometry()
    pulse = config.pulse()
    grid_depth_time = 2.0 * config.grid.axial_max / config.sound_speed
    n_for_grid = int(np.ceil(grid_depth_time * config.sampling_frequency)) + 2
    n_samples = max([n_for_grid] + [
        simulate.required_samples(phantom, geometry, float(a), pulse)
        for a in angles])
    sweep = simulate.simulate_sweep(phantom, geometry, angles, pulse,
                                    n_samples, force_numpy=force_numpy)
    if config.noise_snr_db is not None:
        frames = tuple(
            simulate.add_noise(frame, config.noise_snr_db,
                               seed=config.seed + i)
            for i, frame in enumerate(sweep.frames))
        sweep = RfSweep(geometry=geometry, frames=frames)
    return sweep


def compute_pipeline(config: PipelineConfig, phantom,
                     force_numpy: bool = False) -> PipelineResult:
    """Run every stage in memory and return all intermediate products."""
    phantom = _coerce_phantom(phantom)
    geometry = _stage("setup", config.geometry)
    grid = _stage("setup", config.grid.build)
    angles = _stage("setup", steering_angle_set, geometry, config.angle_count)
    sweep = _stage("simulate", _simulate_sweep, config, phantom, angles,
                   force_numpy)
    _stage("simulate", validate_sweep, sweep)

    images = [_stage("beamform", beamform.das_beamform, frame, geometry,
                     grid, config.apodization, force_numpy=force_numpy)
              for frame in sweep.frames]
    spw_index = int(np.argmin(np.abs(angles)))
    compounded = _stage("beamform", beamform.compound, images)

    spw_env = _stage("display", beamform.envelope_detect, images[spw_index])
    cpwc_env = _stage("display", beamform.envelope_detect, compounded)
    spw_bmode = _stage("display", beamform.log_compress, spw_env,
                       config.dynamic_range)
    cpwc_bmode = _stage("display", beamform.log_compress, cpwc_env,
                        config.dynamic_range)

    bone_map = _stage("bpm", bpm.bone_probability_map, cpwc_bmode.values,
                      config.filter_bank, config.tau_ratio)
    enhanced = _stage("enhance", enhance.beam_enhance, cpwc_bmode.values,
                      bone_map, config.weights)

    _, mask = _stage("roi", enhance.otsu_threshold, bone_map)
    if not mask.any():
        mask = bone_map.values == bone_map.values.max()
    roi = _stage("roi", metrics.make_background, mask, config.dilation_radius)

    reports = {
        "spw": _stage("metrics", metrics.evaluate, spw_bmode.values, None,
                      roi, config.n_bins),
        "cpwc": _stage("metrics", metrics.evaluate, cpwc_bmode.values, None,
                       roi, config.n_bins),
        "beam": _stage("metrics", metrics.evaluate, enhanced.display,
                       cpwc_bmode.values, roi, config.n_bins),
    }
    fwhm = {
        "spw": _stage("metrics", lateral_fwhm, spw_env.values,
                      grid.lateral_positions),
        "cpwc": _stage("metrics", lateral_fwhm, cpwc_env.values,
                       grid.lateral_positions),
    }
    return PipelineResult(angles=angles, spw_bmode=spw_bmode,
                          cpwc_bmode=cpwc_bmode, spw_envelope=spw_env,
                          cpwc_envelope=cpwc_env, bone_map=bone_map,
                          enhanced=enhanced, roi=roi, reports=reports,
                          fwhm_lateral=fwhm)


def run_pipeline(config: PipelineConfig, phantom, out_dir,
                 force_numpy: bool = False) -> str:
    """Run all stages and write the five standard outputs to out_dir."""
    result = compute_pipeline(config, phantom, force_numpy=force_numpy)
    os.makedirs(out_dir, exist_ok=True)
    _stage("write", pgm.write_pgm, os.path.join(out_dir, "spw_bmode.pgm"),
           result.spw_bmode.values)
    _stage("write", pgm.write_pgm, os.path.join(out_dir, "cpwc_bmode.pgm"),
           result.cpwc_bmode.values)
    _stage("write", pgm.write_pgm, os.path.join(out_dir, "bpm.pgm"),
           result.bone_map.values)
    _stage("write", pgm.write_pgm, os.path.join(out_dir, "beam.pgm"),
           result.enhanced.display)
    lines = [f"config_digest = {config.digest()}"]
    for label in ("spw", "cpwc", "beam"):
        lines.append(metrics.format_report(result.reports[label],
                                           label=label).rstrip("\n"))
        if label in result.fwhm_lateral:
            lines.append(f"{label}.fwhm_lateral_m = "
                         f"{result.fwhm_lateral[label]:.9e}")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, "metrics.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    return out_dir


def write_sweep(path, sweep: RfSweep, header_extra: dict | None = None) -> None:
    """Store an RF sweep in the array container format."""
    geometry = sweep.geometry
    header = {
        "kind": "rf_sweep",
        "angle_count": str(len(sweep)),
        "element_count": str(geometry.element_count),
        "pitch": repr(geometry.pitch),
        "center_frequency": repr(geometry.center_frequency),
        "sampling_frequency": repr(geometry.sampling_frequency),
        "sound_speed": repr(geometry.sound_speed),
        "n_samples": str(sweep.frames[0].n_samples),
    }
    if header_extra:
        header.update({k: str(v) for k, v in header_extra.items()})
    arrays = {"angles": sweep.angles}
    for i, frame in enumerate(sweep.frames):
        arrays[f"frame_{i:03d}"] = frame.samples
    container.write_container(path, header, arrays)


def read_sweep(path) -> RfSweep:
    """Load an RF sweep container back into domain objects."""
    header, arrays = container.read_container(path)
    if header.get("kind") != "rf_sweep":
        raise container.ContainerError(
            f"expected an rf_sweep container, got kind={header.get('kind')!r}")
    from .acquisition import make_linear_array
    geometry = make_linear_array(int(header["element_count"]),
                                 float(header["pitch"]),
                                 float(header["center_frequency"]),
                                 float(header["sampling_frequency"]),
                                 float(header["sound_speed"]))
    angles = arrays["angles"].astype(np.float64)
    frames = tuple(
        PlaneWaveFrame(steering_angle=float(angles[i]),
                       samples=arrays[f"frame_{i:03d}"].astype(np.float64))
        for i in range(int(header["angle_count"])))
    return RfSweep(geometry=geometry, frames=frames)


def make_dataset_record(config: PipelineConfig, phantom,
                        force_numpy: bool = False) -> DatasetRecord:
    """Run the pipeline on one phantom and package the training triple."""
    result = compute_pipeline(config, phantom, force_numpy=force_numpy)
    geometry = config.geometry()
    pulse = config.pulse()
    phantom = _coerce_phantom(phantom)
    spw_angle = float(result.angles[int(np.argmin(np.abs(result.angles)))])
    n_samples = max(
        simulate.required_samples(phantom, geometry, spw_angle, pulse),
        int(np.ceil(2.0 * config.grid.axial_max / config.sound_speed
                    * config.sampling_frequency)) + 2)
    spw_frame = simulate.simulate_frame(phantom, geometry, spw_angle, pulse,
                                        n_samples, force_numpy=force_numpy)
    if config.noise_snr_db is not None:
        spw_frame = simulate.add_noise(spw_frame, config.noise_snr_db,
                                       seed=config.seed)
    metadata = {
        "config_digest": config.digest(),
        "spw_angle": repr(spw_angle),
        "angle_count": str(config.angle_count),
    }
    return DatasetRecord(spw_rf=spw_frame, beam_target=result.enhanced,
                         bone_map=result.bone_map, roi=result.roi,
                         metadata=metadata)


def export_dataset(config: PipelineConfig, phantoms, out_path,
                   force_numpy: bool = False) -> str:
    """Write one DatasetRecord per phantom into a container file."""
    phantoms = list(phantoms)
    if not phantoms:
        raise ValueError("export needs at least one phantom")
    header = {
        "kind": "dataset",
        "record_count": str(len(phantoms)),
        "config_digest": config.digest(),
        "element_count": str(config.element_count),
        "sampling_frequency": repr(config.sampling_frequency),
        "sound_speed": repr(config.sound_speed),
        "center_frequency": repr(config.center_frequency),
        "angle_count": str(config.angle_count),
        "grid_rows": str(config.grid.axial_count),
        "grid_cols": str(config.grid.lateral_count),
    }
    arrays = {}
    for i, phantom in enumerate(phantoms):
        record = make_dataset_record(config, phantom,
                                     force_numpy=force_numpy)
        header[f"r{i}.spw_angle"] = record.metadata["spw_angle"]
        arrays[f"r{i}.spw_rf"] = record.spw_rf.samples
        arrays[f"r{i}.beam_target"] = record.beam_target.display
        arrays[f"r{i}.bpm"] = record.bone_map.values
        arrays[f"r{i}.roi_fg"] = record.roi.foreground.astype(np.float32)
        arrays[f"r{i}.roi_bg"] = record.roi.background.astype(np.float32)
    container.write_container(out_path, header, arrays)
    return str(out_path)


def read_dataset(path) -> tuple:
    """Load a dataset container; returns (header, list of array dicts)."""
    header, arrays = container.read_container(path)
    if header.get("kind") != "dataset":
        raise container.ContainerError(
            f"expected a dataset container, got kind={header.get('kind')!r}")
    records = []
    for i in range(int(header["record_count"])):
        records.append({
            "spw_rf": arrays[f"r{i}.spw_rf"],
            "beam_target": arrays[f"r{i}.beam_target"],
            "bpm": arrays[f"r{i}.bpm"],
            "roi_fg": arrays[f"r{i}.roi_fg"],
            "roi_bg": arrays[f"r{i}.roi_bg"],
            "spw_angle": float(header[f"r{i}.spw_angle"]),
        })
    return header, records
