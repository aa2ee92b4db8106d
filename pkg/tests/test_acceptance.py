"""Acceptance suite: one test per deliverable property.

Each test enforces its stated tolerance and runtime budget and prints
the measured values, so a verbose run doubles as a report.  Kernel
compilation happens in the session-level warm-up fixture, keeping the
timed bodies honest.
"""

import hashlib
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from usbf.acquisition import ImagingGrid, make_linear_array, steering_angle_set
from usbf.beamform import (ApodizationSpec, compound, das_beamform,
                           envelope_detect, receive_delay, transmit_delay)
from usbf.bpm import (BoneProbabilityMap, FilterBankConfig,
                      bone_probability_map, log_gabor_filter, monogenic)
from usbf.config import GridSpec, PipelineConfig
from usbf.container import read_container, write_container
from usbf.enhance import AttentionWeights, beam_enhance
from usbf.metrics import (RoiMask, contrast_ratio, epi, evaluate,
                          make_background, snr, ssi, ssim)
from usbf.pipeline import (compute_pipeline, export_dataset, lateral_fwhm,
                           run_pipeline)
from usbf.simulate import (Phantom, PointScatterer, PulseModel,
                           SpecularSurface, required_samples, simulate_sweep)


def test_criterion_1_delay_geometry_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(12345)
    c = 1540.0
    worst = 0.0
    for _ in range(20):
        x = float(rng.uniform(-0.02, 0.02))
        z = float(rng.uniform(0.01, 0.04))     # keeps tx away from zero
        angle = float(rng.uniform(-0.3, 0.3))
        xk = float(rng.uniform(-0.019, 0.019))
        tx = transmit_delay((x, z), angle, c)
        rx = receive_delay((x, z), xk, c)
        tx_ref = (z * math.cos(angle) + x * math.sin(angle)) / c
        rx_ref = math.sqrt(z * z + (x - xk) ** 2) / c
        worst = max(worst, abs(tx - tx_ref) / abs(tx_ref),
                    abs(rx - rx_ref) / rx_ref)
        assert tx == pytest.approx(tx_ref, rel=1e-12)
        assert rx == pytest.approx(rx_ref, rel=1e-12)
    elapsed = time.perf_counter() - start
    print(f"worst relative delay error {worst:.3e}; runtime {elapsed:.3f} s")
    assert elapsed < 1.0


def test_criterion_2_point_localization_and_compounding_resolution():
    start = time.perf_counter()
    geo = make_linear_array(128, 0.3e-3, 7.6e6, 31.25e6, 1540.0)
    lam = geo.wavelength
    phantom = Phantom(scatterers=(PointScatterer(position=(0.0, 0.02)),))
    angles = steering_angle_set(geo, 73)
    # axial step must oversample the round-trip RF (axial period lam/2),
    # or the envelope ripples and the argmax lands on a ripple crest
    grid = ImagingGrid(
        lateral_positions=np.arange(-0.004, 0.004, lam / 8),
        axial_positions=np.arange(0.018, 0.022, lam / 16))
    pulse = PulseModel(center_frequency=geo.center_frequency)
    deep = 2.0 * grid.axial_positions[-1] / geo.sound_speed
    n = max(max(required_samples(phantom, geo, float(a), pulse)
                for a in angles),
            math.ceil(deep * geo.sampling_frequency) + 2)
    sweep = simulate_sweep(phantom, geo, angles, pulse, n)
    apo = ApodizationSpec(window="hann", f_number=2.0)
    images = [das_beamform(frame, geo, grid, apo) for frame in sweep.frames]
    spw_env = envelope_detect(images[int(np.argmin(np.abs(angles)))])
    cpwc_env = envelope_detect(compound(images))

    r, c = np.unravel_index(int(np.argmax(spw_env.values)),
                            spw_env.values.shape)
    axial_err = abs(grid.axial_positions[r] - 0.02)
    lateral_err = abs(grid.lateral_positions[c])
    fw_spw = lateral_fwhm(spw_env.values, grid.lateral_positions)
    fw_cpwc = lateral_fwhm(cpwc_env.values, grid.lateral_positions)
    reduction = 1.0 - fw_cpwc / fw_spw
    elapsed = time.perf_counter() - start
    print(f"peak offset axial {axial_err * 1e6:.1f} um, lateral "
          f"{lateral_err * 1e6:.1f} um; FWHM single {fw_spw * 1e6:.1f} um, "
          f"compounded {fw_cpwc * 1e6:.1f} um ({100 * reduction:.1f}% "
          f"narrower); runtime {elapsed:.1f} s")
    assert axial_err <= lam / 2
    assert lateral_err <= 2 * lam
    assert reduction >= 0.20
    assert elapsed < 30.0


def test_criterion_3_bone_probability_map_contract():
    start = time.perf_counter()
    shape = (160, 200)
    rng = np.random.default_rng(0)
    rows = np.arange(shape[0], dtype=np.float64)[:, np.newaxis]
    scene = np.clip(0.12 + 0.08 * rng.random(shape)
                    + 0.7 * np.exp(-((rows - 96.0) ** 2) / 2.0), 0.0, 1.0)
    bmap = bone_probability_map(scene, FilterBankConfig(), tau_ratio=0.1)
    peak_row = int(np.unravel_index(int(np.argmax(bmap.values)), shape)[0])
    flat = bone_probability_map(np.full(shape, 0.37), FilterBankConfig(),
                                tau_ratio=0.1)
    elapsed = time.perf_counter() - start
    print(f"map range [{bmap.values.min()}, {bmap.values.max()}], peak row "
          f"{peak_row} (line at 96); runtime {elapsed:.2f} s")
    assert bmap.values.min() == 0.0
    assert bmap.values.max() == 1.0
    assert abs(peak_row - 96) <= 2
    assert np.array_equal(flat.values, np.zeros(shape))
    assert elapsed < 10.0


def test_criterion_4_filter_bank_analytics():
    cfg = FilterBankConfig(wavelengths=(16.0,))
    n = 128
    x = np.arange(n)

    def tone_gain(cycles):
        img = np.tile(np.cos(2.0 * np.pi * cycles * x / n), (n, 1))
        out = log_gabor_filter(img, cfg)
        return float(np.linalg.norm(out) / np.linalg.norm(img))

    gain_center = tone_gain(n // 16)          # wavelength 16 px: the center
    gain_4x = tone_gain(4 * (n // 16))        # two octaves above
    expected_4x = 0.06798060840087146         # closed-form filter value

    rng = np.random.default_rng(2)
    field = monogenic(rng.standard_normal((n, n)), cfg)
    even = float(np.sum(field.m1 ** 2))
    odd = float(np.sum(field.m2 ** 2 + field.m3 ** 2))
    riesz_err = abs(odd - even) / even

    base = rng.random((n, n)) + 0.5
    dc = abs(float(np.mean(log_gabor_filter(base, cfg))))
    dc_rel = dc / abs(float(np.mean(base)))

    print(f"center gain {gain_center:.6f}; 4x gain {gain_4x:.8f} (expected "
          f"{expected_4x:.8f}); riesz energy error {riesz_err:.2e}; "
          f"dc leakage {dc_rel:.2e}")
    assert abs(gain_center - 1.0) <= 0.02
    assert gain_4x == pytest.approx(expected_4x, rel=0.05)
    assert riesz_err <= 1e-6
    assert dc_rel <= 1e-9


def test_criterion_5_enhancement_blend_identities():
    shape = (8, 8)
    defaults = AttentionWeights()
    assert (defaults.alpha, defaults.beta, defaults.gamma) == (0.30, 0.09, 0.50)

    bias_only = beam_enhance(np.zeros(shape),
                             BoneProbabilityMap(values=np.zeros(shape)))
    assert np.array_equal(bias_only.values, np.full(shape, 0.5))

    bimodal = np.zeros(shape)
    bimodal[:, 4:] = 1.0
    full = beam_enhance(np.ones(shape), BoneProbabilityMap(values=bimodal))
    gated = bimodal.astype(bool)
    np.testing.assert_allclose(full.values[gated], 0.89, rtol=1e-12)
    np.testing.assert_allclose(full.values[~gated], 0.80, rtol=1e-12)

    rng = np.random.default_rng(3)
    img = rng.random(shape)
    passthrough = beam_enhance(img, BoneProbabilityMap(values=bimodal),
                               AttentionWeights(alpha=1.0, beta=0.0,
                                                gamma=0.0))
    assert np.array_equal(passthrough.values, img)
    print(f"bias-only {bias_only.values[0, 0]}, full activation "
          f"{full.values[0, -1]}, pass-through exact")


def test_criterion_6_metric_identities_and_hand_values():
    rng = np.random.default_rng(0)
    x_img = rng.integers(0, 1024, size=(64, 64)).astype(np.float64) / 1024.0
    assert ssim(x_img, x_img) == 1.0
    assert ssi(x_img, x_img) == 1.0
    assert epi(x_img, x_img) == 100.0
    affine = epi(x_img, 1.7 * x_img + 0.3)
    assert affine == pytest.approx(100.0, abs=1e-9)

    fg = np.zeros((16, 16), dtype=bool)
    fg[6:10, 6:10] = True
    roi = make_background(fg, dilation_radius=3)
    cr_value = contrast_ratio(np.where(roi.foreground, 0.8, 0.4), roi)
    assert cr_value == pytest.approx(6.020599913279624, abs=1e-9)

    fg2 = np.zeros((2, 8), dtype=bool)
    fg2[0, :] = True
    roi2 = RoiMask(foreground=fg2, background=~fg2)
    img2 = np.zeros((2, 8))
    img2[0, :] = 1.0
    img2[1, ::2] = 1.0
    snr_value = snr(img2, roi2)
    assert snr_value == pytest.approx(3.010299956639812, abs=1e-9)

    a = np.array([[0.2, 0.2], [0.8, 0.8]])
    b = np.array([[0.2, 0.8], [0.8, 0.8]])
    ssi_value = ssi(a, b, n_bins=2)
    assert ssi_value == pytest.approx(0.75, abs=1e-9)

    ssim_value = ssim(np.zeros((8, 8)), np.ones((8, 8)))
    assert ssim_value == pytest.approx(1.0 / 101.0, abs=1e-9)
    print(f"identities exact; affine epi {affine!r}; hand values "
          f"cr {cr_value:.12f}, snr {snr_value:.12f}, ssi {ssi_value}, "
          f"ssim {ssim_value:.12f}")


def test_criterion_7_end_to_end_enhancement_direction():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    count = 1400
    xs = rng.uniform(-0.012, 0.012, count)
    zs = rng.uniform(0.015, 0.025, count)
    amps = 0.6 * rng.standard_normal(count)
    scatterers = tuple(
        PointScatterer(position=(float(x), float(z)), reflectivity=float(a))
        for x, z, a in zip(xs, zs, amps))
    surface = SpecularSurface(polyline=((-0.010, 0.0215), (0.010, 0.0235)),
                              reflectivity=40.0, angular_falloff=0.04)
    phantom = Phantom(scatterers=scatterers, surfaces=(surface,))
    config = PipelineConfig(
        angle_count=73, tau_ratio=0.3, dynamic_range=40.0,
        grid=GridSpec(-0.008, 0.008, 200, 0.016, 0.026, 176))
    result = compute_pipeline(config, phantom)

    grid = config.grid.build()
    lat = grid.lateral_positions[np.newaxis, :]
    ax = grid.axial_positions[:, np.newaxis]
    surface_z = 0.0215 + (lat + 0.010) * (0.0235 - 0.0215) / 0.020
    fg = (np.abs(lat) <= 0.007) & (np.abs(ax - surface_z) < 0.0005)
    roi = make_background(fg, dilation_radius=10)
    spw = evaluate(result.spw_bmode.values, None, roi)
    beam = evaluate(result.enhanced.display, None, roi)
    peak = np.unravel_index(int(np.argmax(result.bone_map.values)), fg.shape)
    elapsed = time.perf_counter() - start
    print(f"single-angle cr {spw.cr_db:.3f} dB snr {spw.snr_db:.3f} dB; "
          f"enhanced cr {beam.cr_db:.3f} dB snr {beam.snr_db:.3f} dB; "
          f"map peak at {peak}; runtime {elapsed:.1f} s")
    assert beam.cr_db > spw.cr_db
    assert beam.snr_db > spw.snr_db
    assert fg[peak]
    assert elapsed < 60.0


THREAD_SCRIPT = """\
import hashlib
import numpy as np
from usbf import kernels
rng = np.random.default_rng(7)
samples = rng.standard_normal((500, 48))
elem_x = (np.arange(48) - 23.5) * 3e-4
lat = np.linspace(-0.004, 0.004, 40)
ax = np.linspace(0.01, 0.02, 64)
out = kernels.das_sum(samples, elem_x, lat, ax, 0.05, 0.0, 31.25e6, 1540.0,
                      f_number=1.5, kind=kernels.WINDOW_HANN, tukey_ratio=0.5)
print(hashlib.sha256(out.tobytes()).hexdigest())
"""


def test_criterion_8_determinism_and_container_round_trip(tmp_path):
    points = [(0.0, 0.011, 1.0),
              (-0.0012, 0.009, 0.3), (0.0009, 0.0095, -0.25),
              (-0.0005, 0.0125, 0.35), (0.0013, 0.0105, -0.3)]
    phantom = Phantom(scatterers=tuple(
        PointScatterer(position=(x, z), reflectivity=r)
        for x, z, r in points))
    config = PipelineConfig(
        element_count=16, angle_count=3, seed=11, noise_snr_db=20.0,
        grid=GridSpec(-0.002, 0.002, 32, 0.008, 0.014, 48),
        filter_bank=FilterBankConfig(wavelengths=(8.0, 16.0)),
        dilation_radius=3)

    run_pipeline(config, phantom, tmp_path / "a")
    run_pipeline(config, phantom, tmp_path / "b")
    names = ("spw_bmode.pgm", "cpwc_bmode.pgm", "bpm.pgm", "beam.pgm",
             "metrics.txt")
    for name in names:
        assert ((tmp_path / "a" / name).read_bytes()
                == (tmp_path / "b" / name).read_bytes()), name

    digests = []
    for threads in ("1", "2"):
        env = dict(os.environ, NUMBA_NUM_THREADS=threads)
        proc = subprocess.run([sys.executable, "-c", THREAD_SCRIPT],
                              capture_output=True, text=True, env=env,
                              check=True)
        digests.append(proc.stdout.strip())
    assert digests[0] == digests[1]

    dataset = tmp_path / "train.usbf"
    export_dataset(config, [phantom], dataset)
    header, arrays = read_container(dataset)
    copy = tmp_path / "copy.usbf"
    write_container(copy, header, arrays)
    assert dataset.read_bytes() == copy.read_bytes()
    print(f"pipeline outputs byte-identical across runs; kernel digest "
          f"{digests[0][:16]}... equal for 1 and 2 threads; dataset "
          f"round-trip byte-identical")
