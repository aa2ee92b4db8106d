"""Delay math, DAS reconstruction, compounding, envelope, log compression."""

import math

import numpy as np
import pytest

from usbf.acquisition import ImagingGrid, PlaneWaveFrame, make_linear_array
from usbf.beamform import (ApodizationSpec, BeamformedImage, BModeImage,
                           compound, das_beamform, envelope_detect,
                           log_compress, receive_delay, transmit_delay)
from usbf.simulate import Phantom, PointScatterer, PulseModel, \
    required_samples, simulate_frame


def small_grid():
    return ImagingGrid(lateral_positions=np.linspace(-2e-3, 2e-3, 9),
                       axial_positions=np.linspace(8e-3, 12e-3, 11))


class TestDelays:
    def test_transmit_delay_unsteered_reduces_to_depth(self):
        assert transmit_delay((0.01, 0.02), 0.0, 1540.0) == 0.02 / 1540.0

    def test_transmit_delay_steered_hand_value(self):
        got = transmit_delay((0.01, 0.02), math.radians(18.0), 1540.0)
        assert got == pytest.approx(1.435798718808607e-05, rel=1e-12)

    def test_transmit_delay_mirror_symmetry(self):
        a = transmit_delay((0.01, 0.02), math.radians(18.0), 1540.0)
        b = transmit_delay((-0.01, 0.02), math.radians(-18.0), 1540.0)
        assert a == b

    def test_receive_delay_on_axis(self):
        got = receive_delay((0.0, 0.03), 0.0, 1540.0)
        assert got == pytest.approx(1.948051948051948e-05, rel=1e-12)

    def test_receive_delay_pythagorean_triple(self):
        got = receive_delay((0.003, 0.004), 0.0, 1540.0)
        assert got == pytest.approx(3.246753246753247e-06, rel=1e-12)

    def test_receive_delay_zero_distance(self):
        assert receive_delay((1e-3, 0.0), 1e-3, 1540.0) == 0.0

    def test_delays_match_brute_force_on_random_pixels(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = rng.uniform(-0.02, 0.02)
            z = rng.uniform(0.0, 0.05)
            angle = rng.uniform(-0.35, 0.35)
            ex = rng.uniform(-0.02, 0.02)
            c = rng.uniform(1400.0, 1650.0)
            tx = (z * math.cos(angle) + x * math.sin(angle)) / c
            rx = math.sqrt(z * z + (x - ex) ** 2) / c
            assert transmit_delay((x, z), angle, c) == pytest.approx(
                tx, rel=1e-12)
            assert receive_delay((x, z), ex, c) == pytest.approx(
                rx, rel=1e-12)


class TestApodizationSpec:
    def test_defaults(self):
        apo = ApodizationSpec()
        assert apo.window == "hann"
        assert apo.f_number == 0.0

    def test_validation(self):
        with pytest.raises(ValueError, match="window"):
            ApodizationSpec(window="blackman")
        with pytest.raises(ValueError, match="f_number"):
            ApodizationSpec(f_number=-1.0)
        with pytest.raises(ValueError, match="tukey"):
            ApodizationSpec(window="tukey", tukey_ratio=1.5)


class TestDasBeamform:
    def test_zero_frame_gives_zero_image(self):
        geo = make_linear_array(16, 0.3e-3, 7.6e6, 31.25e6, 1540.0)
        frame = PlaneWaveFrame(steering_angle=0.0, samples=np.zeros((600, 16)))
        image = das_beamform(frame, geo, small_grid())
        np.testing.assert_array_equal(image.values, 0.0)

    def test_linear_in_rf_amplitude(self):
        geo = make_linear_array(16, 0.3e-3, 7.6e6, 31.25e6, 1540.0)
        rng = np.random.default_rng(0)
        samples = rng.standard_normal((600, 16))
        one = das_beamform(PlaneWaveFrame(steering_angle=0.0,
                                          samples=samples), geo, small_grid())
        two = das_beamform(PlaneWaveFrame(steering_angle=0.0,
                                          samples=2.0 * samples),
                           geo, small_grid())
        np.testing.assert_array_equal(two.values, 2.0 * one.values)

    def test_channel_count_mismatch_rejected(self):
        geo = make_linear_array(16, 0.3e-3, 7.6e6, 31.25e6, 1540.0)
        frame = PlaneWaveFrame(steering_angle=0.0, samples=np.zeros((600, 8)))
        with pytest.raises(ValueError, match="channels"):
            das_beamform(frame, geo, small_grid())

    def test_grid_beyond_sampled_window_rejected(self):
        geo = make_linear_array(16, 0.3e-3, 7.6e6, 31.25e6, 1540.0)
        frame = PlaneWaveFrame(steering_angle=0.0, samples=np.zeros((100, 16)))
        deep = ImagingGrid(lateral_positions=np.linspace(-2e-3, 2e-3, 5),
                           axial_positions=np.linspace(0.04, 0.05, 5))
        with pytest.raises(ValueError, match="sampled window"):
            das_beamform(frame, geo, deep)

    def test_point_target_localizes_on_axis(self):
        geo = make_linear_array(64, 0.3e-3, 7.6e6, 31.25e6, 1540.0)
        pulse = PulseModel(center_frequency=geo.center_frequency)
        phantom = Phantom(scatterers=(PointScatterer((0.0, 0.02)),))
        wavelength = geo.wavelength
        grid = ImagingGrid(
            lateral_positions=np.arange(-3e-3, 3e-3, wavelength / 4),
            axial_positions=np.arange(0.018, 0.022, wavelength / 8))
        # sampled window must reach the deepest grid row, not just the echo
        deep = 2.0 * grid.axial_positions[-1] / geo.sound_speed
        n = max(required_samples(phantom, geo, 0.0, pulse),
                math.ceil(deep * geo.sampling_frequency) + 2)
        frame = simulate_frame(phantom, geo, 0.0, pulse, n)
        image = das_beamform(frame, geo, grid,
                             ApodizationSpec(window="rectangular"))
        env = envelope_detect(image)
        r, c = np.unravel_index(np.argmax(env.values), env.values.shape)
        assert abs(grid.axial_positions[r] - 0.02) <= wavelength / 2
        assert abs(grid.lateral_positions[c]) <= 2 * wavelength


class TestCompound:
    def _images(self, count, seed=0):
        rng = np.random.default_rng(seed)
        grid = small_grid()
        return [BeamformedImage(grid=grid,
                                values=rng.standard_normal(grid.shape))
                for _ in range(count)]

    def test_single_image_passes_through(self):
        image = self._images(1)[0]
        np.testing.assert_array_equal(compound([image]).values, image.values)

    def test_negation_cancels_exactly(self):
        image = self._images(1)[0]
        negated = BeamformedImage(grid=image.grid, values=-image.values)
        np.testing.assert_array_equal(compound([image, negated]).values, 0.0)

    def test_order_invariance_is_exact(self):
        images = self._images(7, seed=5)
        forward = compound(images).values
        rng = np.random.default_rng(1)
        for _ in range(4):
            perm = list(rng.permutation(len(images)))
            shuffled = compound([images[i] for i in perm]).values
            np.testing.assert_array_equal(forward, shuffled)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            compound([])

    def test_grid_mismatch_rejected(self):
        a = self._images(1)[0]
        other_grid = ImagingGrid(
            lateral_positions=np.linspace(-2e-3, 2e-3, 9),
            axial_positions=np.linspace(9e-3, 13e-3, 11))
        b = BeamformedImage(grid=other_grid, values=np.zeros(other_grid.shape))
        with pytest.raises(ValueError, match="grid"):
            compound([a, b])


class TestEnvelope:
    def test_pure_tone_envelope_is_flat_at_amplitude(self):
        fs = 31.25e6
        n = 512
        cycles = 122                       # integer cycles across the window
        t = np.arange(n) / fs
        f0 = cycles * fs / n
        col = 0.7 * np.cos(2 * np.pi * f0 * t)
        values = np.tile(col[:, None], (1, 4))
        grid = ImagingGrid(lateral_positions=np.linspace(0, 1e-3, 4),
                           axial_positions=np.linspace(1e-3, 2e-3, n))
        env = envelope_detect(BeamformedImage(grid=grid, values=values))
        mid = env.values[n // 4: 3 * n // 4, :]
        np.testing.assert_allclose(mid, 0.7, rtol=0.02)

    def test_zero_image_gives_zero_envelope(self):
        grid = small_grid()
        env = envelope_detect(BeamformedImage(grid=grid,
                                              values=np.zeros(grid.shape)))
        np.testing.assert_array_equal(env.values, 0.0)

    def test_sign_invariance(self):
        grid = small_grid()
        rng = np.random.default_rng(2)
        values = rng.standard_normal(grid.shape)
        pos = envelope_detect(BeamformedImage(grid=grid, values=values))
        neg = envelope_detect(BeamformedImage(grid=grid, values=-values))
        np.testing.assert_array_equal(pos.values, neg.values)

    def test_too_few_axial_samples_rejected(self):
        grid = ImagingGrid(lateral_positions=np.linspace(0, 1e-3, 4),
                           axial_positions=np.linspace(1e-3, 2e-3, 4))
        with pytest.raises(ValueError, match="8 axial"):
            envelope_detect(BeamformedImage(grid=grid,
                                            values=np.zeros((4, 4))))


class TestLogCompress:
    def _envelope(self, values):
        values = np.asarray(values, dtype=np.float64)
        grid = ImagingGrid(
            lateral_positions=np.arange(values.shape[1], dtype=np.float64),
            axial_positions=np.arange(values.shape[0], dtype=np.float64))
        return BeamformedImage(grid=grid, values=values)

    def test_peak_maps_to_one(self):
        env = self._envelope([[0.5, 2.0], [1.0, 0.1]])
        out = log_compress(env, 60.0)
        assert out.values[0, 1] == 1.0

    def test_decade_below_peak_with_dr60(self):
        env = self._envelope([[1.0, 0.1], [0.5, 0.25]])
        out = log_compress(env, 60.0)
        assert out.values[0, 1] == pytest.approx(2.0 / 3.0, rel=1e-12)

    def test_floor_clamps_to_zero(self):
        env = self._envelope([[1.0, 1e-4], [0.5, 0.25]])
        out = log_compress(env, 60.0)
        assert out.values[0, 1] == 0.0

    def test_all_zero_maps_to_all_zero(self):
        env = self._envelope(np.zeros((4, 3)))
        np.testing.assert_array_equal(log_compress(env, 60.0).values, 0.0)

    def test_monotone_in_envelope_value(self):
        rng = np.random.default_rng(3)
        values = rng.random((16, 16)) + 1e-6
        out = log_compress(self._envelope(values), 40.0).values
        order = np.argsort(values.ravel())
        assert np.all(np.diff(out.ravel()[order]) >= 0.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match=">= 0"):
            log_compress(self._envelope([[1.0, -0.1], [0.5, 0.25]]))
        with pytest.raises(ValueError, match="dynamic_range"):
            log_compress(self._envelope([[1.0, 0.1], [0.5, 0.25]]), 0.0)

    def test_bmode_range_contract(self):
        rng = np.random.default_rng(4)
        out = log_compress(self._envelope(rng.random((12, 12))), 50.0)
        assert isinstance(out, BModeImage)
        assert out.values.min() >= 0.0
        assert out.values.max() == 1.0
