"""Benchmark the delay-and-sum kernel: compiled path vs pure numpy.

Simulates a speckle frame once, then times das_beamform over a sweep of
grid sizes with force_numpy on and off.  Both paths run the same
arithmetic, so the max |difference| column doubles as a correctness
check (expected ~1e-12 or below; the compiled path reassociates sums).

Run from the repository root:

    python3 benchmarks/bench_das.py
    python3 benchmarks/bench_das.py --repeats 5 --grids 64x64,128x128
"""

import argparse
import time

import numpy as np

from usbf.acquisition import ImagingGrid, make_linear_array
from usbf.beamform import ApodizationSpec, das_beamform
from usbf.kernels import NUMBA_ENABLED
from usbf.simulate import (Phantom, PointScatterer, PulseModel,
                           required_samples, simulate_frame)


def make_frame(geometry, pulse, seed=0):
    rng = np.random.default_rng(seed)
    n = 600
    xs = rng.uniform(-0.012, 0.012, n)
    zs = rng.uniform(0.008, 0.030, n)
    amps = rng.normal(0.0, 1.0, n)
    phantom = Phantom(scatterers=tuple(
        PointScatterer(position=(float(x), float(z)), reflectivity=float(a))
        for x, z, a in zip(xs, zs, amps)))
    n_samples = required_samples(phantom, geometry, 0.0, pulse)
    return simulate_frame(phantom, geometry, 0.0, pulse, n_samples)


def time_path(frame, geometry, grid, apo, force_numpy, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = das_beamform(frame, geometry, grid, apo,
                           force_numpy=force_numpy)
        best = min(best, time.perf_counter() - t0)
    return best, out.values


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats per configuration (best-of)")
    parser.add_argument("--grids", default="64x64,128x128,192x384",
                        help="comma list of ROWSxCOLS grid sizes")
    args = parser.parse_args(argv)

    geometry = make_linear_array(128, 0.3e-3, 7.6e6, 31.25e6, 1540.0)
    pulse = PulseModel(center_frequency=geometry.center_frequency)
    frame = make_frame(geometry, pulse)
    apo = ApodizationSpec(window="hann", f_number=1.5)

    print(f"compiled kernels available: {NUMBA_ENABLED}")
    print(f"frame: {frame.samples.shape[0]} samples x "
          f"{frame.samples.shape[1]} elements; best of {args.repeats}")
    header = (f"{'grid':>10} {'numpy [ms]':>12} {'compiled [ms]':>14} "
              f"{'speedup':>8} {'max |diff|':>12}")
    print(header)
    print("-" * len(header))
    for spec in args.grids.split(","):
        rows, cols = (int(v) for v in spec.lower().split("x"))
        grid = ImagingGrid(
            lateral_positions=np.linspace(-0.012, 0.012, cols),
            axial_positions=np.linspace(0.008, 0.030, rows))
        # warm-up beamform so jit compilation is not timed
        das_beamform(frame, geometry, grid, apo)
        t_np, img_np = time_path(frame, geometry, grid, apo, True,
                                 args.repeats)
        t_nb, img_nb = time_path(frame, geometry, grid, apo, False,
                                 args.repeats)
        diff = float(np.max(np.abs(img_np - img_nb)))
        speed = t_np / t_nb if t_nb > 0 else float("inf")
        print(f"{spec:>10} {t_np * 1e3:>12.2f} {t_nb * 1e3:>14.2f} "
              f"{speed:>7.1f}x {diff:>12.3e}")
    if not NUMBA_ENABLED:
        print("note: compiled path unavailable, both columns ran numpy")


if __name__ == "__main__":
    main()
