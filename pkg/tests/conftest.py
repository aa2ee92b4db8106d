"""Shared fixtures: warm the jit kernels once so timed tests stay honest."""

import numpy as np
import pytest

from usbf import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger kernel compilation before any test measures runtime."""
    samples = np.zeros((32, 4))
    elem_x = np.linspace(-1e-3, 1e-3, 4)
    lat = np.linspace(-1e-3, 1e-3, 3)
    ax = np.linspace(1e-3, 2e-3, 3)
    for kind in (kernels.WINDOW_RECT, kernels.WINDOW_HANN, kernels.WINDOW_TUKEY):
        kernels.das_sum(samples, elem_x, lat, ax, 0.0, 0.0, 31.25e6, 1540.0,
                        f_number=1.0, kind=kind)
    out = np.zeros((64, 4))
    amp = np.ones(4)
    kernels.deposit_echo(out, elem_x, 0.0, 1e-3, amp, 0.0, 0.0, 31.25e6,
                         1540.0, 7.6e6, 7.4e-8, 3.0)
