"""Hot numeric kernels: delay-and-sum and RF echo deposition.

Each kernel exists twice: a numba @njit version and a pure-numpy fallback.
The numpy path is selected when numba is unavailable or when the
environment variable USBF_NO_NUMBA is set to a non-empty value.  Both
paths accumulate element contributions in the same order with the same
expression structure, so they agree to the last few ulp; the njit DAS
kernel is pixel-parallel (disjoint writes), which keeps results
bit-identical across thread counts.
"""

import math
import os

import numpy as np

WINDOW_RECT = 0
WINDOW_HANN = 1
WINDOW_TUKEY = 2

try:
    if os.environ.get("USBF_NO_NUMBA"):
        raise ImportError("numba disabled via USBF_NO_NUMBA")
    from numba import njit, prange
    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False


def _window_weight(u, kind, tukey_ratio):
    """Taper value at normalized aperture coordinate u in [-1, 1]."""
    au = abs(u)
    if au > 1.0:
        return 0.0
    if kind == WINDOW_HANN:
        return 0.5 + 0.5 * math.cos(math.pi * u)
    if kind == WINDOW_TUKEY:
        if tukey_ratio <= 0.0 or au <= 1.0 - tukey_ratio:
            return 1.0
        return 0.5 + 0.5 * math.cos(math.pi * (au - (1.0 - tukey_ratio)) / tukey_ratio)
    return 1.0


def _das_numpy(samples, elem_x, lat, ax, angle, t0, fs, c,
               f_number, kind, tukey_ratio):
    """Vectorized-over-pixels DAS; element loop mirrors the njit ordering."""
    n_samples, n_elem = samples.shape
    cos_t, sin_t = math.cos(angle), math.sin(angle)
    inv_c = 1.0 / c
    half_span = abs(elem_x[-1]) if n_elem > 1 else 1.0
    x = lat[np.newaxis, :]
    z = ax[:, np.newaxis]
    tx = (z * cos_t + x * sin_t) * inv_c
    out = np.zeros((ax.size, lat.size))
    for k in range(n_elem):
        dx = x - elem_x[k]
        delay = tx + np.sqrt(z * z + dx * dx) * inv_c
        idx = (delay - t0) * fs
        i0 = np.floor(idx).astype(np.int64)
        valid = (i0 >= 0) & (i0 + 1 <= n_samples - 1)
        i0c = np.clip(i0, 0, n_samples - 2)
        frac = idx - i0
        col = samples[:, k]
        val = col[i0c] * (1.0 - frac) + col[i0c + 1] * frac
        if f_number > 0.0:
            valid = valid & (np.abs(dx) * f_number <= 0.5 * z)
            with np.errstate(divide="ignore", invalid="ignore"):
                u = np.where(z > 0.0, dx * (2.0 * f_number) / z, 1.0)
        else:
            u0 = elem_x[k] / half_span if half_span > 0.0 else 0.0
            u = np.full_like(val, u0)
        au = np.abs(u)
        w = np.ones_like(val)
        if kind == WINDOW_HANN:
            w = 0.5 + 0.5 * np.cos(np.pi * u)
        elif kind == WINDOW_TUKEY:
            taper = 0.5 + 0.5 * np.cos(np.pi * (au - (1.0 - tukey_ratio)) / tukey_ratio)
            w = np.where(au <= 1.0 - tukey_ratio, 1.0, taper)
        w = np.where(au > 1.0, 0.0, w)
        out += np.where(valid, w * val, 0.0)
    return out


def _deposit_numpy(out, elem_x, target_x, target_z, amp, angle, t0, fs, c,
                   f0, sigma_t, tail):
    """Add one target's Gaussian-modulated echo onto every channel."""
    n_samples, n_elem = out.shape
    cos_t, sin_t = math.cos(angle), math.sin(angle)
    tx = (target_z * cos_t + target_x * sin_t) / c
    two_pi_f0 = 2.0 * math.pi * f0
    inv_2s2 = 1.0 / (2.0 * sigma_t * sigma_t)
    for k in range(n_elem):
        if amp[k] == 0.0:
            continue
        dx = target_x - elem_x[k]
        arrival = tx + math.sqrt(target_z * target_z + dx * dx) / c
        center = (arrival - t0) * fs
        lo = max(0, int(math.floor(center - tail)))
        hi = min(n_samples, int(math.ceil(center + tail)) + 1)
        if hi <= lo:
            continue
        t = (np.arange(lo, hi) / fs + t0) - arrival
        out[lo:hi, k] += amp[k] * np.exp(-(t * t) * inv_2s2) * np.cos(two_pi_f0 * t)


if NUMBA_ENABLED:
    _window_weight_jit = njit(cache=True)(_window_weight)

    @njit(cache=True, parallel=True)
    def _das_numba(samples, elem_x, lat, ax, angle, t0, fs, c,
                   f_number, kind, tukey_ratio):
        n_samples, n_elem = samples.shape
        cos_t, sin_t = math.cos(angle), math.sin(angle)
        inv_c = 1.0 / c
        half_span = abs(elem_x[-1]) if n_elem > 1 else 1.0
        out = np.zeros((ax.size, lat.size))
        for r in prange(ax.size):
            z = ax[r]
            for q in range(lat.size):
                x = lat[q]
                tx = (z * cos_t + x * sin_t) * inv_c
                acc = 0.0
                for k in range(n_elem):
                    dx = x - elem_x[k]
                    if f_number > 0.0:
                        if abs(dx) * f_number > 0.5 * z:
                            continue
                        u = dx * (2.0 * f_number) / z if z > 0.0 else 1.0
                    else:
                        u = elem_x[k] / half_span if half_span > 0.0 else 0.0
                    w = _window_weight_jit(u, kind, tukey_ratio)
                    if w == 0.0:
                        continue
                    delay = tx + math.sqrt(z * z + dx * dx) * inv_c
                    idx = (delay - t0) * fs
                    i0 = int(math.floor(idx))
                    if i0 < 0 or i0 + 1 > n_samples - 1:
                        continue
                    frac = idx - i0
                    val = samples[i0, k] * (1.0 - frac) + samples[i0 + 1, k] * frac
                    acc += w * val
                out[r, q] = acc
        return out

    @njit(cache=True)
    def _deposit_numba(out, elem_x, target_x, target_z, amp, angle, t0, fs, c,
                       f0, sigma_t, tail):
        n_samples, n_elem = out.shape
        cos_t, sin_t = math.cos(angle), math.sin(angle)
        tx = (target_z * cos_t + target_x * sin_t) / c
        two_pi_f0 = 2.0 * math.pi * f0
        inv_2s2 = 1.0 / (2.0 * sigma_t * sigma_t)
        for k in range(n_elem):
            if amp[k] == 0.0:
                continue
            dx = target_x - elem_x[k]
            arrival = tx + math.sqrt(target_z * target_z + dx * dx) / c
            center = (arrival - t0) * fs
            lo = max(0, int(math.floor(center - tail)))
            hi = min(n_samples, int(math.ceil(center + tail)) + 1)
            for i in range(lo, hi):
                t = (i / fs + t0) - arrival
                out[i, k] += amp[k] * math.exp(-(t * t) * inv_2s2) * math.cos(two_pi_f0 * t)


def das_sum(samples, elem_x, lat, ax, angle, t0, fs, c,
            f_number=0.0, kind=WINDOW_HANN, tukey_ratio=0.5,
            force_numpy=False):
    """Delay-and-sum one frame onto a pixel grid.

    Returns the [axial x lateral] summed-RF image.  Out-of-window sample
    lookups contribute zero; sample lookup is linear in time.
    """
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    elem_x = np.ascontiguousarray(elem_x, dtype=np.float64)
    lat = np.ascontiguousarray(lat, dtype=np.float64)
    ax = np.ascontiguousarray(ax, dtype=np.float64)
    args = (samples, elem_x, lat, ax, float(angle), float(t0), float(fs),
            float(c), float(f_number), int(kind), float(tukey_ratio))
    if NUMBA_ENABLED and not force_numpy:
        return _das_numba(*args)
    return _das_numpy(*args)


def deposit_echo(out, elem_x, target_x, target_z, amp, angle, t0, fs, c,
                 f0, sigma_t, tail, force_numpy=False):
    """Accumulate one reflector's echo into the RF buffer, in place.

    amp holds the per-element echo amplitude (reflectivity already folded
    in, plus any specular falloff); tail is the half-width of the pulse
    deposit window in samples.
    """
    elem_x = np.ascontiguousarray(elem_x, dtype=np.float64)
    amp = np.ascontiguousarray(amp, dtype=np.float64)
    args = (out, elem_x, float(target_x), float(target_z), amp, float(angle),
            float(t0), float(fs), float(c), float(f0), float(sigma_t), float(tail))
    if NUMBA_ENABLED and not force_numpy:
        _deposit_numba(*args)
    else:
        _deposit_numpy(*args)
