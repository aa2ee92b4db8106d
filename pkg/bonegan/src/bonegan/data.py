"""Dataset adapter: container records to fixed-size training tensors."""

import numpy as np
import torch
from torch.utils.data import Dataset

from .container import read_records


def normalize_rf(rf) -> np.ndarray:
    """Scale one RF record by its peak |amplitude| into [-1, 1].

    An all-zero record stays zero instead of dividing by zero.
    """
    a = np.asarray(rf, dtype=np.float32)
    peak = float(np.max(np.abs(a))) if a.size else 0.0
    if peak == 0.0:
        return np.zeros_like(a)
    return a / peak


def fit_window(a, shape) -> np.ndarray:
    """Deterministic center crop or zero-pad of a 2-D array to `shape`.

    Odd remainders put the extra row/column at the bottom/right, so the
    same inputs always map to the same window.
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got {a.ndim}-D")
    rows, cols = int(shape[0]), int(shape[1])
    if rows <= 0 or cols <= 0:
        raise ValueError("window shape must be positive")
    out = a
    for axis, target in enumerate((rows, cols)):
        size = out.shape[axis]
        if size > target:
            start = (size - target) // 2
            sl = [slice(None)] * 2
            sl[axis] = slice(start, start + target)
            out = out[tuple(sl)]
        elif size < target:
            before = (target - size) // 2
            pad = [(0, 0)] * 2
            pad[axis] = (before, target - size - before)
            out = np.pad(out, pad)
    return np.ascontiguousarray(out)


class BoneDataset(Dataset):
    """Fixed-window training triples (rf, target, bpm) plus ROI masks.

    Accepts either a container path or a pre-parsed list of record
    dicts.  RF input is normalized per record by its peak amplitude;
    every plane is windowed to input_shape, and samples come out as
    float32 tensors with a leading channel axis.
    """

    def __init__(self, source, input_shape=(128, 64)):
        if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
            _, records = read_records(source)
        else:
            records = list(source)
        self.input_shape = (int(input_shape[0]), int(input_shape[1]))
        self._samples = []
        for rec in records:
            rf = fit_window(normalize_rf(rec["spw_rf"]), self.input_shape)
            target = fit_window(np.asarray(rec["beam_target"], np.float32),
                                self.input_shape)
            bpm = fit_window(np.asarray(rec["bpm"], np.float32),
                             self.input_shape)
            fg = fit_window(np.asarray(rec["roi_fg"], np.float32),
                            self.input_shape)
            bg = fit_window(np.asarray(rec["roi_bg"], np.float32),
                            self.input_shape)
            self._samples.append({
                "rf": torch.from_numpy(rf)[None],
                "target": torch.from_numpy(target)[None],
                "bpm": torch.from_numpy(bpm)[None],
                "roi_fg": torch.from_numpy(fg)[None],
                "roi_bg": torch.from_numpy(bg)[None],
            })

    def __len__(self) -> int:
        return len(self._samples)

    def __getitem__(self, index: int) -> dict:
        return self._samples[index]
