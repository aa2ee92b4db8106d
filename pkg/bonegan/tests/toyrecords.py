"""Toy-data builders shared across the trainer tests."""

import struct

import numpy as np


def write_raw_container(path, header, arrays):
    """Hand-rolled writer for the documented byte layout, test use only."""
    chunks = [b"USBF1", struct.pack("<H", 1)]
    chunks.append(struct.pack("<I", len(header)))
    for key, value in header.items():
        kb = str(key).encode("utf-8")
        vb = str(value).encode("utf-8")
        chunks.append(struct.pack("<I", len(kb)) + kb)
        chunks.append(struct.pack("<I", len(vb)) + vb)
    chunks.append(struct.pack("<I", len(arrays)))
    for name, arr in arrays.items():
        a = np.ascontiguousarray(np.asarray(arr, dtype="<f4"))
        nb = str(name).encode("utf-8")
        chunks.append(struct.pack("<I", len(nb)) + nb)
        chunks.append(struct.pack("<B", a.ndim))
        chunks.append(struct.pack(f"<{a.ndim}I", *a.shape))
        chunks.append(a.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


def make_toy_records(count, seed=0, shape=(48, 24), rf_rows=64):
    """Synthetic record dicts shaped like exporter output.

    Targets carry a bright band framed by the bone map; the ROI boxes
    sit well inside the image so center windows keep them intact.
    """
    rows, cols = shape
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(count):
        rf = rng.normal(0.0, 1.0, (rf_rows, cols)).astype(np.float32)
        target = np.full(shape, 0.35, np.float32)
        target += rng.uniform(-0.05, 0.05, shape).astype(np.float32)
        band = slice(rows // 2 - 2, rows // 2 + 2)
        target[band, :] = 0.9
        target = np.clip(target, 0.0, 1.0)
        bpm = np.zeros(shape, np.float32)
        bpm[band, :] = 1.0
        fg = np.zeros(shape, np.float32)
        fg[band, cols // 4: 3 * cols // 4] = 1.0
        bg = np.zeros(shape, np.float32)
        bg[rows // 2 + 6: rows // 2 + 10, cols // 4: 3 * cols // 4] = 1.0
        records.append({
            "spw_rf": rf,
            "beam_target": target,
            "bpm": bpm,
            "roi_fg": fg,
            "roi_bg": bg,
            "spw_angle": 0.0,
        })
    return records


def write_toy_dataset(path, records):
    """Pack toy records into a dataset container file."""
    header = {"kind": "dataset", "record_count": str(len(records))}
    arrays = {}
    for i, rec in enumerate(records):
        header[f"r{i}.spw_angle"] = repr(rec["spw_angle"])
        for key in ("spw_rf", "beam_target", "bpm", "roi_fg", "roi_bg"):
            arrays[f"r{i}.{key}"] = rec[key]
    write_raw_container(path, header, arrays)
    return path
