"""16-bit binary PGM (P5) export for normalized display images."""

import numpy as np

MAXVAL = 65535


def write_pgm(path, image) -> None:
    """Write a [0, 1] image as a 16-bit P5 graymap.

    Values are rounded to the nearest of 65536 levels; 16-bit P5 samples
    are big-endian per the netpbm convention.
    """
    a = np.asarray(getattr(image, "values", image), dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a non-empty 2-D image")
    if not np.all(np.isfinite(a)):
        raise ValueError("image values must be finite")
    if a.min() < 0.0 or a.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    rows, cols = a.shape
    quantized = np.rint(a * MAXVAL).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n{MAXVAL}\n".encode("ascii"))
        fh.write(quantized.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a 16-bit P5 graymap back to floats in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM (P5) file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    cols, rows, maxval = fields
    if maxval != MAXVAL:
        raise ValueError(f"expected maxval {MAXVAL}, got {maxval}")
    expected = rows * cols * 2
    payload = data[pos:]
    if len(payload) != expected:
        raise ValueError(f"payload has {len(payload)} bytes, expected {expected}")
    raw = np.frombuffer(payload, dtype=">u2").reshape(rows, cols)
    return raw.astype(np.float64) / MAXVAL
