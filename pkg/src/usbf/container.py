"""Binary array container: magic USBF1, text header, named f32 arrays.

Layout (all integers little-endian):

    magic    5 bytes  b"USBF1"
    version  u16      currently 1
    n_header u32      number of key-value pairs
      per pair:  u32 key length, key bytes (UTF-8),
                 u32 value length, value bytes (UTF-8)
    n_arrays u32
      per array: u32 name length, name bytes (UTF-8),
                 u8 ndim, ndim x u32 dims,
                 C-order float32 payload

Arrays are stored as 32-bit floats, so a float32 array round-trips
bit-exactly.  Readers fail fast with the byte offset on truncation.
"""

import struct

import numpy as np

MAGIC = b"USBF1"
VERSION = 1


class ContainerError(ValueError):
    """Malformed or truncated container file."""


def write_container(path, header: dict, arrays: dict) -> None:
    """Serialize string metadata plus named float32 arrays to path."""
    chunks = [MAGIC, struct.pack("<H", VERSION)]
    chunks.append(struct.pack("<I", len(header)))
    for key, value in header.items():
        kb = str(key).encode("utf-8")
        vb = str(value).encode("utf-8")
        chunks.append(struct.pack("<I", len(kb)) + kb)
        chunks.append(struct.pack("<I", len(vb)) + vb)
    chunks.append(struct.pack("<I", len(arrays)))
    for name, arr in arrays.items():
        a = np.asarray(arr, dtype=np.float32)
        if a.ndim == 0 or a.ndim > 255:
            raise ValueError(f"array {name!r} must have 1..255 dimensions")
        a = np.ascontiguousarray(a)
        nb = str(name).encode("utf-8")
        chunks.append(struct.pack("<I", len(nb)) + nb)
        chunks.append(struct.pack("<B", a.ndim))
        chunks.append(struct.pack(f"<{a.ndim}I", *a.shape))
        chunks.append(a.astype("<f4", copy=False).tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


class _Cursor:
    """Sequential reader that reports the byte offset of any truncation."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ContainerError(f"truncated container: needed {n} bytes at "
                                 f"byte offset {self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def read_container(path) -> tuple:
    """Parse a container file; returns (header dict, arrays dict)."""
    with open(path, "rb") as fh:
        cur = _Cursor(fh.read())
    magic = cur.take(len(MAGIC))
    if magic != MAGIC:
        raise ContainerError(f"bad magic {magic!r}; expected {MAGIC!r}")
    version = cur.u16()
    if version != VERSION:
        raise ContainerError(f"unknown container version {version}; "
                             f"this reader supports {VERSION}")
    header = {}
    for _ in range(cur.u32()):
        key = cur.string()
        header[key] = cur.string()
    arrays = {}
    for _ in range(cur.u32()):
        name = cur.string()
        ndim = cur.u8()
        dims = tuple(cur.u32() for _ in range(ndim))
        count = 1
        for d in dims:
            count *= d
        payload = cur.take(4 * count)
        arrays[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    if cur.pos != len(cur.data):
        raise ContainerError(f"{len(cur.data) - cur.pos} trailing bytes at "
                             f"byte offset {cur.pos}")
    return header, arrays


def summarize(path) -> str:
    """Human-readable inspection of any container file."""
    header, arrays = read_container(path)
    lines = [f"container version {VERSION}"]
    for key in sorted(header):
        lines.append(f"{key} = {header[key]}")
    lines.append(f"arrays: {len(arrays)}")
    for name, arr in arrays.items():
        lines.append(f"  {name}: shape {'x'.join(map(str, arr.shape))}")
    return "\n".join(lines) + "\n"
