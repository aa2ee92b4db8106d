"""Reader for the USBF1 dataset container written by the usbf exporter.

This package deliberately re-implements the format instead of importing
the producer, so the file layout is the only coupling between the two.
Layout, all integers little-endian:

    magic    5 bytes  b"USBF1"
    version  u16      must be 1
    n_header u32, then per pair:
        u32 key length, key bytes (UTF-8),
        u32 value length, value bytes (UTF-8)
    n_arrays u32, then per array:
        u32 name length, name bytes (UTF-8),
        u8 ndim, ndim x u32 dims,
        C-order float32 payload

A dataset container carries header key "kind" = "dataset", a
"record_count", and per record i the header "r{i}.spw_angle" plus the
arrays r{i}.spw_rf, r{i}.beam_target, r{i}.bpm, r{i}.roi_fg and
r{i}.roi_bg.
"""

import struct

import numpy as np

MAGIC = b"USBF1"
VERSION = 1


class ContainerFormatError(ValueError):
    """Raised on malformed, truncated, or wrong-kind container files."""


def _take(data: bytes, pos: int, n: int) -> tuple:
    if pos + n > len(data):
        raise ContainerFormatError(
            f"truncated container: needed {n} bytes at byte offset {pos}")
    return data[pos:pos + n], pos + n


def _u32(data: bytes, pos: int) -> tuple:
    raw, pos = _take(data, pos, 4)
    return struct.unpack("<I", raw)[0], pos


def _string(data: bytes, pos: int) -> tuple:
    length, pos = _u32(data, pos)
    raw, pos = _take(data, pos, length)
    return raw.decode("utf-8"), pos


def read_container(path) -> tuple:
    """Parse one container file into (header dict, arrays dict)."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _take(data, 0, len(MAGIC))
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}; expected {MAGIC!r}")
    raw, pos = _take(data, pos, 2)
    version = struct.unpack("<H", raw)[0]
    if version != VERSION:
        raise ContainerFormatError(
            f"unsupported container version {version}; expected {VERSION}")
    n_header, pos = _u32(data, pos)
    header = {}
    for _ in range(n_header):
        key, pos = _string(data, pos)
        header[key], pos = _string(data, pos)
    n_arrays, pos = _u32(data, pos)
    arrays = {}
    for _ in range(n_arrays):
        name, pos = _string(data, pos)
        raw, pos = _take(data, pos, 1)
        ndim = raw[0]
        dims = []
        for _ in range(ndim):
            d, pos = _u32(data, pos)
            dims.append(d)
        count = 1
        for d in dims:
            count *= d
        payload, pos = _take(data, pos, 4 * count)
        arrays[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    if pos != len(data):
        raise ContainerFormatError(
            f"{len(data) - pos} trailing bytes at byte offset {pos}")
    return header, arrays


def read_records(path) -> tuple:
    """Load a dataset container; returns (header, list of record dicts).

    Each record dict holds spw_rf, beam_target, bpm, roi_fg, roi_bg as
    float32 arrays plus the scalar spw_angle.
    """
    header, arrays = read_container(path)
    kind = header.get("kind")
    if kind != "dataset":
        raise ContainerFormatError(
            f"expected a dataset container, got kind={kind!r}")
    try:
        count = int(header["record_count"])
    except KeyError:
        raise ContainerFormatError("dataset header lacks record_count")
    records = []
    for i in range(count):
        try:
            records.append({
                "spw_rf": arrays[f"r{i}.spw_rf"],
                "beam_target": arrays[f"r{i}.beam_target"],
                "bpm": arrays[f"r{i}.bpm"],
                "roi_fg": arrays[f"r{i}.roi_fg"],
                "roi_bg": arrays[f"r{i}.roi_bg"],
                "spw_angle": float(header[f"r{i}.spw_angle"]),
            })
        except KeyError as exc:
            raise ContainerFormatError(
                f"dataset record {i} is incomplete: missing {exc}") from exc
    return header, records
