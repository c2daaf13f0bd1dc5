"""Binary PGM (P5) / PPM (P6) reading and writing, 8-bit only."""

import os

import numpy as np

from .exceptions import ParseError

_WHITESPACE = b" \t\r\n\v\f"
PNM_SUFFIXES = (".pgm", ".ppm", ".pnm")


def _read_header(data):
    """Parse magic, width, height, maxval; return them plus the raster offset."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < 4:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise ParseError("truncated PNM header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= n or data[pos] not in _WHITESPACE:
        raise ParseError("missing whitespace after PNM maxval")
    pos += 1

    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ParseError(f"unsupported PNM magic {magic!r}; only P5 and P6 are read")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ParseError(f"non-integer PNM header field: {exc}") from None
    if width < 1 or height < 1:
        raise ParseError(f"invalid PNM dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise ParseError(f"maxval {maxval} is not 8-bit")
    return magic, width, height, maxval, pos


def read_pnm(path):
    """Read a P5 or P6 file.

    Returns an ``(H, W)`` array for P5 and an ``(H, W, 3)`` array for P6,
    both ``uint8`` and holding the stored sample values unchanged.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic, width, height, _, offset = _read_header(data)
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    raster = data[offset : offset + expected]
    if len(raster) != expected:
        raise ParseError(f"{os.fspath(path)}: expected {expected} raster bytes, found {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(height, width).copy()
    return arr.reshape(height, width, 3).copy()


def read_pnm_size(path):
    """Return ``(width, height)`` from the header only."""
    with open(path, "rb") as fh:
        head = fh.read(4096)
    _, width, height, _, _ = _read_header(head)
    return width, height


def write_pnm(path, img):
    """Write a 2-D array as P5 or an ``(H, W, 3)`` array as P6 (maxval 255)."""
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("PNM samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    if arr.ndim == 2:
        magic = b"P5"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot write array of shape {arr.shape} as PNM")
    height, width = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (width, height))
        fh.write(np.ascontiguousarray(arr).tobytes())
