"""Minimal Netpbm codec: PBM (P1, P4) and PGM (P2, P5)."""

from __future__ import annotations

import os

import numpy as np

from .errors import ParseError

_MAGICS = {b"P1": (1, False), b"P2": (2, False), b"P4": (1, True), b"P5": (2, True)}


def _tokens(data: bytes, count: int, pos: int) -> tuple[list[int], int]:
    """Read ``count`` whitespace-separated integers, skipping ``#`` comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ParseError(f"expected integer at byte {start}")
        out.append(int(data[start:pos]))
    return out, pos


def decode(data: bytes) -> tuple[np.ndarray, int]:
    """Decode to ``(pixels, maxval)``; PBM gives maxval 1 with 1 = black."""
    magic = data[:2]
    if magic not in _MAGICS:
        raise ParseError(f"unsupported magic {magic!r}")
    kind, binary = _MAGICS[magic]
    nheader = 2 if kind == 1 else 3
    header, pos = _tokens(data, nheader, 2)
    width, height = header[0], header[1]
    maxval = header[2] if kind == 2 else 1
    if width < 1 or height < 1:
        raise ParseError(f"bad dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise ParseError(f"bad maxval {maxval}")

    if not binary:
        if kind == 1:
            # P1 digits need not be separated
            body = bytes(b for b in data[pos:] if b in b"01#\n\r" or b > 127)
            digits = []
            comment = False
            for b in body:
                if b == ord("#"):
                    comment = True
                elif b in (10, 13):
                    comment = False
                elif not comment and b in (48, 49):
                    digits.append(b - 48)
            if len(digits) < width * height:
                raise ParseError(f"P1 payload has {len(digits)} pixels, need {width * height}")
            pix = np.array(digits[:width * height], dtype=np.uint16)
        else:
            vals, _ = _tokens(data, width * height, pos)
            pix = np.array(vals, dtype=np.uint16)
            if pix.max(initial=0) > maxval:
                raise ParseError("pixel value exceeds maxval")
        return pix.reshape(height, width), maxval

    # binary: exactly one whitespace byte after the header
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ParseError("missing whitespace after header")
    pos += 1
    payload = data[pos:]
    if kind == 1:
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        if len(payload) < need:
            raise ParseError(f"P4 payload has {len(payload)} bytes, need {need}")
        packed = np.frombuffer(payload[:need], dtype=np.uint8).reshape(height, row_bytes)
        pix = np.unpackbits(packed, axis=1)[:, :width].astype(np.uint16)
        return pix, 1
    depth = 1 if maxval < 256 else 2
    need = width * height * depth
    if len(payload) < need:
        raise ParseError(f"P5 payload has {len(payload)} bytes, need {need}")
    dtype = np.uint8 if depth == 1 else ">u2"
    pix = np.frombuffer(payload[:need], dtype=dtype).astype(np.uint16).reshape(height, width)
    if pix.max(initial=0) > maxval:
        raise ParseError("pixel value exceeds maxval")
    return pix, maxval


def read(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        return decode(fh.read())


def encode_pbm(bits: np.ndarray) -> bytes:
    """P4 bytes for a boolean array (True = 1 = black), zero-padded rows."""
    bits = np.asarray(bits, dtype=bool)
    h, w = bits.shape
    return b"P4\n%d %d\n" % (w, h) + np.packbits(bits, axis=1).tobytes()


def encode_pgm(gray: np.ndarray) -> bytes:
    gray = np.asarray(gray)
    if gray.dtype != np.uint8:
        raise ValueError("P5 writer expects uint8 pixels")
    h, w = gray.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(gray).tobytes()


def write_pbm(path: str | os.PathLike, bits: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pbm(bits))


def write_pgm(path: str | os.PathLike, gray: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(gray))
