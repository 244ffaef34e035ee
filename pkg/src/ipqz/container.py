"""IPQZ container file format.

Layout (integers little-endian):

    magic "IPQZ" | version u8 = 1 | d u32 | delta_num u32 | delta_den u32
    | count u64 | crc32 u32 over the preceding 25 bytes
    | count records of ceil(l/8) bytes, each an l-bit code left-aligned
    | optional norm sidecar: tag byte 0x4E, then count float64 norms

Records are padded to byte boundaries for random access; space
accounting elsewhere uses the exact bit length l, not padded bytes.
"""

from __future__ import annotations

import io
import struct
import zlib
from dataclasses import dataclass
from fractions import Fraction
from typing import BinaryIO, Sequence

import numpy as np

from .codec import CodeWord, code_bytes
from .errors import (
    BadMagic,
    ChecksumMismatch,
    ParseError,
    TruncatedFile,
    VersionUnsupported,
)
from .grid import GridParams

MAGIC = b"IPQZ"
VERSION = 1
NORM_TAG = 0x4E
_HEADER = struct.Struct("<4sBIIIQ")


@dataclass(frozen=True)
class Container:
    grid: GridParams
    codes: tuple[CodeWord, ...]
    norms: np.ndarray | None = None


def write_container(
    codes: Sequence[CodeWord],
    grid: GridParams,
    sink: BinaryIO | str,
    norms: Sequence[float] | None = None,
) -> None:
    """Serialize code words (and an optional norm sidecar) to `sink`."""
    if isinstance(sink, str):
        with open(sink, "wb") as fh:
            write_container(codes, grid, fh, norms)
        return
    for c in codes:
        if c.grid != grid:
            raise ValueError("all code words must share the container grid")
    if norms is not None and len(norms) != len(codes):
        raise ValueError("norm sidecar length must match the code count")
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        grid.d,
        grid.delta.numerator,
        grid.delta.denominator,
        len(codes),
    )
    sink.write(header)
    sink.write(struct.pack("<I", zlib.crc32(header)))
    for c in codes:
        sink.write(c.bits)
    if norms is not None:
        sink.write(bytes([NORM_TAG]))
        sink.write(np.asarray(norms, dtype="<f8").tobytes())


def read_container(source: BinaryIO | str) -> Container:
    """Parse a container; read_container(write_container(...)) is identity."""
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return read_container(fh)
    data = source.read()
    if len(data) < _HEADER.size + 4:
        raise TruncatedFile(f"file has {len(data)} bytes, header needs {_HEADER.size + 4}")
    magic, version, d, num, den, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    (crc,) = struct.unpack_from("<I", data, _HEADER.size)
    if crc != zlib.crc32(data[: _HEADER.size]):
        raise ChecksumMismatch("header CRC32 mismatch")
    if version != VERSION:
        raise VersionUnsupported(f"version {version} unsupported (expected {VERSION})")
    if den == 0:
        raise ParseError("delta denominator is zero", offset=9)
    grid = GridParams(d, Fraction(num, den))
    rec = code_bytes(grid)
    off = _HEADER.size + 4
    need = off + rec * count
    if len(data) < need:
        raise TruncatedFile(f"expected {need} bytes of records, file has {len(data)}")
    codes = tuple(
        CodeWord(data[off + i * rec : off + (i + 1) * rec], grid) for i in range(count)
    )
    off = need
    norms = None
    if off < len(data):
        tag = data[off]
        if tag != NORM_TAG:
            raise ParseError(f"unknown section tag 0x{tag:02X}", offset=off)
        off += 1
        need = off + 8 * count
        if len(data) < need:
            raise TruncatedFile("norm sidecar truncated")
        norms = np.frombuffer(data[off:need], dtype="<f8").copy()
        off = need
        if off != len(data):
            raise ParseError("trailing bytes after norm sidecar", offset=off)
    return Container(grid=grid, codes=codes, norms=norms)
