"""Dataset ingestion and pair sampling.

Formats: fvecs/bvecs ([d:int32][d x float32/uint8] records, little
endian), MNIST-style idx (big-endian header, ubyte or float32 payload;
pixel bytes are mapped to [0,1] by dividing by 255), and CSV (one
vector per row, no header unless skip_header is set).

Vectors are normalized onto the unit sphere before encoding; original
norms ride along in a sidecar so general (non-unit) inner products can
be recovered as norm_x * norm_y * <unit_x, unit_y>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codec import CodeWord
from .errors import AllZero, DimensionMismatch, ParseError, SetTooSmall
from .estimator import estimate_inner
from .numerics import seq_sum

FORMATS = ("fvecs", "bvecs", "idx", "csv")


@dataclass(frozen=True)
class VectorSet:
    """Unit vectors plus the original norms and provenance."""

    vectors: np.ndarray
    norms: np.ndarray | None
    source: str = ""
    dropped: int = field(default=0, compare=False)

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]


def load(path: str, format: str, skip_header: bool = False) -> np.ndarray:
    """Read raw (un-normalized) vectors as a float64 (n, d) array."""
    if format == "fvecs":
        return _load_vecs(path, np.float32)
    if format == "bvecs":
        return _load_vecs(path, np.uint8)
    if format == "idx":
        return _load_idx(path)
    if format == "csv":
        return _load_csv(path, skip_header)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def _load_vecs(path: str, dtype) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4:
        raise ParseError("file too short for a dimension prefix", offset=0)
    itemsize = np.dtype(dtype).itemsize
    d = int(np.frombuffer(data, dtype="<i4", count=1)[0])
    if d <= 0:
        raise ParseError(f"nonpositive dimension {d}", offset=0)
    rec = 4 + itemsize * d
    if len(data) % rec != 0:
        raise ParseError(
            f"file size {len(data)} is not a multiple of the {rec}-byte record",
            offset=(len(data) // rec) * rec,
        )
    n = len(data) // rec
    out = np.empty((n, d), dtype=np.float64)
    for i in range(n):
        off = i * rec
        di = int(np.frombuffer(data, dtype="<i4", count=1, offset=off)[0])
        if di != d:
            raise DimensionMismatch(
                f"record {i} has dimension {di}, expected {d} (byte offset {off})"
            )
        out[i] = np.frombuffer(data, dtype=np.dtype(dtype).newbyteorder("<"),
                               count=d, offset=off + 4)
    return out


def _load_idx(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4:
        raise ParseError("file too short for an idx magic", offset=0)
    if data[0] != 0 or data[1] != 0:
        raise ParseError("bad idx magic", offset=0)
    dtype_code, ndim = data[2], data[3]
    dtypes = {0x08: (np.uint8, 1), 0x0D: (">f4", 4)}
    if dtype_code not in dtypes:
        raise ParseError(f"unsupported idx dtype 0x{dtype_code:02X}", offset=2)
    if ndim < 1:
        raise ParseError(f"bad idx ndim {ndim}", offset=3)
    header = 4 + 4 * ndim
    if len(data) < header:
        raise ParseError("idx header truncated", offset=len(data))
    dims = np.frombuffer(data, dtype=">i4", count=ndim, offset=4)
    if np.any(dims <= 0):
        raise ParseError(f"bad idx dimensions {dims.tolist()}", offset=4)
    n = int(dims[0])
    d = int(np.prod(dims[1:])) if ndim > 1 else 1
    dt, item = dtypes[dtype_code]
    need = header + n * d * item
    if len(data) < need:
        raise ParseError(
            f"idx payload truncated ({len(data)} < {need} bytes)", offset=len(data)
        )
    raw = np.frombuffer(data, dtype=dt, count=n * d, offset=header)
    out = raw.reshape(n, d).astype(np.float64)
    if dtype_code == 0x08:
        out /= 255.0
    return out


def _load_csv(path: str, skip_header: bool) -> np.ndarray:
    rows = []
    d = None
    offset = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh):
            line = raw.decode("utf-8", errors="replace").strip()
            if lineno == 0 and skip_header:
                offset += len(raw)
                continue
            if not line:
                offset += len(raw)
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise ParseError(f"row {lineno} is not numeric", offset=offset)
            if d is None:
                d = len(vals)
            elif len(vals) != d:
                raise ParseError(
                    f"row {lineno} has {len(vals)} values, expected {d}",
                    offset=offset,
                )
            rows.append(vals)
            offset += len(raw)
    if not rows:
        raise ParseError("no data rows", offset=0)
    return np.asarray(rows, dtype=np.float64)


def save_fvecs(path: str, vectors: np.ndarray) -> None:
    """Fixture writer; load(save(x)) round-trips float32 exactly."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float32))
    n, d = vectors.shape
    with open(path, "wb") as fh:
        dim = np.array([d], dtype="<i4").tobytes()
        for i in range(n):
            fh.write(dim)
            fh.write(vectors[i].astype("<f4").tobytes())


def save_csv(path: str, vectors: np.ndarray) -> None:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    with open(path, "w") as fh:
        for row in vectors:
            fh.write(",".join(repr(v) for v in row.tolist()))
            fh.write("\n")


def normalize(vectors: np.ndarray | VectorSet, source: str = "") -> VectorSet:
    """Project every nonzero vector onto the unit sphere.

    Original norms are kept in the sidecar; zero vectors are dropped and
    counted. Idempotent up to 2**-40 per coordinate.
    """
    if isinstance(vectors, VectorSet):
        source = source or vectors.source
        vectors = vectors.vectors
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    norms = np.sqrt(np.atleast_1d(seq_sum(vectors * vectors)))
    nonzero = norms > 0.0
    dropped = int((~nonzero).sum())
    if not np.any(nonzero):
        raise AllZero("every vector in the set is zero")
    kept = vectors[nonzero] / norms[nonzero, None]
    return VectorSet(
        vectors=kept, norms=norms[nonzero], source=source, dropped=dropped
    )


def general_inner(
    code_x: CodeWord, code_y: CodeWord, norm_x: float, norm_y: float
) -> float:
    """Inner product of the original (scaled) vectors from unit codes.

    Error is bounded by norm_x * norm_y * (||ux - uy|| delta + delta^2/2)
    where ux, uy are the unit directions.
    """
    if norm_x <= 0 or norm_y <= 0:
        raise ValueError(f"norms must be positive, got {norm_x!r}, {norm_y!r}")
    return norm_x * norm_y * estimate_inner(code_x, code_y)


def sample_pairs(set_or_size: VectorSet | int, count: int, seed: int) -> np.ndarray:
    """Seeded distinct index pairs (i < j), reproducible bit-for-bit.

    Same seed, size, and count always produce the same (count, 2) array.
    """
    n = set_or_size if isinstance(set_or_size, int) else len(set_or_size)
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if n < 2:
        raise SetTooSmall(f"need at least 2 vectors, have {n}")
    limit = n * (n - 1) // 2
    if count > limit:
        raise SetTooSmall(f"only {limit} distinct pairs exist, {count} requested")
    rng = np.random.default_rng(seed)
    seen = set()
    pairs = []
    while len(pairs) < count:
        draw = rng.integers(0, n, size=(max(64, count), 2))
        for i, j in draw:
            if i == j:
                continue
            key = (int(min(i, j)), int(max(i, j)))
            if key in seen:
                continue
            seen.add(key)
            pairs.append(key)
            if len(pairs) == count:
                break
    return np.asarray(pairs, dtype=np.int64)
