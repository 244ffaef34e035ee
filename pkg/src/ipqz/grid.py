"""Grid quantization of (near-)unit vectors.

A grid is parameterized by the dimension d and an exact rational
resolution delta in (0, 1]. A real vector x with norm at most 1 is
rounded coordinate-wise to the integer vector

    z_i = floor(x_i * g + 1/2),   g = sqrt(d) / delta,

and decoded back to the unit vector z / ||z * delta/sqrt(d)||. The sum
of magnitudes of z is at most s = floor(d/delta + d/2), which is what
makes the enumerative code in `ipqz.codec` compact.

Floating-point contract: g is computed as two correctly rounded
binary64 operations (sqrt, then divide by the binary64 value of the
exact rational delta); each x_i * g is a single correctly rounded
multiply; the + 1/2 is a single rounded add; floor is exact. No FMA
contraction is involved anywhere, so codes are identical on every
IEEE-754 platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import BudgetExceeded, NonFinite, NormTooLarge, ZeroVector
from .numerics import seq_norm, seq_sum

# Maximum value of the stored numerator/denominator of delta.
U32_MAX = 2**32 - 1

# Inputs with norm in (1, 1 + NORM_SLACK] are renormalized; larger norms
# are rejected.
NORM_SLACK = 2.0**-20

# |  ||v||_2 - 1  | tolerance for reconstructed unit vectors.
UNIT_NORM_TOL = 2.0**-40

DeltaLike = Union[Fraction, str, float, int]


def as_delta(value: DeltaLike) -> Fraction:
    """Coerce a resolution given as Fraction, "p/q" string, decimal string,
    float, or int to an exact Fraction.

    Floats go through their shortest decimal repr, so as_delta(0.1) is
    exactly 1/10. Fractions whose numerator or denominator exceeds 32
    bits are floored to the nearest representable rational below (a
    smaller delta only tightens every guarantee).
    """
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, float):
        frac = Fraction(repr(value))
    else:
        frac = Fraction(value)
    if frac <= 0:
        raise ValueError(f"delta must be positive, got {frac}")
    if frac.numerator > U32_MAX or frac.denominator > U32_MAX:
        frac = Fraction(math.floor(frac * U32_MAX), U32_MAX)
        if frac <= 0:
            raise ValueError("delta too small to represent in 32-bit rationals")
    return frac


@dataclass(frozen=True)
class GridParams:
    """Quantization grid: dimension d, exact rational resolution delta.

    s = floor(d/delta + d/2) is derived in exact rational arithmetic and
    cached; it bounds the magnitude sum of every quantized vector.
    """

    d: int
    delta: Fraction
    s: int = field(init=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d!r}")
        delta = as_delta(self.delta)
        if not (0 < delta <= 1):
            raise ValueError(f"delta must lie in (0, 1], got {delta}")
        object.__setattr__(self, "delta", delta)
        exact = Fraction(self.d) / delta + Fraction(self.d, 2)
        object.__setattr__(self, "s", exact.numerator // exact.denominator)

    @property
    def delta_float(self) -> float:
        """Correctly rounded binary64 value of delta."""
        return float(self.delta)

    @property
    def scale(self) -> float:
        """g = sqrt(d) / delta: sqrt then divide, both correctly rounded."""
        return math.sqrt(self.d) / float(self.delta)

    @property
    def cell(self) -> float:
        """delta / sqrt(d): the coordinate step of the grid."""
        return float(self.delta) / math.sqrt(self.d)


@dataclass(frozen=True)
class ZVector:
    """Integer grid vector together with the grid that produced it."""

    z: np.ndarray
    grid: GridParams

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=np.int64)
        if z.ndim != 1 or z.shape[0] != self.grid.d:
            raise ValueError(f"expected {self.grid.d} coordinates, got shape {z.shape}")
        if int(np.abs(z).sum()) > self.grid.s:
            raise BudgetExceeded(
                f"sum of magnitudes {int(np.abs(z).sum())} exceeds s={self.grid.s}"
            )
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    def __eq__(self, other):
        if not isinstance(other, ZVector):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.z, other.z)

    def __hash__(self):
        return hash((self.grid, self.z.tobytes()))


def _check_rows(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NonFinite("input contains NaN or infinity")
    return x


def quantize_rows(x: np.ndarray, grid: GridParams) -> np.ndarray:
    """Quantize a batch of row vectors to an (n, d) int64 grid array.

    Rows with norm in (1, 1 + 2**-20] are renormalized to unit length
    first; rows beyond that are rejected. Ties round half up (toward
    +inf), also for negative coordinates, so -3.5 rounds to -3.
    """
    x = np.atleast_2d(_check_rows(x))
    if x.shape[1] != grid.d:
        raise ValueError(f"expected dimension {grid.d}, got {x.shape[1]}")
    norms = np.atleast_1d(seq_norm(x))
    too_big = norms > 1.0 + NORM_SLACK
    if np.any(too_big):
        i = int(np.argmax(too_big))
        raise NormTooLarge(f"row {i} has norm {norms[i]!r} > 1 + 2**-20")
    over = norms > 1.0
    if np.any(over):
        x = x.copy()
        x[over] /= norms[over, None]
    g = grid.scale
    z = np.floor(x * g + 0.5).astype(np.int64)
    budgets = np.abs(z).sum(axis=1)
    if np.any(budgets > grid.s):
        i = int(np.argmax(budgets > grid.s))
        raise BudgetExceeded(
            f"row {i}: sum of magnitudes {int(budgets[i])} exceeds s={grid.s}"
        )
    if np.any(budgets == 0):
        i = int(np.argmax(budgets == 0))
        raise ZeroVector(f"row {i} rounds to the zero grid vector")
    return z


def quantize(x: Sequence[float] | np.ndarray, grid: GridParams) -> ZVector:
    """Quantize one vector with ||x||_2 <= 1 + 2**-20 to its grid vector."""
    z = quantize_rows(np.asarray(x, dtype=np.float64).reshape(1, -1), grid)
    return ZVector(z[0], grid)


def reconstruct_rows(z: np.ndarray, grid: GridParams) -> np.ndarray:
    """Decode an (n, d) int64 grid array to unit row vectors.

    Evaluates x'_i = z_i * (delta / sqrt(d)) in binary64 and divides by
    the deterministic ascending-order norm of x'.
    """
    z = np.atleast_2d(np.asarray(z))
    if np.any(np.all(z == 0, axis=1)):
        i = int(np.argmax(np.all(z == 0, axis=1)))
        raise ZeroVector(f"row {i} is the zero grid vector")
    xp = z.astype(np.float64) * grid.cell
    norms = np.atleast_1d(seq_norm(xp))
    return xp / norms[:, None]


def reconstruct(z: ZVector | np.ndarray, grid: GridParams | None = None) -> np.ndarray:
    """Decode one grid vector back to the unit sphere."""
    if isinstance(z, ZVector):
        grid = z.grid
        z = z.z
    if grid is None:
        raise ValueError("grid required when z is a bare array")
    return reconstruct_rows(np.asarray(z).reshape(1, -1), grid)[0]


def is_unit(v: np.ndarray, tol: float = UNIT_NORM_TOL) -> bool:
    """True when | ||v||_2 - 1 | <= tol with the deterministic norm."""
    return abs(float(seq_norm(np.asarray(v, dtype=np.float64))) - 1.0) <= tol


def random_unit_rows(n: int, d: int, seed: int) -> np.ndarray:
    """Seeded uniform sample of n unit vectors in dimension d (test helper)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    # Gaussian rows are never numerically zero for the sizes used here.
    norms = np.sqrt(seq_sum(x * x))
    return x / np.atleast_1d(norms)[:, None]
