"""Inner-product estimation and threshold decisions from code words.

The decoded inner product <f(x), f(y)> deviates from the true <x, y>
by at most ||x - y|| * delta + delta^2 / 2 for unit vectors, which is
what both the estimate accuracy and the distinguisher correctness rest
on. Decisions compare the estimate against the planned threshold t with
>= for survival.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .codec import CodeWord, decode_rows
from .errors import GridMismatch, SpecIncompatible
from .grid import reconstruct_rows
from .numerics import seq_dot
from .planner import ThresholdSpec, shared_grid_ok, threshold_for


class Decision(enum.Enum):
    PASSES_THRESHOLD = "PassesThreshold"
    ELIMINATED = "Eliminated"


@dataclass(frozen=True)
class PairVerdict:
    decision: Decision
    estimate: float
    threshold: float


def estimate_inner(code_x: CodeWord, code_y: CodeWord) -> float:
    """Dot product of the two decoded unit vectors.

    Accumulated in binary64 in ascending coordinate order, so the result
    is bit-for-bit symmetric and reproducible across platforms.
    """
    if code_x.grid != code_y.grid:
        raise GridMismatch("codes were produced under different grids")
    z = decode_rows([code_x, code_y], code_x.grid)
    v = reconstruct_rows(z, code_x.grid)
    return float(seq_dot(v[0], v[1]))


def _threshold_under(spec: ThresholdSpec, grid_delta) -> float:
    """Decision threshold valid for codes built at resolution `grid_delta`."""
    if grid_delta == spec.delta:
        return spec.t
    if not shared_grid_ok(grid_delta, spec.alpha, spec.beta):
        raise SpecIncompatible(
            f"grid delta {grid_delta} too coarse for "
            f"(alpha={spec.alpha}, beta={spec.beta})"
        )
    return threshold_for(spec.alpha, grid_delta)


def _verdict(estimate: float, threshold: float) -> PairVerdict:
    decision = (
        Decision.PASSES_THRESHOLD if estimate >= threshold else Decision.ELIMINATED
    )
    return PairVerdict(decision=decision, estimate=estimate, threshold=threshold)


def distinguish(code_x: CodeWord, code_y: CodeWord, spec: ThresholdSpec) -> PairVerdict:
    """Decide whether the pair can still have inner product >= alpha.

    Never eliminates a pair with true inner product >= alpha; always
    eliminates pairs at or below beta; anything goes in the open gap.
    """
    t = _threshold_under(spec, code_x.grid.delta)
    return _verdict(estimate_inner(code_x, code_y), t)


def worst_case_error(delta, dist_hint: float | None = None) -> float:
    """Upper bound dist * delta + delta^2 / 2 on the estimate error.

    `dist_hint` is an upper bound on ||x - y||; defaults to the sphere
    diameter 2.
    """
    df = float(delta) if not isinstance(delta, float) else delta
    if not (0.0 < df <= 1.0):
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    if dist_hint is None:
        dist_hint = 2.0
    if not (0.0 <= dist_hint <= 2.0):
        raise ValueError(f"dist_hint must lie in [0, 2], got {dist_hint!r}")
    return dist_hint * df + df * df / 2.0


@dataclass(frozen=True)
class FilterResult:
    """Partition of candidate pairs, input order preserved."""

    survivors: tuple[tuple[int, PairVerdict], ...]
    eliminated: tuple[tuple[int, PairVerdict], ...]

    @property
    def survivor_count(self) -> int:
        return len(self.survivors)

    @property
    def eliminated_count(self) -> int:
        return len(self.eliminated)


def filter_pairs(
    pairs: Sequence[tuple[CodeWord, CodeWord]], spec: ThresholdSpec
) -> FilterResult:
    """Split candidate pairs into survivors and eliminated.

    No pair with true inner product >= alpha ever lands in eliminated.
    Each entry keeps its input position and estimate so downstream exact
    checks can prioritize near-threshold pairs.
    """
    survivors = []
    eliminated = []
    for i, (cx, cy) in enumerate(pairs):
        verdict = distinguish(cx, cy, spec)
        if verdict.decision is Decision.PASSES_THRESHOLD:
            survivors.append((i, verdict))
        else:
            eliminated.append((i, verdict))
    return FilterResult(survivors=tuple(survivors), eliminated=tuple(eliminated))
