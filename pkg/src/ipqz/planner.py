"""Parameter planning for distinguishing and estimation tasks.

Given thresholds alpha > beta, a grid resolution

    delta = (alpha - beta) / (2 sqrt(2 - 2 beta))

and decision threshold

    t = alpha - delta sqrt(2 - 2 alpha) - delta^2 / 2

make the quantized inner product land at or above t whenever the true
inner product is >= alpha, and strictly below t whenever it is <= beta.
delta is rounded DOWN to a 32-bit rational: a smaller resolution only
shrinks the error, so the guarantee survives the rounding. For plain
estimation with additive error epsilon, delta = epsilon / 4 suffices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidEpsilon, InvalidThresholds
from .grid import U32_MAX, GridParams, as_delta


def _check_thresholds(alpha: float, beta: float) -> None:
    if not (0.0 <= beta < alpha <= 1.0):
        raise InvalidThresholds(
            f"need 0 <= beta < alpha <= 1, got alpha={alpha!r} beta={beta!r}"
        )


def _ulps_down(x: float, n: int = 4) -> float:
    for _ in range(n):
        x = math.nextafter(x, 0.0)
    return x


def _floor_to_u32_rational(x: float) -> Fraction:
    """Largest fraction with a 32-bit denominator that is <= x."""
    frac = Fraction(math.floor(x * U32_MAX), U32_MAX)
    if frac <= 0:
        raise InvalidThresholds(f"planned delta {x!r} underflows the rational grid")
    return frac


def threshold_for(alpha: float, delta: Fraction) -> float:
    """Decision threshold t for a given alpha and grid resolution."""
    df = float(delta)
    return alpha - df * math.sqrt(2.0 - 2.0 * alpha) - df * df / 2.0


@dataclass(frozen=True)
class ThresholdSpec:
    """Planned solution to one (alpha, beta) distinguishing instance."""

    alpha: float
    beta: float
    delta: Fraction
    t: float

    def grid(self, d: int) -> GridParams:
        return GridParams(d, self.delta)


def plan_distinguish(alpha: float, beta: float) -> ThresholdSpec:
    """Choose delta and t for separating inner products >= alpha from <= beta.

    The formula value of delta is nudged down a few ulps before the
    rational floor so the stored value never exceeds the real one.
    """
    _check_thresholds(alpha, beta)
    raw = (alpha - beta) / (2.0 * math.sqrt(2.0 - 2.0 * beta))
    delta = _floor_to_u32_rational(_ulps_down(raw))
    return ThresholdSpec(alpha=alpha, beta=beta, delta=delta, t=threshold_for(alpha, delta))


@dataclass(frozen=True)
class EstimatePlan:
    """Grid factory for additive-error inner-product estimation."""

    epsilon: float
    delta: Fraction = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise InvalidEpsilon(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        quarter = as_delta(self.epsilon) / 4
        if quarter.numerator > U32_MAX or quarter.denominator > U32_MAX:
            quarter = _floor_to_u32_rational(_ulps_down(float(quarter)))
        object.__setattr__(self, "delta", quarter)

    def grid(self, d: int) -> GridParams:
        return GridParams(d, self.delta)


def plan_estimate(epsilon: float) -> EstimatePlan:
    """Grid plan with delta = epsilon/4; estimates carry additive error <= epsilon."""
    return EstimatePlan(epsilon)


def shared_grid_ok(delta: Fraction | str | float, alpha2: float, beta2: float) -> bool:
    """True when one grid at resolution delta also solves (alpha2, beta2).

    Checks the strict inequality

        delta < (alpha2 - beta2) / (sqrt(2 - 2 alpha2) + sqrt(2 - 2 beta2))

    with delta exact and the right-hand side rounded down in binary64,
    so a True answer is conservative.
    """
    _check_thresholds(alpha2, beta2)
    delta = as_delta(delta)
    rhs = (alpha2 - beta2) / (
        math.sqrt(2.0 - 2.0 * alpha2) + math.sqrt(2.0 - 2.0 * beta2)
    )
    return delta < Fraction(_ulps_down(rhs))
