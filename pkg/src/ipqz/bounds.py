"""Computable lower-bound machinery for the distinguishing problem.

Three ingredients: the angle gap theta = arccos(beta) - arccos(alpha)
between the two threshold cones; an explicit witness construction that
forces any correct scheme to separate two encodings whenever their
angle reaches the gap; and cap-area / packing-size formulas that count
how many pairwise-separated directions fit on the sphere. A greedy
packing oracle at d in {2, 3, 4} validates the counting formulas
empirically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BudgetTooSmall, DegenerateAngle, GapViolated, InvalidThresholds
from .numerics import seq_dot

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class AngleGap:
    """Angle gap between the beta and alpha similarity cones."""

    theta: float
    upper_bound: float
    alpha: float
    beta: float


def theta_gap(alpha: float, beta: float) -> AngleGap:
    """theta = arccos(beta) - arccos(alpha), plus its closed-form bound
    (pi/2) (alpha - beta) / sqrt(1 - beta).
    """
    if not (0.0 <= beta < alpha <= 1.0):
        raise InvalidThresholds(
            f"need 0 <= beta < alpha <= 1, got alpha={alpha!r} beta={beta!r}"
        )
    theta = math.acos(beta) - math.acos(alpha)
    if not (0.0 < theta < math.pi / 2):
        raise InvalidThresholds(
            f"angle gap {theta!r} outside (0, pi/2); thresholds too extreme"
        )
    bound = (math.pi / 2.0) * (alpha - beta) / math.sqrt(1.0 - beta)
    assert theta <= bound + 1e-12
    return AngleGap(theta=theta, upper_bound=bound, alpha=alpha, beta=beta)


def witness(
    x1: np.ndarray, x2: np.ndarray, beta: float, alpha: float
) -> np.ndarray:
    """Unit vector y with <x1, y> = beta and <x2, y> >= alpha.

    Valid whenever the angle between x1 and x2 is at least the gap
    theta_gap(alpha, beta); y lies in the plane spanned by x1 and x2.
    """
    gap = theta_gap(alpha, beta)
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    ip = min(1.0, max(-1.0, float(seq_dot(x1, x2))))
    theta = math.acos(ip)
    sin_t = math.sin(theta)
    if sin_t < 1e-6:
        raise DegenerateAngle(f"sin(theta) = {sin_t!r} too small")
    if theta < gap.theta:
        raise GapViolated(f"pair angle {theta!r} below gap {gap.theta!r}")
    root = math.sqrt(1.0 - beta * beta)
    return (beta - root * math.cos(theta) / sin_t) * x1 + (root / sin_t) * x2


def _log2_ball_coeff(m: int) -> float:
    """log2 of pi^(m/2) / Gamma(m/2 + 1), the unit-ball volume coefficient."""
    return (m / 2.0) * math.log2(math.pi) - math.lgamma(m / 2.0 + 1.0) / _LN2


def cap_area_bound(theta: float, d: int) -> float:
    """log2 of the cap-area upper bound c_{d-1} * d * (2(1-cos theta))^((d-1)/2)."""
    _check_theta_d(theta, d)
    return (
        _log2_ball_coeff(d - 1)
        + math.log2(d)
        + ((d - 1) / 2.0) * math.log2(2.0 * (1.0 - math.cos(theta)))
    )


def code_size_lb(theta: float, d: int) -> float:
    """log2 lower bound on the size of a packing with pairwise angle > theta.

    Equals -((d-1)/2) log2(2(1-cos theta)) - log2(3 sqrt(d)); negative
    when 2(1-cos theta) >= 1, in which case callers clamp at zero.
    """
    _check_theta_d(theta, d)
    return (
        -((d - 1) / 2.0) * math.log2(2.0 * (1.0 - math.cos(theta)))
        - math.log2(3.0 * math.sqrt(d))
    )


def _check_theta_d(theta: float, d: int) -> None:
    if not (0.0 < theta < math.pi / 2):
        raise ValueError(f"theta must lie in (0, pi/2), got {theta!r}")
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")


@dataclass(frozen=True)
class SpaceBound:
    """Bits-per-vector lower bound for one threshold pair."""

    bits: float
    asymptotic_bits: float
    theta: float


def space_lb(alpha: float, beta: float, d: int) -> SpaceBound:
    """Computable space lower bound via the packing-size formula.

    `bits` is code_size_lb at the angle gap, clamped at zero;
    `asymptotic_bits` is the display form d * log2(sqrt(1-beta)/(alpha-beta)).
    """
    gap = theta_gap(alpha, beta)
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    bits = max(0.0, code_size_lb(gap.theta, d))
    asym = d * math.log2(math.sqrt(1.0 - beta) / (alpha - beta))
    return SpaceBound(bits=bits, asymptotic_bits=asym, theta=gap.theta)


# ---------------------------------------------------------------------------
# greedy packing oracle


@dataclass(frozen=True)
class SphereCode:
    """Greedy packing: unit points with pairwise angle > theta_target."""

    points: np.ndarray
    theta: float
    theta_target: float
    last_accept_index: int
    budget: int
    saturated: bool


def _min_pairwise_angle(points: np.ndarray) -> float:
    if len(points) < 2:
        return math.pi
    dots = points @ points.T
    np.fill_diagonal(dots, -1.0)
    return math.acos(min(1.0, max(-1.0, float(dots.max()))))


def _circle_code(theta: float, budget: int) -> SphereCode:
    # Candidates are the `budget` evenly spaced directions, visited in
    # angle order; only the previous and the first accepted point can be
    # nearest, so the scan reduces to an O(k) walk over grid indices.
    h = 2.0 * math.pi / budget
    angles = [0.0]
    last = 0.0
    limit = 2.0 * math.pi - theta
    while True:
        j = math.floor((last + theta) / h) + 1
        ang = j * h
        while ang <= last + theta:
            j += 1
            ang = j * h
        if ang >= limit or j >= budget:
            break
        angles.append(ang)
        last = ang
    pts = np.array([[math.cos(a), math.sin(a)] for a in angles])
    return SphereCode(
        points=pts,
        theta=_min_pairwise_angle(pts),
        theta_target=theta,
        last_accept_index=int(round(last / h)),
        budget=budget,
        saturated=True,
    )


def _sphere_candidates(d: int, budget: int) -> np.ndarray:
    """Deterministic low-discrepancy stream of unit vectors (Sobol points
    pushed through the Gaussian inverse CDF and normalized)."""
    from scipy.special import ndtri
    from scipy.stats import qmc

    eng = qmc.Sobol(d, scramble=False)
    eng.fast_forward(1)  # the first Sobol point is the all-zero corner
    u = eng.random(budget)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=1)
    keep = norms > 1e-9
    return g[keep] / norms[keep, None]


def greedy_sphere_code(d: int, theta: float, candidate_budget: int) -> SphereCode:
    """Greedy angular packing on S^(d-1) for d in {2, 3, 4}.

    Deterministic and single-threaded by contract: candidates are
    iterated in a fixed order and accepted when their angle to every
    accepted point exceeds theta. Serves as an existence oracle for
    code_size_lb at tiny dimensions. Warns BudgetTooSmall when the
    stream kept accepting points well into its tail (the sphere is
    likely not saturated).
    """
    if d not in (2, 3, 4):
        raise ValueError(f"greedy oracle supports d in {{2, 3, 4}}, got {d}")
    _check_theta_d(theta, d)
    if candidate_budget < 1:
        raise ValueError("candidate_budget must be positive")
    if d == 2:
        return _circle_code(theta, candidate_budget)
    cands = _sphere_candidates(d, candidate_budget)
    cos_t = math.cos(theta)  # angle > theta  <=>  dot < cos(theta)
    accepted = [cands[0]]
    last_index = 0
    block = np.empty((len(cands), d))
    block[0] = cands[0]
    k = 1
    for i in range(1, len(cands)):
        if np.max(block[:k] @ cands[i]) < cos_t:
            block[k] = cands[i]
            k += 1
            accepted.append(cands[i])
            last_index = i
    pts = np.array(accepted)
    saturated = last_index < candidate_budget // 2
    if not saturated:
        warnings.warn(
            f"candidate stream exhausted while still accepting "
            f"(last acceptance at {last_index}/{candidate_budget})",
            BudgetTooSmall,
        )
    return SphereCode(
        points=pts,
        theta=_min_pairwise_angle(pts),
        theta_target=theta,
        last_accept_index=last_index,
        budget=candidate_budget,
        saturated=saturated,
    )
