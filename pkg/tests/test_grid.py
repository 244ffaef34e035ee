"""Grid rounding, reconstruction, and the distortion guarantees."""

import math
from fractions import Fraction

import numpy as np
import pytest

from ipqz import (
    BudgetExceeded,
    GridParams,
    NonFinite,
    NormTooLarge,
    ZeroVector,
    is_unit,
    quantize,
    quantize_rows,
    random_unit_rows,
    reconstruct,
    reconstruct_rows,
)
from ipqz.grid import as_delta
from ipqz.numerics import seq_dot, seq_norm, seq_sum


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


class TestGridParams:
    def test_s_is_exact_rational_floor(self):
        # s = floor(d/delta + d/2) in exact arithmetic
        assert GridParams(4, Fraction(1, 2)).s == 10
        assert GridParams(1, Fraction(1)).s == 1
        assert GridParams(2, Fraction(1, 2)).s == 5
        assert GridParams(784, Fraction(1, 100)).s == 78792

    def test_no_float_in_s(self):
        # 3/(1/3) + 1.5 = 10.5 exactly; float 3/0.333... would drift
        g = GridParams(3, Fraction(1, 3))
        assert g.s == 10

    def test_delta_range(self):
        with pytest.raises(ValueError):
            GridParams(4, Fraction(3, 2))
        with pytest.raises(ValueError):
            GridParams(4, Fraction(0))
        with pytest.raises(ValueError):
            GridParams(0, Fraction(1, 2))

    def test_as_delta_decimal_string_is_exact(self):
        assert as_delta("0.1") == Fraction(1, 10)
        assert as_delta(0.1) == Fraction(1, 10)
        assert as_delta("1/3") == Fraction(1, 3)

    def test_oversized_rational_floors_down(self):
        d = as_delta(Fraction(10**12 + 1, 3 * 10**12))
        assert d <= Fraction(10**12 + 1, 3 * 10**12)
        assert d.numerator <= 2**32 - 1 and d.denominator <= 2**32 - 1


class TestQuantize:
    def test_basis_vector(self):
        # e1 at d=4, delta=1/2: g = 2/0.5 = 4, z = (4,0,0,0)
        grid = GridParams(4, Fraction(1, 2))
        z = quantize(np.array([1.0, 0, 0, 0]), grid)
        assert z.z.tolist() == [4, 0, 0, 0]

    def test_negative_basis_half_up_ties(self):
        # floor(-4 + 0.5) = -4: the tie rule rounds toward +inf
        grid = GridParams(4, Fraction(1, 2))
        z = quantize(np.array([-1.0, 0, 0, 0]), grid)
        assert z.z.tolist() == [-4, 0, 0, 0]

    def test_diagonal_pair(self):
        # (1/sqrt2, 1/sqrt2) at d=2, delta=1/10: z_i = floor(10.5...) = 10
        grid = GridParams(2, Fraction(1, 10))
        x = unit([1.0, 1.0])
        z = quantize(x, grid)
        assert z.z.tolist() == [10, 10]

    def test_tie_rounds_half_up_both_signs(self):
        # x*g = 3.5 -> 4, x*g = -3.5 -> -3
        grid = GridParams(1, Fraction(1, 2))  # wide budget, g = 2
        assert math.floor(3.5 + 0.5) == 4
        assert math.floor(-3.5 + 0.5) == -3

    def test_budget_always_respected(self):
        for d, delta in [(2, "1/10"), (8, "1/2"), (64, "0.05")]:
            grid = GridParams(d, as_delta(delta))
            x = random_unit_rows(500, d, seed=42)
            z = quantize_rows(x, grid)
            assert np.abs(z).sum(axis=1).max() <= grid.s

    def test_marginally_over_unit_is_renormalized(self):
        grid = GridParams(4, Fraction(1, 10))
        x = unit([1.0, 2, 3, 4]) * (1 + 2**-21)
        z1 = quantize(x, grid)
        z2 = quantize(unit([1.0, 2, 3, 4]), grid)
        assert z1 == z2

    def test_norm_too_large(self):
        grid = GridParams(2, Fraction(1, 10))
        with pytest.raises(NormTooLarge):
            quantize(np.array([1.0, 1.0]), grid)

    def test_non_finite(self):
        grid = GridParams(2, Fraction(1, 10))
        with pytest.raises(NonFinite):
            quantize(np.array([np.nan, 0.0]), grid)
        with pytest.raises(NonFinite):
            quantize(np.array([np.inf, 0.0]), grid)

    def test_zero_vector_rejected(self):
        grid = GridParams(2, Fraction(1, 10))
        with pytest.raises(ZeroVector):
            quantize(np.zeros(2), grid)
        # tiny norms round to the zero grid vector and fail loudly too
        with pytest.raises(ZeroVector):
            quantize(np.array([1e-9, 1e-9]), grid)

    def test_zvector_budget_enforced_at_construction(self):
        from ipqz import ZVector

        grid = GridParams(2, Fraction(1, 2))  # s = 5
        with pytest.raises(BudgetExceeded):
            ZVector(np.array([5, 1]), grid)


class TestReconstruct:
    def test_axis(self):
        grid = GridParams(4, Fraction(1, 2))
        v = reconstruct(quantize(np.array([1.0, 0, 0, 0]), grid))
        assert v.tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_equal_coordinates(self):
        grid = GridParams(2, Fraction(1, 10))
        z = quantize(unit([1.0, 1.0]), grid)
        v = reconstruct(z)
        assert abs(v[0] - 1 / math.sqrt(2)) <= 2**-40
        assert abs(v[1] - 1 / math.sqrt(2)) <= 2**-40

    def test_three_four_five(self):
        # normalization is delta-independent
        for delta in ["1/2", "1/10", "0.37"]:
            grid = GridParams(2, as_delta(delta))
            v = reconstruct_rows(np.array([[3, -4]]), grid)[0]
            assert abs(v[0] - 0.6) <= 2**-40
            assert abs(v[1] + 0.8) <= 2**-40

    def test_zero_rejected(self):
        grid = GridParams(2, Fraction(1, 10))
        with pytest.raises(ZeroVector):
            reconstruct_rows(np.array([[0, 0]]), grid)

    def test_output_is_unit(self):
        grid = GridParams(32, Fraction(1, 7))
        x = random_unit_rows(200, 32, seed=3)
        v = reconstruct_rows(quantize_rows(x, grid), grid)
        norms = np.atleast_1d(seq_norm(v))
        assert np.abs(norms - 1.0).max() <= 2**-40


class TestDistortion:
    def test_per_coordinate_error(self):
        # |x_i - x'_i| <= delta / (2 sqrt(d)), hence ||x - x'|| <= delta/2
        for d, delta in [(2, "1/10"), (16, "1/4"), (128, "1/20")]:
            grid = GridParams(d, as_delta(delta))
            x = random_unit_rows(300, d, seed=7)
            z = quantize_rows(x, grid)
            xp = z * grid.cell
            step = float(grid.delta) / (2 * math.sqrt(d))
            assert np.abs(x - xp).max() <= step * (1 + 1e-12)
            dist = np.sqrt(np.atleast_1d(seq_sum((x - xp) ** 2)))
            assert dist.max() <= float(grid.delta) / 2 + 1e-12

    def test_distortion_sandwich(self):
        # ||x-y|| - delta <= ||f(x)-f(y)|| <= ||x-y|| + delta
        d, n = 24, 2000
        grid = GridParams(d, Fraction(1, 10))
        delta = float(grid.delta)
        rng = np.random.default_rng(11)
        x0 = random_unit_rows(n, d, seed=12)
        xs = [x0]
        ys = [random_unit_rows(n, d, seed=13)]
        # adversarially close pairs: rotate x0 by tiny angles in a random plane
        for dist in [0.0, 1e-6, delta / 2, delta]:
            ang = 2 * math.asin(dist / 2)
            v = rng.standard_normal((n, d))
            v -= x0 * np.atleast_1d(seq_dot(v, x0))[:, None]
            v /= np.atleast_1d(seq_norm(v))[:, None]
            xs.append(x0)
            ys.append(math.cos(ang) * x0 + math.sin(ang) * v)
        x = np.vstack(xs)
        y = np.vstack(ys)
        fx = reconstruct_rows(quantize_rows(x, grid), grid)
        fy = reconstruct_rows(quantize_rows(y, grid), grid)
        true_d = np.sqrt(np.atleast_1d(seq_sum((x - y) ** 2)))
        quant_d = np.sqrt(np.atleast_1d(seq_sum((fx - fy) ** 2)))
        slack = 2.0**-30
        assert np.all(quant_d <= true_d + delta + slack)
        assert np.all(quant_d >= true_d - delta - slack)

    def test_requantization_stays_delta_close(self):
        # applying f to an already-quantized direction moves it by at most
        # delta (distortion lemma with one exact endpoint)
        d = 16
        grid = GridParams(d, Fraction(1, 10))
        x = random_unit_rows(500, d, seed=21)
        fx = reconstruct_rows(quantize_rows(x, grid), grid)
        ffx = reconstruct_rows(quantize_rows(fx, grid), grid)
        dist = np.sqrt(np.atleast_1d(seq_sum((fx - ffx) ** 2)))
        assert dist.max() <= float(grid.delta) + 2**-30

    @pytest.mark.xfail(
        reason="f = reconstruct . quantize is not a projection: renormalizing "
        "by 1/||x'|| before re-rounding can cross a rounding boundary and "
        "change the grid direction (counterexamples at d=2, delta=1/10)",
        strict=True,
    )
    def test_idempotence_exact(self):
        d = 2
        grid = GridParams(d, Fraction(1, 10))
        x = random_unit_rows(20000, d, seed=5)
        z = quantize_rows(x, grid)
        fx = reconstruct_rows(z, grid)
        z2 = quantize_rows(fx, grid)
        fx2 = reconstruct_rows(z2, grid)
        assert np.array_equal(fx, fx2)


class TestNumerics:
    def test_accumulate_matches_naive_loop(self):
        # pins the ascending-order contract of np.add.accumulate
        rng = np.random.default_rng(0)
        a = rng.standard_normal(4097)
        acc = float(np.add.accumulate(a)[-1])
        tot = 0.0
        for v in a.tolist():
            tot = tot + v
        assert acc == tot

    def test_seq_dot_symmetry_bitwise(self):
        x = random_unit_rows(1, 257, seed=1)[0]
        y = random_unit_rows(1, 257, seed=2)[0]
        assert float(seq_dot(x, y)) == float(seq_dot(y, x))

    def test_is_unit(self):
        assert is_unit(np.array([0.6, 0.8]))
        assert not is_unit(np.array([0.6, 0.81]))
