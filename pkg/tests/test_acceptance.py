"""Acceptance suite: the ten gate criteria, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines. Criterion 9 needs real datasets (MNIST/SIFT/DLIB) under
$IPQZ_DATA_DIR or ./data and is skipped when they are absent.
"""

import itertools
import math
import os
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from ipqz import (
    BudgetTooSmall,
    Decision,
    GridParams,
    code_length,
    code_size_lb,
    decode_rows,
    distinguish,
    encode_rows,
    greedy_sphere_code,
    plan_distinguish,
    plan_estimate,
    quantize_rows,
    random_unit_rows,
    rank_composition,
    reconstruct_rows,
    space_lb,
    theta_gap,
    unrank_composition,
    witness,
    worst_case_error,
)
from ipqz.codec import code_bytes, rank_compositions, unrank_compositions
from ipqz.estimator import _verdict
from ipqz.numerics import seq_dot, seq_sum
from ipqz.planner import threshold_for


def report(num: int, name: str, ok: bool, detail: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"{status} criterion {num} ({name}): {detail} [{time.time() - t0:.1f}s]")
    assert ok, f"criterion {num} ({name}): {detail}"


def grid_with_budget(d: int, s: int) -> GridParams | None:
    s_min = (3 * d) // 2
    if s < s_min:
        return None
    if s == s_min:
        return GridParams(d, Fraction(1))
    return GridParams(d, Fraction(2 * d, 2 * s - d))


def orthogonal_rows(x: np.ndarray, rng) -> np.ndarray:
    """Unit rows orthogonal to the corresponding rows of x."""
    v = rng.standard_normal(x.shape)
    v -= x * np.atleast_1d(seq_dot(v, x))[:, None]
    return v / np.sqrt(np.atleast_1d(seq_sum(v * v)))[:, None]


def rotated_pairs(n, d, inner, seed):
    """(x, y) unit pairs with exact inner product `inner` (two-coordinate
    rotation inside a random plane)."""
    rng = np.random.default_rng(seed)
    x = random_unit_rows(n, d, seed + 1)
    v = orthogonal_rows(x, rng)
    y = inner * x + math.sqrt(max(0.0, 1 - inner * inner)) * v
    return x, y


def test_c01_codec_bijectivity_exhaustive():
    t0 = time.time()
    checked = 0
    for d in range(1, 5):
        for s in range(1, 9):
            grid = grid_with_budget(d, s)
            if grid is None:
                continue  # no delta in (0,1] yields this budget
            assert grid.s == s
            seqs = [
                t
                for t in itertools.product(range(s + 1), repeat=d)
                if sum(t) <= s
            ]
            assert len(seqs) == math.comb(s + d, d)
            arr = np.array(seqs, dtype=np.int64)
            got_ranks = rank_compositions(arr, grid)
            ok = got_ranks == list(range(len(seqs)))
            back = unrank_compositions(list(range(len(seqs))), grid)
            ok = ok and np.array_equal(back, arr)
            # spot-check the single-item API surfaces too
            mid = len(seqs) // 2
            ok = ok and rank_composition(arr[mid], grid) == mid
            ok = ok and np.array_equal(unrank_composition(mid, grid), arr[mid])
            if not ok:
                report(1, "codec bijectivity", False, f"(d={d}, s={s})", t0)
            checked += len(seqs)
    report(1, "codec bijectivity", True,
           f"{checked} compositions enumerated, exact match", t0)


def test_c02_roundtrip_all_configs():
    t0 = time.time()
    n = 10_000
    total = 0
    for d in (2, 8, 128, 784):
        x = random_unit_rows(n, d, seed=100 + d)
        for delta in (Fraction(1, 10), Fraction(1, 20), Fraction(1, 100)):
            grid = GridParams(d, delta)
            z = quantize_rows(x, grid)
            codes = encode_rows(z, grid)
            want_len = code_length(d, delta)
            nbytes = code_bytes(grid)
            if any(c.bit_length != want_len or len(c.bits) != nbytes for c in codes):
                report(2, "round-trip", False, f"length mismatch at d={d}, {delta}", t0)
            back = decode_rows(codes, grid)
            if not np.array_equal(back, z):
                report(2, "round-trip", False, f"decode mismatch at d={d}, {delta}", t0)
            total += n
    report(2, "round-trip", True,
           f"{total} vectors decode exactly across 12 configurations", t0)


def _distortion_corpus():
    """10^5 random pairs plus adversarial near-duplicates, d=64, delta=1/10."""
    d, n = 64, 100_000
    grid = GridParams(d, Fraction(1, 10))
    delta = float(grid.delta)
    x = random_unit_rows(n, d, seed=201)
    y = random_unit_rows(n, d, seed=202)
    rng = np.random.default_rng(203)
    xs, ys = [x], [y]
    base = random_unit_rows(5000, d, seed=204)
    for dist in (0.0, 1e-6, delta / 2, delta):
        ang = 2 * math.asin(dist / 2)
        v = orthogonal_rows(base, rng)
        xs.append(base)
        ys.append(math.cos(ang) * base + math.sin(ang) * v)
    return grid, np.vstack(xs), np.vstack(ys)


def test_c03_distortion_bound():
    t0 = time.time()
    grid, x, y = _distortion_corpus()
    delta = float(grid.delta)
    fx = reconstruct_rows(quantize_rows(x, grid), grid)
    fy = reconstruct_rows(quantize_rows(y, grid), grid)
    true_d = np.sqrt(np.atleast_1d(seq_sum((x - y) ** 2)))
    quant_d = np.sqrt(np.atleast_1d(seq_sum((fx - fy) ** 2)))
    slack = 2.0**-30
    hi_viol = int((quant_d > true_d + delta + slack).sum())
    lo_viol = int((quant_d < true_d - delta - slack).sum())
    report(3, "distortion bound", hi_viol == 0 and lo_viol == 0,
           f"{len(x)} pairs, {hi_viol + lo_viol} violations", t0)


def test_c04_inner_product_error_bound():
    t0 = time.time()
    grid, x, y = _distortion_corpus()
    delta = float(grid.delta)
    fx = reconstruct_rows(quantize_rows(x, grid), grid)
    fy = reconstruct_rows(quantize_rows(y, grid), grid)
    est = np.atleast_1d(seq_dot(fx, fy))
    true = np.atleast_1d(seq_dot(x, y))
    dist = np.sqrt(np.atleast_1d(seq_sum((x - y) ** 2)))
    bound = dist * delta + delta * delta / 2 + 2.0**-30
    viol = int((np.abs(est - true) > bound).sum())

    plan = plan_estimate(0.1)
    pgrid = plan.grid(x.shape[1])
    px = reconstruct_rows(quantize_rows(x, pgrid), pgrid)
    py = reconstruct_rows(quantize_rows(y, pgrid), pgrid)
    perr = np.abs(np.atleast_1d(seq_dot(px, py)) - true)
    eps_viol = int((perr > 0.1).sum())
    report(4, "inner-product error bound", viol == 0 and eps_viol == 0,
           f"{len(x)} pairs, {viol} bound violations, "
           f"{eps_viol} epsilon violations (max err {perr.max():.4f})", t0)


def _witness_triples(n, d, alpha, beta, seed):
    gap = theta_gap(alpha, beta)
    hi_angle = math.acos(beta) + math.acos(alpha) - 0.01
    rng = np.random.default_rng(seed)
    x1 = random_unit_rows(n, d, seed + 1)
    v = orthogonal_rows(x1, rng)
    thetas = rng.uniform(gap.theta + 0.01, hi_angle, size=n)
    x2 = np.cos(thetas)[:, None] * x1 + np.sin(thetas)[:, None] * v
    ys = np.array([witness(x1[i], x2[i], beta=beta, alpha=alpha) for i in range(n)])
    return x1, x2, ys


def test_c05_distinguisher_zero_errors():
    t0 = time.time()
    n = 10_000
    failures = 0
    checked = 0
    for alpha, beta in ((0.8, 0.6), (0.95, 0.9), (0.5, 0.3)):
        spec = plan_distinguish(alpha, beta)
        for d in (8, 128):
            grid = spec.grid(d)
            x1, x2, ys = _witness_triples(n, d, alpha, beta, seed=300 + d)
            px, py = rotated_pairs(n // 2, d, alpha + 0.01, seed=310 + d)
            ex, ey = rotated_pairs(n // 2, d, beta - 0.01, seed=320 + d)

            def estimates(a, b):
                fa = reconstruct_rows(
                    decode_rows(encode_rows(quantize_rows(a, grid), grid), grid), grid
                )
                fb = reconstruct_rows(
                    decode_rows(encode_rows(quantize_rows(b, grid), grid), grid), grid
                )
                return np.atleast_1d(seq_dot(fa, fb)), fa, fb

            est_x1y, _, _ = estimates(x1, ys)   # true inner = beta
            est_x2y, _, _ = estimates(x2, ys)   # true inner >= alpha
            est_pass, _, _ = estimates(px, py)  # true inner = alpha + 0.01
            est_elim, _, _ = estimates(ex, ey)  # true inner = beta - 0.01
            failures += int((est_x1y >= spec.t).sum())
            failures += int((est_x2y < spec.t).sum())
            failures += int((est_pass < spec.t).sum())
            failures += int((est_elim >= spec.t).sum())
            checked += len(est_x1y) + len(est_x2y) + len(est_pass) + len(est_elim)

            # the public verdict API agrees with the batched estimates
            sub = np.arange(0, n, n // 50)
            cx = encode_rows(quantize_rows(x1[sub], grid), grid)
            cy = encode_rows(quantize_rows(ys[sub], grid), grid)
            for k, (a, b) in enumerate(zip(cx, cy)):
                v = distinguish(a, b, spec)
                want = (
                    Decision.PASSES_THRESHOLD
                    if est_x1y[sub[k]] >= spec.t
                    else Decision.ELIMINATED
                )
                if v.decision is not want or v.estimate != est_x1y[sub[k]]:
                    failures += 1
    report(5, "distinguisher zero false decisions", failures == 0,
           f"{checked} decisions, {failures} wrong", t0)


def test_c06_witness_algebra():
    t0 = time.time()
    n, d = 10_000, 16
    worst = 0.0
    for alpha, beta in ((0.8, 0.6), (0.95, 0.9), (0.5, 0.3)):
        x1, x2, ys = _witness_triples(n, d, alpha, beta, seed=400)
        norms = np.abs(np.sqrt(np.atleast_1d(seq_sum(ys * ys))) - 1.0)
        ip1 = np.abs(np.atleast_1d(seq_dot(x1, ys)) - beta)
        ip2 = alpha - np.atleast_1d(seq_dot(x2, ys))
        worst = max(worst, float(norms.max()), float(ip1.max()), float(ip2.max()))
    report(6, "witness algebra", worst <= 1e-9,
           f"30000 draws, worst deviation {worst:.2e}", t0)


def test_c07_space_formula():
    t0 = time.time()
    bad = 0
    for d in range(1, 1025):
        for j in range(0, 15):
            delta = Fraction(1, 2**j)
            if code_length(d, delta) > d * j + 4 * d:  # log2(1/delta) = j
                bad += 1
    ratio = code_length(128, Fraction(1, 10)) / (32 * 128)
    ok = bad == 0 and ratio <= 0.20
    report(7, "space formula", ok,
           f"sweep d=1..1024 x 15 deltas, {bad} envelope violations; "
           f"ratio(128, 1/10) = {ratio:.4f} <= 0.20", t0)


def test_c08_upper_lower_gap():
    t0 = time.time()
    worst = 0.0
    points = 0
    for gap_w in (0.01, 0.02, 0.05, 0.1, 0.2):
        for beta in np.arange(0.0, 0.95, 0.1):
            alpha = float(beta + gap_w)
            if alpha > 1.0:
                continue
            for d in (16, 64, 256):
                spec = plan_distinguish(alpha, float(beta))
                ell = code_length(d, spec.delta)
                lb = space_lb(alpha, float(beta), d)
                worst = max(worst, (ell - lb.bits) / d)
                points += 1
    report(8, "upper/lower gap", worst <= 8.0,
           f"{points} grid points, max gap {worst:.2f} bits/dim", t0)


DATASETS = {
    # dataset key: (filenames to try, format, reference max error by delta)
    "mnist": (
        ("train-images-idx3-ubyte", "train-images.idx3-ubyte", "mnist.idx"),
        "idx",
        {Fraction(1, 10): 0.0165, Fraction(1, 20): 0.0103, Fraction(1, 100): 0.0027},
    ),
    "sift": (
        ("sift_base.fvecs", "sift.fvecs"),
        "fvecs",
        {Fraction(1, 10): 0.0181, Fraction(1, 20): 0.0091, Fraction(1, 100): 0.0100},
    ),
    "dlib": (
        ("dlib_faces.fvecs", "dlib.fvecs"),
        "fvecs",
        {Fraction(1, 10): 0.0135, Fraction(1, 20): 0.0075, Fraction(1, 100): 0.0011},
    ),
}


def test_c09_dataset_reproduction():
    t0 = time.time()
    data_dir = os.environ.get("IPQZ_DATA_DIR", "data")
    found = []
    for key, (names, fmt, ref_max) in DATASETS.items():
        for name in names:
            path = os.path.join(data_dir, name)
            if os.path.exists(path):
                found.append((key, path, fmt, ref_max))
                break
    if not found:
        print("SKIP criterion 9 (dataset reproduction): no datasets under "
              f"{data_dir!r}; not a CI gate")
        pytest.skip("datasets not available")
    from ipqz import load, normalize, sample_pairs

    problems = []
    for key, path, fmt, ref_max in found:
        vs = normalize(load(path, fmt), source=path)
        pairs = sample_pairs(vs, 2000, seed=1)
        for delta, ref_val in ref_max.items():
            grid = GridParams(vs.d, delta)
            recon = reconstruct_rows(
                decode_rows(encode_rows(quantize_rows(vs.vectors, grid), grid), grid),
                grid,
            )
            est = np.atleast_1d(seq_dot(recon[pairs[:, 0]], recon[pairs[:, 1]]))
            true = np.atleast_1d(seq_dot(vs.vectors[pairs[:, 0]], vs.vectors[pairs[:, 1]]))
            mx = float(np.abs(est - true).max())
            if mx > worst_case_error(delta):
                problems.append(f"{key}@{delta}: max {mx} beyond worst case")
            if mx > 3 * ref_val:
                problems.append(f"{key}@{delta}: max {mx} > 3x reference {ref_val}")
    report(9, "dataset reproduction", not problems,
           f"{len(found)} datasets evaluated" + ("; " + "; ".join(problems) if problems else ""),
           t0)


def test_c10_greedy_oracle():
    t0 = time.time()
    ok = True
    details = []
    for k in (4, 5, 6, 12):
        theta = (2 * math.pi / k) * (1 - 1e-3)
        got = len(greedy_sphere_code(2, theta, 1 << 16).points)
        details.append(f"circle k={k}: {got}")
        ok = ok and got == k
    got4 = len(greedy_sphere_code(2, math.pi / 2 - 1e-6, 1 << 23).points)
    details.append(f"circle near-square: {got4}")
    ok = ok and got4 == 4
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BudgetTooSmall)
        for theta in (math.pi / 4, math.pi / 12):
            code = greedy_sphere_code(3, theta, 1 << 14)
            need = math.ceil(2 ** max(0.0, code_size_lb(theta, 3)))
            details.append(f"d=3 theta={theta:.3f}: {len(code.points)} >= {need}")
            ok = ok and len(code.points) >= need and code.theta > theta
    report(10, "greedy sphere-code oracle", ok, "; ".join(details), t0)
