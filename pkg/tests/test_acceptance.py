"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Expensive populations and the R=2000 sweep are shared module-scoped
fixtures so the whole gate stays within its runtime budgets.
"""

import filecmp
import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats

from fpclab import (
    AccumulationStrategy,
    RegimeThresholds,
    classify_regime,
    config_from_dict,
    estimate_numerical_floor,
    fpc_variance,
    generate_population,
    ill_conditioned_spec,
    pop_a_spec,
    reduce_sum,
    render_csv,
    render_json,
    run_all,
    run_numerical_study,
    run_phase2,
    run_randomization,
    srswor_indices,
)
from fpclab.experiments import sweep_distributions
from fpclab.rng import derive_seed
from fpclab.sampling import sample_size

NAIVE = AccumulationStrategy.naive_serial()
KAHAN = AccumulationStrategy.compensated()

SWEEP_R = 2000
SWEEP_FS = (0.01, 0.1, 0.5, 0.9, 0.99)


def _verdict(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {num:02d} ({name}): {status}  {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def pop_a_1e5():
    return generate_population(pop_a_spec(size_N=100_000))


@pytest.fixture(scope="module")
def pop_a_1e6():
    return generate_population(pop_a_spec(size_N=1_000_000))


@pytest.fixture(scope="module")
def ill_1e5():
    return generate_population(ill_conditioned_spec(size_N=100_000))


@pytest.fixture(scope="module")
def sweep_1e5(pop_a_1e5):
    start = time.perf_counter()
    dists = sweep_distributions(
        pop_a_1e5, f_grid=SWEEP_FS, R=SWEEP_R, base_seed=20_24, workers=2
    )
    return dists, time.perf_counter() - start


def test_criterion_01_exact_srswor_variance_identity():
    start = time.perf_counter()
    value_sets = [
        [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
        [0.5, -1.25, 3.75, 2.0, 10.0, -4.5, 0.125],
        [12.0, 12.0, 86.0, 3.0, 54.0, 9.0, 27.0],
    ]
    worst = 0.0
    for base in value_sets:
        for N in range(2, 8):
            values = base[:N]
            mu = math.fsum(values) / N
            s2 = math.fsum((v - mu) ** 2 for v in values) / (N - 1)
            for n in range(1, N + 1):
                means = [math.fsum(c) / n for c in itertools.combinations(values, n)]
                exact = math.fsum((m - mu) ** 2 for m in means) / len(means)
                predicted = fpc_variance(s2, n, N)
                if predicted == 0.0:
                    assert exact <= 1e-24
                else:
                    worst = max(worst, abs(exact - predicted) / predicted)
    elapsed = time.perf_counter() - start
    _verdict(
        1,
        "exact SRSWOR variance identity, N <= 7",
        worst <= 1e-12 and elapsed < 1.0,
        f"worst rel err {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_02_variance_table_desk_scale(pop_a_1e5, sweep_1e5):
    dists, elapsed = sweep_1e5
    truth = pop_a_1e5.truth
    ratios = {}
    for dist in dists:
        predicted = fpc_variance(truth.var_srs, dist.n, pop_a_1e5.size_N)
        ratios[dist.f] = dist.empirical_var / predicted
    ok = all(0.85 <= r <= 1.15 for r in ratios.values()) and elapsed < 60.0
    detail = (
        "ratios "
        + ", ".join(f"f={f}: {r:.3f}" for f, r in ratios.items())
        + f"; sweep took {elapsed:.1f}s (budget 60s)"
    )
    _verdict(2, "variance-by-fraction agreement at N=1e5, R=2000", ok, detail)


def test_criterion_03_full_enumeration_collapse(pop_a_1e5):
    start = time.perf_counter()
    total = sum(int(v) for v in pop_a_1e5.values.tolist())
    assert abs(total) < 2**53
    result = run_phase2(pop_a_1e5, 1.0, seed=42, strategy=KAHAN, precision="fp64")
    elapsed = time.perf_counter() - start
    _verdict(
        3,
        "f=1 compensated fp64 mean equals mu exactly",
        result.deviation_from_mu == 0.0 and elapsed < 1.0,
        f"deviation {result.deviation_from_mu!r}, {elapsed:.2f}s",
    )


def test_criterion_04_compensated_floor_bound(pop_a_1e6):
    start = time.perf_counter()
    floor = estimate_numerical_floor(pop_a_1e6, KAHAN, "fp64", K=100, seed=7)
    elapsed = time.perf_counter() - start
    _verdict(
        4,
        "fp64 compensated observed_var < 1e-15 at N=1e6, K=100",
        floor < 1e-15 and elapsed < 30.0,
        f"observed_var {floor:.3e}, {elapsed:.1f}s (budget 30s)",
    )


def test_criterion_05_pathway_error_ordering(ill_1e5):
    start = time.perf_counter()
    rows = run_numerical_study(
        ill_1e5,
        configs=((NAIVE, "fp32"), (NAIVE, "fp64"), (KAHAN, "fp64")),
        K=100,
        base_seed=13,
    )
    elapsed = time.perf_counter() - start
    var_fp32_naive = rows[0].observed_var
    var_fp64_naive = rows[1].observed_var
    var_fp64_comp = max(rows[2].observed_var, 1e-30)
    ok = (
        var_fp32_naive > 1e3 * var_fp64_naive
        and var_fp64_naive > 1e3 * var_fp64_comp
        and elapsed < 30.0
    )
    _verdict(
        5,
        "pathway ordering fp32 naive >> fp64 naive >> fp64 compensated",
        ok,
        f"vars {var_fp32_naive:.3e} / {var_fp64_naive:.3e} / {var_fp64_comp:.3e}, "
        f"{elapsed:.1f}s (budget 30s)",
    )


def test_criterion_06_inclusion_uniformity():
    start = time.perf_counter()
    N, draws = 6, 50_000
    ok = True
    details = []
    for n in range(1, N + 1):
        counts = np.zeros(N)
        subset_counts = {}
        for r in range(draws):
            idx = srswor_indices(N, n, derive_seed(600 + n, r))
            counts[idx] += 1
            key = frozenset(idx.tolist())
            subset_counts[key] = subset_counts.get(key, 0) + 1
        p = n / N
        se = math.sqrt(p * (1 - p) / draws)
        freq_err = np.max(np.abs(counts / draws - p))
        if se > 0 and freq_err > 3 * se:
            ok = False
            details.append(f"n={n} inclusion err {freq_err:.4f} > 3SE {3 * se:.4f}")
        if se == 0 and freq_err != 0:
            ok = False
        expected_cells = math.comb(N, n)
        if expected_cells > 1:
            observed = [subset_counts.get(frozenset(c), 0)
                        for c in itertools.combinations(range(N), n)]
            pvalue = stats.chisquare(observed).pvalue
            if pvalue <= 0.001:
                ok = False
                details.append(f"n={n} subset chi-square p={pvalue:.2e}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    _verdict(
        6,
        "inclusion frequencies and subset uniformity at N=6",
        ok,
        ("; ".join(details) if details else "all n within bounds")
        + f", {elapsed:.1f}s (budget 10s)",
    )


def test_criterion_07_unbiasedness(pop_a_1e5, sweep_1e5):
    dists, _ = sweep_1e5
    mu = pop_a_1e5.truth.mean_mu
    errors = []
    ok = True
    for dist in dists:
        predicted = fpc_variance(pop_a_1e5.truth.var_srs, dist.n, pop_a_1e5.size_N)
        bound = 4.0 * math.sqrt(predicted / dist.R)
        err = abs(dist.mean_of_means - mu)
        errors.append(f"f={dist.f}: {err:.2e} <= {bound:.2e}")
        if err > bound:
            ok = False
    _verdict(7, "mean of replicate means within 4 SE of mu", ok, "; ".join(errors))


def test_criterion_08_kahan_forcing_case():
    values = [2.0**24, 1.0, 1.0]
    naive = reduce_sum(values, NAIVE, "fp32")
    comp = reduce_sum(values, KAHAN, "fp32")
    _verdict(
        8,
        "fp32 naive 16777216.0 vs fp32 compensated 16777218.0, exactly",
        naive == 16777216.0 and comp == 16777218.0,
        f"naive {naive!r}, compensated {comp!r}",
    )


def test_criterion_09_determinism_and_scheduling(tmp_path):
    config_dict = {
        "population": {"preset": "pop_a", "size_N": 2000, "seed": 5},
        "f_grid": [0.01, 0.5, 0.9, 0.99, 1.0],
        "R": 100,
        "K": 10,
        "strategies": [["compensated", "fp64"], ["naive_serial", "fp32"]],
        "base_seed": 77,
    }
    report_a = run_all(config_from_dict(config_dict), workers=1)
    report_b = run_all(config_from_dict(config_dict), workers=2)
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    for report, out in ((report_a, dir_a), (report_b, dir_b)):
        render_csv(report, out)
        render_json(report, out)
    names = ["table1.csv", "table2.csv", "table3.csv",
             "table1.json", "table2.json", "table3.json", "report.json"]
    identical = all(filecmp.cmp(dir_a / n, dir_b / n, shallow=False) for n in names)

    pop = generate_population(pop_a_spec(size_N=2000, seed=5))
    serial = run_randomization(pop, 0.5, R=64, base_seed=9, workers=1)
    threaded = run_randomization(pop, 0.5, R=64, base_seed=9, workers=4)
    replicates_match = np.array_equal(serial.means, threaded.means)
    _verdict(
        9,
        "byte-identical artifacts; bit-identical replicates across workers",
        identical and replicates_match,
        f"artifacts identical: {identical}, replicate means identical: {replicates_match}",
    )


def test_criterion_10_regime_classification(pop_a_1e5, ill_1e5):
    thresholds = RegimeThresholds()
    grid = (0.01, 0.5, 0.9, 0.99, 1.0)
    order = {"classical": 0, "finite_population": 1, "near_enumeration": 2}
    ok = True
    details = []
    # every pathway must walk forward only and end at near_enumeration; the
    # default (compensated fp64) pathway must traverse all three regimes
    pathways = (
        (pop_a_1e5, KAHAN, "fp64", True),
        (pop_a_1e5, NAIVE, "fp32", False),
        (ill_1e5, NAIVE, "fp32", False),
        (ill_1e5, KAHAN, "fp64", True),
    )
    for population, strategy, precision, expect_all_three in pathways:
        floor = estimate_numerical_floor(population, strategy, precision, K=50, seed=3)
        labels = []
        for f in grid:
            n = sample_size(f, population.size_N)
            predicted = fpc_variance(population.truth.var_srs, n, population.size_N)
            labels.append(classify_regime(f, predicted, floor, thresholds))
        ranks = [order[l] for l in labels]
        monotone = all(b >= a for a, b in zip(ranks, ranks[1:]))
        ends_near = labels[-1] == "near_enumeration"
        path_ok = monotone and ends_near
        if expect_all_three:
            path_ok = path_ok and [order[l] for l in sorted(set(labels), key=order.get)] == [0, 1, 2]
        ok = ok and path_ok
        details.append(
            f"{population.spec.kind}/{strategy.token()}/{precision}: {labels}"
        )
    _verdict(10, "monotone regime path, f=1 near_enumeration", ok, " | ".join(details))
