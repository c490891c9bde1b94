"""Closed-form predictions against brute-force enumeration, plus regime labels."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpclab import (
    ParameterError,
    RegimeThresholds,
    classify_regime,
    enumerate_truth,
    fpc_variance,
    srs_variance_infinite,
)


def _exhaustive_mean_variance(values, n):
    """Oracle: variance of the subset mean over all C(N, n) subsets."""
    N = len(values)
    mu = math.fsum(values) / N
    means = [math.fsum(c) / n for c in itertools.combinations(values, n)]
    return math.fsum((m - mu) ** 2 for m in means) / len(means)


def test_fpc_zero_at_full_enumeration():
    assert fpc_variance(25.0, 10, 10) == 0.0


def test_fpc_four_point_example():
    values = [1.0, 2.0, 3.0, 4.0]
    s2 = enumerate_truth(values).var_srs
    assert math.isclose(s2, 5.0 / 3.0, rel_tol=1e-15)
    predicted = fpc_variance(s2, 2, 4)
    assert math.isclose(predicted, 5.0 / 12.0, rel_tol=1e-15)
    assert math.isclose(predicted, _exhaustive_mean_variance(values, 2), rel_tol=1e-12)


def test_fpc_n1_equals_population_variance():
    values = [3.0, 1.0, 4.0, 1.5, 9.0]
    truth = enumerate_truth(values)
    assert math.isclose(
        fpc_variance(truth.var_srs, 1, 5), truth.var_pop, rel_tol=1e-14
    )


def test_fpc_parameter_errors():
    with pytest.raises(ParameterError):
        fpc_variance(1.0, 0, 5)
    with pytest.raises(ParameterError):
        fpc_variance(1.0, 6, 5)
    with pytest.raises(ParameterError):
        fpc_variance(-1.0, 2, 5)


def test_fpc_matches_exhaustive_enumeration_all_small_cases():
    # the exact SRSWOR identity on every population of size <= 8
    value_sets = [
        [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        [0.5, -1.25, 3.75, 2.0, 10.0, -4.5, 0.0, 1.0],
        [2.0, 2.0, 7.0, 1.0, 9.0, 9.0, 4.0, 5.5],
    ]
    for base in value_sets:
        for N in range(2, 9):
            values = base[:N]
            s2 = enumerate_truth(values).var_srs
            for n in range(1, N + 1):
                exact = _exhaustive_mean_variance(values, n)
                predicted = fpc_variance(s2, n, N)
                if predicted == 0.0:
                    assert exact <= 1e-24
                else:
                    assert abs(exact - predicted) <= 1e-12 * predicted


def test_counts_accept_numpy_integers():
    assert fpc_variance(1.0, np.int64(2), np.int64(4)) == fpc_variance(1.0, 2, 4)
    assert srs_variance_infinite(1.0, np.int64(4)) == 0.25
    with pytest.raises(ParameterError):
        fpc_variance(1.0, 2.0, 4)  # real-valued n is not a count


def test_fpc_strictly_decreasing_in_n():
    prev = math.inf
    for n in range(1, 21):
        v = fpc_variance(4.0, n, 20)
        assert v < prev
        prev = v
    assert prev == 0.0


def test_srs_variance_infinite():
    assert srs_variance_infinite(25.0, 100_000) == 2.5e-4
    assert srs_variance_infinite(0.0, 10) == 0.0
    with pytest.raises(ParameterError):
        srs_variance_infinite(25.0, 0)


@given(
    n=st.integers(min_value=1, max_value=99),
    var=st.floats(min_value=1e-6, max_value=1e6),
)
@settings(deadline=None, max_examples=50)
def test_fpc_ratio_identity(n, var):
    N = 100
    ratio = fpc_variance(var, n, N) / srs_variance_infinite(var, n)
    assert math.isclose(ratio, 1.0 - n / N, rel_tol=1e-12)


# ------------------------------------------------------------------- regimes


def test_classify_examples():
    t = RegimeThresholds()
    assert classify_regime(1.0, 0.0, 0.0, t) == "near_enumeration"
    assert classify_regime(0.01, 1.0, 1e-20, t) == "classical"
    assert classify_regime(0.5, 1.0, 1e-20, t) == "finite_population"
    # predicted variance within the floor margin -> near enumeration
    assert classify_regime(0.5, 1e-15, 1e-16, t) == "near_enumeration"


def test_classify_domain_errors():
    t = RegimeThresholds()
    with pytest.raises(ParameterError):
        classify_regime(0.0, 1.0, 0.0, t)
    with pytest.raises(ParameterError):
        classify_regime(1.1, 1.0, 0.0, t)
    with pytest.raises(ParameterError):
        classify_regime(0.5, -1.0, 0.0, t)


def test_threshold_validation():
    with pytest.raises(ParameterError):
        RegimeThresholds(classical_max_f=0.0)
    with pytest.raises(ParameterError):
        RegimeThresholds(classical_max_f=1.0)
    with pytest.raises(ParameterError):
        RegimeThresholds(floor_margin=1.0)


@given(
    floor=st.floats(min_value=0, max_value=1e-3),
    s2=st.floats(min_value=1e-8, max_value=1e3),
)
@settings(deadline=None, max_examples=50)
def test_regime_path_is_monotone(floor, s2):
    # walking f upward on a fixed population and floor never moves the label
    # backwards through classical -> finite_population -> near_enumeration
    t = RegimeThresholds()
    order = {"classical": 0, "finite_population": 1, "near_enumeration": 2}
    N = 1000
    ranks = []
    for n in range(1, N + 1, 37):
        f = n / N
        ranks.append(order[classify_regime(f, fpc_variance(s2, n, N), floor, t)])
    ranks.append(order[classify_regime(1.0, 0.0, floor, t)])
    assert all(b >= a for a, b in zip(ranks, ranks[1:]))
    assert ranks[-1] == 2
