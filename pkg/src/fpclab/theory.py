"""Closed-form finite-population predictions and regime classification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


def _as_count(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    return int(value)

REGIME_LABELS = ("classical", "finite_population", "near_enumeration")


@dataclass(frozen=True)
class RegimeThresholds:
    """Cutoffs for regime classification.

    ``classical_max_f``: largest fraction still treated as the classical
    regime. ``floor_margin``: a fraction is near-enumeration once the
    predicted sampling variance is within this factor of the measured
    numerical floor.
    """

    classical_max_f: float = 0.1
    floor_margin: float = 10.0

    def __post_init__(self):
        if not (0.0 < self.classical_max_f < 1.0):
            raise ParameterError("classical_max_f must be in (0, 1)")
        if not self.floor_margin > 1.0:
            raise ParameterError("floor_margin must be > 1")


def fpc_variance(var_srs: float, n: int, N: int) -> float:
    """Exact variance of the SRSWOR sample mean: (1 - n/N) * S^2 / n.

    S^2 is the population variance with divisor N-1; the factor (1 - n/N)
    vanishes exactly at full enumeration.
    """
    n, N = _as_count(n, "n"), _as_count(N, "N")
    if not 1 <= n <= N:
        raise ParameterError(f"need 1 <= n <= N, got n={n}, N={N}")
    if not var_srs >= 0.0:
        raise ParameterError("var_srs must be >= 0")
    return (1.0 - n / N) * var_srs / n


def srs_variance_infinite(var_srs: float, n: int) -> float:
    """Infinite-population approximation S^2 / n (no correction factor)."""
    n = _as_count(n, "n")
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not var_srs >= 0.0:
        raise ParameterError("var_srs must be >= 0")
    return var_srs / n


def classify_regime(
    f: float,
    fpc_var: float,
    numerical_floor: float,
    thresholds: RegimeThresholds = RegimeThresholds(),
) -> str:
    """Label a sampling fraction by which error source dominates.

    near_enumeration once the predicted sampling variance sinks to within
    ``floor_margin`` of the pathway's numerical floor (always at f = 1);
    classical below ``classical_max_f``; finite_population between.
    """
    f = float(f)
    if not (0.0 < f <= 1.0):
        raise ParameterError(f"f must be in (0, 1], got {f}")
    if not fpc_var >= 0.0:
        raise ParameterError("fpc_var must be >= 0")
    if not numerical_floor >= 0.0:
        raise ParameterError("numerical_floor must be >= 0")
    if f == 1.0 or fpc_var <= thresholds.floor_margin * numerical_floor:
        return "near_enumeration"
    if f <= thresholds.classical_max_f:
        return "classical"
    return "finite_population"
