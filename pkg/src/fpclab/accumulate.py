"""Sums and means under explicit accumulation strategy and precision control.

Numerical error is an experimental factor here, so every strategy pins an
exact operation order:

* ``naive_serial``     -- left-to-right adds.
* ``compensated``      -- Kahan compensated left-to-right.
* ``pairwise_tree``    -- recursive halving, runs of <= 8 summed serially.
* ``randomized_order`` -- naive_serial over a seeded permutation of the input.
* ``blocked_parallel`` -- naive block sums of a fixed block size, combined
  serially or by the same recursive-halving tree (a desk-scale stand-in for a
  device reduction; the result depends only on data order, block size and
  combine mode, never on physical parallelism).

``fp32`` mode casts the input to binary32 and performs every intermediate
operation (each add, each compensation step, the final divide) in binary32,
with no FMA and no extended intermediates. ``fp64`` is binary64 throughout.

Error measurements are taken against a reference mean: the exact rational
mean correctly rounded to binary64 when the input is integer-valued,
otherwise a second-order compensated binary64 sum (error far below one ulp at
this project's scales) followed by a single divide.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import ParameterError
from .rng import derive_seed

PRECISIONS = ("fp64", "fp32")
VARIANTS = (
    "naive_serial",
    "compensated",
    "pairwise_tree",
    "randomized_order",
    "blocked_parallel",
)
COMBINES = ("serial", "tree")

_MAX_U64 = 2**64 - 1


@dataclass(frozen=True)
class AccumulationStrategy:
    """One accumulation variant plus its variant-specific parameters.

    ``order_seed`` only matters for randomized_order; ``block_size`` and
    ``combine`` only for blocked_parallel. ``token()`` gives the canonical
    config/CLI spelling, e.g. ``"blocked_parallel:256:tree"``.
    """

    variant: str
    order_seed: int = 0
    block_size: int = 256
    combine: str = "tree"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown accumulation variant {self.variant!r}")
        if not (0 <= self.order_seed <= _MAX_U64):
            raise ParameterError("order_seed must be an unsigned 64-bit integer")
        if self.block_size < 1:
            raise ParameterError("block_size must be >= 1")
        if self.combine not in COMBINES:
            raise ParameterError(f"combine must be one of {COMBINES}")

    @classmethod
    def naive_serial(cls) -> "AccumulationStrategy":
        return cls("naive_serial")

    @classmethod
    def compensated(cls) -> "AccumulationStrategy":
        return cls("compensated")

    @classmethod
    def pairwise_tree(cls) -> "AccumulationStrategy":
        return cls("pairwise_tree")

    @classmethod
    def randomized_order(cls, order_seed: int = 0) -> "AccumulationStrategy":
        return cls("randomized_order", order_seed=order_seed)

    @classmethod
    def blocked_parallel(
        cls, block_size: int = 256, combine: str = "tree"
    ) -> "AccumulationStrategy":
        return cls("blocked_parallel", block_size=block_size, combine=combine)

    def token(self) -> str:
        if self.variant == "randomized_order":
            return f"randomized_order:{self.order_seed}"
        if self.variant == "blocked_parallel":
            return f"blocked_parallel:{self.block_size}:{self.combine}"
        return self.variant

    @classmethod
    def parse(cls, token: str) -> "AccumulationStrategy":
        def as_int(text: str) -> int:
            try:
                return int(text)
            except ValueError:
                raise ParameterError(f"bad integer {text!r} in strategy token {token!r}") from None

        parts = token.split(":")
        name = parts[0]
        if name in ("naive_serial", "compensated", "pairwise_tree"):
            if len(parts) != 1:
                raise ParameterError(f"strategy {name} takes no parameters: {token!r}")
            return cls(name)
        if name == "randomized_order":
            if len(parts) == 1:
                return cls.randomized_order()
            if len(parts) == 2:
                return cls.randomized_order(as_int(parts[1]))
            raise ParameterError(f"bad randomized_order token {token!r}")
        if name == "blocked_parallel":
            if len(parts) == 1:
                return cls.blocked_parallel()
            if len(parts) == 3:
                return cls.blocked_parallel(as_int(parts[1]), parts[2])
            raise ParameterError(
                f"blocked_parallel token must be 'blocked_parallel:<block_size>:<combine>': {token!r}"
            )
        raise ParameterError(f"unknown accumulation strategy token {token!r}")


def _check_precision(precision: str) -> str:
    if precision not in PRECISIONS:
        raise ParameterError(f"precision must be one of {PRECISIONS}, got {precision!r}")
    return precision


def _prepare(values, precision: str) -> np.ndarray:
    _check_precision(precision)
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ParameterError("values must be a non-empty 1-d sequence")
    if precision == "fp32":
        return arr.astype(np.float32)
    return arr


def _dispatch_sum(arr: np.ndarray, strategy: AccumulationStrategy) -> float:
    v = strategy.variant
    if v == "naive_serial":
        return _kernels.sum_naive(arr)
    if v == "compensated":
        return _kernels.sum_kahan(arr)
    if v == "pairwise_tree":
        return _kernels.sum_pairwise(arr, 0, arr.shape[0])
    if v == "randomized_order":
        perm = _kernels.fy_partial(
            arr.shape[0], arr.shape[0], np.uint64(strategy.order_seed)
        )
        return _kernels.sum_naive(arr[perm])
    if v == "blocked_parallel":
        return _kernels.sum_blocked(
            arr, strategy.block_size, strategy.combine == "tree"
        )
    raise ParameterError(f"unknown accumulation variant {v!r}")  # pragma: no cover


def reduce_sum(values, strategy: AccumulationStrategy, precision: str = "fp64") -> float:
    """Sum under the given strategy and precision.

    The returned Python float carries the binary32 result exactly when
    precision is fp32 (every binary32 value is representable in binary64).
    """
    return float(_dispatch_sum(_prepare(values, precision), strategy))


def reduce_mean(values, strategy: AccumulationStrategy, precision: str = "fp64") -> float:
    """reduce_sum divided by the length, the divide performed in the same
    precision mode."""
    arr = _prepare(values, precision)
    s = _dispatch_sum(arr, strategy)
    n = arr.shape[0]
    if arr.dtype == np.float32:
        return float(np.float32(s) / np.float32(n))
    return float(s) / n


def oracle_mean(values) -> float:
    """Reference mean: exact rational for integer-valued input, else the
    second-order compensated binary64 pathway; rounded once to binary64."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ParameterError("values must be a non-empty 1-d sequence")
    if not np.isfinite(arr).all():
        raise ParameterError("values must all be finite")
    n = arr.shape[0]
    if np.array_equal(arr, np.floor(arr)):
        total = sum(int(v) for v in arr.tolist())
        return float(Fraction(total, n))
    return float(_kernels.sum_kbn2(arr)) / n


def sample_variance(values) -> float:
    """Variance with divisor len-1, compensated binary64 two-pass.

    Returns exactly 0.0 for a constant sequence (permutation-invariant exact
    arithmetic must never manufacture spread from bookkeeping roundoff).
    """
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 2:
        raise ParameterError("variance needs at least two values")
    if float(arr.min()) == float(arr.max()):
        return 0.0
    _, ssd = _kernels.mean_and_ssd(arr)
    return max(ssd, 0.0) / (arr.shape[0] - 1)


@dataclass(frozen=True)
class SpreadResult:
    """Spread of one reduction pathway over shuffled accumulation orders."""

    observed_var: float
    max_abs_dev: float
    reference: float


def spread_of_reductions(
    values,
    strategy: AccumulationStrategy,
    precision: str,
    K: int,
    seed: int,
) -> SpreadResult:
    """reduce_mean over K independently seeded permutations of the same data.

    Emulates nondeterministic combine order on fixed data: the variance of
    the K results is the pathway's numerical floor, and max_abs_dev is the
    worst deviation from the reference mean.
    """
    if K < 2:
        raise ParameterError("K must be >= 2")
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ParameterError("values must be a non-empty 1-d sequence")
    _check_precision(precision)
    ref = oracle_mean(arr)
    n = arr.shape[0]
    results = np.empty(K, dtype=np.float64)
    for k in range(K):
        perm = _kernels.fy_partial(n, n, np.uint64(derive_seed(seed, k)))
        results[k] = reduce_mean(arr[perm], strategy, precision)
    return SpreadResult(
        observed_var=sample_variance(results),
        max_abs_dev=float(np.max(np.abs(results - ref))),
        reference=ref,
    )
