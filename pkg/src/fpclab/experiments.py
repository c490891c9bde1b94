"""Experiment orchestration: single draws, randomization distributions, the
variance-vs-fraction sweep, and the fixed-data numerical study.

Replicate r of any repeated experiment is a pure function of
(population, f, r, base_seed): its draw seed is the r-th splitmix64 output of
the base seed. Replicates can therefore run on any number of worker threads
and still produce bit-identical per-replicate results; the heavy kernels
release the GIL.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels, theory
from .accumulate import (
    AccumulationStrategy,
    reduce_mean,
    sample_variance,
    spread_of_reductions,
)
from .errors import ParameterError
from .population import Population
from .rng import derive_seed
from .sampling import draw_sample, gather_values, sample_size

DEFAULT_F_GRID = (0.01, 0.5, 0.9, 0.99, 1.0)
DEFAULT_R = 2000
DEFAULT_K = 100

# Sampling-variability experiments always measure through the cleanest
# pathway so numerical error cannot contaminate Phase 3.
SWEEP_STRATEGY = AccumulationStrategy.compensated()
SWEEP_PRECISION = "fp64"

DEFAULT_NUMERICAL_CONFIGS = (
    (AccumulationStrategy.compensated(), "fp64"),
    (AccumulationStrategy.naive_serial(), "fp64"),
    (AccumulationStrategy.naive_serial(), "fp32"),
)


@dataclass(frozen=True)
class Phase2Result:
    n: int
    sample_mean: float
    deviation_from_mu: float


@dataclass(frozen=True, eq=False)
class RandomizationDistribution:
    """R replicate sample means at a fixed sampling fraction."""

    f: float
    n: int
    R: int
    means: np.ndarray
    empirical_var: float
    mean_of_means: float
    strategy: AccumulationStrategy
    precision: str
    base_seed: int

    def __post_init__(self):
        means = np.ascontiguousarray(self.means, dtype=np.float64)
        means.flags.writeable = False
        object.__setattr__(self, "means", means)


@dataclass(frozen=True)
class VarianceRow:
    """One line of the variance-by-fraction table; ratio is None at f = 1."""

    f: float
    n: int
    empirical_var: float
    fpc_var: float
    ratio: float | None


@dataclass(frozen=True)
class NumericalRow:
    """One line of the numerical study: a pathway's spread at full enumeration."""

    precision: str
    strategy: str
    f: float
    observed_var: float
    max_abs_dev: float
    expected_var: float = 0.0


def run_phase2(
    population: Population,
    f: float,
    seed: int,
    strategy: AccumulationStrategy = SWEEP_STRATEGY,
    precision: str = SWEEP_PRECISION,
) -> Phase2Result:
    """One draw, one mean, and its signed deviation from the enumerated mean."""
    draw = draw_sample(population, f, seed)
    mean = reduce_mean(gather_values(population, draw), strategy, precision)
    return Phase2Result(
        n=draw.n,
        sample_mean=mean,
        deviation_from_mu=mean - population.truth.mean_mu,
    )


def _replicate_means(
    population: Population,
    f: float,
    R: int,
    strategy: AccumulationStrategy,
    precision: str,
    base_seed: int,
    workers: int,
) -> np.ndarray:
    means = np.empty(R, dtype=np.float64)

    def one(r: int) -> None:
        draw = draw_sample(population, f, derive_seed(base_seed, r))
        means[r] = reduce_mean(gather_values(population, draw), strategy, precision)

    # replicate 0 runs inline first so kernel compilation happens once,
    # outside the pool
    one(0)
    if workers <= 1 or R == 1:
        for r in range(1, R):
            one(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(1, R)))
    return means


def run_randomization(
    population: Population,
    f: float,
    R: int,
    strategy: AccumulationStrategy = SWEEP_STRATEGY,
    precision: str = SWEEP_PRECISION,
    base_seed: int = 1,
    workers: int = 1,
) -> RandomizationDistribution:
    """R independently seeded draws at fixed f and the empirical variance of
    their means. Replicate results do not depend on scheduling."""
    if R < 2:
        raise ParameterError("R must be >= 2")
    means = _replicate_means(population, f, R, strategy, precision, base_seed, workers)
    return RandomizationDistribution(
        f=float(f),
        n=sample_size(f, population.size_N),
        R=R,
        means=means,
        empirical_var=sample_variance(means),
        mean_of_means=float(_kernels.sum_kahan(means)) / R,
        strategy=strategy,
        precision=precision,
        base_seed=base_seed,
    )


def variance_row(population: Population, dist: RandomizationDistribution) -> VarianceRow:
    """Pair an observed randomization distribution with its predicted variance."""
    if population.truth.var_srs is None:
        raise ParameterError("variance sweep needs a population of size >= 2")
    fpc = theory.fpc_variance(population.truth.var_srs, dist.n, population.size_N)
    return VarianceRow(
        f=dist.f,
        n=dist.n,
        empirical_var=dist.empirical_var,
        fpc_var=fpc,
        ratio=(dist.empirical_var / fpc) if fpc > 0.0 else None,
    )


def sweep_distributions(
    population: Population,
    f_grid: Sequence[float] = DEFAULT_F_GRID,
    R: int = DEFAULT_R,
    strategy: AccumulationStrategy = SWEEP_STRATEGY,
    precision: str = SWEEP_PRECISION,
    base_seed: int = 1,
    workers: int = 1,
) -> list[RandomizationDistribution]:
    """run_randomization at every f in the grid, each f on its own sub-stream."""
    if len(f_grid) == 0:
        raise ParameterError("f_grid must be non-empty")
    for f in f_grid:
        if not (0.0 < float(f) <= 1.0):
            raise ParameterError(f"every f must be in (0, 1], got {f}")
    return [
        run_randomization(
            population, f, R, strategy, precision, derive_seed(base_seed, i), workers
        )
        for i, f in enumerate(f_grid)
    ]


def run_variance_sweep(
    population: Population,
    f_grid: Sequence[float] = DEFAULT_F_GRID,
    R: int = DEFAULT_R,
    strategy: AccumulationStrategy = SWEEP_STRATEGY,
    precision: str = SWEEP_PRECISION,
    base_seed: int = 1,
    workers: int = 1,
) -> list[VarianceRow]:
    """One VarianceRow per f: empirical variance next to the exact prediction."""
    dists = sweep_distributions(
        population, f_grid, R, strategy, precision, base_seed, workers
    )
    return [variance_row(population, d) for d in dists]


def run_numerical_study(
    population: Population,
    configs: Sequence[tuple[AccumulationStrategy, str]] = DEFAULT_NUMERICAL_CONFIGS,
    K: int = DEFAULT_K,
    base_seed: int = 1,
) -> list[NumericalRow]:
    """Hold the f = 1 draw fixed and measure each pathway's spread over K
    shuffled accumulation orders."""
    if K < 2:
        raise ParameterError("K must be >= 2")
    if len(configs) == 0:
        raise ParameterError("configs must be non-empty")
    draw = draw_sample(population, 1.0, derive_seed(base_seed, 0))
    values = gather_values(population, draw)
    rows = []
    for i, (strategy, precision) in enumerate(configs):
        spread = spread_of_reductions(
            values, strategy, precision, K, derive_seed(base_seed, i + 1)
        )
        rows.append(
            NumericalRow(
                precision=precision,
                strategy=strategy.token(),
                f=1.0,
                observed_var=spread.observed_var,
                max_abs_dev=spread.max_abs_dev,
            )
        )
    return rows


def estimate_numerical_floor(
    population: Population,
    strategy: AccumulationStrategy,
    precision: str,
    K: int = DEFAULT_K,
    seed: int = 1,
) -> float:
    """The pathway's observed variance over shuffled full-enumeration
    reductions -- the smallest 'variance' that pathway can exhibit."""
    if K < 2:
        raise ParameterError("K must be >= 2")
    draw = draw_sample(population, 1.0, derive_seed(seed, 0))
    values = gather_values(population, draw)
    return spread_of_reductions(
        values, strategy, precision, K, derive_seed(seed, 1)
    ).observed_var
