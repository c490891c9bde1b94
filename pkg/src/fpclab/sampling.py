"""Simple random sampling without replacement at a controlled sampling fraction.

Draws are produced by a partial Fisher-Yates pass over an explicit index
array: n seeded swap steps over [0, N), keeping the first n entries. That is
exactly uniform over size-n subsets, costs O(n) swaps and O(N) memory, and
the same algorithm serves every fraction up to and including f = 1 (where the
draw is a full permutation).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import ParameterError, ProvenanceError
from .population import Population

_MAX_U64 = 2**64 - 1


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not (0 <= seed <= _MAX_U64):
        raise ParameterError("seed must be an unsigned 64-bit integer")
    return int(seed)


@dataclass(frozen=True, eq=False)
class SampleDraw:
    """A without-replacement index subset with its provenance."""

    indices: np.ndarray
    n: int
    f: float
    seed: int
    population_id: int

    def __post_init__(self):
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        indices.flags.writeable = False
        object.__setattr__(self, "indices", indices)


def srswor_indices(N: int, n: int, seed: int) -> np.ndarray:
    """n distinct indices from [0, N), every size-n subset equally likely."""
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ParameterError("N must be a positive integer")
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= N:
        raise ParameterError(f"need 1 <= n <= N, got n={n}, N={N}")
    return _kernels.fy_partial(int(N), int(n), np.uint64(_check_seed(seed)))


def sample_size(f: float, N: int) -> int:
    """n = floor(f * N), the product taken exactly over the binary64 value of f.

    Computing the floor on the exact rational avoids the off-by-one wobble a
    rounded binary64 product can introduce right at integer boundaries.
    """
    return math.floor(Fraction(f) * N)


def draw_sample(population: Population, f: float, seed: int) -> SampleDraw:
    """One SRSWOR draw of size floor(f*N) from a fixed population."""
    f = float(f)
    if not (0.0 < f <= 1.0):
        raise ParameterError(f"sampling fraction must be in (0, 1], got {f}")
    N = population.size_N
    n = sample_size(f, N)
    if n < 1:
        raise ParameterError(
            f"sampling fraction {f} yields an empty sample at N={N}"
        )
    indices = srswor_indices(N, n, seed)
    return SampleDraw(
        indices=indices, n=n, f=f, seed=seed, population_id=population.checksum
    )


def gather_values(population: Population, draw: SampleDraw) -> np.ndarray:
    """Values at the drawn indices, in draw order."""
    if draw.population_id != population.checksum:
        raise ProvenanceError(
            "sample draw does not belong to this population "
            f"(draw id {draw.population_id:#010x}, population id {population.checksum:#010x})"
        )
    return population.values[draw.indices]


def dump_draws(path, draws: Iterable[SampleDraw]) -> None:
    """Write a draw log as CSV: replicate, seed, n, f (indices are reproducible
    from the seeds and are not persisted)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replicate", "seed", "n", "f"])
        for r, draw in enumerate(draws):
            writer.writerow([r, draw.seed, draw.n, repr(draw.f)])
