"""Compiled kernels: PRNG streams, value generators, partial Fisher-Yates,
and the accumulation loops.

Everything here is a deliberate scalar loop. The accumulation strategies are
defined by their exact operation order, so the usual vectorized reductions
(which reassociate freely) cannot be used; numba keeps IEEE semantics per
operation (no fastmath, no FMA contraction) while running at native speed.
All kernels release the GIL so replicate loops can be thread-parallel.

The PRNG is splitmix64 (seeding / sub-seed derivation) feeding xoshiro256**
(all variate generation and shuffling), implemented bit-identically to the
pure-Python reference in ``rng.py``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

U64 = np.uint64

_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 2.0**-53


@njit(cache=True, nogil=True)
def _sm64_mix(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def sm64_at(seed, index):
    # index-th output (0-based) of the splitmix64 stream; O(1) random access
    return _sm64_mix(seed + (index + U64(1)) * _GAMMA)


@njit(cache=True, nogil=True)
def _xo_init(seed):
    s = np.empty(4, dtype=np.uint64)
    state = seed
    for i in range(4):
        state = state + _GAMMA
        s[i] = _sm64_mix(state)
    return s


@njit(cache=True, nogil=True)
def _rotl(x, k):
    return (x << k) | (x >> (U64(64) - k))


@njit(cache=True, nogil=True)
def _xo_next(s):
    result = _rotl(s[1] * U64(5), U64(7)) * U64(9)
    t = s[1] << U64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], U64(45))
    return result


@njit(cache=True, nogil=True)
def _xo_double(s):
    # 53 high bits -> uniform double in [0, 1)
    return (_xo_next(s) >> U64(11)) * _INV53


@njit(cache=True, nogil=True)
def _xo_randbelow(s, bound):
    # threshold rejection removes modulo bias; bound must be > 0
    threshold = (U64(0) - bound) % bound
    while True:
        r = _xo_next(s)
        if r >= threshold:
            return r % bound


@njit(cache=True, nogil=True)
def xoshiro_u64_stream(seed, count):
    s = _xo_init(seed)
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = _xo_next(s)
    return out


# ---------------------------------------------------------------- generators


@njit(cache=True, nogil=True)
def fill_uniform(seed, out):
    s = _xo_init(seed)
    for i in range(out.shape[0]):
        out[i] = _xo_double(s)


@njit(cache=True, nogil=True)
def fill_normal(seed, mu, sigma, out):
    # Marsaglia polar method, pairs consumed in order; no spare carried
    # across calls, so output is a pure function of (seed, len)
    s = _xo_init(seed)
    n = out.shape[0]
    i = 0
    while i < n:
        u = 2.0 * _xo_double(s) - 1.0
        v = 2.0 * _xo_double(s) - 1.0
        w = u * u + v * v
        if w >= 1.0 or w == 0.0:
            continue
        m = math.sqrt(-2.0 * math.log(w) / w)
        out[i] = mu + sigma * (u * m)
        i += 1
        if i < n:
            out[i] = mu + sigma * (v * m)
            i += 1


@njit(cache=True, nogil=True)
def fill_student_t(seed, df, loc, scale, out):
    # Bailey's polar method: valid for any df > 0, one variate per accepted pair
    s = _xo_init(seed)
    for i in range(out.shape[0]):
        while True:
            u = 2.0 * _xo_double(s) - 1.0
            v = 2.0 * _xo_double(s) - 1.0
            w = u * u + v * v
            if 0.0 < w < 1.0:
                break
        out[i] = loc + scale * (u * math.sqrt(df * (w ** (-2.0 / df) - 1.0) / w))


@njit(cache=True, nogil=True)
def fill_mixture(seed, cum_weights, mus, sigmas, clamp_lo, clamp_hi, out):
    s = _xo_init(seed)
    for i in range(out.shape[0]):
        u = _xo_double(s)
        k = 0
        while k < cum_weights.shape[0] - 1 and u >= cum_weights[k]:
            k += 1
        while True:
            a = 2.0 * _xo_double(s) - 1.0
            b = 2.0 * _xo_double(s) - 1.0
            w = a * a + b * b
            if 0.0 < w < 1.0:
                break
        x = mus[k] + sigmas[k] * (a * math.sqrt(-2.0 * math.log(w) / w))
        if x < clamp_lo:
            x = clamp_lo
        elif x > clamp_hi:
            x = clamp_hi
        out[i] = x


# ------------------------------------------------------------------ sampling


@njit(cache=True, nogil=True)
def fy_partial(N, n, seed):
    # partial Fisher-Yates: first n entries of a seeded uniform permutation
    # of [0, N); O(n) swap steps, exactly uniform over size-n subsets
    idx = np.arange(N)
    s = _xo_init(seed)
    for i in range(n):
        j = i + np.int64(_xo_randbelow(s, U64(N - i)))
        tmp = idx[i]
        idx[i] = idx[j]
        idx[j] = tmp
    return idx[:n].copy()


# ---------------------------------------------------------------- reductions
#
# The typed zero `a[0] - a[0]` pins every intermediate to the array dtype:
# float32 input means every add below rounds to binary32, float64 stays
# binary64 throughout. Callers guarantee non-empty input.


@njit(cache=True, nogil=True)
def sum_naive(a):
    s = a[0] - a[0]
    for i in range(a.shape[0]):
        s = s + a[i]
    return s


@njit(cache=True, nogil=True)
def sum_kahan(a):
    s = a[0] - a[0]
    c = a[0] - a[0]
    for i in range(a.shape[0]):
        y = a[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


@njit(nogil=True)
def sum_pairwise(a, lo, hi):
    # recursive halving; runs of <= 8 summed serially
    n = hi - lo
    if n <= 8:
        s = a[lo] - a[lo]
        for i in range(lo, hi):
            s = s + a[i]
        return s
    half = n // 2
    return sum_pairwise(a, lo, lo + half) + sum_pairwise(a, lo + half, hi)


@njit(nogil=True)
def sum_blocked(a, block_size, tree_combine):
    # fixed blocking emulating a device reduction: naive sum per block, then
    # block sums combined serially or by the recursive-halving tree
    n = a.shape[0]
    nb = (n + block_size - 1) // block_size
    sums = np.empty(nb, dtype=a.dtype)
    for b in range(nb):
        lo = b * block_size
        hi = min(lo + block_size, n)
        s = a[0] - a[0]
        for i in range(lo, hi):
            s = s + a[i]
        sums[b] = s
    if tree_combine:
        return sum_pairwise(sums, 0, nb)
    s = sums[0] - sums[0]
    for b in range(nb):
        s = s + sums[b]
    return s


@njit(cache=True, nogil=True)
def sum_kbn2(a):
    # second-order Kahan-Babuska cascade (Klein); binary64 only.
    # Error is far below one ulp of the sum for this project's sizes and
    # magnitudes, which is what qualifies it as the reference pathway.
    s = 0.0
    cs = 0.0
    ccs = 0.0
    for i in range(a.shape[0]):
        x = a[i]
        t = s + x
        if abs(s) >= abs(x):
            c = (s - t) + x
        else:
            c = (x - t) + s
        s = t
        t2 = cs + c
        if abs(cs) >= abs(c):
            cc = (cs - t2) + c
        else:
            cc = (c - t2) + cs
        cs = t2
        ccs = ccs + cc
    return s + cs + ccs


@njit(cache=True, nogil=True)
def mean_and_ssd(a):
    # two-pass: compensated mean, then compensated sum of squared deviations
    n = a.shape[0]
    mean = sum_kahan(a) / n
    s = 0.0
    c = 0.0
    for i in range(n):
        d = a[i] - mean
        y = d * d - c
        t = s + y
        c = (t - s) - y
        s = t
    return mean, s


def warm_up():
    """Force compilation of every kernel (call before spawning worker threads)."""
    a64 = np.array([1.0, 2.0, 3.0], dtype=np.float64)
    a32 = a64.astype(np.float32)
    for arr in (a64, a32):
        sum_naive(arr)
        sum_kahan(arr)
        sum_pairwise(arr, 0, arr.shape[0])
        sum_blocked(arr, 2, True)
        sum_blocked(arr, 2, False)
    sum_kbn2(a64)
    mean_and_ssd(a64)
    fy_partial(5, 3, U64(1))
    out = np.empty(3, dtype=np.float64)
    fill_uniform(U64(1), out)
    fill_normal(U64(1), 0.0, 1.0, out)
    fill_student_t(U64(1), 3.0, 0.0, 1.0, out)
    fill_mixture(
        U64(1),
        np.array([1.0]),
        np.array([0.0]),
        np.array([1.0]),
        -1e9,
        1e9,
        out,
    )
    sm64_at(U64(1), U64(0))
    xoshiro_u64_stream(U64(1), 2)
