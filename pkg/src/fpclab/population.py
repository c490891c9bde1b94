"""Finite populations with exactly enumerated ground truth.

A population here is an explicit, immutable sequence of binary64 values of a
fixed size N, together with its enumerated mean and variances. Those
enumerated parameters are the reference everything downstream is compared
against; nothing about them is ever inferred.

Supported kinds:

* ``discrete_uniform`` -- the integer support ``lo..hi`` cycled to fill N.
  Cycling (rather than seeded draws) makes the population's histogram as
  uniform as N allows and keeps the closed forms mean ``(lo+hi)/2`` and
  variance ``((hi-lo+1)^2 - 1)/12`` exact whenever N is a multiple of the
  support size. The seed is recorded but does not influence values for this
  kind.
* ``normal`` -- seeded Normal(mu, sigma) draws.
* ``student_t`` -- seeded Student-t(df) draws, shifted/scaled; heavy-tailed
  stress case (finite variance for df > 2).
* ``synthetic_empirical`` -- a seeded normal mixture, optionally clamped,
  realized once and then treated as the fixed population.
* ``ill_conditioned`` -- ``offset + Normal(0, noise_sigma)``: a large common
  offset that maximizes accumulation/cancellation error in the reduction
  experiments.
"""

from __future__ import annotations

import json
import math
import struct
import zlib
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import _kernels
from .errors import (
    CorruptPopulationError,
    ParameterError,
    PopulationFormatError,
)

KINDS = (
    "discrete_uniform",
    "normal",
    "student_t",
    "synthetic_empirical",
    "ill_conditioned",
)
_KIND_TAGS = {kind: tag for tag, kind in enumerate(KINDS)}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}

_MAX_U64 = 2**64 - 1


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


def _finite(x: Any, name: str) -> float:
    x = float(x)
    _require(math.isfinite(x), f"{name} must be finite")
    return x


def _validate_params(kind: str, params: Mapping[str, Any]) -> dict:
    """Normalize and validate kind-specific parameters; returns a plain dict."""
    p = dict(params)
    if kind == "discrete_uniform":
        _require(set(p) == {"lo", "hi"}, "discrete_uniform needs params lo, hi")
        lo, hi = int(p["lo"]), int(p["hi"])
        _require(lo <= hi, "discrete_uniform requires lo <= hi")
        return {"lo": lo, "hi": hi}
    if kind == "normal":
        _require(set(p) == {"mu", "sigma"}, "normal needs params mu, sigma")
        mu = _finite(p["mu"], "mu")
        sigma = _finite(p["sigma"], "sigma")
        _require(sigma >= 0.0, "normal requires sigma >= 0")
        return {"mu": mu, "sigma": sigma}
    if kind == "student_t":
        _require(
            set(p) == {"df", "location", "scale"},
            "student_t needs params df, location, scale",
        )
        df = _finite(p["df"], "df")
        _require(df > 0.0, "student_t requires df > 0")
        location = _finite(p["location"], "location")
        scale = _finite(p["scale"], "scale")
        _require(scale >= 0.0, "student_t requires scale >= 0")
        return {"df": df, "location": location, "scale": scale}
    if kind == "synthetic_empirical":
        _require(
            set(p) == {"weights", "mus", "sigmas", "clamp_lo", "clamp_hi"},
            "synthetic_empirical needs params weights, mus, sigmas, clamp_lo, clamp_hi",
        )
        weights = [_finite(w, "weight") for w in p["weights"]]
        mus = [_finite(m, "mu") for m in p["mus"]]
        sigmas = [_finite(s, "sigma") for s in p["sigmas"]]
        _require(len(weights) >= 1, "mixture needs at least one component")
        _require(
            len(weights) == len(mus) == len(sigmas),
            "mixture weights, mus, sigmas must have equal length",
        )
        _require(all(w > 0 for w in weights), "mixture weights must be > 0")
        _require(
            abs(sum(weights) - 1.0) <= 1e-9, "mixture weights must sum to 1"
        )
        _require(all(s >= 0 for s in sigmas), "mixture sigmas must be >= 0")
        clamp_lo = _finite(p["clamp_lo"], "clamp_lo")
        clamp_hi = _finite(p["clamp_hi"], "clamp_hi")
        _require(clamp_lo <= clamp_hi, "clamp_lo must be <= clamp_hi")
        return {
            "weights": weights,
            "mus": mus,
            "sigmas": sigmas,
            "clamp_lo": clamp_lo,
            "clamp_hi": clamp_hi,
        }
    if kind == "ill_conditioned":
        _require(
            set(p) == {"offset", "noise_sigma"},
            "ill_conditioned needs params offset, noise_sigma",
        )
        offset = _finite(p["offset"], "offset")
        noise_sigma = _finite(p["noise_sigma"], "noise_sigma")
        _require(noise_sigma >= 0.0, "ill_conditioned requires noise_sigma >= 0")
        return {"offset": offset, "noise_sigma": noise_sigma}
    raise ParameterError(f"unknown population kind {kind!r}")


@dataclass(frozen=True)
class PopulationSpec:
    """Recipe for a finite population; identical specs yield identical values."""

    kind: str
    size_N: int
    params: Mapping[str, Any]
    seed: int = 0

    def __post_init__(self):
        _require(self.kind in KINDS, f"unknown population kind {self.kind!r}")
        _require(
            isinstance(self.size_N, (int, np.integer)) and self.size_N >= 1,
            "size_N must be a positive integer",
        )
        _require(
            isinstance(self.seed, (int, np.integer)) and 0 <= self.seed <= _MAX_U64,
            "seed must be an unsigned 64-bit integer",
        )
        object.__setattr__(self, "size_N", int(self.size_N))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "params", _validate_params(self.kind, self.params))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "size_N": self.size_N,
            "params": dict(self.params),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Truth:
    """Enumerated population parameters: mean, variance with divisor N, and
    variance with divisor N-1 (the one entering the without-replacement
    variance formula). ``var_srs`` is None for N = 1."""

    mean_mu: float
    var_pop: float
    var_srs: float | None
    size_N: int


@dataclass(frozen=True, eq=False)
class Population:
    values: np.ndarray
    spec: PopulationSpec
    truth: Truth
    checksum: int = field(init=False)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "checksum", values_checksum(values))

    @property
    def size_N(self) -> int:
        return self.values.shape[0]


def values_checksum(values: np.ndarray) -> int:
    """CRC-32 of the values as little-endian binary64 bytes (the population id)."""
    return zlib.crc32(np.ascontiguousarray(values, dtype="<f8").tobytes())


def enumerate_truth(values) -> Truth:
    """Enumerate mean and variances of a full value sequence.

    The mean and the sum of squared deviations are both computed with
    compensated accumulation in binary64, two passes. Constant sequences
    short-circuit so that var_pop is exactly 0 iff all values are equal.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise ParameterError("values must be a non-empty 1-d sequence")
    if not np.isfinite(arr).all():
        raise ParameterError("values must all be finite")
    n = arr.shape[0]
    vmin, vmax = float(arr.min()), float(arr.max())
    if vmin == vmax:
        return Truth(
            mean_mu=vmin,
            var_pop=0.0,
            var_srs=(0.0 if n >= 2 else None),
            size_N=n,
        )
    mean, ssd = _kernels.mean_and_ssd(arr)
    ssd = max(ssd, 0.0)
    var_pop = ssd / n
    var_srs = ssd / (n - 1) if n >= 2 else None
    return Truth(mean_mu=float(mean), var_pop=var_pop, var_srs=var_srs, size_N=n)


def _generate_values(spec: PopulationSpec) -> np.ndarray:
    n = spec.size_N
    p = spec.params
    seed = np.uint64(spec.seed)
    if spec.kind == "discrete_uniform":
        m = p["hi"] - p["lo"] + 1
        return (np.arange(n, dtype=np.int64) % m + p["lo"]).astype(np.float64)
    out = np.empty(n, dtype=np.float64)
    if spec.kind == "normal":
        _kernels.fill_normal(seed, p["mu"], p["sigma"], out)
    elif spec.kind == "student_t":
        _kernels.fill_student_t(seed, p["df"], p["location"], p["scale"], out)
    elif spec.kind == "synthetic_empirical":
        cum = np.cumsum(np.asarray(p["weights"], dtype=np.float64))
        cum[-1] = 1.0
        _kernels.fill_mixture(
            seed,
            cum,
            np.asarray(p["mus"], dtype=np.float64),
            np.asarray(p["sigmas"], dtype=np.float64),
            p["clamp_lo"],
            p["clamp_hi"],
            out,
        )
    elif spec.kind == "ill_conditioned":
        _kernels.fill_normal(seed, p["offset"], p["noise_sigma"], out)
    else:  # pragma: no cover - spec validation makes this unreachable
        raise ParameterError(f"unknown population kind {spec.kind!r}")
    return out


def generate_population(spec: PopulationSpec) -> Population:
    """Realize a population from its spec; the realized values are the fixed
    finite population from then on, and the stored truth is their enumeration."""
    values = _generate_values(spec)
    return Population(values=values, spec=spec, truth=enumerate_truth(values))


# ------------------------------------------------------------------- presets

_POP_A_SEED = 101
_POP_B_SEED = 202
_ILL_SEED = 303


def pop_a_spec(size_N: int = 100_000, seed: int = _POP_A_SEED) -> PopulationSpec:
    """Discrete uniform over {42..58}: mean 50, variance ~24."""
    return PopulationSpec(
        kind="discrete_uniform", size_N=size_N, params={"lo": 42, "hi": 58}, seed=seed
    )


def pop_b_spec(size_N: int = 100_000, seed: int = _POP_B_SEED) -> PopulationSpec:
    """A clamped two-component normal mixture standing in for messy empirical data."""
    return PopulationSpec(
        kind="synthetic_empirical",
        size_N=size_N,
        params={
            "weights": [0.9, 0.1],
            "mus": [50.0, 49.8],
            "sigmas": [5.0, 3.0],
            "clamp_lo": 0.0,
            "clamp_hi": 100.0,
        },
        seed=seed,
    )


def ill_conditioned_spec(
    size_N: int = 100_000,
    seed: int = _ILL_SEED,
    offset: float = 1e6,
    noise_sigma: float = 1.0,
) -> PopulationSpec:
    """Unit-scale noise riding on a large common offset; the accumulation
    stress case."""
    return PopulationSpec(
        kind="ill_conditioned",
        size_N=size_N,
        params={"offset": offset, "noise_sigma": noise_sigma},
        seed=seed,
    )


PRESETS = {
    "pop_a": pop_a_spec,
    "pop_b": pop_b_spec,
    "ill_conditioned": ill_conditioned_spec,
}


def spec_from_dict(d: Mapping[str, Any]) -> PopulationSpec:
    """Build a PopulationSpec from a JSON-shaped mapping.

    Accepts either ``{"preset": name, "size_N"?: int, "seed"?: int}`` or a
    full spec ``{"kind", "size_N", "params", "seed"?}``. Unknown keys are an
    error.
    """
    d = dict(d)
    if "preset" in d:
        name = d.pop("preset")
        if name not in PRESETS:
            raise ParameterError(
                f"unknown preset {name!r}; available: {sorted(PRESETS)}"
            )
        kwargs = {}
        if "size_N" in d:
            kwargs["size_N"] = int(d.pop("size_N"))
        if "seed" in d:
            kwargs["seed"] = int(d.pop("seed"))
        if d:
            raise ParameterError(f"unknown population keys {sorted(d)}")
        return PRESETS[name](**kwargs)
    unknown = set(d) - {"kind", "size_N", "params", "seed"}
    if unknown:
        raise ParameterError(f"unknown population keys {sorted(unknown)}")
    if "kind" not in d or "size_N" not in d:
        raise ParameterError("population spec needs 'kind' and 'size_N'")
    return PopulationSpec(
        kind=d["kind"],
        size_N=int(d["size_N"]),
        params=d.get("params", {}),
        seed=int(d.get("seed", 0)),
    )


# --------------------------------------------------------------- file format
#
# Layout (all little-endian):
#   header : magic "FPOP" | version u16 | N u64 | kind tag u8 | seed u64
#            | CRC-32 of payload u32
#   payload: N binary64 values
#   footer : mean, var_pop, var_srs as binary64 (var_srs = NaN when N = 1)
#   trailer: params JSON, length-prefixed (u32) with its own CRC-32 (u32),
#            so a load restores the complete spec bit-exactly

_MAGIC = b"FPOP"
_VERSION = 1
_HEADER = struct.Struct("<4sHQBQI")
_FOOTER = struct.Struct("<ddd")
_U32 = struct.Struct("<I")


def save_population(population: Population, path) -> None:
    payload = population.values.astype("<f8", copy=False).tobytes()
    truth = population.truth
    var_srs = truth.var_srs if truth.var_srs is not None else math.nan
    params_json = json.dumps(population.spec.params, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                _MAGIC,
                _VERSION,
                population.size_N,
                _KIND_TAGS[population.spec.kind],
                population.spec.seed,
                zlib.crc32(payload),
            )
        )
        fh.write(payload)
        fh.write(_FOOTER.pack(truth.mean_mu, truth.var_pop, var_srs))
        fh.write(_U32.pack(len(params_json)))
        fh.write(params_json)
        fh.write(_U32.pack(zlib.crc32(params_json)))


def _read_exact(fh, nbytes: int, what: str) -> bytes:
    data = fh.read(nbytes)
    if len(data) != nbytes:
        raise CorruptPopulationError(f"truncated population file while reading {what}")
    return data


def load_population(path) -> Population:
    with open(path, "rb") as fh:
        header = _read_exact(fh, _HEADER.size, "header")
        magic, version, n, kind_tag, seed, payload_crc = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise PopulationFormatError("not a population file (bad magic bytes)")
        if version != _VERSION:
            raise PopulationFormatError(f"unsupported format version {version}")
        if kind_tag not in _TAG_KINDS:
            raise PopulationFormatError(f"unknown population kind tag {kind_tag}")
        payload = _read_exact(fh, 8 * n, "payload")
        if zlib.crc32(payload) != payload_crc:
            raise CorruptPopulationError("payload checksum mismatch")
        mean_mu, var_pop, var_srs = _FOOTER.unpack(_read_exact(fh, _FOOTER.size, "footer"))
        (params_len,) = _U32.unpack(_read_exact(fh, _U32.size, "params length"))
        params_json = _read_exact(fh, params_len, "params")
        (params_crc,) = _U32.unpack(_read_exact(fh, _U32.size, "params checksum"))
        if zlib.crc32(params_json) != params_crc:
            raise CorruptPopulationError("params checksum mismatch")
    values = np.frombuffer(payload, dtype="<f8")
    spec = PopulationSpec(
        kind=_TAG_KINDS[kind_tag],
        size_N=int(n),
        params=json.loads(params_json.decode("utf-8")),
        seed=int(seed),
    )
    truth = Truth(
        mean_mu=mean_mu,
        var_pop=var_pop,
        var_srs=(None if math.isnan(var_srs) else var_srs),
        size_N=int(n),
    )
    return Population(values=values, spec=spec, truth=truth)
