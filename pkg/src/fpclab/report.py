"""Full-run orchestration and report emission (CSV, JSON, SVG).

A run executes the four phases in order -- population construction, single
draws, the randomization sweep, the fixed-data numerical study -- and
assembles a Report. Rendering is deterministic: identical configs produce
byte-identical CSV and JSON artifacts (reals are written as their shortest
round-trip decimals), and the SVGs differ only in a timestamp comment.
Wall-clock times therefore live on the in-memory Report and in that SVG
comment, never in the CSV/JSON output.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import ParameterError, PhaseError
from .experiments import (
    SWEEP_PRECISION,
    SWEEP_STRATEGY,
    NumericalRow,
    VarianceRow,
    estimate_numerical_floor,
    run_numerical_study,
    run_phase2,
    sweep_distributions,
    variance_row,
)
from .population import Population, generate_population, load_population
from .rng import derive_seed
from .theory import classify_regime

# fixed sub-stream indices of base_seed, one per consumer
_STREAM_PHASE2 = 2
_STREAM_SWEEP = 3
_STREAM_NUMERICAL = 4
_STREAM_FLOOR = 5


@dataclass
class Report:
    """Everything a run produced, ready to render."""

    table1: list[dict]
    table2: list[VarianceRow]
    table3: list[NumericalRow]
    regimes: list[dict]
    deviations: list[dict]
    numerical_floor: float
    distributions: list[dict]
    metadata: dict
    started_at: float = field(default=0.0, repr=False)
    finished_at: float = field(default=0.0, repr=False)


def _resolve_population(config: ExperimentConfig) -> tuple[Population, str]:
    if isinstance(config.population, str):
        population = load_population(config.population)
        label = Path(config.population).stem
    else:
        population = generate_population(config.population)
        label = config.population.kind
    return population, label


def _metadata(config: ExperimentConfig, population: Population) -> dict:
    return {
        "version": __version__,
        "config": config.to_dict(),
        "base_seed": config.base_seed,
        "population_checksum": population.checksum,
        "sweep_strategy": SWEEP_STRATEGY.token(),
        "sweep_precision": SWEEP_PRECISION,
    }


def _table1(population: Population, label: str) -> list[dict]:
    truth = population.truth
    return [
        {
            "population": label,
            "N": population.size_N,
            "mean": truth.mean_mu,
            "var_pop": truth.var_pop,
            "var_srs": truth.var_srs,
            "kind": population.spec.kind,
        }
    ]


def run_numerical_phase(config: ExperimentConfig) -> tuple[list[dict], list[NumericalRow]]:
    """Population construction plus the fixed-data study only; the seed
    stream matches run_all, so the rows agree with a full run's table3."""
    try:
        population, label = _resolve_population(config)
    except Exception as exc:
        raise PhaseError("phase1_population", exc) from exc
    try:
        rows = run_numerical_study(
            population, config.strategies, config.K, derive_seed(config.base_seed, _STREAM_NUMERICAL)
        )
    except Exception as exc:
        raise PhaseError("phase4_numerical", exc) from exc
    return _table1(population, label), rows


def run_all(config: ExperimentConfig, workers: int = 1) -> Report:
    """Execute all four phases and assemble the Report; pure in the config."""
    started = time.time()
    seed = config.base_seed

    try:
        population, label = _resolve_population(config)
        table1 = _table1(population, label)
    except Exception as exc:
        raise PhaseError("phase1_population", exc) from exc

    phase2_seed = derive_seed(seed, _STREAM_PHASE2)
    sweep_seed = derive_seed(seed, _STREAM_SWEEP)
    numerical_seed = derive_seed(seed, _STREAM_NUMERICAL)
    floor_seed = derive_seed(seed, _STREAM_FLOOR)
    # every emitted row is reproducible from these recorded sub-seeds alone
    seed_streams = {
        "phase2_per_f": {repr(float(f)): derive_seed(phase2_seed, i)
                         for i, f in enumerate(config.f_grid)},
        "sweep_per_f": {repr(float(f)): derive_seed(sweep_seed, i)
                        for i, f in enumerate(config.f_grid)},
        "numerical_draw": derive_seed(numerical_seed, 0),
        "numerical_per_config": {f"{i}:{s.token()}/{p}": derive_seed(numerical_seed, i + 1)
                                 for i, (s, p) in enumerate(config.strategies)},
        "floor": floor_seed,
    }

    try:
        deviations = []
        for i, f in enumerate(config.f_grid):
            result = run_phase2(population, f, derive_seed(phase2_seed, i))
            deviations.append(
                {"f": f, "n": result.n, "abs_deviation": abs(result.deviation_from_mu)}
            )
    except Exception as exc:
        raise PhaseError("phase2_single_draws", exc) from exc

    try:
        dists = sweep_distributions(
            population,
            config.f_grid,
            config.R,
            SWEEP_STRATEGY,
            SWEEP_PRECISION,
            sweep_seed,
            workers,
        )
        table2 = [variance_row(population, d) for d in dists]
        distributions = [
            {
                "f": d.f,
                "n": d.n,
                "R": d.R,
                "mean_of_means": d.mean_of_means,
                "means": d.means.tolist(),
            }
            for d in dists
        ]
    except Exception as exc:
        raise PhaseError("phase3_randomization", exc) from exc

    try:
        table3 = run_numerical_study(
            population, config.strategies, config.K, numerical_seed
        )
        floor = estimate_numerical_floor(
            population,
            SWEEP_STRATEGY,
            SWEEP_PRECISION,
            config.K,
            floor_seed,
        )
        regimes = [
            {
                "f": row.f,
                "label": classify_regime(row.f, row.fpc_var, floor, config.thresholds),
            }
            for row in table2
        ]
    except Exception as exc:
        raise PhaseError("phase4_numerical", exc) from exc

    metadata = _metadata(config, population)
    metadata["seed_streams"] = seed_streams
    return Report(
        table1=table1,
        table2=table2,
        table3=table3,
        regimes=regimes,
        deviations=deviations,
        numerical_floor=floor,
        distributions=distributions,
        metadata=metadata,
        started_at=started,
        finished_at=time.time(),
    )


# ----------------------------------------------------------------- rendering


def _fmt(value: Any) -> str:
    """Shortest round-trip decimal for reals; empty cell for None."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        raise ParameterError("boolean is not a table cell")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError("non-finite value reached a table cell")
    return repr(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _table1_rows(report: Report) -> list[list]:
    return [
        [r["population"], r["N"], r["mean"], r["var_pop"], r["var_srs"], r["kind"]]
        for r in report.table1
    ]


def _table2_rows(report: Report) -> list[list]:
    return [
        [r.f, r.n, r.empirical_var, r.fpc_var, r.ratio] for r in report.table2
    ]


_TABLE3_HEADER = ["precision", "strategy", "f", "observed_var", "max_abs_dev"]


def _table3_rows(report: Report) -> list[list]:
    return [
        [r.precision, r.strategy, r.f, r.observed_var, r.max_abs_dev]
        for r in report.table3
    ]


def render_numerical(table3: list[NumericalRow], output_dir) -> list[Path]:
    """Emit just table3.csv and its JSON mirror (the `numerical` CLI view)."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "table3.csv"
    _write_csv(
        csv_path,
        _TABLE3_HEADER,
        [[r.precision, r.strategy, r.f, r.observed_var, r.max_abs_dev] for r in table3],
    )
    json_path = out / "table3.json"
    payload = _check_finite(
        [
            {
                "precision": r.precision,
                "strategy": r.strategy,
                "f": r.f,
                "observed_var": r.observed_var,
                "max_abs_dev": r.max_abs_dev,
                "expected_var": r.expected_var,
            }
            for r in table3
        ]
    )
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return [csv_path, json_path]


def render_csv(report: Report, output_dir) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, header, rows in (
        (
            "table1.csv",
            ["population", "N", "mean", "var_pop", "var_srs", "kind"],
            _table1_rows(report),
        ),
        (
            "table2.csv",
            ["f", "n", "empirical_var", "fpc_var", "ratio"],
            _table2_rows(report),
        ),
        ("table3.csv", _TABLE3_HEADER, _table3_rows(report)),
    ):
        path = out / name
        _write_csv(path, header, rows)
        paths.append(path)
    return paths


def _check_finite(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ParameterError("non-finite value reached a JSON artifact")
    if isinstance(obj, dict):
        return {k: _check_finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_check_finite(v) for v in obj]
    return obj


def report_to_dict(report: Report) -> dict:
    return {
        "version": __version__,
        "metadata": report.metadata,
        "table1": report.table1,
        "table2": [
            {
                "f": r.f,
                "n": r.n,
                "empirical_var": r.empirical_var,
                "fpc_var": r.fpc_var,
                "ratio": r.ratio,
            }
            for r in report.table2
        ],
        "table3": [
            {
                "precision": r.precision,
                "strategy": r.strategy,
                "f": r.f,
                "observed_var": r.observed_var,
                "max_abs_dev": r.max_abs_dev,
                "expected_var": r.expected_var,
            }
            for r in report.table3
        ],
        "regimes": report.regimes,
        "deviations": report.deviations,
        "numerical_floor": report.numerical_floor,
        "distributions": report.distributions,
    }


def report_from_dict(data: dict) -> Report:
    table2 = [
        VarianceRow(
            f=r["f"],
            n=r["n"],
            empirical_var=r["empirical_var"],
            fpc_var=r["fpc_var"],
            ratio=r["ratio"],
        )
        for r in data["table2"]
    ]
    table3 = [
        NumericalRow(
            precision=r["precision"],
            strategy=r["strategy"],
            f=r["f"],
            observed_var=r["observed_var"],
            max_abs_dev=r["max_abs_dev"],
            expected_var=r.get("expected_var", 0.0),
        )
        for r in data["table3"]
    ]
    return Report(
        table1=data["table1"],
        table2=table2,
        table3=table3,
        regimes=data["regimes"],
        deviations=data["deviations"],
        numerical_floor=data["numerical_floor"],
        distributions=data["distributions"],
        metadata=data["metadata"],
    )


def render_json(report: Report, output_dir) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    full = _check_finite(report_to_dict(report))
    artifacts = {
        "table1.json": full["table1"],
        "table2.json": full["table2"],
        "table3.json": full["table3"],
        "report.json": full,
    }
    paths = []
    for name, payload in artifacts.items():
        path = out / name
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
        paths.append(path)
    return paths


def load_report(path) -> Report:
    with open(path, "r", encoding="utf-8") as fh:
        return report_from_dict(json.load(fh))


# ------------------------------------------------------------------ checking


def check_report(report: Report, config: ExperimentConfig) -> list[str]:
    """CI-gate assertions over a finished run; returns violation messages.

    Bands: empirical/predicted variance ratio within [0.85, 1.15] for f < 1
    (the sweep's R is expected to be ~2000 for this tolerance); at f = 1 the
    empirical variance must sit at the pathway floor; the mean of replicate
    means must be within 4 standard errors of the enumerated mean; regime
    labels must walk forward only.
    """
    problems = []
    truth_mean = report.table1[0]["mean"]
    dist_by_f = {d["f"]: d for d in report.distributions}
    for row in report.table2:
        if row.f < 1.0:
            if row.ratio is None or not (0.85 <= row.ratio <= 1.15):
                problems.append(
                    f"f={row.f}: empirical/fpc ratio {row.ratio} outside [0.85, 1.15]"
                )
            dist = dist_by_f.get(row.f)
            if dist is not None:
                bound = 4.0 * math.sqrt(row.fpc_var / dist["R"])
                err = abs(dist["mean_of_means"] - truth_mean)
                if err > bound:
                    problems.append(
                        f"f={row.f}: |mean_of_means - mu| = {err:.3e} exceeds 4*SE = {bound:.3e}"
                    )
        else:
            cap = max(
                config.thresholds.floor_margin * report.numerical_floor, 1e-24
            )
            if row.empirical_var > cap:
                problems.append(
                    f"f=1: empirical_var {row.empirical_var:.3e} above the numerical floor cap {cap:.3e}"
                )
    order = {"classical": 0, "finite_population": 1, "near_enumeration": 2}
    ranks = [order[r["label"]] for r in report.regimes]
    if any(b < a for a, b in zip(ranks, ranks[1:])):
        problems.append(f"regime labels move backwards: {[r['label'] for r in report.regimes]}")
    for r in report.regimes:
        if r["f"] == 1.0 and r["label"] != "near_enumeration":
            problems.append("f=1 not labeled near_enumeration")
    return problems


# -------------------------------------------------------------------- plots
#
# SVG is emitted by hand (lines, rects, text) so the artifacts stay
# dependency-free and byte-stable apart from the generation-time comment.

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 36, 48
_PLOT_FLOOR = 1e-30  # display clamp for log axes; data files keep true zeros


def _svg_header(title: str) -> list[str]:
    stamp = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f"<!-- generated: {stamp} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="22" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]


def _x_to_px(f: float) -> float:
    return _ML + f * (_W - _ML - _MR)


def _log_mapper(values: list[float]):
    clamped = [max(v, _PLOT_FLOOR) for v in values]
    lo = math.floor(math.log10(min(clamped)))
    hi = math.ceil(math.log10(max(clamped)))
    if hi == lo:
        hi = lo + 1

    def to_px(v: float) -> float:
        lv = math.log10(max(v, _PLOT_FLOOR))
        frac = (lv - lo) / (hi - lo)
        return (_H - _MB) - frac * (_H - _MB - _MT)

    return to_px, lo, hi


def _axes(parts: list[str], xlabel: str, ylabel: str, ylo: int, yhi: int, to_px) -> None:
    parts.append(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>'
    )
    for f in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = _x_to_px(f)
        parts.append(
            f'<line x1="{x}" y1="{_H - _MB}" x2="{x}" y2="{_H - _MB + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x}" y="{_H - _MB + 18}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{f}</text>'
        )
    step = max(1, (yhi - ylo) // 6)
    for p in range(ylo, yhi + 1, step):
        y = to_px(10.0**p)
        parts.append(f'<line x1="{_ML - 5}" y1="{y}" x2="{_ML}" y2="{y}" stroke="black"/>')
        parts.append(
            f'<text x="{_ML - 8}" y="{y + 4}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">1e{p}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 10}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">{ylabel}</text>'
    )


def _series(parts: list[str], points: list[tuple[float, float]], color: str) -> None:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    if len(points) > 1:
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    for x, y in points:
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')


def _variance_svg(report: Report) -> str:
    fs = [row.f for row in report.table2]
    emp = [row.empirical_var for row in report.table2]
    fpc = [row.fpc_var for row in report.table2]
    to_px, ylo, yhi = _log_mapper(emp + fpc)
    parts = _svg_header("Variance of the sample mean vs sampling fraction")
    _axes(parts, "sampling fraction f", "variance (log)", ylo, yhi, to_px)
    _series(parts, [(_x_to_px(f), to_px(v)) for f, v in zip(fs, emp)], "#c0392b")
    _series(parts, [(_x_to_px(f), to_px(v)) for f, v in zip(fs, fpc)], "#2c3e50")
    parts.append(
        f'<text x="{_W - _MR - 10}" y="{_MT + 14}" text-anchor="end" font-size="11" '
        f'font-family="sans-serif" fill="#c0392b">empirical</text>'
    )
    parts.append(
        f'<text x="{_W - _MR - 10}" y="{_MT + 28}" text-anchor="end" font-size="11" '
        f'font-family="sans-serif" fill="#2c3e50">predicted (1-f)S²/n</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _deviation_svg(report: Report) -> str:
    fs = [d["f"] for d in report.deviations]
    devs = [d["abs_deviation"] for d in report.deviations]
    # the floor is a variance; the plot shows |deviation|, so draw its sqrt
    floor_dev = math.sqrt(max(report.numerical_floor, 0.0))
    to_px, ylo, yhi = _log_mapper(devs + [floor_dev])
    parts = _svg_header("Single-draw |mean deviation| vs sampling fraction")
    _axes(parts, "sampling fraction f", "|deviation| (log)", ylo, yhi, to_px)
    _series(parts, [(_x_to_px(f), to_px(v)) for f, v in zip(fs, devs)], "#c0392b")
    y = to_px(floor_dev)
    parts.append(
        f'<line x1="{_ML}" y1="{y:.2f}" x2="{_W - _MR}" y2="{y:.2f}" '
        f'stroke="#7f8c8d" stroke-dasharray="6,4"/>'
    )
    parts.append(
        f'<text x="{_W - _MR - 10}" y="{y - 6:.2f}" text-anchor="end" font-size="11" '
        f'font-family="sans-serif" fill="#7f8c8d">numerical floor</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _histogram_svg(dist: dict) -> str:
    means = dist["means"]
    f = dist["f"]
    lo, hi = min(means), max(means)
    nbins = 30
    if lo == hi:
        counts = [len(means)]
        edges = [lo - 0.5, lo + 0.5]
        nbins = 1
    else:
        width = (hi - lo) / nbins
        counts = [0] * nbins
        for m in means:
            b = min(int((m - lo) / width), nbins - 1)
            counts[b] += 1
        edges = [lo + i * width for i in range(nbins + 1)]
    peak = max(counts)
    parts = _svg_header(f"Randomization distribution of the sample mean, f={f}")
    span = edges[-1] - edges[0]
    for i, c in enumerate(counts):
        x0 = _ML + (edges[i] - edges[0]) / span * (_W - _ML - _MR)
        x1 = _ML + (edges[i + 1] - edges[0]) / span * (_W - _ML - _MR)
        h = 0.0 if peak == 0 else c / peak * (_H - _MT - _MB)
        parts.append(
            f'<rect x="{x0:.2f}" y="{_H - _MB - h:.2f}" width="{max(x1 - x0, 0.5):.2f}" '
            f'height="{h:.2f}" fill="#2980b9" stroke="white" stroke-width="0.5"/>'
        )
    parts.append(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>'
    )
    for frac, label in ((0.0, edges[0]), (0.5, (edges[0] + edges[-1]) / 2), (1.0, edges[-1])):
        x = _ML + frac * (_W - _ML - _MR)
        parts.append(
            f'<text x="{x}" y="{_H - _MB + 18}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{label:.6g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 10}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif">sample mean (n={dist["n"]}, R={dist["R"]})</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_plots(report: Report, output_dir) -> list[Path]:
    if not report.table2:
        raise ParameterError("render_plots needs a non-empty variance table")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, content in (
        ("variance_vs_f.svg", _variance_svg(report)),
        ("deviation_vs_f.svg", _deviation_svg(report)),
    ):
        path = out / name
        path.write_text(content, encoding="utf-8")
        paths.append(path)
    for dist in report.distributions:
        path = out / f"histogram_f{dist['f']!r}.svg"
        path.write_text(_histogram_svg(dist), encoding="utf-8")
        paths.append(path)
    return paths
