"""fpclab: a laboratory for finite-population sampling as coverage approaches
a full census, and for the floating-point precision floor that remains once
sampling variability is exhausted."""

__version__ = "0.1.0"

from .accumulate import (
    AccumulationStrategy,
    SpreadResult,
    oracle_mean,
    reduce_mean,
    reduce_sum,
    sample_variance,
    spread_of_reductions,
)
from .config import ExperimentConfig, config_from_dict, config_from_json_file
from .errors import (
    ConfigError,
    CorruptPopulationError,
    ParameterError,
    PhaseError,
    PopulationFileError,
    PopulationFormatError,
    ProvenanceError,
)
from .experiments import (
    NumericalRow,
    Phase2Result,
    RandomizationDistribution,
    VarianceRow,
    estimate_numerical_floor,
    run_numerical_study,
    run_phase2,
    run_randomization,
    run_variance_sweep,
)
from .population import (
    Population,
    PopulationSpec,
    Truth,
    enumerate_truth,
    generate_population,
    ill_conditioned_spec,
    load_population,
    pop_a_spec,
    pop_b_spec,
    save_population,
)
from .report import Report, check_report, render_csv, render_json, render_plots, run_all
from .sampling import SampleDraw, draw_sample, gather_values, srswor_indices
from .theory import RegimeThresholds, classify_regime, fpc_variance, srs_variance_infinite

__all__ = [
    "AccumulationStrategy",
    "ConfigError",
    "CorruptPopulationError",
    "ExperimentConfig",
    "NumericalRow",
    "ParameterError",
    "PhaseError",
    "Phase2Result",
    "Population",
    "PopulationFileError",
    "PopulationFormatError",
    "PopulationSpec",
    "ProvenanceError",
    "RandomizationDistribution",
    "RegimeThresholds",
    "Report",
    "SampleDraw",
    "SpreadResult",
    "Truth",
    "VarianceRow",
    "check_report",
    "classify_regime",
    "config_from_dict",
    "config_from_json_file",
    "draw_sample",
    "enumerate_truth",
    "estimate_numerical_floor",
    "fpc_variance",
    "gather_values",
    "generate_population",
    "ill_conditioned_spec",
    "load_population",
    "oracle_mean",
    "pop_a_spec",
    "pop_b_spec",
    "reduce_mean",
    "reduce_sum",
    "render_csv",
    "render_json",
    "render_plots",
    "run_all",
    "run_numerical_study",
    "run_phase2",
    "run_randomization",
    "run_variance_sweep",
    "sample_variance",
    "save_population",
    "spread_of_reductions",
    "srs_variance_infinite",
    "srswor_indices",
]
