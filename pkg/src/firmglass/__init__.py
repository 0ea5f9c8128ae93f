"""firmglass: Potts-glass simulator and analytics for collective firm defaults.

A portfolio of N firms carries discrete credit ratings that random-walk one
notch per move, absorbed at default; moves are coupled across firms through
a Gaussian interaction matrix.  The package simulates ensembles of such
portfolios, computes default-count risk statistics, and carries the matching
mean-field theory with an exact single-firm Markov oracle.
"""

__version__ = "0.1.0"

from .core import (
    EnsembleState,
    LocalDistribution,
    ModelParams,
    RATING_DRIFT_WEIGHTS,
    RealizationOutcome,
    apply_rating_barrier,
    compute_local_fields,
    conditional_spin_distribution,
    f_table_from_weights,
    initial_state,
    micro_update,
    run_realization,
    sample_coupling_matrix,
    time_step,
    zero_f_table,
)
from .experiment import (
    PRESET_NAMES,
    SweepPoint,
    SweepResult,
    SweepSpec,
    emit,
    preset_spec,
    result_from_json,
    result_to_json,
    run_ensemble,
    run_sweep,
)
from .meanfield import (
    MeanFieldPoint,
    PhasePrediction,
    closed_form_deviation_grid,
    critical_beta,
    default_fraction_closed_form,
    default_fraction_markov,
    effective_beta,
    mean_field_fixed_points,
    mean_field_map,
    ordered_phase_default_fraction,
    predict_phase,
    rating_transition_matrix,
)
from .riskstats import (
    EnsembleStats,
    ensemble_stats,
    histogram,
    mean_nd,
    upper_semivariance,
)

__all__ = [
    "EnsembleState",
    "EnsembleStats",
    "LocalDistribution",
    "MeanFieldPoint",
    "ModelParams",
    "PRESET_NAMES",
    "PhasePrediction",
    "RATING_DRIFT_WEIGHTS",
    "RealizationOutcome",
    "SweepPoint",
    "SweepResult",
    "SweepSpec",
    "apply_rating_barrier",
    "closed_form_deviation_grid",
    "compute_local_fields",
    "conditional_spin_distribution",
    "critical_beta",
    "default_fraction_closed_form",
    "default_fraction_markov",
    "effective_beta",
    "emit",
    "ensemble_stats",
    "f_table_from_weights",
    "histogram",
    "initial_state",
    "mean_field_fixed_points",
    "mean_field_map",
    "mean_nd",
    "micro_update",
    "ordered_phase_default_fraction",
    "predict_phase",
    "preset_spec",
    "rating_transition_matrix",
    "result_from_json",
    "result_to_json",
    "run_ensemble",
    "run_realization",
    "run_sweep",
    "sample_coupling_matrix",
    "time_step",
    "upper_semivariance",
    "zero_f_table",
]
