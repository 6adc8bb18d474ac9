"""Covariance-criterion variable selection for multivariate linear regression
with random design, with a seeded Monte Carlo study harness."""

from .covariance import (
    CovarianceSuite,
    Dataset,
    DEFAULT_COND_CAP,
    PopulationModel,
    SingularSubmatrixError,
    VariableSubset,
    criterion,
    empirical_covariances,
    population_covariances,
    projector,
    relevant_set,
)
from .selection import (
    PENALTY_ARG_LABEL,
    PENALTY_ARG_RANK,
    PenaltySchedule,
    SelectionResult,
    SHAPE_FUNCTIONS,
    dimensionality,
    order_permutation,
    phi_scores,
    psi_scores,
    select_variables,
)
from .simulation import (
    OLSFit,
    ProbePoint,
    ProbeTable,
    ReplicationOutcome,
    SimulationConfig,
    SingularDesignError,
    StudyRow,
    StudySummary,
    benchmark_model,
    convergence_probe,
    merge_summaries,
    mix_seed,
    ols_fit,
    prediction_error,
    run_replication,
    run_study,
    sample_dataset,
    summarize,
)
from .io import (
    ConfigError,
    DatasetFormatError,
    emit_report,
    load_simulation_config,
    parse_dataset_csv,
    read_report,
    write_dataset_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CovarianceSuite",
    "Dataset",
    "DEFAULT_COND_CAP",
    "PopulationModel",
    "SingularSubmatrixError",
    "VariableSubset",
    "criterion",
    "empirical_covariances",
    "population_covariances",
    "projector",
    "relevant_set",
    "PENALTY_ARG_LABEL",
    "PENALTY_ARG_RANK",
    "PenaltySchedule",
    "SelectionResult",
    "SHAPE_FUNCTIONS",
    "dimensionality",
    "order_permutation",
    "phi_scores",
    "psi_scores",
    "select_variables",
    "OLSFit",
    "ProbePoint",
    "ProbeTable",
    "ReplicationOutcome",
    "SimulationConfig",
    "SingularDesignError",
    "StudyRow",
    "StudySummary",
    "benchmark_model",
    "convergence_probe",
    "merge_summaries",
    "mix_seed",
    "ols_fit",
    "prediction_error",
    "run_replication",
    "run_study",
    "sample_dataset",
    "summarize",
    "ConfigError",
    "DatasetFormatError",
    "emit_report",
    "load_simulation_config",
    "parse_dataset_csv",
    "read_report",
    "write_dataset_csv",
]
