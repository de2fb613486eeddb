"""Experiment tooling: arm assignment, funnel simulation, outcomes."""

from .assign import Arm, assign_arm, assignment_score
from .config import (
    ConfigError,
    CovariateModel,
    FunnelRates,
    GuidanceSetup,
    SimConfig,
    StratumEffect,
    config_from_dict,
    config_to_dict,
    load_config,
)
from .events import (
    DAY_SECONDS,
    DEFAULT_START_EPOCH,
    EnrollmentRecord,
    EventKind,
    EventLog,
    ExperimentEvent,
)
from .funnel import FunnelColumn, FunnelTable, funnel_from_counts, funnel_stats
from .outcomes import (
    COVARIATE_NAMES,
    OUTCOME_NAMES,
    OUTCOME_SPECS,
    OutcomeComputationError,
    OutcomeRecord,
    OutcomeTable,
    as_table,
    compute_outcomes,
)
from .simulate import (
    SimResult,
    expected_interaction_ratios,
    expected_mean_ratios,
    simulate_experiment,
)

__all__ = [
    "Arm",
    "COVARIATE_NAMES",
    "ConfigError",
    "CovariateModel",
    "DAY_SECONDS",
    "DEFAULT_START_EPOCH",
    "EnrollmentRecord",
    "EventKind",
    "EventLog",
    "ExperimentEvent",
    "FunnelColumn",
    "FunnelRates",
    "FunnelTable",
    "GuidanceSetup",
    "OUTCOME_NAMES",
    "OUTCOME_SPECS",
    "OutcomeComputationError",
    "OutcomeRecord",
    "OutcomeTable",
    "SimConfig",
    "SimResult",
    "StratumEffect",
    "as_table",
    "assign_arm",
    "assignment_score",
    "compute_outcomes",
    "config_from_dict",
    "config_to_dict",
    "expected_interaction_ratios",
    "expected_mean_ratios",
    "funnel_from_counts",
    "funnel_stats",
    "load_config",
    "simulate_experiment",
]
