"""Treatment-effect estimation: Poisson regression, robust errors, reports."""

from .effects import (
    CommunityEffect,
    EffectEstimate,
    EstimationError,
    PerCommunityReport,
    Z_95,
    ate_report,
    effect_from_coef,
    interaction_report,
    per_community_effects,
    wald_p_value,
)
from .poisson import (
    CollinearDesignError,
    NonIdentifiedError,
    PoissonFit,
    check_identification,
    fit_poisson,
    hc0_covariance,
)
from .tables import (
    effect_table_csv,
    effect_table_text,
    format_effect,
    format_p_value,
    funnel_csv,
    funnel_text,
    per_community_csv,
    per_community_text,
)

__all__ = [
    "CollinearDesignError",
    "CommunityEffect",
    "EffectEstimate",
    "EstimationError",
    "NonIdentifiedError",
    "PerCommunityReport",
    "PoissonFit",
    "Z_95",
    "ate_report",
    "check_identification",
    "effect_from_coef",
    "effect_table_csv",
    "effect_table_text",
    "fit_poisson",
    "format_effect",
    "format_p_value",
    "funnel_csv",
    "funnel_text",
    "hc0_covariance",
    "interaction_report",
    "per_community_csv",
    "per_community_text",
    "wald_p_value",
]
