"""Treatment-effect estimation over outcome records.

The average effect comes from log E[Y | Z] = a + b Z; heterogeneity
from log E[Y | Z, X] = a + b Z + e X + g ZX, where g compares the
relative effect across the covariate strata (a ratio of ratios).
Coefficients are reported on the relative scale exp(coef) - 1 with
Wald 95% intervals from the HC0 robust standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..experiment.outcomes import (
    COVARIATE_NAMES,
    OUTCOME_NAMES,
    OutcomeTable,
    as_table,
)
from .poisson import PoissonFit, fit_poisson, hc0_covariance

Z_95 = 1.96  # normal quantile used for all 95% intervals
_MIN_P = 1e-300  # erfc underflow guard: p must stay in (0, 1]


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class EffectEstimate:
    outcome: str
    role: str            # "treatment" or "interaction"
    coef: float
    se: float
    effect: float        # exp(coef) - 1
    ci_low: float
    ci_high: float
    p_value: float
    n_obs: int

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


def wald_p_value(coef: float, se: float) -> float:
    if se <= 0:
        return 1.0 if coef == 0 else _MIN_P
    z = abs(coef) / se
    return max(math.erfc(z / math.sqrt(2.0)), _MIN_P)


def effect_from_coef(
    coef: float, se: float, outcome: str, role: str, n_obs: int
) -> EffectEstimate:
    """Relative-scale estimate from a coefficient and its standard error."""
    return EffectEstimate(
        outcome=outcome,
        role=role,
        coef=coef,
        se=se,
        effect=math.exp(coef) - 1.0,
        ci_low=math.exp(coef - Z_95 * se) - 1.0,
        ci_high=math.exp(coef + Z_95 * se) - 1.0,
        p_value=wald_p_value(coef, se),
        n_obs=n_obs,
    )


def _fit_with_covariance(y: np.ndarray, design: np.ndarray, names) -> tuple[PoissonFit, np.ndarray]:
    fit = fit_poisson(y, design, column_names=names)
    if not fit.converged:
        raise EstimationError(
            f"Poisson fit did not converge in {fit.iterations} iterations"
        )
    cov = hc0_covariance(design, y, fit.fitted)
    return fit, cov


def _ate_design(z: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones_like(z, dtype=np.float64), z.astype(np.float64)])


def ate_report(records, outcome: str) -> EffectEstimate:
    """Average treatment effect for one outcome, on the relative scale."""
    table: OutcomeTable = as_table(records)
    if outcome not in OUTCOME_NAMES:
        raise EstimationError(f"unknown outcome {outcome!r}")
    z = table.arm
    for arm_value, label in ((1, "treatment"), (0, "control")):
        if int((z == arm_value).sum()) < 2:
            raise EstimationError(f"need at least 2 users in the {label} arm")
    y = table.outcome(outcome)
    fit, cov = _fit_with_covariance(y, _ate_design(z), ("intercept", "treated"))
    return effect_from_coef(
        float(fit.coefficients[1]), float(math.sqrt(cov[1, 1])), outcome, "treatment", fit.n_obs
    )


def interaction_report(records, outcome: str, covariate: str) -> EffectEstimate:
    """Effect-modification estimate: how the relative effect differs when
    the covariate is set, reported as exp(g) - 1 (ratio of ratios)."""
    table: OutcomeTable = as_table(records)
    if covariate not in COVARIATE_NAMES:
        raise EstimationError(f"unknown covariate {covariate!r}")
    z = table.arm.astype(np.float64)
    x = table.covariate(covariate).astype(np.float64)
    for zv in (0, 1):
        for xv in (0, 1):
            if not np.any((z == zv) & (x == xv)):
                raise EstimationError(
                    f"empty design cell treated={zv}, {covariate}={xv}; "
                    "interaction not identified"
                )
    design = np.column_stack([np.ones_like(z), z, x, z * x])
    names = ("intercept", "treated", covariate, f"treated*{covariate}")
    y = table.outcome(outcome)
    fit, cov = _fit_with_covariance(y, design, names)
    return effect_from_coef(
        float(fit.coefficients[3]), float(math.sqrt(cov[3, 3])), outcome, "interaction", fit.n_obs
    )


@dataclass(frozen=True)
class CommunityEffect:
    community_id: str
    estimate: EffectEstimate
    significant: bool


@dataclass(frozen=True)
class PerCommunityReport:
    outcome: str
    effects: tuple[CommunityEffect, ...]
    skipped: tuple[tuple[str, str], ...]  # (community_id, reason)


def per_community_effects(records, outcome: str, alpha: float = 0.05) -> PerCommunityReport:
    """One average-effect fit per community; failures are listed, not dropped."""
    table: OutcomeTable = as_table(records)
    effects: list[CommunityEffect] = []
    skipped: list[tuple[str, str]] = []
    for c, community_id in enumerate(table.community_ids):
        mask = table.community_index == c
        if not np.any(mask):
            skipped.append((community_id, "no records"))
            continue
        sub = OutcomeTable(
            user_ids=[table.user_ids[i] for i in np.flatnonzero(mask)],
            community_ids=table.community_ids,
            community_index=table.community_index[mask],
            arm=table.arm[mask],
            covariate_flags={k: v[mask] for k, v in table.covariate_flags.items()},
            outcome_counts={k: v[mask] for k, v in table.outcome_counts.items()},
            follow_up_days=table.follow_up_days,
            rejected=[],
        )
        try:
            estimate = ate_report(sub, outcome)
        except (EstimationError, ValueError) as exc:
            skipped.append((community_id, str(exc)))
            continue
        effects.append(
            CommunityEffect(community_id, estimate, estimate.p_value < alpha)
        )
    return PerCommunityReport(outcome=outcome, effects=tuple(effects), skipped=tuple(skipped))
