"""Simulation configuration: behavioral rates, treatment multipliers,
covariate mix, and the compose-time guidance setup.

Treatment multipliers scale a treated user's stage rates (e.g. the
submit-given-start probability); stratum effects replace a channel's
multiplier by covariate value, which is how effect heterogeneity is
injected with a known ground truth.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FunnelRates:
    p_start_session: float = 0.06
    p_submit_given_start: float = 0.62
    p_rule_breaking: float = 0.45
    p_automod_removal_given_breaking: float = 0.75
    p_mod_removal_given_breaking: float = 0.50
    p_mod_removal_given_clean: float = 0.25
    p_admin_removal: float = 0.02
    reports_per_post: float = 0.08
    comments_per_surviving_post: float = 1.8
    views_per_surviving_post: float = 3.0
    upvotes_per_surviving_post: float = 1.2
    p_active_day: float = 0.18
    p_voting_day: float = 0.10
    p_contribution_day: float = 0.05


# Multiplier channel -> the FunnelRates field(s) it scales for treated users.
MULTIPLIER_CHANNELS: dict[str, tuple[str, ...]] = {
    "start_session": ("p_start_session",),
    "submit": ("p_submit_given_start",),
    "rule_breaking": ("p_rule_breaking",),
    "automod_removal": ("p_automod_removal_given_breaking",),
    "mod_removal": ("p_mod_removal_given_breaking", "p_mod_removal_given_clean"),
    "admin_removal": ("p_admin_removal",),
    "reports": ("reports_per_post",),
    "comments": ("comments_per_surviving_post",),
    "views": ("views_per_surviving_post",),
    "upvotes": ("upvotes_per_surviving_post",),
    "active_days": ("p_active_day",),
    "voting_days": ("p_voting_day",),
    "contribution_days": ("p_contribution_day",),
}

_PROBABILITY_FIELDS = {
    "p_start_session",
    "p_submit_given_start",
    "p_rule_breaking",
    "p_automod_removal_given_breaking",
    "p_mod_removal_given_breaking",
    "p_mod_removal_given_clean",
    "p_admin_removal",
    "p_active_day",
    "p_voting_day",
    "p_contribution_day",
}


@dataclass(frozen=True)
class StratumEffect:
    covariate: str      # newcomer | low_activity | high_rule_count | high_automod
    channel: str        # a MULTIPLIER_CHANNELS key
    when_false: float
    when_true: float


@dataclass(frozen=True)
class CovariateModel:
    p_newcomer: float = 0.54
    p_low_activity: float = 0.50
    share_high_rule_count: float = 0.50
    share_high_automod: float = 0.48


@dataclass(frozen=True)
class GuidanceSetup:
    mode: str = "off"  # "off" | "armed"
    ruleset_paths: dict[str, str] = field(default_factory=dict)
    default_ruleset_path: str | None = None
    p_abandon_given_blocked: float = 0.50
    p_repair_given_blocked: float = 0.30
    p_mod_removal_given_circumvented: float = 0.50


@dataclass(frozen=True)
class SimConfig:
    n_users: int
    n_communities: int
    seed: int = 0
    enrollment_days: int = 35
    follow_up_days: int = 28
    salt: str = "draftguide-exp"
    p_treat: float = 0.5
    start_epoch: int = 1_690_156_800
    rates: FunnelRates = field(default_factory=FunnelRates)
    multipliers: dict[str, float] = field(default_factory=dict)
    stratum_effects: tuple[StratumEffect, ...] = ()
    covariates: CovariateModel = field(default_factory=CovariateModel)
    guidance: GuidanceSetup = field(default_factory=GuidanceSetup)

    def multiplier(self, channel: str) -> float:
        return self.multipliers.get(channel, 1.0)

    def validate(self) -> None:
        if self.n_users <= 0 or self.n_communities <= 0:
            raise ConfigError("n_users and n_communities must be positive")
        if self.enrollment_days <= 0 or self.follow_up_days <= 0:
            raise ConfigError("enrollment_days and follow_up_days must be positive")
        if not 0.0 <= self.p_treat <= 1.0:
            raise ConfigError("p_treat must be in [0, 1]")
        for f in dataclasses.fields(FunnelRates):
            value = getattr(self.rates, f.name)
            if value < 0:
                raise ConfigError(f"rates.{f.name} must be non-negative")
            if f.name in _PROBABILITY_FIELDS and value > 1:
                raise ConfigError(f"rates.{f.name} is a probability, got {value}")
        for channel, mult in self.multipliers.items():
            if channel not in MULTIPLIER_CHANNELS:
                raise ConfigError(f"unknown multiplier channel {channel!r}")
            if mult <= 0:
                raise ConfigError(f"multiplier {channel} must be positive")
        seen_channels = set()
        covariate_names = {se.covariate for se in self.stratum_effects}
        if len(covariate_names) > 1:
            raise ConfigError("stratum effects must all target one covariate")
        for se in self.stratum_effects:
            if se.covariate not in (
                "newcomer", "low_activity", "high_rule_count", "high_automod"
            ):
                raise ConfigError(f"unknown stratum covariate {se.covariate!r}")
            if se.channel not in MULTIPLIER_CHANNELS:
                raise ConfigError(f"unknown stratum channel {se.channel!r}")
            if se.channel in seen_channels:
                raise ConfigError(f"duplicate stratum effect for channel {se.channel!r}")
            seen_channels.add(se.channel)
            if se.when_false <= 0 or se.when_true <= 0:
                raise ConfigError("stratum multipliers must be positive")
        # Effective treated probabilities must stay valid.
        for channel, rate_fields in MULTIPLIER_CHANNELS.items():
            peak = self.multiplier(channel)
            for se in self.stratum_effects:
                if se.channel == channel:
                    peak = max(se.when_false, se.when_true)
            for rate_field in rate_fields:
                if rate_field in _PROBABILITY_FIELDS:
                    value = getattr(self.rates, rate_field) * peak
                    if value > 1:
                        raise ConfigError(
                            f"treated {rate_field} would be {value:.3f} > 1 "
                            f"(multiplier {channel})"
                        )
        cov = self.covariates
        for name in ("p_newcomer", "p_low_activity", "share_high_rule_count", "share_high_automod"):
            if not 0.0 <= getattr(cov, name) <= 1.0:
                raise ConfigError(f"covariates.{name} must be in [0, 1]")
        g = self.guidance
        if g.mode not in ("off", "armed"):
            raise ConfigError("guidance.mode must be 'off' or 'armed'")
        if g.p_abandon_given_blocked < 0 or g.p_repair_given_blocked < 0:
            raise ConfigError("guidance branch probabilities must be non-negative")
        if g.p_abandon_given_blocked + g.p_repair_given_blocked > 1:
            raise ConfigError("abandon + repair probabilities exceed 1")
        if not 0.0 <= g.p_mod_removal_given_circumvented <= 1.0:
            raise ConfigError("p_mod_removal_given_circumvented must be in [0, 1]")
        if g.mode == "armed" and not g.ruleset_paths and g.default_ruleset_path is None:
            raise ConfigError("armed guidance needs ruleset_paths or a default ruleset")


def _strict_fields(obj: dict, cls, where: str) -> dict:
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(obj) - names
    if unknown:
        raise ConfigError(f"unknown {where} fields: {sorted(unknown)}")
    return obj


def config_from_dict(obj: dict) -> SimConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    obj = dict(obj)
    rates = FunnelRates(**_strict_fields(obj.pop("rates", {}), FunnelRates, "rates"))
    covariates = CovariateModel(
        **_strict_fields(obj.pop("covariates", {}), CovariateModel, "covariates")
    )
    guidance = GuidanceSetup(
        **_strict_fields(obj.pop("guidance", {}), GuidanceSetup, "guidance")
    )
    strata = tuple(
        StratumEffect(**_strict_fields(se, StratumEffect, "stratum_effects"))
        for se in obj.pop("stratum_effects", [])
    )
    multipliers = obj.pop("multipliers", {})
    if not isinstance(multipliers, dict):
        raise ConfigError("multipliers must be an object of channel -> factor")
    _strict_fields(obj, SimConfig, "config")
    config = SimConfig(
        rates=rates,
        covariates=covariates,
        guidance=guidance,
        stratum_effects=strata,
        multipliers={k: float(v) for k, v in multipliers.items()},
        **obj,
    )
    config.validate()
    return config


def load_config(path: str | Path) -> SimConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(obj)


def config_to_dict(config: SimConfig) -> dict:
    out = dataclasses.asdict(config)
    out["stratum_effects"] = [dataclasses.asdict(se) for se in config.stratum_effects]
    return out
