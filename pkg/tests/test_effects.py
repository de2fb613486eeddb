"""Effect estimates, the relative-scale transform, and report rendering."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from draftguide.analysis import (
    EstimationError,
    ate_report,
    effect_from_coef,
    effect_table_csv,
    effect_table_text,
    format_effect,
    format_p_value,
    interaction_report,
    per_community_effects,
    wald_p_value,
)
from draftguide.experiment import Arm, OutcomeRecord


def make_records(cells, outcome="posts_submitted", covariate=None):
    """cells: list of (arm, cov_value, n, mean)."""
    records = []
    counter = 0
    for arm, cov, n, mean in cells:
        for i in range(n):
            counter += 1
            # Deterministic counts with the requested mean: alternate
            # around it so every cell has within-cell variance.
            low = math.floor(mean)
            frac = mean - low
            value = low + (1 if (i % 100) < round(frac * 100) else 0)
            records.append(
                OutcomeRecord(
                    user_id=f"u{counter}",
                    community_id="c0",
                    arm=arm,
                    covariates={covariate: bool(cov)} if covariate else {},
                    outcomes={outcome: value},
                )
            )
    return records


class TestAteReport:
    def test_doubled_mean_is_plus_100_percent(self):
        records = make_records(
            [(Arm.CONTROL, 0, 1000, 1.0), (Arm.TREATMENT, 0, 1000, 2.0)]
        )
        estimate = ate_report(records, "posts_submitted")
        assert abs(estimate.coef - math.log(2.0)) < 1e-8
        assert abs(estimate.effect - 1.0) < 1e-8
        assert estimate.role == "treatment"
        assert estimate.n_obs == 2000

    def test_requires_two_users_per_arm(self):
        records = make_records([(Arm.CONTROL, 0, 5, 1.0), (Arm.TREATMENT, 0, 1, 2.0)])
        with pytest.raises(EstimationError):
            ate_report(records, "posts_submitted")

    def test_unknown_outcome(self):
        records = make_records([(Arm.CONTROL, 0, 5, 1.0), (Arm.TREATMENT, 0, 5, 1.0)])
        with pytest.raises(EstimationError):
            ate_report(records, "not_an_outcome")


class TestInteraction:
    def test_cell_means_1_2_3_12_give_log2(self):
        records = make_records(
            [
                (Arm.CONTROL, 0, 400, 1.0),
                (Arm.TREATMENT, 0, 400, 2.0),
                (Arm.CONTROL, 1, 400, 3.0),
                (Arm.TREATMENT, 1, 400, 12.0),
            ],
            covariate="newcomer",
        )
        estimate = interaction_report(records, "posts_submitted", "newcomer")
        assert abs(estimate.coef - math.log(2.0)) < 1e-8
        assert estimate.role == "interaction"

    def test_empty_cell_is_identified_failure(self):
        records = make_records(
            [
                (Arm.CONTROL, 0, 50, 1.0),
                (Arm.TREATMENT, 0, 50, 2.0),
                (Arm.CONTROL, 1, 50, 3.0),
            ],
            covariate="newcomer",
        )
        with pytest.raises(EstimationError, match="empty design cell"):
            interaction_report(records, "posts_submitted", "newcomer")


class TestTransform:
    def test_paper_style_rendering(self):
        beta = math.log(1 - 0.057)
        se = (math.log(1 - 0.035) - math.log(1 - 0.078)) / (2 * 1.96)
        estimate = effect_from_coef(beta, se, "post_starts", "treatment", 97616)
        assert format_effect(estimate) == "-5.7%; 95% CI [-7.8%, -3.5%]"
        assert format_p_value(estimate.p_value) == "<0.001"

    def test_zero_effect_renders_symmetric_log_interval(self):
        estimate = effect_from_coef(0.0, 0.05, "post_starts", "treatment", 10)
        assert format_effect(estimate).startswith("0.0%")
        assert abs(math.log1p(estimate.ci_low) + math.log1p(estimate.ci_high)) < 1e-12
        assert estimate.p_value == 1.0

    @settings(max_examples=300, deadline=None)
    @given(
        st.floats(-1.0, 1.0, allow_nan=False),
        st.floats(1e-6, 0.8, allow_nan=False),
    )
    def test_ci_excludes_zero_iff_p_below_005(self, coef, se):
        estimate = effect_from_coef(coef, se, "post_starts", "treatment", 1)
        excludes = estimate.ci_low > 0 or estimate.ci_high < 0
        if abs(abs(coef) / se - 1.96) > 1e-6:  # away from the boundary
            assert excludes == (estimate.p_value < 0.05)
        assert estimate.ci_low <= estimate.effect <= estimate.ci_high
        assert 0 < estimate.p_value <= 1

    def test_p_value_is_two_sided_wald(self):
        assert abs(wald_p_value(1.96, 1.0) - 0.05) < 1e-3
        assert wald_p_value(0.0, 1.0) == 1.0


class TestPerCommunity:
    def _records_two_communities(self):
        # Values alternate around each arm mean so every cell has
        # within-arm variance (otherwise the robust s.e. is zero).
        records = []
        for community, (mean_c, mean_t) in {
            "alpha": (1, 2),
            "beta": (2, 2),
        }.items():
            for i in range(300):
                wiggle = 1 if i % 2 else -1
                records.append(
                    OutcomeRecord(
                        f"{community}-c{i}", community, Arm.CONTROL, {},
                        {"posts_submitted": mean_c + wiggle},
                    )
                )
                records.append(
                    OutcomeRecord(
                        f"{community}-t{i}", community, Arm.TREATMENT, {},
                        {"posts_submitted": mean_t + wiggle},
                    )
                )
        return records

    def test_equal_means_not_significant(self):
        report = per_community_effects(self._records_two_communities(), "posts_submitted")
        by_id = {ce.community_id: ce for ce in report.effects}
        assert abs(by_id["beta"].estimate.effect) < 1e-8
        assert not by_id["beta"].significant
        assert by_id["alpha"].significant

    def test_single_community_matches_pooled(self):
        records = [
            r for r in self._records_two_communities() if r.community_id == "alpha"
        ]
        pooled = ate_report(records, "posts_submitted")
        report = per_community_effects(records, "posts_submitted")
        assert len(report.effects) == 1
        only = report.effects[0].estimate
        assert only.coef == pooled.coef and only.se == pooled.se

    def test_failing_communities_listed_not_dropped(self):
        records = self._records_two_communities()
        records.append(OutcomeRecord("lonely", "gamma", Arm.CONTROL, {}, {"posts_submitted": 1}))
        report = per_community_effects(records, "posts_submitted")
        assert any(cid == "gamma" for cid, _ in report.skipped)
        assert {ce.community_id for ce in report.effects} == {"alpha", "beta"}


class TestRendering:
    def test_text_table_has_one_row_per_estimate(self):
        records = make_records(
            [(Arm.CONTROL, 0, 200, 1.0), (Arm.TREATMENT, 0, 200, 2.0)]
        )
        estimate = ate_report(records, "posts_submitted")
        text = effect_table_text([estimate], title="Effects")
        assert "Posts submitted" in text and "95% CI" in text

    def test_csv_round_trips_meaningfully(self):
        records = make_records(
            [(Arm.CONTROL, 0, 200, 1.0), (Arm.TREATMENT, 0, 200, 2.0)]
        )
        estimate = ate_report(records, "posts_submitted")
        csv_text = effect_table_csv([estimate])
        header, row = csv_text.strip().splitlines()
        assert header.startswith("outcome,coef_role,effect_pct")
        fields = row.split(",")
        assert fields[0] == "posts_submitted"
        assert abs(float(fields[2]) - 100.0 * estimate.effect) < 1e-3
