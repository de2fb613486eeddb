"""Funnel step-loss arithmetic."""

from __future__ import annotations

import pytest

from draftguide.analysis import funnel_csv, funnel_text
from draftguide.experiment import (
    Arm,
    FunnelTable,
    OutcomeRecord,
    funnel_from_counts,
    funnel_stats,
)


def test_control_column_reproduces_published_percentages():
    column = funnel_from_counts(85_421, 53_500, 23_268)
    assert column.loss_percentages == (37.4, 56.5)


def test_treatment_column_reproduces_published_percentages():
    column = funnel_from_counts(80_593, 46_522, 24_527)
    assert column.loss_percentages == (42.3, 47.3)


def test_flat_funnel_loses_nothing():
    assert funnel_from_counts(100, 100, 100).loss_percentages == (0.0, 0.0)


def test_zero_step_leaves_loss_undefined():
    column = funnel_from_counts(0, 0, 0)
    assert column.loss_percentages == (None, None)
    text = funnel_text(FunnelTable(arms={"Control": column}))
    assert "-" in text


def _records(arm, n, starts, submitted, non_removed):
    return [
        OutcomeRecord(
            f"{arm.value}-{i}",
            "c",
            arm,
            {},
            {
                "post_starts": starts,
                "posts_submitted": submitted,
                "posts_non_removed": non_removed,
            },
        )
        for i in range(n)
    ]


def test_funnel_stats_aggregates_by_arm():
    records = _records(Arm.CONTROL, 10, 4, 2, 1) + _records(Arm.TREATMENT, 10, 2, 1, 1)
    table = funnel_stats(records)
    assert table.arms["Control"].counts == (40, 20, 10)
    assert table.arms["Treatment"].counts == (20, 10, 10)
    assert table.arms["Control"].loss_percentages == (50.0, 50.0)
    assert table.arms["Treatment"].loss_percentages == (50.0, 0.0)


def test_single_arm_is_an_error():
    with pytest.raises(ValueError, match="no records"):
        funnel_stats(_records(Arm.CONTROL, 5, 1, 1, 1))


def test_csv_rendering_includes_both_arms():
    records = _records(Arm.CONTROL, 4, 5, 3, 2) + _records(Arm.TREATMENT, 4, 5, 4, 2)
    text = funnel_csv(funnel_stats(records))
    lines = text.strip().splitlines()
    assert lines[0] == "arm,step,count,pct_lost_from_previous"
    assert len(lines) == 7
