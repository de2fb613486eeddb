"""Outcome aggregation from hand-written event logs."""

from __future__ import annotations

import json

import pytest

from draftguide.experiment import (
    DAY_SECONDS,
    EventLog,
    OutcomeComputationError,
    OutcomeRecord,
    Arm,
    as_table,
    compute_outcomes,
)

T0 = 1_690_156_800


def write_log(tmp_path, enrollments, events, name="log.jsonl", torn_tail=None):
    lines = []
    for user_id, community_id, arm, at, pre in enrollments:
        lines.append(
            json.dumps(
                {
                    "kind": "Enrollment",
                    "timestamp": at,
                    "user_id": user_id,
                    "community_id": community_id,
                    "arm": arm,
                    **pre,
                }
            )
        )
    for kind, user_id, community_id, ts, post_id in events:
        obj = {"kind": kind, "timestamp": ts, "user_id": user_id, "community_id": community_id}
        if post_id:
            obj["post_id"] = post_id
        lines.append(json.dumps(obj))
    text = "\n".join(lines) + "\n"
    if torn_tail is not None:
        text += torn_tail  # no trailing newline: simulated crash mid-append
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


PRE = {"pre_visits_90d": 5, "pre_votes_90d": 10, "community_rules_90d": 3, "community_automod_share": 0.02}


def test_basic_funnel_counts(tmp_path):
    path = write_log(
        tmp_path,
        [("u1", "c1", "Treatment", T0, PRE)],
        [
            ("PostStart", "u1", "c1", T0 + 10, None),
            ("PostStart", "u1", "c1", T0 + DAY_SECONDS, None),
            ("PostSubmit", "u1", "c1", T0 + DAY_SECONDS + 5, "p1"),
        ],
    )
    table = compute_outcomes(EventLog.from_jsonl(path), 28)
    record = next(iter(table))
    assert record.outcomes["post_starts"] == 2
    assert record.outcomes["posts_submitted"] == 1
    assert record.outcomes["posts_non_removed"] == 1


def test_removed_post_is_not_counted_as_surviving(tmp_path):
    path = write_log(
        tmp_path,
        [("u1", "c1", "Control", T0, PRE)],
        [
            ("PostSubmit", "u1", "c1", T0 + 1, "p1"),
            ("PostSubmit", "u1", "c1", T0 + 2, "p2"),
            ("AutomodRemoval", "u1", "c1", T0 + 3, "p1"),
        ],
    )
    record = next(iter(compute_outcomes(EventLog.from_jsonl(path), 28)))
    assert record.outcomes["posts_submitted"] == 2
    assert record.outcomes["automod_removals"] == 1
    assert record.outcomes["posts_non_removed"] == 1


def test_day_outcomes_count_distinct_days(tmp_path):
    events = [
        ("ContributionDay", "u1", "c1", T0 + d * DAY_SECONDS + offset, None)
        for d, offset in [(0, 1), (0, 2), (3, 0), (9, 100)]
    ]
    path = write_log(tmp_path, [("u1", "c1", "Treatment", T0, PRE)], events)
    record = next(iter(compute_outcomes(EventLog.from_jsonl(path), 28)))
    assert record.outcomes["days_contributing"] == 3


def test_day_outcomes_capped_by_window(tmp_path):
    events = [
        ("ActiveDay", "u1", "c1", T0 + d * DAY_SECONDS, None) for d in range(40)
    ]
    path = write_log(tmp_path, [("u1", "c1", "Treatment", T0, PRE)], events)
    table = compute_outcomes(EventLog.from_jsonl(path), 28)
    record = next(iter(table))
    assert record.outcomes["days_active"] == 28
    assert table.rejected  # the 12 post-window days were rejected


@pytest.mark.parametrize(
    "pre,name,expected",
    [
        ({**PRE, "pre_visits_90d": 0}, "newcomer", True),
        ({**PRE, "pre_visits_90d": 1}, "newcomer", False),
        ({**PRE, "pre_votes_90d": 3}, "low_activity", True),
        ({**PRE, "pre_votes_90d": 4}, "low_activity", False),
        ({**PRE, "community_rules_90d": 8}, "high_rule_count", True),
        ({**PRE, "community_rules_90d": 7}, "high_rule_count", False),
        ({**PRE, "community_automod_share": 0.09}, "high_automod", True),
        ({**PRE, "community_automod_share": 0.08}, "high_automod", False),
    ],
)
def test_covariate_thresholds(tmp_path, pre, name, expected):
    path = write_log(tmp_path, [("u1", "c1", "Treatment", T0, pre)], [])
    record = next(iter(compute_outcomes(EventLog.from_jsonl(path), 28)))
    assert record.covariates[name] is expected


def test_unknown_user_event_rejected_with_diagnostic(tmp_path):
    path = write_log(
        tmp_path,
        [("u1", "c1", "Treatment", T0, PRE)],
        [("PostStart", "ghost", "c1", T0 + 1, None)],
    )
    table = compute_outcomes(EventLog.from_jsonl(path), 28)
    assert any("no enrollment record" in d for d in table.rejected)
    with pytest.raises(OutcomeComputationError):
        compute_outcomes(EventLog.from_jsonl(path), 28, strict=True)


def test_pre_enrollment_event_rejected(tmp_path):
    path = write_log(
        tmp_path,
        [("u1", "c1", "Treatment", T0, PRE)],
        [("PostStart", "u1", "c1", T0 - 5, None)],
    )
    table = compute_outcomes(EventLog.from_jsonl(path), 28)
    assert any("outside" in d for d in table.rejected)
    assert next(iter(table)).outcomes["post_starts"] == 0


def test_torn_tail_is_tolerated(tmp_path):
    path = write_log(
        tmp_path,
        [("u1", "c1", "Treatment", T0, PRE)],
        [("PostStart", "u1", "c1", T0 + 1, None)],
        torn_tail='{"kind": "PostSta',
    )
    log = EventLog.from_jsonl(path)
    assert log.torn_lines == 1
    assert len(log) == 1


def test_as_table_accepts_record_lists():
    records = [
        OutcomeRecord("u1", "c1", Arm.TREATMENT, {"newcomer": True}, {"post_starts": 2}),
        OutcomeRecord("u2", "c1", Arm.CONTROL, {"newcomer": False}, {"post_starts": 1}),
    ]
    table = as_table(records)
    assert table.outcome("post_starts").tolist() == [2, 1]
    assert table.covariate("newcomer").tolist() == [1, 0]
    assert table.arm.tolist() == [1, 0]


def test_outcome_csv_header(tmp_path):
    records = [
        OutcomeRecord("u1", "c1", Arm.TREATMENT, {}, {"post_starts": 2}),
    ]
    path = tmp_path / "records.csv"
    as_table(records).to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header.startswith("user_id,community_id,arm,newcomer,low_activity")
    assert header.endswith("days_contributing,days_voting,days_active")
