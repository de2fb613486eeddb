"""Per-user outcome aggregation over the follow-up window.

Thirteen count outcomes per enrolled user: the posting funnel (starts,
submitted, non-removed), moderation load (three removal sources and
reports), post engagement (comments, views, upvotes), and activity-day
counts (distinct days contributing / voting / active, capped by the
follow-up length).  Covariate flags come from pre-enrollment history:

* ``newcomer``         no community visit in the 90 days pre-enrollment
* ``low_activity``     at most 3 votes in the 90 days pre-enrollment
* ``high_rule_count``  community created more than 7 rules pre-start
* ``high_automod``     reactive automod touched more than 8% of posts
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .assign import Arm
from .events import DAY_SECONDS, EventKind, EventLog, KIND_CODES


@dataclass(frozen=True)
class OutcomeSpec:
    index: int            # 1-based row number in reports
    key: str              # machine name
    display: str          # report label
    group: str            # posting funnel | moderation load | post engagement | user activity
    kind: EventKind | None  # source event kind; None = derived
    distinct_days: bool = False


OUTCOME_SPECS: tuple[OutcomeSpec, ...] = (
    OutcomeSpec(1, "post_starts", "Post starts", "posting funnel", EventKind.POST_START),
    OutcomeSpec(2, "posts_submitted", "Posts submitted", "posting funnel", EventKind.POST_SUBMIT),
    OutcomeSpec(3, "posts_non_removed", "Posts non-removed", "posting funnel", None),
    OutcomeSpec(4, "automod_removals", "Automod removals", "moderation load", EventKind.AUTOMOD_REMOVAL),
    OutcomeSpec(5, "mod_removals", "Mod removals", "moderation load", EventKind.MOD_REMOVAL),
    OutcomeSpec(6, "admin_removals", "Admin removals", "moderation load", EventKind.ADMIN_REMOVAL),
    OutcomeSpec(7, "num_reports", "Num. reports", "moderation load", EventKind.REPORT),
    OutcomeSpec(8, "rec_comments", "Rec. comments", "post engagement", EventKind.RECEIVED_COMMENT),
    OutcomeSpec(9, "rec_screen_views", "Rec. screen views", "post engagement", EventKind.RECEIVED_VIEW),
    OutcomeSpec(10, "rec_upvotes", "Rec. upvotes", "post engagement", EventKind.RECEIVED_UPVOTE),
    OutcomeSpec(11, "days_contributing", "Days contributing", "user activity", EventKind.CONTRIBUTION_DAY, True),
    OutcomeSpec(12, "days_voting", "Days voting", "user activity", EventKind.VOTING_DAY, True),
    OutcomeSpec(13, "days_active", "Days active", "user activity", EventKind.ACTIVE_DAY, True),
)

OUTCOME_NAMES: tuple[str, ...] = tuple(spec.key for spec in OUTCOME_SPECS)
COVARIATE_NAMES: tuple[str, ...] = (
    "newcomer",
    "low_activity",
    "high_rule_count",
    "high_automod",
)

_REMOVAL_KINDS = (
    EventKind.AUTOMOD_REMOVAL,
    EventKind.MOD_REMOVAL,
    EventKind.ADMIN_REMOVAL,
)


@dataclass(frozen=True)
class OutcomeRecord:
    user_id: str
    community_id: str
    arm: Arm
    covariates: dict[str, bool]
    outcomes: dict[str, int]


class OutcomeComputationError(ValueError):
    pass


@dataclass
class OutcomeTable:
    """Columnar outcome records; iterates as OutcomeRecord for convenience."""

    user_ids: list[str]
    community_ids: list[str]
    community_index: np.ndarray        # int32 per user
    arm: np.ndarray                    # uint8 per user, 1 = treated
    covariate_flags: dict[str, np.ndarray]
    outcome_counts: dict[str, np.ndarray]
    follow_up_days: int
    rejected: list[str]

    def __len__(self) -> int:
        return len(self.user_ids)

    def outcome(self, name: str) -> np.ndarray:
        if name not in self.outcome_counts:
            raise KeyError(f"unknown outcome {name!r}; expected one of {OUTCOME_NAMES}")
        return self.outcome_counts[name]

    def covariate(self, name: str) -> np.ndarray:
        if name not in self.covariate_flags:
            raise KeyError(f"unknown covariate {name!r}; expected one of {COVARIATE_NAMES}")
        return self.covariate_flags[name]

    def __iter__(self) -> Iterator[OutcomeRecord]:
        for i in range(len(self)):
            yield OutcomeRecord(
                user_id=self.user_ids[i],
                community_id=self.community_ids[self.community_index[i]],
                arm=Arm.TREATMENT if self.arm[i] else Arm.CONTROL,
                covariates={k: bool(v[i]) for k, v in self.covariate_flags.items()},
                outcomes={k: int(v[i]) for k, v in self.outcome_counts.items()},
            )

    def to_csv(self, path) -> None:
        """One row per user; documented header, stable column order."""
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["user_id", "community_id", "arm", *COVARIATE_NAMES, *OUTCOME_NAMES]
            )
            for i in range(len(self)):
                writer.writerow(
                    [
                        self.user_ids[i],
                        self.community_ids[self.community_index[i]],
                        "Treatment" if self.arm[i] else "Control",
                        *(int(self.covariate_flags[c][i]) for c in COVARIATE_NAMES),
                        *(int(self.outcome_counts[o][i]) for o in OUTCOME_NAMES),
                    ]
                )


def compute_outcomes(
    log: EventLog, follow_up_days: int = 28, strict: bool = False
) -> OutcomeTable:
    """Aggregate events into per-user outcome counts.

    Events outside a user's follow-up window, or from users with no
    enrollment record, are rejected with a diagnostic (an error when
    ``strict``); day-type outcomes count distinct days.
    """
    if follow_up_days <= 0:
        raise OutcomeComputationError("follow_up_days must be positive")
    enrolled_users = np.flatnonzero(log.enrolled)
    n_all = log.n_users
    rejected: list[str] = []

    window = follow_up_days * DAY_SECONDS
    user_enrolled_at = log.enrolled_at
    ev_user = log.ev_user
    offset = log.ev_ts - user_enrolled_at[ev_user]
    known = log.enrolled[ev_user]
    in_window = known & (offset >= 0) & (offset < window)

    bad = np.flatnonzero(~in_window)
    for idx in bad[:20]:
        uid = log.user_ids[ev_user[idx]]
        if not known[idx]:
            rejected.append(f"event #{idx}: user {uid!r} has no enrollment record")
        else:
            rejected.append(
                f"event #{idx}: timestamp {int(log.ev_ts[idx])} outside "
                f"{uid!r}'s follow-up window"
            )
    if len(bad) > 20:
        rejected.append(f"... and {len(bad) - 20} more rejected events")
    if strict and rejected:
        raise OutcomeComputationError("; ".join(rejected))

    kinds = log.ev_kind
    counts: dict[str, np.ndarray] = {}
    for spec in OUTCOME_SPECS:
        if spec.kind is None:
            continue
        mask = in_window & (kinds == KIND_CODES[spec.kind])
        if spec.distinct_days:
            day = (offset[mask] // DAY_SECONDS).astype(np.int64)
            key = ev_user[mask].astype(np.int64) * follow_up_days + day
            unique = np.unique(key)
            per_user = np.bincount((unique // follow_up_days).astype(np.int64), minlength=n_all)
        else:
            per_user = np.bincount(ev_user[mask], minlength=n_all)
        counts[spec.key] = per_user

    # Non-removed posts: submitted posts with no removal event.
    submit_mask = in_window & (kinds == KIND_CODES[EventKind.POST_SUBMIT])
    removal_mask = in_window & np.isin(
        kinds, [KIND_CODES[k] for k in _REMOVAL_KINDS]
    )
    submitted_posts = log.ev_post[submit_mask]
    removed_posts = np.unique(log.ev_post[removal_mask])
    removed_posts = removed_posts[removed_posts >= 0]
    surviving = ~np.isin(submitted_posts, removed_posts)
    # Posts without an identity cannot be matched to removals; count as surviving.
    surviving |= submitted_posts < 0
    counts["posts_non_removed"] = np.bincount(
        ev_user[submit_mask][surviving], minlength=n_all
    )

    covariates = {
        "newcomer": (log.pre_visits == 0).astype(np.uint8),
        "low_activity": (log.pre_votes <= 3).astype(np.uint8),
        "high_rule_count": (log.comm_rules[log.user_community] > 7).astype(np.uint8),
        "high_automod": (log.comm_automod_share[log.user_community] > 0.08).astype(np.uint8),
    }

    sel = enrolled_users
    return OutcomeTable(
        user_ids=[log.user_ids[i] for i in sel],
        community_ids=list(log.community_ids),
        community_index=log.user_community[sel].astype(np.int32),
        arm=log.arm[sel].astype(np.uint8),
        covariate_flags={k: v[sel] for k, v in covariates.items()},
        outcome_counts={k: v[sel] for k, v in counts.items()},
        follow_up_days=follow_up_days,
        rejected=rejected,
    )


def as_table(records) -> OutcomeTable:
    """Accept an OutcomeTable or any iterable of OutcomeRecord."""
    if isinstance(records, OutcomeTable):
        return records
    records = list(records)
    if not records:
        raise OutcomeComputationError("no outcome records")
    community_ids = sorted({r.community_id for r in records})
    community_index = {c: i for i, c in enumerate(community_ids)}
    return OutcomeTable(
        user_ids=[r.user_id for r in records],
        community_ids=community_ids,
        community_index=np.array(
            [community_index[r.community_id] for r in records], dtype=np.int32
        ),
        arm=np.array([1 if r.arm is Arm.TREATMENT else 0 for r in records], dtype=np.uint8),
        covariate_flags={
            name: np.array([r.covariates.get(name, False) for r in records], dtype=np.uint8)
            for name in COVARIATE_NAMES
        },
        outcome_counts={
            name: np.array([r.outcomes.get(name, 0) for r in records], dtype=np.int64)
            for name in OUTCOME_NAMES
        },
        follow_up_days=28,
        rejected=[],
    )
