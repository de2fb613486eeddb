"""Behavioral event log: columnar in memory, JSON-Lines on disk.

One line per event.  Behavioral kinds map one-to-one onto the study's
count outcomes; ``Enrollment`` meta lines carry the per-user arm and
pre-enrollment history that covariates are derived from, and
``RulesetUpdate`` meta lines record configuration changes.  A torn
final line (crash mid-append) is tolerated on read and reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator

import numpy as np

from .assign import Arm


class EventKind(str, Enum):
    POST_START = "PostStart"
    POST_SUBMIT = "PostSubmit"
    AUTOMOD_REMOVAL = "AutomodRemoval"
    MOD_REMOVAL = "ModRemoval"
    ADMIN_REMOVAL = "AdminRemoval"
    REPORT = "Report"
    RECEIVED_COMMENT = "ReceivedComment"
    RECEIVED_VIEW = "ReceivedView"
    RECEIVED_UPVOTE = "ReceivedUpvote"
    CONTRIBUTION_DAY = "ContributionDay"
    VOTING_DAY = "VotingDay"
    ACTIVE_DAY = "ActiveDay"


KIND_CODES = {kind: code for code, kind in enumerate(EventKind)}
KIND_CODES_BY_NAME = {kind.value: code for kind, code in KIND_CODES.items()}
KIND_BY_CODE = tuple(EventKind)

DAY_SECONDS = 86_400
# Experiment clock origin: 2023-07-24 00:00:00 UTC.
DEFAULT_START_EPOCH = 1_690_156_800


@dataclass(frozen=True)
class ExperimentEvent:
    kind: EventKind
    timestamp: int
    user_id: str
    community_id: str
    post_id: str | None = None

    def to_json_line(self, extra: dict | None = None) -> str:
        obj = {
            "kind": self.kind.value,
            "timestamp": self.timestamp,
            "user_id": self.user_id,
            "community_id": self.community_id,
        }
        if self.post_id is not None:
            obj["post_id"] = self.post_id
        if extra:
            obj.update(extra)
        return json.dumps(obj, separators=(",", ":"))


@dataclass(frozen=True)
class EnrollmentRecord:
    user_id: str
    community_id: str
    arm: Arm
    enrolled_at: int
    pre_visits_90d: int = 0
    pre_votes_90d: int = 0
    community_rules_90d: int = 0
    community_automod_share: float = 0.0

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "kind": "Enrollment",
                "timestamp": self.enrolled_at,
                "user_id": self.user_id,
                "community_id": self.community_id,
                "arm": self.arm.value,
                "pre_visits_90d": self.pre_visits_90d,
                "pre_votes_90d": self.pre_votes_90d,
                "community_rules_90d": self.community_rules_90d,
                "community_automod_share": self.community_automod_share,
            },
            separators=(",", ":"),
        )


@dataclass
class EventLog:
    """Columnar event store; indices into the user/community/post tables."""

    user_ids: list[str]
    community_ids: list[str]
    user_community: np.ndarray      # int32 [n_users]
    arm: np.ndarray                 # uint8 [n_users], 1 = treatment
    enrolled: np.ndarray            # bool  [n_users]
    enrolled_at: np.ndarray         # int64 [n_users], -1 when not enrolled
    pre_visits: np.ndarray          # int32 [n_users]
    pre_votes: np.ndarray           # int32 [n_users]
    comm_rules: np.ndarray          # int32 [n_communities]
    comm_automod_share: np.ndarray  # float64 [n_communities]
    ev_kind: np.ndarray             # uint8 [n_events]
    ev_user: np.ndarray             # int32 [n_events]
    ev_ts: np.ndarray               # int64 [n_events]
    ev_post: np.ndarray             # int32 [n_events], -1 = no post
    post_labels: list[str]
    torn_lines: int = 0
    extra_lines: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.ev_kind.shape[0])

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    def iter_events(self) -> Iterator[ExperimentEvent]:
        for i in range(len(self)):
            post = self.ev_post[i]
            yield ExperimentEvent(
                kind=KIND_BY_CODE[self.ev_kind[i]],
                timestamp=int(self.ev_ts[i]),
                user_id=self.user_ids[self.ev_user[i]],
                community_id=self.community_ids[self.user_community[self.ev_user[i]]],
                post_id=self.post_labels[post] if post >= 0 else None,
            )

    def iter_enrollments(self) -> Iterator[EnrollmentRecord]:
        order = np.lexsort((np.arange(self.n_users), self.enrolled_at))
        for u in order:
            if not self.enrolled[u]:
                continue
            c = self.user_community[u]
            yield EnrollmentRecord(
                user_id=self.user_ids[u],
                community_id=self.community_ids[c],
                arm=Arm.TREATMENT if self.arm[u] else Arm.CONTROL,
                enrolled_at=int(self.enrolled_at[u]),
                pre_visits_90d=int(self.pre_visits[u]),
                pre_votes_90d=int(self.pre_votes[u]),
                community_rules_90d=int(self.comm_rules[c]),
                community_automod_share=float(self.comm_automod_share[c]),
            )

    def to_jsonl(self, path: str | Path) -> None:
        """Write enrollments then events; deterministic for fixed contents."""
        with open(path, "w", encoding="utf-8") as fh:
            for record in self.iter_enrollments():
                fh.write(record.to_json_line())
                fh.write("\n")
            for event in self.iter_events():
                fh.write(event.to_json_line())
                fh.write("\n")

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "EventLog":
        user_index: dict[str, int] = {}
        community_index: dict[str, int] = {}
        post_index: dict[str, int] = {}
        users: list[str] = []
        communities: list[str] = []
        posts: list[str] = []
        user_community: list[int] = []
        arm: list[int] = []
        enrolled: list[bool] = []
        enrolled_at: list[int] = []
        pre_visits: list[int] = []
        pre_votes: list[int] = []
        comm_rules: dict[int, int] = {}
        comm_share: dict[int, float] = {}
        ev_kind: list[int] = []
        ev_user: list[int] = []
        ev_ts: list[int] = []
        ev_post: list[int] = []
        extra_lines: list[dict] = []
        torn = 0

        def community(cid: str) -> int:
            idx = community_index.get(cid)
            if idx is None:
                idx = len(communities)
                community_index[cid] = idx
                communities.append(cid)
            return idx

        def user(uid: str, cid: str) -> int:
            idx = user_index.get(uid)
            if idx is None:
                idx = len(users)
                user_index[uid] = idx
                users.append(uid)
                user_community.append(community(cid))
                arm.append(0)
                enrolled.append(False)
                enrolled_at.append(-1)
                pre_visits.append(0)
                pre_votes.append(0)
            return idx

        raw = Path(path).read_bytes()
        lines = raw.split(b"\n")
        tail_complete = raw.endswith(b"\n")
        for i, line in enumerate(lines):
            if not line:
                continue
            last = i == len(lines) - 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                if last and not tail_complete:
                    torn += 1
                    continue
                raise
            kind = obj.get("kind")
            if kind == "Enrollment":
                u = user(obj["user_id"], obj["community_id"])
                arm[u] = 1 if obj.get("arm") == Arm.TREATMENT.value else 0
                enrolled[u] = True
                enrolled_at[u] = int(obj["timestamp"])
                pre_visits[u] = int(obj.get("pre_visits_90d", 0))
                pre_votes[u] = int(obj.get("pre_votes_90d", 0))
                c = user_community[u]
                comm_rules[c] = int(obj.get("community_rules_90d", 0))
                comm_share[c] = float(obj.get("community_automod_share", 0.0))
            elif kind in KIND_CODES_BY_NAME:
                u = user(obj["user_id"], obj["community_id"])
                ev_kind.append(KIND_CODES_BY_NAME[kind])
                ev_user.append(u)
                ev_ts.append(int(obj["timestamp"]))
                pid = obj.get("post_id")
                if pid is None:
                    ev_post.append(-1)
                else:
                    p = post_index.get(pid)
                    if p is None:
                        p = len(posts)
                        post_index[pid] = p
                        posts.append(pid)
                    ev_post.append(p)
            else:
                extra_lines.append(obj)

        n_comm = len(communities)
        return cls(
            user_ids=users,
            community_ids=communities,
            user_community=np.array(user_community, dtype=np.int32),
            arm=np.array(arm, dtype=np.uint8),
            enrolled=np.array(enrolled, dtype=bool),
            enrolled_at=np.array(enrolled_at, dtype=np.int64),
            pre_visits=np.array(pre_visits, dtype=np.int32),
            pre_votes=np.array(pre_votes, dtype=np.int32),
            comm_rules=np.array([comm_rules.get(c, 0) for c in range(n_comm)], dtype=np.int32),
            comm_automod_share=np.array(
                [comm_share.get(c, 0.0) for c in range(n_comm)], dtype=np.float64
            ),
            ev_kind=np.array(ev_kind, dtype=np.uint8),
            ev_user=np.array(ev_user, dtype=np.int32),
            ev_ts=np.array(ev_ts, dtype=np.int64),
            ev_post=np.array(ev_post, dtype=np.int32),
            post_labels=posts,
            torn_lines=torn,
            extra_lines=extra_lines,
        )
