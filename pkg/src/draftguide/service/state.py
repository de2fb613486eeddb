"""Service state: ruleset registry, experiment gating, event persistence.

Rulesets live as documents under ``data_dir/rulesets/`` and are swapped
atomically in memory (requests capture one snapshot, so a concurrent
replacement never mixes rule versions within a response).  Every
state-changing request appends at least one line to the append-only
JSON-Lines event log and flushes it before the request is acknowledged,
which makes the log the single source of truth after a crash.

Control-arm users always receive empty guidance: the experiment's
control condition must not observe the feature.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from .. import rules as rules_mod
from ..analysis import (
    ate_report,
    effect_table_csv,
    effect_table_text,
    interaction_report,
)
from ..experiment import (
    Arm,
    EnrollmentRecord,
    EventKind,
    EventLog,
    ExperimentEvent,
    assign_arm,
    compute_outcomes,
)
from ..experiment.outcomes import COVARIATE_NAMES, OUTCOME_NAMES
from .config import ServiceConfig


class UnknownCommunityError(KeyError):
    def __init__(self, community_id: str):
        self.community_id = community_id
        super().__init__(f"unknown community {community_id!r}")


class PayloadTooLargeError(ValueError):
    pass


class NotIdentifiableError(ValueError):
    pass


@dataclass(frozen=True)
class EvaluateOutcome:
    guidance: rules_mod.GuidanceResult
    arm: Arm
    ruleset_version: int


@dataclass(frozen=True)
class SubmitOutcome:
    accepted: bool
    post_id: str | None
    guidance: rules_mod.GuidanceResult
    arm: Arm
    ruleset_version: int


@dataclass
class _Session:
    last_seen: int
    ended: bool = False


class ServiceState:
    def __init__(self, config: ServiceConfig, clock=None):
        self.config = config
        self.clock = clock or (lambda: int(time.time()))
        self.data_dir = Path(config.data_dir)
        self.rulesets_dir = self.data_dir / "rulesets"
        self.events_path = self.data_dir / "events.jsonl"
        self.rulesets_dir.mkdir(parents=True, exist_ok=True)
        self._registry: dict[str, rules_mod.CompiledRuleSet] = {}
        self._sessions: dict[tuple[str, str], _Session] = {}
        self._enrolled: set[tuple[str, str]] = set()
        self._lock = threading.Lock()
        self._sink_lock = threading.Lock()  # single-writer event sink
        self._load_rulesets()
        self._load_enrollments()
        self._events_file = open(self.events_path, "a", encoding="utf-8")

    # -- startup recovery ------------------------------------------------

    def _load_rulesets(self) -> None:
        for path in sorted(self.rulesets_dir.glob("*.json")):
            document = json.loads(path.read_text(encoding="utf-8"))
            ruleset = rules_mod.compile_ruleset(document)
            self._registry[ruleset.community_id] = ruleset

    def _load_enrollments(self) -> None:
        # Rebuilds the first-seen set so enrollments are not re-logged
        # after a restart; draft sessions are deliberately ephemeral.
        if not self.events_path.exists():
            return
        with open(self.events_path, "rb") as fh:
            for line in fh:
                if not line.endswith(b"\n"):
                    break  # torn tail from a crash; ignored, next append heals it
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    break
                if obj.get("kind") == "Enrollment":
                    self._enrolled.add((obj["user_id"], obj["community_id"]))

    # -- event sink --------------------------------------------------------

    def _append(self, line: str) -> None:
        # Flushed before the request is acknowledged: an accepted write
        # survives a process kill (the OS holds it from then on).
        with self._sink_lock:
            self._events_file.write(line + "\n")
            self._events_file.flush()

    def _log_event(
        self, kind: EventKind, user_id: str, community_id: str,
        post_id: str | None = None, extra: dict | None = None,
    ) -> None:
        event = ExperimentEvent(
            kind=kind,
            timestamp=self.clock(),
            user_id=user_id,
            community_id=community_id,
            post_id=post_id,
        )
        self._append(event.to_json_line(extra))

    # -- experiment gating ---------------------------------------------

    def arm_of(self, user_id: str) -> Arm:
        return assign_arm(user_id, self.config.salt, self.config.p_treat)

    def _check_payload(self, title: str, body: str) -> None:
        if len(title) > self.config.title_limit:
            raise PayloadTooLargeError(
                f"title exceeds {self.config.title_limit} characters"
            )
        if len(body) > self.config.body_limit:
            raise PayloadTooLargeError(
                f"body exceeds {self.config.body_limit} characters"
            )

    def _snapshot(self, community_id: str) -> rules_mod.CompiledRuleSet:
        ruleset = self._registry.get(community_id)
        if ruleset is None:
            raise UnknownCommunityError(community_id)
        return ruleset

    def _touch_session(self, user_id: str, community_id: str, *, submitting: bool) -> None:
        """Open or refresh the draft session; logs PostStart on a new one."""
        now = self.clock()
        key = (user_id, community_id)
        with self._lock:
            session = self._sessions.get(key)
            fresh = (
                session is None
                or session.ended
                or now - session.last_seen >= self.config.session_gap_seconds
            )
            self._sessions[key] = _Session(last_seen=now, ended=submitting)
            if fresh:
                if key not in self._enrolled:
                    self._enrolled.add(key)
                    self._append(
                        EnrollmentRecord(
                            user_id=user_id,
                            community_id=community_id,
                            arm=self.arm_of(user_id),
                            enrolled_at=now,
                        ).to_json_line()
                    )
                self._log_event(EventKind.POST_START, user_id, community_id)
            elif submitting:
                self._sessions[key] = _Session(last_seen=now, ended=True)

    # -- operations ------------------------------------------------------

    def put_ruleset(self, community_id: str, document: dict) -> int:
        """Validate, persist, and atomically swap in a new ruleset version."""
        if not isinstance(document, dict):
            raise rules_mod.RulesetValidationError(
                [rules_mod.ValidationIssue(None, "ruleset document must be a JSON object")]
            )
        if document.get("community_id") not in (None, community_id):
            raise rules_mod.RulesetValidationError(
                [
                    rules_mod.ValidationIssue(
                        None,
                        f"document community_id {document.get('community_id')!r} "
                        f"does not match path {community_id!r}",
                    )
                ]
            )
        body = dict(document)
        body["community_id"] = community_id
        with self._lock:
            current = self._registry.get(community_id)
            version = (current.version if current else 0) + 1
            body["version"] = version
            ruleset = rules_mod.compile_ruleset(body)
            path = self.rulesets_dir / f"{community_id}.json"
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(body, indent=2) + "\n", encoding="utf-8")
            tmp.replace(path)
            self._registry[community_id] = ruleset
            self._append(
                json.dumps(
                    {
                        "kind": "RulesetUpdate",
                        "timestamp": self.clock(),
                        "community_id": community_id,
                        "version": version,
                        "rule_count": len(ruleset.rules),
                    },
                    separators=(",", ":"),
                )
            )
        return version

    def evaluate(
        self, community_id: str, user_id: str, title: str, body: str,
        event: rules_mod.TriggerEvent,
    ) -> EvaluateOutcome:
        self._check_payload(title, body)
        ruleset = self._snapshot(community_id)
        arm = self.arm_of(user_id)
        self._touch_session(user_id, community_id, submitting=False)
        if arm is Arm.CONTROL or not self.config.guidance_armed:
            return EvaluateOutcome(rules_mod.GuidanceResult.empty(event), arm, ruleset.version)
        draft = rules_mod.DraftState(community_id, user_id, title, body)
        return EvaluateOutcome(
            rules_mod.evaluate_draft(ruleset, draft, event), arm, ruleset.version
        )

    def submit(
        self, community_id: str, user_id: str, title: str, body: str
    ) -> SubmitOutcome:
        self._check_payload(title, body)
        ruleset = self._snapshot(community_id)
        arm = self.arm_of(user_id)
        self._touch_session(user_id, community_id, submitting=True)
        if arm is Arm.TREATMENT and self.config.guidance_armed:
            draft = rules_mod.DraftState(community_id, user_id, title, body)
            decision = rules_mod.attempt_submit(ruleset, draft)
        else:
            decision = rules_mod.SubmitDecision(
                accepted=True,
                guidance=rules_mod.GuidanceResult.empty(rules_mod.TriggerEvent.ON_SUBMIT),
            )
        if not decision.accepted:
            return SubmitOutcome(False, None, decision.guidance, arm, ruleset.version)
        post_id = f"{community_id}-{uuid.uuid4().hex[:12]}"
        extra = (
            {"flags": list(decision.guidance.review_flags)}
            if decision.guidance.review_flags
            else None
        )
        self._log_event(EventKind.POST_SUBMIT, user_id, community_id, post_id, extra)
        return SubmitOutcome(True, post_id, decision.guidance, arm, ruleset.version)

    def read_log(self) -> EventLog:
        self._events_file.flush()
        return EventLog.from_jsonl(self.events_path)

    def report(
        self, outcome: str | None, covariate: str | None, fmt: str = "text"
    ) -> str:
        """Effect report over the persisted event log.

        Byte-identical to running the analysis offline on the same log.
        """
        if covariate is not None and outcome is None:
            raise NotIdentifiableError("covariate given without an outcome")
        if outcome is not None and outcome not in OUTCOME_NAMES:
            raise NotIdentifiableError(f"unknown outcome {outcome!r}")
        if covariate is not None and covariate not in COVARIATE_NAMES:
            raise NotIdentifiableError(f"unknown covariate {covariate!r}")
        log = self.read_log()
        if len(log) == 0:
            raise NotIdentifiableError("event log is empty")
        table = compute_outcomes(log, self.config.follow_up_days)
        arms = set(table.arm.tolist())
        if arms != {0, 1}:
            raise NotIdentifiableError(
                "event log covers a single arm; effects are not identifiable"
            )
        try:
            if outcome is None:
                estimates = [ate_report(table, name) for name in OUTCOME_NAMES]
            elif covariate is None:
                estimates = [ate_report(table, outcome)]
            else:
                estimates = [interaction_report(table, outcome, covariate)]
        except ValueError as exc:  # estimation/identification failures
            raise NotIdentifiableError(str(exc)) from exc
        if fmt == "csv":
            return effect_table_csv(estimates)
        return effect_table_text(estimates, title="Relative treatment effects")

    def close(self) -> None:
        self._events_file.close()
