"""Compose-time moderation rules: types, document validation, evaluation.

A rule pairs an intervention (what happens), a condition (when it
applies), and a trigger (which part of the draft, on which events).
Rulesets are compiled once into an immutable form that is safe to share
across concurrent evaluators; evaluation is a pure function of
(ruleset, draft, event).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import regexengine


class ConditionKind(str, Enum):
    REGEX_PATTERN = "RegexPattern"
    KEYWORD_LIST = "KeywordList"


class Polarity(str, Enum):
    INCLUDED = "Included"   # fire when the match is present
    MISSING = "Missing"     # fire when the match is absent


class Scope(str, Enum):
    TITLE_ONLY = "TitleOnly"
    BODY_ONLY = "BodyOnly"
    TITLE_OR_BODY = "TitleOrBody"


class TriggerEvent(str, Enum):
    ON_EDIT = "OnEdit"
    ON_SUBMIT = "OnSubmit"


@dataclass(frozen=True)
class Condition:
    kind: ConditionKind
    polarity: Polarity
    pattern: str | None = None
    keywords: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Trigger:
    scope: Scope
    events: frozenset[TriggerEvent]


@dataclass(frozen=True)
class Intervention:
    message: str | None = None
    block_submission: bool = False
    flag_for_review: bool = False


@dataclass(frozen=True)
class Rule:
    name: str
    condition: Condition
    trigger: Trigger
    intervention: Intervention
    enabled: bool = True


@dataclass(frozen=True)
class DraftState:
    community_id: str
    user_id: str
    title: str
    body: str


@dataclass(frozen=True)
class FiredRule:
    rule_name: str
    part: str  # "title" or "body"


@dataclass(frozen=True)
class GuidanceResult:
    fired: tuple[FiredRule, ...]
    messages: tuple[str, ...]
    submission_blocked: bool
    review_flags: tuple[str, ...]
    event: TriggerEvent

    @classmethod
    def empty(cls, event: TriggerEvent) -> "GuidanceResult":
        return cls((), (), False, (), event)

    def to_dict(self) -> dict:
        return {
            "fired": [{"rule_name": f.rule_name, "part": f.part} for f in self.fired],
            "messages": list(self.messages),
            "submission_blocked": self.submission_blocked,
            "review_flags": list(self.review_flags),
            "event": self.event.value,
        }


@dataclass(frozen=True)
class SubmitDecision:
    accepted: bool
    guidance: GuidanceResult


@dataclass(frozen=True)
class ValidationIssue:
    rule_name: str | None
    reason: str

    def __str__(self) -> str:
        where = self.rule_name if self.rule_name is not None else "<document>"
        return f"{where}: {self.reason}"


class RulesetValidationError(ValueError):
    """Raised by compile_ruleset; carries every problem found, not just the first."""

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


class CommunityMismatchError(ValueError):
    def __init__(self, expected: str, got: str):
        super().__init__(f"draft belongs to community {got!r}, ruleset to {expected!r}")


@dataclass(frozen=True)
class CompiledCondition:
    condition: Condition
    compiled_pattern: regexengine.CompiledPattern | None
    folded_keywords: tuple[str, ...] | None


@dataclass(frozen=True)
class CompiledRule:
    rule: Rule
    condition: CompiledCondition

    @property
    def name(self) -> str:
        return self.rule.name


@dataclass(frozen=True)
class CompiledRuleSet:
    community_id: str
    version: int
    rules: tuple[CompiledRule, ...]


def condition_matches(condition: CompiledCondition, text: str) -> bool:
    """Raw match presence in ``text``, before polarity is applied.

    Regex conditions search unanchored (patterns carry their own
    anchors); keyword conditions are case-insensitive substring tests.
    """
    if condition.compiled_pattern is not None:
        return condition.compiled_pattern.search(text)
    folded = text.casefold()
    return any(kw in folded for kw in condition.folded_keywords)


def _rule_fires_on(compiled: CompiledRule, text: str) -> bool:
    present = condition_matches(compiled.condition, text)
    if compiled.rule.condition.polarity is Polarity.INCLUDED:
        return present
    return not present


_SCOPE_PARTS = {
    Scope.TITLE_ONLY: ("title",),
    Scope.BODY_ONLY: ("body",),
    Scope.TITLE_OR_BODY: ("title", "body"),
}


def evaluate_draft(
    ruleset: CompiledRuleSet, draft: DraftState, event: TriggerEvent
) -> GuidanceResult:
    """Evaluate every enabled rule triggered by ``event`` against the draft.

    Scoped parts are tested independently; for TitleOrBody the rule
    fires if the polarity-adjusted condition holds on either part.
    """
    if draft.community_id != ruleset.community_id:
        raise CommunityMismatchError(ruleset.community_id, draft.community_id)
    fired: list[FiredRule] = []
    messages: list[str] = []
    seen_messages: set[str] = set()
    blocked = False
    flags: list[str] = []
    parts = {"title": draft.title, "body": draft.body}
    for compiled in ruleset.rules:
        rule = compiled.rule
        if not rule.enabled or event not in rule.trigger.events:
            continue
        rule_fired = False
        for part in _SCOPE_PARTS[rule.trigger.scope]:
            if _rule_fires_on(compiled, parts[part]):
                fired.append(FiredRule(rule.name, part))
                rule_fired = True
        if not rule_fired:
            continue
        iv = rule.intervention
        if iv.message is not None and iv.message not in seen_messages:
            seen_messages.add(iv.message)
            messages.append(iv.message)
        if iv.block_submission:
            blocked = True
        if iv.flag_for_review:
            flags.append(rule.name)
    return GuidanceResult(tuple(fired), tuple(messages), blocked, tuple(flags), event)


def attempt_submit(ruleset: CompiledRuleSet, draft: DraftState) -> SubmitDecision:
    """Submission-time gate: blocked drafts are rejected, flags pass through."""
    guidance = evaluate_draft(ruleset, draft, TriggerEvent.ON_SUBMIT)
    return SubmitDecision(accepted=not guidance.submission_blocked, guidance=guidance)


# --- ruleset document parsing -------------------------------------------------

_TOP_FIELDS = {"community_id", "version", "rules"}
_RULE_FIELDS = {"name", "condition", "trigger", "intervention", "enabled"}
_CONDITION_FIELDS = {"kind", "pattern", "keywords", "polarity"}
_TRIGGER_FIELDS = {"scope", "events"}
_INTERVENTION_FIELDS = {"message", "block_submission", "flag_for_review"}


class _RuleIssues:
    def __init__(self, issues: list[ValidationIssue], rule_name: str | None):
        self.issues = issues
        self.rule_name = rule_name

    def add(self, reason: str) -> None:
        self.issues.append(ValidationIssue(self.rule_name, reason))


def _parse_enum(enum_cls, value, label: str, out: _RuleIssues):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        out.add(f"{label} must be one of {allowed}, got {value!r}")
        return None


def _parse_condition(obj, out: _RuleIssues) -> Condition | None:
    if not isinstance(obj, dict):
        out.add("condition must be an object")
        return None
    unknown = set(obj) - _CONDITION_FIELDS
    if unknown:
        out.add(f"unknown condition fields: {sorted(unknown)}")
        return None
    kind = _parse_enum(ConditionKind, obj.get("kind"), "condition.kind", out)
    polarity = _parse_enum(Polarity, obj.get("polarity"), "condition.polarity", out)
    if kind is None or polarity is None:
        return None
    pattern = obj.get("pattern")
    keywords = obj.get("keywords")
    if kind is ConditionKind.REGEX_PATTERN:
        if keywords is not None:
            out.add("RegexPattern condition must not carry keywords")
            return None
        if not isinstance(pattern, str):
            out.add("RegexPattern condition requires a string pattern")
            return None
        return Condition(kind=kind, polarity=polarity, pattern=pattern)
    if pattern is not None:
        out.add("KeywordList condition must not carry a pattern")
        return None
    if not isinstance(keywords, list) or not keywords:
        out.add("KeywordList condition requires a non-empty keywords list")
        return None
    bad = [k for k in keywords if not isinstance(k, str) or not k]
    if bad:
        out.add("keywords must be non-empty strings")
        return None
    return Condition(kind=kind, polarity=polarity, keywords=tuple(keywords))


def _parse_trigger(obj, out: _RuleIssues) -> Trigger | None:
    if not isinstance(obj, dict):
        out.add("trigger must be an object")
        return None
    unknown = set(obj) - _TRIGGER_FIELDS
    if unknown:
        out.add(f"unknown trigger fields: {sorted(unknown)}")
        return None
    scope = _parse_enum(Scope, obj.get("scope"), "trigger.scope", out)
    events_raw = obj.get("events")
    if not isinstance(events_raw, list) or not events_raw:
        out.add("trigger.events must be a non-empty list")
        return None
    events = set()
    for item in events_raw:
        ev = _parse_enum(TriggerEvent, item, "trigger event", out)
        if ev is None:
            return None
        events.add(ev)
    if scope is None:
        return None
    return Trigger(scope=scope, events=frozenset(events))


def _parse_intervention(obj, out: _RuleIssues) -> Intervention | None:
    if not isinstance(obj, dict):
        out.add("intervention must be an object")
        return None
    unknown = set(obj) - _INTERVENTION_FIELDS
    if unknown:
        out.add(f"unknown intervention fields: {sorted(unknown)}")
        return None
    message = obj.get("message")
    if message is not None and (not isinstance(message, str) or not message):
        out.add("intervention.message must be a non-empty string when present")
        return None
    block = obj.get("block_submission", False)
    flag = obj.get("flag_for_review", False)
    if not isinstance(block, bool) or not isinstance(flag, bool):
        out.add("block_submission and flag_for_review must be booleans")
        return None
    iv = Intervention(message=message, block_submission=block, flag_for_review=flag)
    if message is None and not block and not flag:
        out.add("intervention has no observable effect (no message, block, or flag)")
        return None
    if block and message is None:
        out.add("a blocking rule must carry a message (silent blocks are not allowed)")
        return None
    return iv


def compile_ruleset(document: dict) -> CompiledRuleSet:
    """Validate and compile a ruleset document.

    Raises RulesetValidationError listing every problem found; each
    issue names the offending rule.  Every regex compiles exactly once.
    """
    issues: list[ValidationIssue] = []
    doc_issues = _RuleIssues(issues, None)
    if not isinstance(document, dict):
        doc_issues.add("ruleset document must be a JSON object")
        raise RulesetValidationError(issues)
    unknown = set(document) - _TOP_FIELDS
    if unknown:
        doc_issues.add(f"unknown fields: {sorted(unknown)}")
    community_id = document.get("community_id")
    if not isinstance(community_id, str) or not community_id:
        doc_issues.add("community_id must be a non-empty string")
        community_id = ""
    version = document.get("version")
    if not isinstance(version, int) or isinstance(version, bool) or version < 0:
        doc_issues.add("version must be a non-negative integer")
        version = 0
    rules_raw = document.get("rules")
    if not isinstance(rules_raw, list):
        doc_issues.add("rules must be a list")
        rules_raw = []

    compiled: list[CompiledRule] = []
    seen_names: dict[str, int] = {}
    for index, rule_obj in enumerate(rules_raw):
        if not isinstance(rule_obj, dict):
            issues.append(ValidationIssue(None, f"rule #{index} must be an object"))
            continue
        name = rule_obj.get("name")
        if not isinstance(name, str) or not name:
            issues.append(ValidationIssue(None, f"rule #{index} needs a non-empty name"))
            continue
        out = _RuleIssues(issues, name)
        if name in seen_names:
            out.add(f"duplicate rule name (also rule #{seen_names[name]})")
            continue
        seen_names[name] = index
        unknown = set(rule_obj) - _RULE_FIELDS
        if unknown:
            out.add(f"unknown rule fields: {sorted(unknown)}")
            continue
        condition = _parse_condition(rule_obj.get("condition"), out)
        trigger = _parse_trigger(rule_obj.get("trigger"), out)
        intervention = _parse_intervention(rule_obj.get("intervention"), out)
        enabled = rule_obj.get("enabled", True)
        if not isinstance(enabled, bool):
            out.add("enabled must be a boolean")
            continue
        if condition is None or trigger is None or intervention is None:
            continue
        compiled_pattern = None
        folded = None
        if condition.kind is ConditionKind.REGEX_PATTERN:
            try:
                compiled_pattern = regexengine.compile(condition.pattern)
            except regexengine.RegexSyntaxError as exc:
                out.add(f"regex does not compile: {exc}")
                continue
        else:
            folded = tuple(kw.casefold() for kw in condition.keywords)
        rule = Rule(
            name=name,
            condition=condition,
            trigger=trigger,
            intervention=intervention,
            enabled=enabled,
        )
        compiled.append(
            CompiledRule(rule, CompiledCondition(condition, compiled_pattern, folded))
        )

    if issues:
        raise RulesetValidationError(issues)
    return CompiledRuleSet(
        community_id=community_id, version=version, rules=tuple(compiled)
    )
