"""Operator command line: validate rulesets, evaluate drafts, run
simulations, produce effect reports, and launch the service.

Every subcommand is a thin shell over the library operations, so CLI
output always matches direct calls.  Exit codes: 0 success, 1
validation or expectation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import rules as rules_mod
from .analysis import (
    ate_report,
    effect_table_csv,
    effect_table_text,
    funnel_csv,
    funnel_text,
    interaction_report,
    per_community_csv,
    per_community_effects,
    per_community_text,
)
from .experiment import (
    EventLog,
    OUTCOME_NAMES,
    compute_outcomes,
    funnel_stats,
    load_config,
    simulate_experiment,
)
from .experiment.outcomes import COVARIATE_NAMES

ACTIONS = ("allow", "block", "message", "flag")


def _load_ruleset(path: str) -> rules_mod.CompiledRuleSet:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    return rules_mod.compile_ruleset(document)


def _action_of(decision: rules_mod.SubmitDecision) -> str:
    guidance = decision.guidance
    if not decision.accepted:
        return "block"
    if guidance.review_flags:
        return "flag"
    if guidance.fired:
        return "message"
    return "allow"


def cmd_validate(args) -> int:
    try:
        ruleset = _load_ruleset(args.ruleset)
    except OSError as exc:
        print(f"error: cannot read ruleset: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: ruleset is not valid JSON: {exc}", file=sys.stderr)
        return 1
    except rules_mod.RulesetValidationError as exc:
        for issue in exc.issues:
            print(issue, file=sys.stderr)
        return 1
    print(
        f"ok: {ruleset.community_id} version {ruleset.version} "
        f"({len(ruleset.rules)} rules)"
    )
    return 0


def cmd_eval(args) -> int:
    try:
        ruleset = _load_ruleset(args.ruleset)
    except (OSError, json.JSONDecodeError, rules_mod.RulesetValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.stdin:
        draft_obj = json.loads(sys.stdin.read())
        title = draft_obj.get("title", "")
        body = draft_obj.get("body", "")
    else:
        title, body = args.title, args.body
    draft = rules_mod.DraftState(ruleset.community_id, args.user, title, body)
    if args.event == "OnSubmit":
        decision = rules_mod.attempt_submit(ruleset, draft)
    else:
        guidance = rules_mod.evaluate_draft(
            ruleset, draft, rules_mod.TriggerEvent.ON_EDIT
        )
        decision = rules_mod.SubmitDecision(not guidance.submission_blocked, guidance)
    print(
        json.dumps(
            {"action": _action_of(decision), **decision.guidance.to_dict()}, indent=2
        )
    )
    return 0


def cmd_corpus(args) -> int:
    try:
        ruleset = _load_ruleset(args.ruleset)
    except (OSError, json.JSONDecodeError, rules_mod.RulesetValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        lines = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"error: cannot read corpus: {exc}", file=sys.stderr)
        return 1

    total = blocked = flagged = messaged = mismatches = 0
    hits: dict[str, int] = {}
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            print(f"error: corpus line {number}: {exc}", file=sys.stderr)
            return 1
        label = entry.get("label")
        if label is not None and label not in ACTIONS:
            print(
                f"error: corpus line {number}: label must be one of {ACTIONS}",
                file=sys.stderr,
            )
            return 1
        draft = rules_mod.DraftState(
            ruleset.community_id, "corpus", entry.get("title", ""), entry.get("body", "")
        )
        decision = rules_mod.attempt_submit(ruleset, draft)
        action = _action_of(decision)
        total += 1
        blocked += action == "block"
        flagged += action == "flag"
        messaged += action == "message"
        for fired in decision.guidance.fired:
            hits[fired.rule_name] = hits.get(fired.rule_name, 0) + 1
        verdict = f"{number:4d}  {action:7s}"
        if label is not None and label != action:
            mismatches += 1
            verdict += f"  MISMATCH (expected {label})"
        print(verdict)

    def pct(k: int) -> str:
        return "0.0%" if total == 0 else f"{100.0 * k / total:.1f}%"

    print(f"entries: {total}")
    print(f"block rate: {pct(blocked)}  flag rate: {pct(flagged)}  message rate: {pct(messaged)}")
    for name in sorted(hits):
        print(f"rule hits: {name}: {hits[name]}")
    if mismatches:
        print(f"label mismatches: {mismatches}", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args) -> int:
    try:
        config = load_config(args.config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        import dataclasses

        config = dataclasses.replace(config, seed=args.seed)
    result = simulate_experiment(config)
    result.log.to_jsonl(args.out)
    print(f"wrote {len(result.log):,} events for {result.log.n_users:,} users to {args.out}")
    if args.outcomes_csv:
        table = compute_outcomes(result.log, config.follow_up_days)
        table.to_csv(args.outcomes_csv)
        print(f"wrote outcome records to {args.outcomes_csv}")
    return 0


def _report_paths(out: str | None, stem: str) -> tuple[Path, Path]:
    if out:
        base = Path(out)
        base.mkdir(parents=True, exist_ok=True)
        return base / f"{stem}.txt", base / f"{stem}.csv"
    tag = time.strftime("%Y%m%d-%H%M%S")
    return Path(f"draftguide-{stem}-{tag}.txt"), Path(f"draftguide-{stem}-{tag}.csv")


def cmd_analyze(args) -> int:
    try:
        log = EventLog.from_jsonl(args.log)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read log: {exc}", file=sys.stderr)
        return 1
    table = compute_outcomes(log, args.follow_up_days)
    for diagnostic in table.rejected:
        print(f"warning: {diagnostic}", file=sys.stderr)

    wants_effects = args.table2 or args.outcome or not (args.funnel or args.per_community)
    try:
        if wants_effects:
            if args.outcome and not args.table2:
                if args.covariate:
                    estimates = [interaction_report(table, args.outcome, args.covariate)]
                else:
                    estimates = [ate_report(table, args.outcome)]
            else:
                estimates = [ate_report(table, name) for name in OUTCOME_NAMES]
            text = effect_table_text(estimates, title="Relative treatment effects")
            txt_path, csv_path = _report_paths(args.out, "effects")
            txt_path.write_text(text, encoding="utf-8")
            csv_path.write_text(effect_table_csv(estimates), encoding="utf-8")
            print(text, end="")
            print(f"wrote {txt_path} and {csv_path}")
        if args.funnel:
            funnel = funnel_stats(table)
            text = funnel_text(funnel)
            txt_path, csv_path = _report_paths(args.out, "funnel")
            txt_path.write_text(text, encoding="utf-8")
            csv_path.write_text(funnel_csv(funnel), encoding="utf-8")
            print(text, end="")
            print(f"wrote {txt_path} and {csv_path}")
        if args.per_community:
            if not args.outcome:
                print("error: --per-community needs --outcome", file=sys.stderr)
                return 2
            report = per_community_effects(table, args.outcome)
            text = per_community_text(report)
            txt_path, csv_path = _report_paths(args.out, "per_community")
            txt_path.write_text(text, encoding="utf-8")
            csv_path.write_text(per_community_csv(report), encoding="utf-8")
            print(text, end="")
            print(f"wrote {txt_path} and {csv_path}")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app, load_service_config

    try:
        config = load_service_config(args.config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.host:
        import dataclasses

        config = dataclasses.replace(config, host=args.host)
    if args.port:
        import dataclasses

        config = dataclasses.replace(config, port=args.port)
    app = build_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="draftguide",
        description="Compose-time moderation rules, experiment simulation, and effect reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="compile a ruleset document and report problems")
    p.add_argument("ruleset", help="path to a ruleset JSON document")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate one draft against a ruleset")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--title", default="")
    p.add_argument("--body", default="")
    p.add_argument("--user", default="cli")
    p.add_argument("--event", choices=["OnEdit", "OnSubmit"], default="OnSubmit")
    p.add_argument("--stdin", action="store_true", help="read {title, body} JSON from stdin")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("corpus", help="evaluate a labeled draft corpus against a ruleset")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--corpus", required=True, help="JSON-Lines of {title, body, label?}")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("simulate", help="run the experiment simulator")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True, help="output event log (JSON-Lines)")
    p.add_argument("--outcomes-csv", default=None, help="also write per-user outcome records")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="estimate effects from an event log")
    p.add_argument("--log", required=True, help="event log (JSON-Lines)")
    p.add_argument("--outcome", choices=OUTCOME_NAMES, default=None)
    p.add_argument("--covariate", choices=COVARIATE_NAMES, default=None)
    p.add_argument("--table2", action="store_true", help="all 13 outcome rows in one table")
    p.add_argument("--funnel", action="store_true", help="posting funnel step losses per arm")
    p.add_argument("--per-community", action="store_true")
    p.add_argument("--follow-up-days", type=int, default=28)
    p.add_argument("--out", default=None, help="directory for report files (default: cwd, timestamped)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the moderation service")
    p.add_argument("--config", default=None, help="service config JSON")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
