"""Deterministic report rendering: relative effects as text and CSV.

One layout for the full 13-outcome effect table, single estimates,
per-community breakdowns, and the funnel step-loss table.  Effects are
printed as percentages to one decimal with bracketed 95% intervals,
e.g. ``-5.7%; 95% CI [-7.8%, -3.5%]``.
"""

from __future__ import annotations

import csv
import io

from ..experiment.funnel import STEP_NAMES, FunnelTable
from ..experiment.outcomes import OUTCOME_SPECS
from .effects import EffectEstimate, PerCommunityReport

_SPEC_BY_KEY = {spec.key: spec for spec in OUTCOME_SPECS}


def _pct(value: float) -> str:
    rounded = round(100.0 * value, 1) + 0.0  # normalize -0.0
    return f"{rounded:.1f}%"


def format_effect(estimate: EffectEstimate) -> str:
    return (
        f"{_pct(estimate.effect)}; 95% CI "
        f"[{_pct(estimate.ci_low)}, {_pct(estimate.ci_high)}]"
    )


def format_p_value(p: float) -> str:
    return "<0.001" if p < 0.001 else f"{p:.3f}"


def effect_table_text(estimates: list[EffectEstimate], title: str | None = None) -> str:
    rows = []
    for e in estimates:
        spec = _SPEC_BY_KEY.get(e.outcome)
        rows.append(
            (
                str(spec.index) if spec else "-",
                spec.display if spec else e.outcome,
                format_effect(e),
                format_p_value(e.p_value),
                spec.group if spec else e.role,
            )
        )
    header = ("#", "Outcome", "Effect", "p-value", "Group")
    widths = [max(len(r[i]) for r in (header, *rows)) for i in range(len(header))]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def effect_table_csv(estimates: list[EffectEstimate]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["outcome", "coef_role", "effect_pct", "ci_low_pct", "ci_high_pct", "p_value", "n_obs"]
    )
    for e in estimates:
        writer.writerow(
            [
                e.outcome,
                e.role,
                f"{100.0 * e.effect:.4f}",
                f"{100.0 * e.ci_low:.4f}",
                f"{100.0 * e.ci_high:.4f}",
                f"{e.p_value:.6g}",
                e.n_obs,
            ]
        )
    return out.getvalue()


def per_community_text(report: PerCommunityReport) -> str:
    header = ("Community", "Effect", "p-value", "Significant")
    rows = [
        (
            ce.community_id,
            format_effect(ce.estimate),
            format_p_value(ce.estimate.p_value),
            "yes" if ce.significant else "no",
        )
        for ce in report.effects
    ]
    widths = [max(len(r[i]) for r in (header, *rows)) for i in range(len(header))]
    lines = [f"Per-community effects for {report.outcome}"]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    for community_id, reason in report.skipped:
        lines.append(f"skipped {community_id}: {reason}")
    return "\n".join(lines) + "\n"


def per_community_csv(report: PerCommunityReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["community_id", "outcome", "effect_pct", "ci_low_pct", "ci_high_pct",
         "p_value", "n_obs", "significant", "skipped_reason"]
    )
    for ce in report.effects:
        e = ce.estimate
        writer.writerow(
            [
                ce.community_id,
                e.outcome,
                f"{100.0 * e.effect:.4f}",
                f"{100.0 * e.ci_low:.4f}",
                f"{100.0 * e.ci_high:.4f}",
                f"{e.p_value:.6g}",
                e.n_obs,
                int(ce.significant),
                "",
            ]
        )
    for community_id, reason in report.skipped:
        writer.writerow([community_id, report.outcome, "", "", "", "", "", "", reason])
    return out.getvalue()


def funnel_text(table: FunnelTable) -> str:
    step_labels = {"starts": "starts", "submitted": "submitted", "non_removed": "non-removed"}
    arms = list(table.arms)
    lines = ["Posting funnel (count and share lost at each step)"]
    header = ["Posts"]
    for arm in arms:
        header += [f"{arm} #", f"{arm} lost"]
    rows = []
    for i, step in enumerate(STEP_NAMES):
        row = [step_labels[step]]
        for arm in arms:
            column = table.arms[arm]
            row.append(str(column.counts[i]))
            if i == 0:
                row.append("-")
            else:
                pct = column.loss_percentages[i - 1]
                row.append("-" if pct is None else f"{pct:.1f}%")
        rows.append(row)
    widths = [max(len(r[i]) for r in (header, *rows)) for i in range(len(header))]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def funnel_csv(table: FunnelTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["arm", "step", "count", "pct_lost_from_previous"])
    for arm, column in table.arms.items():
        for i, step in enumerate(STEP_NAMES):
            if i == 0:
                lost = ""
            else:
                pct = column.loss_percentages[i - 1]
                lost = "" if pct is None else f"{pct:.1f}"
            writer.writerow([arm, step, column.counts[i], lost])
    return out.getvalue()
