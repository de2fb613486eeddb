"""Randomized-experiment simulator for the post-creation funnel.

Each enrolled user gets a deterministic arm (hash assignment), a
community, covariates, and an enrollment day; every follow-up day they
may start a draft, submit it, and have it removed reactively or accrue
engagement.  Treated users' stage rates are scaled by the configured
multipliers, which makes every outcome's true mean ratio available in
closed form (``expected_mean_ratios``) for recovery tests.

With guidance armed, treated users' drafts are additionally gated by
the community ruleset at submit time: blocked drafts are abandoned,
repaired (resubmitted clean), or circumvented (resubmitted with the
pattern dodged, which the reactive check then also misses).  Every
verdict comes from the rule engine's submission gate; verdicts are
cached per draft archetype since the gate is pure.

All randomness is counter-based on (seed, channel, user, day): results
are byte-identical for a fixed config regardless of evaluation order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import rules as rules_mod
from .assign import Arm, assign_arm
from .config import MULTIPLIER_CHANNELS, ConfigError, SimConfig
from .events import DAY_SECONDS, EventKind, EventLog, KIND_CODES
from .substreams import Channel, bernoulli, poisson, uniforms

# Draft archetypes used when guidance is armed.  Breaking drafts are
# shaped to trip common blocking rules (statement titles, URLs, short
# bodies); clean drafts are shaped to pass them.
_BREAKING_DRAFTS = (
    ("Check out my new setup", "pics inside"),
    ("I finally beat the campaign", "so good"),
    ("Selling my old parts", "see www.shady.example. for the list"),
    ("This game is amazing", "short"),
    ("Rate my build", "parts list coming soon"),
    ("My honest review of the update", "tl;dr"),
    ("Just got this in the mail today", "hype"),
    ("Look at this http://pic.example. I took", "wow"),
)
_CLEAN_DRAFTS = (
    ("What upgrade should I prioritize first?", "I have a mid-range machine and a modest budget, any advice appreciated."),
    ("Is this a good deal for the price?", "Saw a listing today and want a second opinion before I commit to it."),
    ("How do you organize a backlog properly?", "Mine has grown out of control this year and I would love a sane system."),
    ("Which accessory made the biggest difference for you?", "Looking for quality-of-life improvements that are actually worth it."),
    ("What should a newcomer know before starting?", "Picking this hobby up next month and want to avoid rookie mistakes."),
    ("Why does everyone recommend the older model?", "Trying to understand the tradeoffs before choosing between the two."),
    ("When is the best time of year to buy?", "I can wait a few months if prices usually drop around the holidays."),
    ("Where do you find reliable comparisons?", "Most reviews I find feel sponsored and I want something trustworthy."),
)


@dataclass
class SimResult:
    log: EventLog
    config: SimConfig
    mechanics: dict[str, int] = field(default_factory=dict)


def _community_ids(n: int) -> list[str]:
    return [f"c{j:03d}" for j in range(n)]


def _user_ids(n: int) -> list[str]:
    width = max(6, len(str(n - 1)))
    return [f"u{i:0{width}d}" for i in range(n)]


def _per_user_multipliers(config: SimConfig, treated: np.ndarray, covariate_vectors) -> dict:
    """Per-user multiplier vector for every channel (1.0 for control)."""
    n = treated.shape[0]
    out = {}
    stratum_by_channel = {se.channel: se for se in config.stratum_effects}
    for channel in MULTIPLIER_CHANNELS:
        se = stratum_by_channel.get(channel)
        if se is None:
            value = np.full(n, config.multiplier(channel))
        else:
            cov = covariate_vectors[se.covariate].astype(bool)
            value = np.where(cov, se.when_true, se.when_false)
        out[channel] = np.where(treated, value, 1.0)
    return out


def _load_armed_rulesets(config: SimConfig, community_ids: list[str]):
    """Compile each community's ruleset and cache archetype verdicts.

    Returns (blocked, fired) uint8 arrays of shape
    [n_communities, 2, n_archetypes]; index 1 on axis 1 = breaking.
    """
    n_arch = len(_BREAKING_DRAFTS)
    blocked = np.zeros((len(community_ids), 2, n_arch), dtype=np.uint8)
    fired = np.zeros_like(blocked)
    for j, cid in enumerate(community_ids):
        path = config.guidance.ruleset_paths.get(cid, config.guidance.default_ruleset_path)
        if path is None:
            continue
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        document["community_id"] = cid
        ruleset = rules_mod.compile_ruleset(document)
        for b, pool in ((0, _CLEAN_DRAFTS), (1, _BREAKING_DRAFTS)):
            for k, (title, body) in enumerate(pool):
                draft = rules_mod.DraftState(cid, "sim", title, body)
                decision = rules_mod.attempt_submit(ruleset, draft)
                blocked[j, b, k] = not decision.accepted
                fired[j, b, k] = bool(decision.guidance.fired)
    return blocked, fired


def simulate_experiment(config: SimConfig) -> SimResult:
    config.validate()
    seed = config.seed
    n = config.n_users
    nc = config.n_communities
    user_ids = _user_ids(n)
    community_ids = _community_ids(nc)
    users = np.arange(n, dtype=np.int64)
    comm_units = np.arange(nc, dtype=np.int64)

    treated = np.array(
        [assign_arm(uid, config.salt, config.p_treat) is Arm.TREATMENT for uid in user_ids],
        dtype=bool,
    )
    community = (uniforms(seed, Channel.COMMUNITY, users, 0) * nc).astype(np.int32)
    enroll_day = (uniforms(seed, Channel.ENROLL_DAY, users, 0) * config.enrollment_days).astype(np.int32)

    cov = config.covariates
    newcomer = bernoulli(seed, Channel.COV_NEWCOMER, users, 0, cov.p_newcomer)
    low_activity = bernoulli(seed, Channel.COV_LOW_ACTIVITY, users, 0, cov.p_low_activity)
    comm_high_rules = bernoulli(seed, Channel.COMM_HIGH_RULES, comm_units, 0, cov.share_high_rule_count)
    comm_high_automod = bernoulli(seed, Channel.COMM_HIGH_AUTOMOD, comm_units, 0, cov.share_high_automod)

    # Pre-enrollment history consistent with the drawn covariate flags;
    # outcome aggregation re-derives the flags from these via thresholds.
    u_visits = uniforms(seed, Channel.PRE_VISITS, users, 0)
    pre_visits = np.where(newcomer, 0, 1 + (u_visits * 20).astype(np.int32)).astype(np.int32)
    u_votes = uniforms(seed, Channel.PRE_VOTES, users, 0)
    pre_votes = np.where(
        low_activity, (u_votes * 4).astype(np.int32), 4 + (u_votes * 30).astype(np.int32)
    ).astype(np.int32)
    u_rules = uniforms(seed, Channel.COMM_RULE_COUNT, comm_units, 0)
    comm_rules = np.where(
        comm_high_rules, 8 + (u_rules * 25).astype(np.int32), 2 + (u_rules * 6).astype(np.int32)
    ).astype(np.int32)
    u_share = uniforms(seed, Channel.COMM_AUTOMOD_SHARE, comm_units, 0)
    comm_share = np.where(comm_high_automod, 0.081 + 0.269 * u_share, 0.01 + 0.069 * u_share)

    covariate_vectors = {
        "newcomer": newcomer,
        "low_activity": low_activity,
        "high_rule_count": comm_high_rules[community],
        "high_automod": comm_high_automod[community],
    }
    mult = _per_user_multipliers(config, treated, covariate_vectors)

    r = config.rates
    p_start_u = r.p_start_session * mult["start_session"]
    p_submit_u = r.p_submit_given_start * mult["submit"]
    p_break_u = r.p_rule_breaking * mult["rule_breaking"]
    p_auto_u = r.p_automod_removal_given_breaking * mult["automod_removal"]
    p_mod_break_u = r.p_mod_removal_given_breaking * mult["mod_removal"]
    p_mod_clean_u = r.p_mod_removal_given_clean * mult["mod_removal"]
    p_mod_circ_u = config.guidance.p_mod_removal_given_circumvented * mult["mod_removal"]
    p_admin_u = r.p_admin_removal * mult["admin_removal"]
    lam_rep_u = r.reports_per_post * mult["reports"]
    lam_com_u = r.comments_per_surviving_post * mult["comments"]
    lam_view_u = r.views_per_surviving_post * mult["views"]
    lam_up_u = r.upvotes_per_surviving_post * mult["upvotes"]
    p_active_u = r.p_active_day * mult["active_days"]
    p_voting_u = r.p_voting_day * mult["voting_days"]
    p_contrib_u = r.p_contribution_day * mult["contribution_days"]

    armed = config.guidance.mode == "armed"
    if armed:
        verdict_blocked, verdict_fired = _load_armed_rulesets(config, community_ids)
        n_arch = verdict_blocked.shape[2]
    p_abandon = config.guidance.p_abandon_given_blocked
    p_repair = config.guidance.p_repair_given_blocked

    mechanics = {
        "treated_breaking_drafts": 0,
        "blocked_drafts": 0,
        "abandoned": 0,
        "repaired": 0,
        "circumvented": 0,
        "guidance_verdicts": 0,
    }

    chunks: list[tuple[int, np.ndarray, np.ndarray, np.ndarray]] = []  # kind, users, ts, post
    post_user: list[np.ndarray] = []
    post_day: list[np.ndarray] = []
    n_posts = 0
    day_epoch = config.start_epoch + enroll_day.astype(np.int64) * DAY_SECONDS

    def emit(kind: EventKind, user_subset: np.ndarray, day: int, post_ref: np.ndarray | None = None):
        ts = day_epoch[user_subset] + day * DAY_SECONDS
        if post_ref is None:
            post_ref = np.full(user_subset.shape[0], -1, dtype=np.int32)
        chunks.append((KIND_CODES[kind], user_subset.astype(np.int32), ts, post_ref))

    for day in range(config.follow_up_days):
        starters = np.flatnonzero(bernoulli(seed, Channel.SESSION, users, day, p_start_u))
        if starters.size:
            emit(EventKind.POST_START, starters, day)
            breaking = bernoulli(seed, Channel.BREAKING, starters, day, p_break_u[starters])
            s_treated = treated[starters]

            if armed:
                arch = (uniforms(seed, Channel.ARCHETYPE, starters, day) * n_arch).astype(np.int32)
                c_idx = community[starters]
                would_block = verdict_blocked[c_idx, breaking.astype(np.int32), arch].astype(bool)
                would_fire = verdict_fired[c_idx, breaking.astype(np.int32), arch].astype(bool)
                mechanics["guidance_verdicts"] += int(s_treated.sum())
                blocked = s_treated & would_block
                u_block = uniforms(seed, Channel.BLOCK_OUTCOME, starters, day)
                abandoned = blocked & (u_block < p_abandon)
                repaired = blocked & ~abandoned & (u_block < p_abandon + p_repair)
                circumvented = blocked & ~abandoned & ~repaired
                plain_submit = ~blocked & bernoulli(
                    seed, Channel.SUBMIT, starters, day, p_submit_u[starters]
                )
                submits = plain_submit | repaired | circumvented
                post_breaking = breaking & ~repaired
                # Reactive check sees the submitted text: repaired and
                # circumvented texts no longer match the conditions.
                automod_candidate = would_fire & ~blocked
                mechanics["treated_breaking_drafts"] += int((s_treated & breaking).sum())
                mechanics["blocked_drafts"] += int(blocked.sum())
                mechanics["abandoned"] += int(abandoned.sum())
                mechanics["repaired"] += int(repaired.sum())
                mechanics["circumvented"] += int(circumvented.sum())
            else:
                submits = bernoulli(seed, Channel.SUBMIT, starters, day, p_submit_u[starters])
                post_breaking = breaking
                automod_candidate = breaking
                circumvented = np.zeros(starters.shape[0], dtype=bool)

            sub_idx = np.flatnonzero(submits)
            if sub_idx.size:
                sub_users = starters[sub_idx]
                refs = np.arange(n_posts, n_posts + sub_users.shape[0], dtype=np.int32)
                n_posts += sub_users.shape[0]
                post_user.append(sub_users.astype(np.int32))
                post_day.append(np.full(sub_users.shape[0], day, dtype=np.int16))
                emit(EventKind.POST_SUBMIT, sub_users, day, refs)

                s_breaking = post_breaking[sub_idx]
                s_candidate = automod_candidate[sub_idx]
                s_circ = circumvented[sub_idx]
                auto_rm = s_candidate & bernoulli(
                    seed, Channel.AUTOMOD, sub_users, day, p_auto_u[sub_users]
                )
                mod_p = np.where(
                    s_circ,
                    p_mod_circ_u[sub_users],
                    np.where(s_breaking, p_mod_break_u[sub_users], p_mod_clean_u[sub_users]),
                )
                mod_rm = ~auto_rm & bernoulli(seed, Channel.MOD, sub_users, day, mod_p)
                admin_rm = (
                    ~auto_rm & ~mod_rm
                    & bernoulli(seed, Channel.ADMIN, sub_users, day, p_admin_u[sub_users])
                )
                for kind, mask in (
                    (EventKind.AUTOMOD_REMOVAL, auto_rm),
                    (EventKind.MOD_REMOVAL, mod_rm),
                    (EventKind.ADMIN_REMOVAL, admin_rm),
                ):
                    if mask.any():
                        emit(kind, sub_users[mask], day, refs[mask])

                n_rep = poisson(seed, Channel.REPORTS, sub_users, day, lam_rep_u[sub_users])
                if n_rep.sum():
                    emit(
                        EventKind.REPORT,
                        np.repeat(sub_users, n_rep),
                        day,
                        np.repeat(refs, n_rep),
                    )
                surviving = ~auto_rm & ~mod_rm & ~admin_rm
                if surviving.any():
                    sv_users = sub_users[surviving]
                    sv_refs = refs[surviving]
                    for kind, channel, lam in (
                        (EventKind.RECEIVED_COMMENT, Channel.COMMENTS, lam_com_u),
                        (EventKind.RECEIVED_VIEW, Channel.VIEWS, lam_view_u),
                        (EventKind.RECEIVED_UPVOTE, Channel.UPVOTES, lam_up_u),
                    ):
                        count = poisson(seed, channel, sv_users, day, lam[sv_users])
                        if count.sum():
                            emit(kind, np.repeat(sv_users, count), day, np.repeat(sv_refs, count))

        for kind, channel, p in (
            (EventKind.CONTRIBUTION_DAY, Channel.CONTRIBUTION_DAY, p_contrib_u),
            (EventKind.VOTING_DAY, Channel.VOTING_DAY, p_voting_u),
            (EventKind.ACTIVE_DAY, Channel.ACTIVE_DAY, p_active_u),
        ):
            active = np.flatnonzero(bernoulli(seed, channel, users, day, p))
            if active.size:
                emit(kind, active, day)

    if chunks:
        ev_kind = np.concatenate([np.full(u.shape[0], k, dtype=np.uint8) for k, u, _, _ in chunks])
        ev_user = np.concatenate([u for _, u, _, _ in chunks])
        ev_ts = np.concatenate([t for _, _, t, _ in chunks])
        ev_post = np.concatenate([p for _, _, _, p in chunks])
    else:
        ev_kind = np.zeros(0, dtype=np.uint8)
        ev_user = np.zeros(0, dtype=np.int32)
        ev_ts = np.zeros(0, dtype=np.int64)
        ev_post = np.zeros(0, dtype=np.int32)

    if post_user:
        all_post_user = np.concatenate(post_user)
        all_post_day = np.concatenate(post_day)
        post_labels = [
            f"{user_ids[u]}-d{enroll_day[u] + d}"
            for u, d in zip(all_post_user, all_post_day)
        ]
    else:
        post_labels = []

    log = EventLog(
        user_ids=user_ids,
        community_ids=community_ids,
        user_community=community,
        arm=treated.astype(np.uint8),
        enrolled=np.ones(n, dtype=bool),
        enrolled_at=config.start_epoch + enroll_day.astype(np.int64) * DAY_SECONDS,
        pre_visits=pre_visits,
        pre_votes=pre_votes,
        comm_rules=comm_rules,
        comm_automod_share=comm_share,
        ev_kind=ev_kind,
        ev_user=ev_user,
        ev_ts=ev_ts,
        ev_post=ev_post,
        post_labels=post_labels,
    )
    return SimResult(log=log, config=config, mechanics=mechanics)


def _expected_user_means(config: SimConfig, treated: bool, overrides=None) -> dict[str, float]:
    def m(channel: str) -> float:
        if not treated:
            return 1.0
        if overrides and channel in overrides:
            return overrides[channel]
        return config.multiplier(channel)

    r = config.rates
    F = config.follow_up_days
    starts = F * r.p_start_session * m("start_session")
    submits = starts * r.p_submit_given_start * m("submit")
    p_break = r.p_rule_breaking * m("rule_breaking")
    breaking = submits * p_break
    clean = submits * (1.0 - p_break)
    p_auto = r.p_automod_removal_given_breaking * m("automod_removal")
    automod = breaking * p_auto
    p_mod_b = r.p_mod_removal_given_breaking * m("mod_removal")
    p_mod_c = r.p_mod_removal_given_clean * m("mod_removal")
    mod = breaking * (1.0 - p_auto) * p_mod_b + clean * p_mod_c
    reach_admin = breaking * (1.0 - p_auto) * (1.0 - p_mod_b) + clean * (1.0 - p_mod_c)
    p_admin = r.p_admin_removal * m("admin_removal")
    admin = reach_admin * p_admin
    non_removed = reach_admin * (1.0 - p_admin)
    return {
        "post_starts": starts,
        "posts_submitted": submits,
        "posts_non_removed": non_removed,
        "automod_removals": automod,
        "mod_removals": mod,
        "admin_removals": admin,
        "num_reports": submits * r.reports_per_post * m("reports"),
        "rec_comments": non_removed * r.comments_per_surviving_post * m("comments"),
        "rec_screen_views": non_removed * r.views_per_surviving_post * m("views"),
        "rec_upvotes": non_removed * r.upvotes_per_surviving_post * m("upvotes"),
        "days_contributing": F * r.p_contribution_day * m("contribution_days"),
        "days_voting": F * r.p_voting_day * m("voting_days"),
        "days_active": F * r.p_active_day * m("active_days"),
    }


def expected_mean_ratios(config: SimConfig) -> dict[str, float]:
    """True treated/control mean ratio per outcome, in closed form.

    Only defined for multiplier-injected effects: with guidance armed
    the funnel effects are emergent, and with stratum effects present
    the marginal ratio is a stratum mixture; both raise.
    """
    if config.guidance.mode == "armed":
        raise ConfigError("no closed-form truth with guidance armed")
    if config.stratum_effects:
        raise ConfigError("stratum effects present; use expected_interaction_ratios")
    control = _expected_user_means(config, treated=False)
    treat = _expected_user_means(config, treated=True)
    return {k: treat[k] / control[k] for k in control}


def expected_interaction_ratios(config: SimConfig) -> dict[str, float]:
    """True ratio-of-ratios per outcome for the configured stratum effects."""
    if config.guidance.mode == "armed":
        raise ConfigError("no closed-form truth with guidance armed")
    if not config.stratum_effects:
        raise ConfigError("config has no stratum effects")
    true_over = {se.channel: se.when_true for se in config.stratum_effects}
    false_over = {se.channel: se.when_false for se in config.stratum_effects}
    control = _expected_user_means(config, treated=False)
    ratio_true = {
        k: v / control[k]
        for k, v in _expected_user_means(config, True, true_over).items()
    }
    ratio_false = {
        k: v / control[k]
        for k, v in _expected_user_means(config, True, false_over).items()
    }
    return {k: ratio_true[k] / ratio_false[k] for k in control}
