"""Counter-based random substreams for the simulator.

Every draw is a pure function of (seed, channel, unit, step), computed
with a splitmix64-style finalizer over numpy uint64 vectors.  That
makes simulation output independent of evaluation order and chunking:
per-user substreams fall out for free, and identical configs give
byte-identical event logs.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np
from scipy import stats

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_C_CHANNEL = np.uint64(0xD6E8FEB86659FD93)
_C_UNIT = np.uint64(0xA0761D6478BD642F)
_C_STEP = np.uint64(0xE7037ED1A0B428DB)


class Channel(IntEnum):
    COMMUNITY = 1
    ENROLL_DAY = 2
    COV_NEWCOMER = 3
    COV_LOW_ACTIVITY = 4
    COMM_HIGH_RULES = 5
    COMM_HIGH_AUTOMOD = 6
    PRE_VISITS = 7
    PRE_VOTES = 8
    COMM_RULE_COUNT = 9
    COMM_AUTOMOD_SHARE = 10
    SESSION = 11
    ARCHETYPE = 12
    BREAKING = 13
    SUBMIT = 14
    BLOCK_OUTCOME = 15
    AUTOMOD = 16
    MOD = 17
    ADMIN = 18
    REPORTS = 19
    COMMENTS = 20
    VIEWS = 21
    UPVOTES = 22
    ACTIVE_DAY = 23
    VOTING_DAY = 24
    CONTRIBUTION_DAY = 25


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z + _GOLDEN) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def hash_bits(seed: int, channel: int, unit, step) -> np.ndarray:
    """64-bit hash for each (unit, step) pair; unit/step broadcast."""
    unit = np.asarray(unit, dtype=np.uint64)
    step = np.asarray(step, dtype=np.uint64)
    # uint64 arithmetic wraps by design; silence numpy's scalar warning.
    with np.errstate(over="ignore"):
        h = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ (np.uint64(channel) * _C_CHANNEL)
        h = _mix(np.broadcast_to(h, np.broadcast_shapes(unit.shape, step.shape)).copy())
        h = _mix(h ^ (unit + np.uint64(1)) * _C_UNIT)
        return _mix(h ^ (step + np.uint64(1)) * _C_STEP)


def uniforms(seed: int, channel: int, unit, step) -> np.ndarray:
    """Uniform [0, 1) draws, one per (unit, step)."""
    return (hash_bits(seed, channel, unit, step) >> np.uint64(11)) * 2.0**-53


def bernoulli(seed: int, channel: int, unit, step, p) -> np.ndarray:
    return uniforms(seed, channel, unit, step) < p


def poisson(seed: int, channel: int, unit, step, mean) -> np.ndarray:
    """Poisson counts via inverse transform of the channel's uniforms."""
    u = uniforms(seed, channel, unit, step)
    mean = np.asarray(mean, dtype=np.float64)
    if mean.shape == () and mean == 0.0:
        return np.zeros_like(u, dtype=np.int64)
    return stats.poisson.ppf(u, mean).astype(np.int64)
