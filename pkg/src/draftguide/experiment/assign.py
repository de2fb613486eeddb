"""Deterministic experiment arm assignment.

A user's arm is a pure function of (user_id, salt): the first 8 bytes
of SHA-256 over ``user_id 0x1f salt``, scaled to [0, 1) and compared to
the treatment probability.  Stable across runs, machines, and
processes; no coordination or storage needed.
"""

from __future__ import annotations

import hashlib
from enum import Enum


class Arm(str, Enum):
    TREATMENT = "Treatment"
    CONTROL = "Control"


def assignment_score(user_id: str, salt: str) -> float:
    """Deterministic score in [0, 1) for (user_id, salt)."""
    digest = hashlib.sha256(
        user_id.encode("utf-8") + b"\x1f" + salt.encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def assign_arm(user_id: str, salt: str, p_treat: float = 0.5) -> Arm:
    """Treatment iff the user's score falls below ``p_treat``."""
    if not 0.0 <= p_treat <= 1.0:
        raise ValueError(f"p_treat must be in [0, 1], got {p_treat}")
    return Arm.TREATMENT if assignment_score(user_id, salt) < p_treat else Arm.CONTROL
