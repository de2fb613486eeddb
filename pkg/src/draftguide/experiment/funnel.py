"""Posting-funnel step losses: starts -> submitted -> non-removed.

Each arm gets its three totals plus the fraction lost at every step,
reported to 0.1%.  A zero count at a step leaves the following loss
undefined rather than dividing by zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assign import Arm
from .outcomes import OutcomeTable, as_table

STEP_NAMES = ("starts", "submitted", "non_removed")


@dataclass(frozen=True)
class FunnelColumn:
    counts: tuple[int, int, int]
    losses: tuple[float | None, float | None]  # fraction lost at each step

    @property
    def loss_percentages(self) -> tuple[float | None, float | None]:
        """Step losses as percentages rounded to 0.1."""
        return tuple(
            None if x is None else round(100.0 * x, 1) for x in self.losses
        )


@dataclass(frozen=True)
class FunnelTable:
    arms: dict[str, FunnelColumn]


def funnel_from_counts(starts: int, submitted: int, non_removed: int) -> FunnelColumn:
    counts = (int(starts), int(submitted), int(non_removed))
    losses = []
    for a, b in zip(counts, counts[1:]):
        losses.append(None if a == 0 else (a - b) / a)
    return FunnelColumn(counts=counts, losses=tuple(losses))


def funnel_stats(records) -> FunnelTable:
    """Per-arm funnel totals and step losses from outcome records."""
    table: OutcomeTable = as_table(records)
    arms: dict[str, FunnelColumn] = {}
    for arm, mask in ((Arm.CONTROL, table.arm == 0), (Arm.TREATMENT, table.arm == 1)):
        if not np.any(mask):
            raise ValueError(f"no records in the {arm.value} arm")
        arms[arm.value] = funnel_from_counts(
            int(table.outcome("post_starts")[mask].sum()),
            int(table.outcome("posts_submitted")[mask].sum()),
            int(table.outcome("posts_non_removed")[mask].sum()),
        )
    return FunnelTable(arms=arms)
