"""Hyperactivity scoring and threshold-based screening.

The running hyperactivity score HS starts at 1 and gains a point whenever
the action label repeats the previous window, losing one whenever it
changes; the attention deficit ratio ADR normalizes the final score by the
number of windows (ADR = HS_n * 100 / n). Low ADR means frequent action
changes. A participant is screened ADHD when the fused ADR falls strictly
below the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Optional

from .errors import EmptyInputError
from .model import ActionLabelSequence, AdrResult, Diagnosis, Group, View


class ThresholdMode(str, Enum):
    FIXED = "fixed"
    COHORT_MEAN = "cohort-mean"


# Threshold that reproduces the reference cohort's screening decisions.
DEFAULT_FIXED_THRESHOLD = 76.5


@dataclass(frozen=True)
class ThresholdPolicy:
    """How the screening threshold is obtained."""

    mode: ThresholdMode
    fixed_value: Optional[float] = None

    def __post_init__(self):
        if self.mode is ThresholdMode.FIXED:
            if self.fixed_value is None or not math.isfinite(self.fixed_value):
                raise ValueError("fixed threshold policy requires a finite fixed_value")

    @staticmethod
    def fixed(value: float) -> "ThresholdPolicy":
        return ThresholdPolicy(ThresholdMode.FIXED, value)

    @staticmethod
    def cohort_mean() -> "ThresholdPolicy":
        return ThresholdPolicy(ThresholdMode.COHORT_MEAN)


def hyperactivity_score(labels: ActionLabelSequence) -> list[int]:
    """Full running-score trace over a label sequence.

    HS_1 = 1; each later window adds +1 when its label equals the previous
    one and -1 otherwise. The final value obeys the closed form
    HS_n = n - 2*d where d counts adjacent unequal pairs.
    """
    seq = labels.labels
    if not seq:
        raise EmptyInputError(
            f"cannot score empty label sequence (participant {labels.participant_id!r})")
    trace = [1]
    prev = seq[0]
    score = 1
    for cur in seq[1:]:
        score += 1 if cur == prev else -1
        trace.append(score)
        prev = cur
    return trace


def adr(labels: ActionLabelSequence) -> float:
    """Attention deficit ratio: final score times 100 over the label count.

    Range is [100*(2-n)/n, 100]; negative values are possible for highly
    alternating sequences and are intentionally not clamped.
    """
    trace = hyperactivity_score(labels)
    return trace[-1] * 100.0 / len(trace)


class FusedAdr(NamedTuple):
    """Fusion outcome: the participant-level ADR and whether one view was missing."""

    adr_final: float
    single_view: bool


def fuse_views(adr_left: Optional[float], adr_right: Optional[float]) -> FusedAdr:
    """Average the per-view ratios; fall back to the only available view."""
    if adr_left is not None and adr_right is not None:
        return FusedAdr((adr_left + adr_right) / 2.0, False)
    if adr_left is not None:
        return FusedAdr(adr_left, True)
    if adr_right is not None:
        return FusedAdr(adr_right, True)
    raise EmptyInputError("no view ADR present; need at least one of left/right")


def score_participant(participant_id: str,
                      labels_per_view: Mapping[View, ActionLabelSequence]) -> AdrResult:
    """Score every available view of a participant and fuse them."""
    if not labels_per_view:
        raise EmptyInputError(f"participant {participant_id!r} has no label sequences")
    per_view_adr: dict[View, float] = {}
    traces: dict[View, tuple[int, ...]] = {}
    counts: dict[View, int] = {}
    for view, labels in labels_per_view.items():
        trace = hyperactivity_score(labels)
        traces[view] = tuple(trace)
        counts[view] = len(trace)
        per_view_adr[view] = trace[-1] * 100.0 / len(trace)
    fused = fuse_views(per_view_adr.get(View.LEFT), per_view_adr.get(View.RIGHT))
    return AdrResult(
        participant_id=participant_id,
        adr_left=per_view_adr.get(View.LEFT),
        adr_right=per_view_adr.get(View.RIGHT),
        adr_final=fused.adr_final,
        hs_trace_per_view=traces,
        n_per_view=counts,
    )


def derive_threshold(results: Iterable, policy: ThresholdPolicy) -> float:
    """Resolve the screening threshold from the policy.

    `results` is anything with an `adr_final` attribute (AdrResult or a
    parsed report row); it is only consulted in cohort-mean mode.
    """
    if policy.mode is ThresholdMode.FIXED:
        return float(policy.fixed_value)
    values = [r.adr_final for r in results]
    if not values:
        raise EmptyInputError("cohort-mean threshold needs at least one scored participant")
    return sum(values) / len(values)


def diagnose(adr_final: float, threshold: float, participant_id: str = "") -> Diagnosis:
    """Binary screening decision: ADHD iff adr_final < threshold.

    Equality falls to Control (the comparison is strict).
    """
    result = Group.ADHD if adr_final < threshold else Group.CONTROL
    return Diagnosis(participant_id=participant_id, adr_final=adr_final,
                     threshold=threshold, result=result)
