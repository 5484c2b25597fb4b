"""Cohort-level classification metrics: confusion matrix, ROC curve, AUC.

The ROC machinery always ranks participants along the screening direction
of the diagnosis rule: lower ADR means more ADHD-like. `positive_class`
selects which ground-truth group counts as positive against that fixed
ranking, so swapping it maps AUC to 1 - AUC (ties aside). The confusion
metrics use `positive_class` in the conventional way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .errors import EvaluationError
from .ingest import CohortManifest
from .model import Diagnosis, Group


@dataclass(frozen=True)
class EvaluationSummary:
    """Confusion counts, derived rates and the ROC curve for one cohort run.

    Rates are fractions in [0, 1]; reports render them as percentages.
    precision/sensitivity/f1 are None when their denominators are zero.
    """

    positive_class: Group
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: Optional[float]
    sensitivity: Optional[float]
    f1: Optional[float]
    roc_points: tuple[tuple[float, float], ...] = ()
    auc: Optional[float] = None

    @property
    def cohort_size(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def evaluate_cohort(diagnoses: Sequence[Diagnosis], truth: CohortManifest,
                    positive_class: Group = Group.CONTROL) -> EvaluationSummary:
    """Confusion matrix and rates of screening decisions against ground truth.

    Does not fill ROC/AUC; attach those from `roc_auc` (see `with_roc`).
    """
    if positive_class not in (Group.ADHD, Group.CONTROL):
        raise EvaluationError(f"positive class must be ADHD or Control, got {positive_class}")
    groups = {p.participant_id: p.group for p in truth.participants}
    tp = fp = tn = fn = 0
    for d in diagnoses:
        actual = groups.get(d.participant_id)
        if actual is None:
            raise EvaluationError(f"participant {d.participant_id!r} not in manifest")
        if actual is Group.UNKNOWN:
            raise EvaluationError(
                f"participant {d.participant_id!r} has group Unknown; evaluation needs ADHD/Control")
        predicted_positive = d.result is positive_class
        actually_positive = actual is positive_class
        if predicted_positive and actually_positive:
            tp += 1
        elif predicted_positive:
            fp += 1
        elif actually_positive:
            fn += 1
        else:
            tn += 1
    total = tp + fp + tn + fn
    if total == 0:
        raise EvaluationError("no diagnoses to evaluate")
    accuracy = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp > 0 else None
    sensitivity = tp / (tp + fn) if tp + fn > 0 else None
    f1 = None
    if precision is not None and sensitivity is not None and precision + sensitivity > 0:
        f1 = 2.0 * precision * sensitivity / (precision + sensitivity)
    return EvaluationSummary(
        positive_class=positive_class,
        tp=tp, fp=fp, tn=tn, fn=fn,
        accuracy=accuracy, precision=precision, sensitivity=sensitivity, f1=f1,
    )


def roc_auc(scores: Iterable[tuple[float, Group]],
            positive_class: Group = Group.ADHD,
            ) -> tuple[tuple[tuple[float, float], ...], float]:
    """ROC points and rank-statistic AUC of the ADR score for one cohort.

    `scores` pairs each participant's fused ADR with their true group.
    Ranking follows the diagnosis rule (lower ADR ranks as more ADHD-like);
    AUC is the fraction of (positive, negative) pairs ordered accordingly,
    ties counting one half. The trapezoidal integral of the returned ROC
    points equals this value to within 1e-12.
    """
    if positive_class not in (Group.ADHD, Group.CONTROL):
        raise EvaluationError(f"positive class must be ADHD or Control, got {positive_class}")
    oriented: list[tuple[float, bool]] = []
    for value, group in scores:
        if group is Group.UNKNOWN:
            raise EvaluationError("ROC scoring needs ADHD/Control ground truth for every participant")
        oriented.append((-value, group is positive_class))  # higher = more ADHD-like
    n_pos = sum(1 for _, is_pos in oriented if is_pos)
    n_neg = len(oriented) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError(
            f"ROC needs at least one participant of each class (got {n_pos} positive, {n_neg} negative)")

    # Walk distinct score values from most to least ADHD-like, emitting one
    # ROC point per value; tied groups advance diagonally in a single step.
    ordered = sorted(oriented, key=lambda t: -t[0])
    points: list[tuple[float, float]] = [(0.0, 0.0)]
    inverted_pairs = 0.0  # negatives ranked above a positive, ties at 0.5
    seen_pos = seen_neg = 0
    i = 0
    while i < len(ordered):
        j = i
        tie_pos = tie_neg = 0
        while j < len(ordered) and ordered[j][0] == ordered[i][0]:
            if ordered[j][1]:
                tie_pos += 1
            else:
                tie_neg += 1
            j += 1
        inverted_pairs += tie_pos * seen_neg + 0.5 * tie_pos * tie_neg
        seen_pos += tie_pos
        seen_neg += tie_neg
        points.append((seen_neg / n_neg, seen_pos / n_pos))
        i = j
    auc = (n_pos * n_neg - inverted_pairs) / (n_pos * n_neg)
    return tuple(points), auc


def trapezoidal_auc(points: Sequence[tuple[float, float]]) -> float:
    """Area under a piecewise-linear ROC curve."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += 0.5 * (y0 + y1) * (x1 - x0)
    return area


def with_roc(summary: EvaluationSummary,
             scores: Iterable[tuple[float, Group]]) -> EvaluationSummary:
    """Attach the screening-direction ROC/AUC (ADHD detection) to a summary.

    The AUC reported here always measures how well low ADR separates ADHD
    from Control, independent of the summary's positive_class.
    """
    points, auc = roc_auc(scores, positive_class=Group.ADHD)
    return replace(summary, roc_points=points, auc=auc)


def _pct(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(value * 100.0, 1)


def write_evaluation(summary: EvaluationSummary, threshold: float,
                     threshold_mode: str) -> bytes:
    """Serialize an evaluation summary to .eval.json.

    Rates appear as percentages at 1 decimal; AUC at 4 decimals. The AUC
    and ROC always describe the ADHD-detection direction of the ADR score.
    """
    payload = {
        "positive_class": summary.positive_class.value,
        "threshold": round(threshold, 4),
        "threshold_mode": threshold_mode,
        "cohort_size": summary.cohort_size,
        "tp": summary.tp,
        "fp": summary.fp,
        "tn": summary.tn,
        "fn": summary.fn,
        "accuracy_pct": _pct(summary.accuracy),
        "precision_pct": _pct(summary.precision),
        "sensitivity_pct": _pct(summary.sensitivity),
        "f1_pct": _pct(summary.f1),
        "auc": None if summary.auc is None else round(summary.auc, 4),
        "roc_points": [[round(x, 6), round(y, 6)] for x, y in summary.roc_points],
    }
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")
