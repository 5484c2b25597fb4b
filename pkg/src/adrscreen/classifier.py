"""Window-to-action-label classification.

Ships a deterministic threshold rule over the motion-energy features and a
validated import path for labels produced by external models. The rule
checks torso energy first because torso movement mechanically drags the
limb joints along; anything below both thresholds is Still.

The default thresholds were frozen after a seeded calibration sweep
against the synthetic generator's ground truth (see tests).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import EmptyInputError, ParseError, SchemaError
from .features import DEFAULT_MIN_CONFIDENCE, WindowFeatures, compute_features, make_windows
from .model import ActionLabel, ActionLabelSequence, SkeletonSequence

DEFAULT_THETA_TORSO = 0.030
DEFAULT_THETA_LIMB = 0.015
DEFAULT_WINDOW_SIZE = 50


@dataclass(frozen=True)
class ClassifierConfig:
    """Thresholds and windowing for the reference rule classifier."""

    theta_torso: float = DEFAULT_THETA_TORSO
    theta_limb: float = DEFAULT_THETA_LIMB
    c_min: float = DEFAULT_MIN_CONFIDENCE
    window_size: int = DEFAULT_WINDOW_SIZE

    def __post_init__(self):
        if self.theta_torso <= 0 or self.theta_limb <= 0:
            raise ValueError("energy thresholds must be positive")
        if not 0.0 <= self.c_min <= 1.0:
            raise ValueError(f"c_min must be in [0, 1], got {self.c_min}")
        if self.window_size < 2:
            raise ValueError(f"window_size must be >= 2, got {self.window_size}")


def parse_classifier_config_fields(data: bytes | str) -> dict:
    """Parse a .classifier.json config into the fields it actually sets."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = bytes(data).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"config is not valid UTF-8: {e.reason}") from e
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"config is not valid JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    if not isinstance(payload, dict):
        raise SchemaError("config must be a JSON object")
    known = {"theta_torso", "theta_limb", "c_min", "window_size"}
    unknown = set(payload) - known
    if unknown:
        raise SchemaError(f"unknown config fields: {sorted(unknown)}")
    fields = {}
    for name in ("theta_torso", "theta_limb", "c_min"):
        if name in payload:
            value = payload[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"config field {name} must be a number")
            fields[name] = float(value)
    if "window_size" in payload:
        value = payload["window_size"]
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError("config field window_size must be an integer")
        fields["window_size"] = value
    return fields


def load_classifier_config(data: bytes | str) -> ClassifierConfig:
    """Parse a .classifier.json config; every field is optional."""
    try:
        return ClassifierConfig(**parse_classifier_config_fields(data))
    except ValueError as e:
        raise SchemaError(str(e)) from e


def classify_window(features: WindowFeatures,
                    cfg: ClassifierConfig = ClassifierConfig()) -> ActionLabel:
    """Map one window's features to an action label (torso rule first)."""
    if features.torso_energy >= cfg.theta_torso:
        return ActionLabel.TORSO_MOVEMENT
    if features.limb_energy >= cfg.theta_limb:
        return ActionLabel.LIMB_FIDGET
    return ActionLabel.STILL


def classify_sequence(seq: SkeletonSequence,
                      window_size: int | None = None,
                      cfg: ClassifierConfig = ClassifierConfig()) -> ActionLabelSequence:
    """Label every full window of a skeleton sequence."""
    size = window_size if window_size is not None else cfg.window_size
    windows = make_windows(seq, size)
    if not windows:
        raise EmptyInputError(
            f"sequence for participant {seq.participant_id!r} ({seq.view.value}) has "
            f"{len(seq)} frames, fewer than one {size}-frame window")
    labels = tuple(classify_window(compute_features(w, cfg.c_min), cfg) for w in windows)
    return ActionLabelSequence(
        participant_id=seq.participant_id,
        view=seq.view,
        labels=labels,
        window_size=size,
        provenance="classifier",
    )


def import_labels(seq: ActionLabelSequence) -> ActionLabelSequence:
    """Validate an externally produced label sequence and tag its provenance.

    This is the integration seam for labels coming out of separately trained
    models: they enter as label files, get validated and are then scored
    exactly like the built-in classifier's output.
    """
    if not seq.labels:
        raise SchemaError(
            f"external label sequence for {seq.participant_id!r} is empty")
    try:
        labels = tuple(ActionLabel(l) for l in seq.labels)
    except ValueError as e:
        raise SchemaError(f"label out of range: {e}") from e
    return ActionLabelSequence(
        participant_id=seq.participant_id,
        view=seq.view,
        labels=labels,
        window_size=seq.window_size,
        provenance="external",
    )
