"""Core data types for pose sequences, action labels, participants and results.

All types are immutable after construction and safe to share across workers.
Construction never validates the skeleton invariants; `validate_sequence`
reports violations as a verdict so that malformed data can be inspected
rather than rejected at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

# COCO-17 keypoint schema: index -> joint.
COCO_KEYPOINT_NAMES = (
    "nose",
    "left_eye", "right_eye",
    "left_ear", "right_ear",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
)
NUM_KEYPOINTS = 17


class View(str, Enum):
    """Side camera viewpoint."""

    LEFT = "left"
    RIGHT = "right"


class Group(str, Enum):
    """Ground-truth cohort group; UNKNOWN is allowed for screening-only runs."""

    ADHD = "ADHD"
    CONTROL = "Control"
    UNKNOWN = "Unknown"


class Sex(str, Enum):
    M = "M"
    F = "F"


class ActionLabel(IntEnum):
    """Per-window action class.

    STILL: sitting still. LIMB_FIDGET: small-range limb fidgeting.
    TORSO_MOVEMENT: large torso rotation/sway.
    """

    STILL = 1
    LIMB_FIDGET = 2
    TORSO_MOVEMENT = 3


class Keypoint(NamedTuple):
    """One joint detection: image-space pixel coordinates plus confidence.

    Invariants (validator-checked, not enforced here): x and y finite,
    0 <= c <= 1. Missing joints are encoded as (0, 0, 0), never omitted.
    """

    x: float
    y: float
    c: float


@dataclass(frozen=True)
class SkeletonFrame:
    """A single frame of keypoints, indexed by the COCO-17 schema."""

    keypoints: tuple[Keypoint, ...]


@dataclass(frozen=True)
class SkeletonSequence:
    """Per-camera timeline of 17-keypoint frames with view metadata."""

    participant_id: str
    view: View
    fps: float
    width: int
    height: int
    frames: tuple[SkeletonFrame, ...]

    def __len__(self) -> int:
        return len(self.frames)

    @cached_property
    def array(self) -> np.ndarray:
        """Read-only (n_frames, 17, 3) float view of the frames.

        Raises ValueError if any frame does not hold exactly 17 keypoints;
        run `validate_sequence` first on untrusted data.
        """
        for i, frame in enumerate(self.frames):
            if len(frame.keypoints) != NUM_KEYPOINTS:
                raise ValueError(
                    f"frame {i} has {len(frame.keypoints)} keypoints, expected {NUM_KEYPOINTS}"
                )
        if self.frames:
            arr = np.asarray([f.keypoints for f in self.frames], dtype=np.float64)
        else:
            arr = np.empty((0, NUM_KEYPOINTS, 3), dtype=np.float64)
        arr.flags.writeable = False
        return arr


def sequence_from_array(participant_id: str, view: View, fps: float,
                        width: int, height: int, arr: np.ndarray) -> SkeletonSequence:
    """Build a SkeletonSequence from an (n, 17, 3) array, priming the array cache."""
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1:] != (NUM_KEYPOINTS, 3):
        raise ValueError(f"expected (n, {NUM_KEYPOINTS}, 3) array, got {arr.shape}")
    frames = tuple(
        SkeletonFrame(tuple(Keypoint(*kp) for kp in frame))
        for frame in arr.tolist()
    )
    seq = SkeletonSequence(participant_id, view, fps, width, height, frames)
    arr.flags.writeable = False
    seq.__dict__["array"] = arr
    return seq


@dataclass(frozen=True)
class ActionLabelSequence:
    """Ordered per-window labels for one (participant, view) recording."""

    participant_id: str
    view: View
    labels: tuple[ActionLabel, ...]
    window_size: int = 50
    provenance: str = "unspecified"  # "classifier" | "external" | "file"

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ParticipantRecord:
    """Manifest entry: identity, ground truth and per-view file references."""

    participant_id: str
    group: Group
    sex: Optional[Sex] = None
    sources: Mapping[View, str] = field(default_factory=dict)


@dataclass(frozen=True)
class AdrResult:
    """Per-view and fused attention deficit ratio, plus the score trace behind it."""

    participant_id: str
    adr_left: Optional[float]
    adr_right: Optional[float]
    adr_final: float
    hs_trace_per_view: Mapping[View, tuple[int, ...]] = field(default_factory=dict)
    n_per_view: Mapping[View, int] = field(default_factory=dict)

    @property
    def single_view(self) -> bool:
        return self.adr_left is None or self.adr_right is None


@dataclass(frozen=True)
class Diagnosis:
    """Threshold decision for one participant: ADHD iff adr_final < threshold."""

    participant_id: str
    adr_final: float
    threshold: float
    result: Group


@dataclass(frozen=True)
class Violation:
    """One violated invariant found by validate_sequence."""

    reason: str
    frame: Optional[int] = None
    joint: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        where = ""
        if self.frame is not None:
            where = f"frame {self.frame}"
            if self.joint is not None:
                where += f" joint {self.joint}"
            where += ": "
        tail = f" ({self.detail})" if self.detail else ""
        return f"{where}{self.reason}{tail}"


# Violation reason tags.
KEYPOINT_COUNT = "keypoint count"
NON_FINITE = "non-finite coordinate"
CONFIDENCE_RANGE = "confidence range"


def validate_sequence(seq: SkeletonSequence) -> list[Violation]:
    """Check every invariant of a skeleton sequence.

    Returns the full list of violations (empty means valid); never raises.
    """
    verdict: list[Violation] = []
    if not (isinstance(seq.fps, (int, float)) and math.isfinite(seq.fps) and seq.fps > 0):
        verdict.append(Violation("fps not positive", detail=f"fps={seq.fps}"))
    if seq.width <= 0:
        verdict.append(Violation("width not positive", detail=f"width={seq.width}"))
    if seq.height <= 0:
        verdict.append(Violation("height not positive", detail=f"height={seq.height}"))

    regular = True
    for i, frame in enumerate(seq.frames):
        if len(frame.keypoints) != NUM_KEYPOINTS:
            verdict.append(Violation(
                KEYPOINT_COUNT, frame=i,
                detail=f"got {len(frame.keypoints)}, expected {NUM_KEYPOINTS}"))
            regular = False

    if regular and seq.frames:
        # Bulk numeric checks; fall back to a per-keypoint scan only on failure.
        arr = seq.array
        if not bool(np.isfinite(arr[:, :, :2]).all()):
            bad = ~np.isfinite(arr[:, :, :2]).all(axis=2)
            for i, j in zip(*np.nonzero(bad)):
                kp = seq.frames[i].keypoints[j]
                verdict.append(Violation(
                    NON_FINITE, frame=int(i), joint=int(j),
                    detail=f"x={kp.x}, y={kp.y}"))
        conf = arr[:, :, 2]
        conf_ok = np.isfinite(conf) & (conf >= 0.0) & (conf <= 1.0)
        if not bool(conf_ok.all()):
            for i, j in zip(*np.nonzero(~conf_ok)):
                verdict.append(Violation(
                    CONFIDENCE_RANGE, frame=int(i), joint=int(j),
                    detail=f"c={seq.frames[i].keypoints[j].c}"))
    elif not regular:
        # Irregular frames: scan keypoints of the well-formed frames one by one.
        for i, frame in enumerate(seq.frames):
            for j, kp in enumerate(frame.keypoints):
                if not (math.isfinite(kp.x) and math.isfinite(kp.y)):
                    verdict.append(Violation(NON_FINITE, frame=i, joint=j,
                                             detail=f"x={kp.x}, y={kp.y}"))
                if not (math.isfinite(kp.c) and 0.0 <= kp.c <= 1.0):
                    verdict.append(Violation(CONFIDENCE_RANGE, frame=i, joint=j,
                                             detail=f"c={kp.c}"))
    return verdict
