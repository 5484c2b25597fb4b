"""Seeded synthetic cohorts: ground-truth label sequences and skeletons.

Labels follow a three-state Markov process: each window repeats the
previous label with probability 1 - p and otherwise switches to one of the
other two labels uniformly. Skeletons render those labels around a fixed
seated 17-joint template (100 px torso scale): Still windows carry only
Gaussian jitter, LimbFidget adds a circular wrist/ankle oscillation,
TorsoMovement sways shoulders, hips and attached limbs coherently.

All randomness comes from numpy's PCG64 generator seeded through
SeedSequence, so identical seeds reproduce identical cohorts on every
platform. Per-participant streams are derived with the fixed mixing rule
SeedSequence([cohort_seed, group_index, participant_index, stream]) where
stream 0 is the label process and streams 1/2 are the left/right cameras.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .ingest import (
    CohortManifest,
    LABELS_SUFFIX,
    SKELETON_SUFFIX,
    _load_json,
    atomic_write,
    write_label_file,
    write_manifest,
    write_skeleton_file,
)
from .model import (
    ActionLabel,
    ActionLabelSequence,
    Group,
    ParticipantRecord,
    SkeletonSequence,
    View,
    sequence_from_array,
)

# Canonical seated pose, COCO-17 order, on a 1080x920 canvas.
# Shoulder midpoint (540, 300) to hip midpoint (540, 400): 100 px torso scale.
POSE_TEMPLATE = np.array([
    [540.0, 220.0],                    # nose
    [530.0, 210.0], [550.0, 210.0],    # eyes
    [520.0, 215.0], [560.0, 215.0],    # ears
    [500.0, 300.0], [580.0, 300.0],    # shoulders
    [480.0, 360.0], [600.0, 360.0],    # elbows
    [470.0, 420.0], [610.0, 420.0],    # wrists
    [510.0, 400.0], [570.0, 400.0],    # hips
    [500.0, 500.0], [580.0, 500.0],    # knees
    [500.0, 590.0], [580.0, 590.0],    # ankles
])
TEMPLATE_WIDTH = 1080
TEMPLATE_HEIGHT = 920
KEYPOINT_CONFIDENCE = 0.9

_OSCILLATING_JOINTS = (9, 10, 15, 16)        # wrists, ankles
_DRIFTING_JOINTS = tuple(range(5, 17))       # shoulders, hips and attached limbs

_OTHER_LABELS = {1: (2, 3), 2: (1, 3), 3: (1, 2)}


@dataclass(frozen=True)
class SkeletonMotionParams:
    """Amplitudes and timing of the rendered motion."""

    still_sigma: float = 0.5    # px of Gaussian jitter on every joint
    limb_amp: float = 6.0       # px radius of the wrist/ankle oscillation
    torso_amp: float = 12.0     # px radius of the torso sway
    fps: float = 25.0
    window_size: int = 50
    limb_period: int = 10       # frames per oscillation cycle
    torso_period: int = 12      # frames per sway cycle

    def __post_init__(self):
        if self.still_sigma < 0 or self.limb_amp < 0 or self.torso_amp < 0:
            raise ValueError("amplitudes must be non-negative")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.window_size < 2:
            raise ValueError("window_size must be >= 2")
        if self.limb_period < 2 or self.torso_period < 2:
            raise ValueError("oscillation periods must be >= 2 frames")


@dataclass(frozen=True)
class CohortSpec:
    """Knobs of a simulated two-group cohort."""

    n_participants_per_group: int = 20
    n_windows: int = 100
    switch_prob_adhd: float = 0.25
    switch_prob_control: float = 0.05
    seed: int = 0
    skeleton_params: SkeletonMotionParams = field(default_factory=SkeletonMotionParams)

    def __post_init__(self):
        if self.n_participants_per_group < 1:
            raise ValueError("n_participants_per_group must be >= 1")
        if self.n_windows < 1:
            raise ValueError("n_windows must be >= 1")
        for name in ("switch_prob_adhd", "switch_prob_control"):
            p = getattr(self, name)
            if not 0.0 < p < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {p}")
        if not self.switch_prob_adhd > self.switch_prob_control:
            raise ValueError("switch_prob_adhd must exceed switch_prob_control")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @staticmethod
    def from_json(data: bytes | str) -> "CohortSpec":
        """Parse a .cohort.json document (all fields optional)."""
        return CohortSpec.from_dict(_load_json(data, "cohort spec"))

    @staticmethod
    def from_dict(payload: dict) -> "CohortSpec":
        """Build a spec from a parsed .cohort.json payload (all fields optional)."""
        if not isinstance(payload, dict):
            raise SchemaError("cohort spec: top-level value must be an object")
        known = {"n_participants_per_group", "n_windows", "switch_prob_adhd",
                 "switch_prob_control", "seed", "skeleton_params"}
        unknown = set(payload) - known
        if unknown:
            raise SchemaError(f"cohort spec: unknown fields {sorted(unknown)}")
        kwargs = {k: payload[k] for k in known - {"skeleton_params"} if k in payload}
        if "skeleton_params" in payload:
            sp = payload["skeleton_params"]
            if not isinstance(sp, dict):
                raise SchemaError("cohort spec: skeleton_params must be an object")
            try:
                kwargs["skeleton_params"] = SkeletonMotionParams(**sp)
            except (TypeError, ValueError) as e:
                raise SchemaError(f"cohort spec: bad skeleton_params: {e}") from e
        try:
            return CohortSpec(**kwargs)
        except (TypeError, ValueError) as e:
            raise SchemaError(f"cohort spec: {e}") from e


def _rng(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seed))


def participant_seed(cohort_seed: int, group_index: int, participant_index: int,
                     stream: int) -> np.random.SeedSequence:
    """Fixed per-participant seed mixing rule (stream 0: labels, 1: left, 2: right)."""
    return np.random.SeedSequence([cohort_seed, group_index, participant_index, stream])


def gen_labels(n: int, switch_prob: float, seed,
               participant_id: str = "", view: View = View.LEFT,
               window_size: int = 50) -> ActionLabelSequence:
    """Sample a ground-truth label sequence from the switching process."""
    if n < 1:
        raise ValueError(f"need at least one window, got n={n}")
    if not 0.0 < switch_prob < 1.0:
        raise ValueError(f"switch_prob must be in (0, 1), got {switch_prob}")
    rng = _rng(seed)
    current = int(rng.integers(1, 4))
    values = [current]
    if n > 1:
        us = rng.random(n - 1)
        picks = rng.integers(0, 2, size=n - 1)
        for u, pick in zip(us.tolist(), picks.tolist()):
            if u < switch_prob:
                current = _OTHER_LABELS[current][pick]
            values.append(current)
    return ActionLabelSequence(
        participant_id=participant_id, view=view,
        labels=tuple(ActionLabel(v) for v in values),
        window_size=window_size, provenance="synthetic")


def gen_skeleton(labels: ActionLabelSequence,
                 params: SkeletonMotionParams = SkeletonMotionParams(),
                 seed=0, view: View | None = None) -> SkeletonSequence:
    """Render window_size frames per label around the seated template.

    Coordinates are quantized to 0.01 px, which keeps the serialized files
    compact without affecting class separability.
    """
    if not labels.labels:
        raise ValueError("cannot render an empty label sequence")
    size = labels.window_size
    n_frames = size * len(labels.labels)
    rng = _rng(seed)

    offsets = np.zeros((n_frames, 17, 2))
    t = np.arange(size, dtype=np.float64)
    limb_phase = 2.0 * np.pi * t / params.limb_period
    torso_phase = 2.0 * np.pi * t / params.torso_period
    limb_xy = params.limb_amp * np.stack([np.cos(limb_phase), np.sin(limb_phase)], axis=1)
    torso_xy = params.torso_amp * np.stack([np.cos(torso_phase), np.sin(torso_phase)], axis=1)

    for w, label in enumerate(labels.labels):
        lo = w * size
        if label is ActionLabel.LIMB_FIDGET:
            offsets[lo:lo + size, _OSCILLATING_JOINTS, :] = limb_xy[:, None, :]
        elif label is ActionLabel.TORSO_MOVEMENT:
            offsets[lo:lo + size, _DRIFTING_JOINTS, :] = torso_xy[:, None, :]

    coords = POSE_TEMPLATE[None, :, :] + offsets
    if params.still_sigma > 0:
        coords = coords + rng.normal(0.0, params.still_sigma, size=(n_frames, 17, 2))
    coords = np.round(coords, 2)

    arr = np.empty((n_frames, 17, 3))
    arr[:, :, :2] = coords
    arr[:, :, 2] = KEYPOINT_CONFIDENCE
    return sequence_from_array(
        labels.participant_id, view if view is not None else labels.view,
        params.fps, TEMPLATE_WIDTH, TEMPLATE_HEIGHT, arr)


def expected_adr(switch_prob: float) -> float:
    """Large-n expectation of the ratio under per-step switch probability p.

    The exact finite-n mean is 100 * (1 + (n-1)(1-2p)) / n, which converges
    to 100 * (1 - 2p).
    """
    return 100.0 * (1.0 - 2.0 * switch_prob)


@dataclass(frozen=True)
class GeneratedParticipant:
    """One simulated participant: truth labels plus per-view skeletons."""

    participant_id: str
    group: Group
    truth: ActionLabelSequence
    skeletons: dict[View, SkeletonSequence]


def generate_cohort(spec: CohortSpec) -> list[GeneratedParticipant]:
    """Generate the full cohort in memory, deterministically from spec.seed."""
    out: list[GeneratedParticipant] = []
    groups = ((Group.ADHD, "adhd", spec.switch_prob_adhd),
              (Group.CONTROL, "control", spec.switch_prob_control))
    width = len(str(spec.n_participants_per_group))
    for g, (group, prefix, prob) in enumerate(groups):
        for i in range(spec.n_participants_per_group):
            pid = f"{prefix}_{i + 1:0{width}d}"
            truth = gen_labels(
                spec.n_windows, prob, participant_seed(spec.seed, g, i, 0),
                participant_id=pid, window_size=spec.skeleton_params.window_size)
            skeletons = {
                view: gen_skeleton(truth, spec.skeleton_params,
                                   participant_seed(spec.seed, g, i, 1 + v), view=view)
                for v, view in enumerate((View.LEFT, View.RIGHT))
            }
            out.append(GeneratedParticipant(pid, group, truth, skeletons))
    return out


def simulate_cohort(spec: CohortSpec, out_dir: Path) -> Path:
    """Write a full on-disk cohort; returns the manifest path.

    Layout: ``skeletons/<pid>_<view>.skel.json`` per camera,
    ``truth/<pid>.labels.csv`` ground truth per participant, and
    ``cohort.manifest.json`` referencing the skeletons by relative path.
    """
    out_dir = Path(out_dir)
    (out_dir / "skeletons").mkdir(parents=True, exist_ok=True)
    (out_dir / "truth").mkdir(parents=True, exist_ok=True)

    records: list[ParticipantRecord] = []
    for participant in generate_cohort(spec):
        pid = participant.participant_id
        sources: dict[View, str] = {}
        for view, skeleton in participant.skeletons.items():
            rel = f"skeletons/{pid}_{view.value}{SKELETON_SUFFIX}"
            atomic_write(out_dir / rel, write_skeleton_file(skeleton))
            sources[view] = rel
        atomic_write(out_dir / "truth" / f"{pid}{LABELS_SUFFIX}",
                     write_label_file(participant.truth))
        records.append(ParticipantRecord(
            participant_id=pid, group=participant.group, sex=None, sources=sources))

    manifest = CohortManifest(
        dataset_name=f"synthetic cohort (seed {spec.seed})",
        window_size=spec.skeleton_params.window_size,
        participants=tuple(records),
    )
    manifest_path = out_dir / "cohort.manifest.json"
    atomic_write(manifest_path, write_manifest(manifest))
    return manifest_path
