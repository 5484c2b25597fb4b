"""Fixed-window slicing and per-window motion-energy features.

Energies are mean per-frame joint displacements normalized by the torso
scale (shoulder-midpoint to hip-midpoint distance), which makes them
invariant to translation and to uniform rescaling of the image. Head
joints (0-4) belong to neither group; face jitter is noise here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SkeletonSequence

# COCO-17 joint groups.
TORSO_JOINTS = (5, 6, 11, 12)            # shoulders, hips
LIMB_JOINTS = (7, 8, 9, 10, 13, 14, 15, 16)  # elbows, wrists, knees, ankles

DEFAULT_MIN_CONFIDENCE = 0.3
MIN_SCALE_PX = 1.0


@dataclass(frozen=True)
class Window:
    """One contiguous slice of window_size frames.

    `frames` is a read-only (window_size, 17, 3) view into the parent
    sequence's array.
    """

    index: int
    frames: np.ndarray


@dataclass(frozen=True)
class WindowFeatures:
    """Motion summary of one window.

    `low_confidence` is set when some joint group had no frame pair passing
    the confidence gate (its energy is then reported as 0).
    """

    torso_energy: float
    limb_energy: float
    mean_confidence: float
    scale: float
    low_confidence: bool = False


def make_windows(seq: SkeletonSequence, window_size: int) -> list[Window]:
    """Slice a sequence into non-overlapping windows, dropping the remainder."""
    if window_size < 2:
        raise ValueError(f"window_size must be >= 2, got {window_size}")
    arr = seq.array
    count = len(seq) // window_size
    return [Window(i, arr[i * window_size:(i + 1) * window_size]) for i in range(count)]


def _group_energy(disp: np.ndarray, ok: np.ndarray, joints: tuple[int, ...],
                  scale: float) -> tuple[float, bool]:
    terms = disp[:, joints][ok[:, joints]]
    if terms.size == 0:
        return 0.0, True
    return float(terms.mean()) / scale, False


def compute_features(window: Window,
                     c_min: float = DEFAULT_MIN_CONFIDENCE) -> WindowFeatures:
    """Torso/limb motion energies, mean confidence and torso scale of a window.

    A displacement term enters a group's mean only when both of its frames
    have confidence >= c_min for that joint. The torso scale is floored at
    1 pixel so degenerate poses cannot blow up the ratio.
    """
    arr = window.frames
    xy = arr[:, :, :2]
    conf = arr[:, :, 2]

    shoulder_mid = (xy[:, 5] + xy[:, 6]) / 2.0
    hip_mid = (xy[:, 11] + xy[:, 12]) / 2.0
    scale = float(np.linalg.norm(shoulder_mid - hip_mid, axis=1).mean())
    scale = max(scale, MIN_SCALE_PX)

    if len(arr) < 2:
        return WindowFeatures(0.0, 0.0, float(conf.mean()), scale, low_confidence=True)

    disp = np.linalg.norm(xy[1:] - xy[:-1], axis=2)   # (n-1, 17)
    ok = (conf[1:] >= c_min) & (conf[:-1] >= c_min)

    torso_energy, torso_low = _group_energy(disp, ok, TORSO_JOINTS, scale)
    limb_energy, limb_low = _group_energy(disp, ok, LIMB_JOINTS, scale)

    return WindowFeatures(
        torso_energy=torso_energy,
        limb_energy=limb_energy,
        mean_confidence=float(conf.mean()),
        scale=scale,
        low_confidence=torso_low or limb_low,
    )
