"""On-disk formats: skeleton files, label files, manifests and reports.

All parsers are pure functions of their input bytes and never raise
anything but ParseError (bad syntax/encoding) or SchemaError (valid syntax,
bad content). Writers are deterministic: identical inputs give identical
bytes. Formats:

  .skel.json      one JSON object: header fields plus a frames array of
                  17x3 [x, y, c] triplets
  .labels.csv     header ``window_index,label``; one label per 50-frame
                  window; indices 0..n-1 contiguous
  .manifest.json  dataset name, window size, participant records with
                  per-view file references
  .adr.csv        one row per participant, 4-decimal fixed formatting
  .diag.csv       screening decisions with the threshold and its provenance
  .eval.json      evaluation summary (percentages at 1 decimal, AUC at 4)
  .timeline.csv   per-window frame spans for plotting
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from itertools import chain
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ParseError, SchemaError
from .model import (
    NUM_KEYPOINTS,
    ActionLabel,
    ActionLabelSequence,
    AdrResult,
    Diagnosis,
    Group,
    ParticipantRecord,
    Sex,
    SkeletonSequence,
    View,
    sequence_from_array,
)

_INT_RE = re.compile(r"-?\d+")

SKELETON_SUFFIX = ".skel.json"
LABELS_SUFFIX = ".labels.csv"


@dataclass(frozen=True)
class CohortManifest:
    """Participants, ground truth and per-view file references."""

    dataset_name: str
    window_size: int = 50
    participants: tuple[ParticipantRecord, ...] = ()


@dataclass(frozen=True)
class AdrReportRow:
    """One parsed row of an .adr.csv report."""

    participant_id: str
    group: Group
    adr_left: Optional[float]
    adr_right: Optional[float]
    adr_final: float


# ---------------------------------------------------------------------------
# shared low-level helpers
# ---------------------------------------------------------------------------


def atomic_write(path: Path, data: bytes) -> None:
    """Write a file via a same-directory temp file and rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _decode(data: bytes | str, what: str) -> str:
    if isinstance(data, (bytes, bytearray)):
        try:
            return bytes(data).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"{what}: not valid UTF-8 ({e.reason})", offset=e.start) from e
    return data


def _load_json(data: bytes | str, what: str):
    text = _decode(data, what)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{what}: {e.msg}", line=e.lineno, column=e.colno) from e
    except RecursionError as e:
        raise ParseError(f"{what}: nesting too deep") from e


def _require(payload: dict, key: str, what: str):
    if key not in payload:
        raise SchemaError(f"{what}: missing field {key!r}")
    return payload[key]


def _require_str(payload: dict, key: str, what: str) -> str:
    value = _require(payload, key, what)
    if not isinstance(value, str):
        raise SchemaError(f"{what}: field {key!r} must be a string")
    return value


def _require_int(payload: dict, key: str, what: str) -> int:
    value = _require(payload, key, what)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{what}: field {key!r} must be an integer")
    return value


def _require_number(payload: dict, key: str, what: str) -> float:
    value = _require(payload, key, what)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{what}: field {key!r} must be a number")
    if not math.isfinite(value):
        raise SchemaError(f"{what}: field {key!r} must be finite, got {value!r}")
    return float(value)


def _csv_lines(data: bytes | str, what: str, header: str) -> list[str]:
    """Decode, check the header line, return the data lines."""
    text = _decode(data, what)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [line[:-1] if line.endswith("\r") else line for line in lines]
    if not lines:
        raise SchemaError(f"{what}: empty file, expected header {header!r}")
    if lines[0] != header:
        raise SchemaError(f"{what}: bad header {lines[0]!r}, expected {header!r}")
    return lines[1:]


def _parse_int_field(text: str, what: str) -> int:
    if not _INT_RE.fullmatch(text):
        raise SchemaError(f"{what}: not an integer: {text!r}")
    try:
        return int(text)
    except ValueError as e:  # e.g. the integer digit limit
        raise SchemaError(f"{what}: not an integer: {text!r}") from e


def _parse_float_field(text: str, what: str) -> float:
    try:
        value = float(text)
    except (ValueError, OverflowError) as e:
        raise SchemaError(f"{what}: not a number: {text!r}") from e
    if not math.isfinite(value):
        raise SchemaError(f"{what}: must be finite: {text!r}")
    return value


# ---------------------------------------------------------------------------
# skeleton files
# ---------------------------------------------------------------------------


def parse_skeleton_file(data: bytes | str) -> SkeletonSequence:
    """Parse a .skel.json document into a validated SkeletonSequence."""
    what = "skeleton file"
    payload = _load_json(data, what)
    if not isinstance(payload, dict):
        raise SchemaError(f"{what}: top-level value must be an object")

    participant_id = _require_str(payload, "participant_id", what)
    view_tag = _require_str(payload, "view", what)
    try:
        view = View(view_tag)
    except ValueError:
        raise SchemaError(f"{what}: view must be 'left' or 'right', got {view_tag!r}") from None
    fps = _require_number(payload, "fps", what)
    if fps <= 0:
        raise SchemaError(f"{what}: fps must be positive, got {fps}")
    width = _require_int(payload, "width", what)
    height = _require_int(payload, "height", what)
    if width <= 0:
        raise SchemaError(f"{what}: width must be positive, got {width}")
    if height <= 0:
        raise SchemaError(f"{what}: height must be positive, got {height}")
    frames = _require(payload, "frames", what)
    if not isinstance(frames, list):
        raise SchemaError(f"{what}: field 'frames' must be an array")

    arr = _validated_frame_array(frames, what)
    return sequence_from_array(participant_id, view, fps, width, height, arr)


def _validated_frame_array(frames: list, what: str) -> np.ndarray:
    """Strictly validate the nested frames payload, returning an (n, 17, 3) array."""
    # Structure: bulk-check first (C speed), localize only on failure.
    if not all(type(f) is list and len(f) == NUM_KEYPOINTS for f in frames):
        for i, frame in enumerate(frames):
            if not isinstance(frame, list):
                raise SchemaError(f"{what}: frames[{i}] must be an array of keypoints")
            if len(frame) != NUM_KEYPOINTS:
                raise SchemaError(
                    f"{what}: frames[{i}]: expected {NUM_KEYPOINTS} keypoints, got {len(frame)}")
    if not all(type(kp) is list and len(kp) == 3 for f in frames for kp in f):
        for i, frame in enumerate(frames):
            for j, kp in enumerate(frame):
                if not isinstance(kp, list) or len(kp) != 3:
                    raise SchemaError(f"{what}: frames[{i}][{j}] must be an [x, y, c] triplet")

    flat = list(chain.from_iterable(chain.from_iterable(frames)))
    if set(map(type, flat)) - {int, float}:
        for i, frame in enumerate(frames):
            for j, kp in enumerate(frame):
                for value in kp:
                    if isinstance(value, bool) or not isinstance(value, (int, float)):
                        raise SchemaError(
                            f"{what}: frames[{i}][{j}]: coordinates must be numbers, got {value!r}")

    if not frames:
        return np.empty((0, NUM_KEYPOINTS, 3), dtype=np.float64)
    arr = np.asarray(frames, dtype=np.float64)

    finite_xy = np.isfinite(arr[:, :, :2]).all(axis=2)
    if not finite_xy.all():
        i, j = map(int, np.argwhere(~finite_xy)[0])
        raise SchemaError(f"{what}: frames[{i}][{j}]: non-finite coordinate")
    conf = arr[:, :, 2]
    conf_ok = np.isfinite(conf) & (conf >= 0.0) & (conf <= 1.0)
    if not conf_ok.all():
        i, j = map(int, np.argwhere(~conf_ok)[0])
        raise SchemaError(
            f"{what}: frames[{i}][{j}]: confidence range (c={arr[i, j, 2]!r}, expected [0, 1])")
    return arr


def write_skeleton_file(seq: SkeletonSequence) -> bytes:
    """Serialize a skeleton sequence; coordinates keep their exact values.

    Floats are emitted in shortest round-trip decimal form, so
    parse(write(seq)) reproduces every coordinate bit-for-bit.
    """
    payload = {
        "participant_id": seq.participant_id,
        "view": seq.view.value,
        "fps": seq.fps,
        "width": seq.width,
        "height": seq.height,
        "frames": seq.array.tolist(),
    }
    return (json.dumps(payload, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# label files
# ---------------------------------------------------------------------------


def parse_label_file(data: bytes | str, *, participant_id: str = "",
                     view: View = View.LEFT, window_size: int = 50) -> ActionLabelSequence:
    """Parse a .labels.csv file.

    The file carries only (window_index, label) rows; identity and window
    size are supplied by the caller (normally from the manifest).
    """
    what = "label file"
    rows = _csv_lines(data, what, "window_index,label")
    labels: list[ActionLabel] = []
    for lineno, line in enumerate(rows):
        where = f"{what}: line {lineno + 2}"
        parts = line.split(",")
        if len(parts) != 2:
            raise SchemaError(f"{where}: expected 2 fields, got {len(parts)}")
        index = _parse_int_field(parts[0], f"{where}: window_index")
        value = _parse_int_field(parts[1], f"{where}: label")
        if index != lineno:
            if index < lineno:
                raise SchemaError(f"{what}: duplicate window index {index}")
            raise SchemaError(f"{what}: window index gap at {lineno}")
        if value not in (1, 2, 3):
            raise SchemaError(f"{where}: label out of range: {value}")
        labels.append(ActionLabel(value))
    if not labels:
        raise SchemaError(f"{what}: empty label list")
    return ActionLabelSequence(
        participant_id=participant_id, view=view,
        labels=tuple(labels), window_size=window_size, provenance="file")


def write_label_file(labels: ActionLabelSequence) -> bytes:
    lines = ["window_index,label"]
    lines.extend(f"{i},{int(label)}" for i, label in enumerate(labels.labels))
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


def parse_manifest(data: bytes | str) -> CohortManifest:
    """Parse a .manifest.json document."""
    what = "manifest"
    payload = _load_json(data, what)
    if not isinstance(payload, dict):
        raise SchemaError(f"{what}: top-level value must be an object")
    dataset_name = _require_str(payload, "dataset_name", what)
    if "window_size" in payload:
        window_size = _require_int(payload, "window_size", what)
        if window_size < 2:
            raise SchemaError(f"{what}: window_size must be >= 2, got {window_size}")
    else:
        window_size = 50
    entries = _require(payload, "participants", what)
    if not isinstance(entries, list):
        raise SchemaError(f"{what}: field 'participants' must be an array")

    participants: list[ParticipantRecord] = []
    seen: set[str] = set()
    for k, entry in enumerate(entries):
        where = f"{what}: participants[{k}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: must be an object")
        pid = _require_str(entry, "id", where)
        if not pid:
            raise SchemaError(f"{where}: id must be non-empty")
        if pid in seen:
            raise SchemaError(f"{what}: duplicate participant_id {pid!r}")
        seen.add(pid)
        group_tag = _require_str(entry, "group", where)
        try:
            group = Group(group_tag)
        except ValueError:
            raise SchemaError(
                f"{where}: unknown group {group_tag!r}, expected ADHD/Control/Unknown") from None
        sex: Optional[Sex] = None
        if entry.get("sex") is not None:
            sex_tag = entry["sex"]
            if not isinstance(sex_tag, str) or sex_tag not in ("M", "F"):
                raise SchemaError(f"{where}: sex must be 'M', 'F' or null")
            sex = Sex(sex_tag)
        views_payload = _require(entry, "views", where)
        if not isinstance(views_payload, dict):
            raise SchemaError(f"{where}: field 'views' must be an object")
        sources: dict[View, str] = {}
        for view_tag, path in views_payload.items():
            try:
                view = View(view_tag)
            except ValueError:
                raise SchemaError(f"{where}: unknown view {view_tag!r}") from None
            if not isinstance(path, str) or not path:
                raise SchemaError(f"{where}: view {view_tag!r} path must be non-empty text")
            sources[view] = path
        if not sources:
            raise SchemaError(f"{where}: participant needs at least one view")
        participants.append(ParticipantRecord(
            participant_id=pid, group=group, sex=sex, sources=sources))
    return CohortManifest(dataset_name=dataset_name, window_size=window_size,
                          participants=tuple(participants))


def write_manifest(manifest: CohortManifest) -> bytes:
    payload = {
        "dataset_name": manifest.dataset_name,
        "window_size": manifest.window_size,
        "participants": [
            {
                "id": p.participant_id,
                "group": p.group.value,
                "sex": p.sex.value if p.sex is not None else None,
                "views": {view.value: p.sources[view]
                          for view in (View.LEFT, View.RIGHT) if view in p.sources},
            }
            for p in manifest.participants
        ],
    }
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# ADR reports
# ---------------------------------------------------------------------------

ADR_HEADER = "participant_id,group,adr_left,adr_right,adr_final"


def _fmt_adr(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4f}"


def write_adr_results(results: Sequence[AdrResult],
                      groups: Optional[Mapping[str, Group]] = None) -> bytes:
    """Serialize scored participants to .adr.csv, sorted by participant_id.

    `groups` supplies the ground-truth column; participants without an
    entry are written as Unknown.
    """
    groups = groups or {}
    lines = [ADR_HEADER]
    for r in sorted(results, key=lambda r: r.participant_id):
        group = groups.get(r.participant_id, Group.UNKNOWN)
        lines.append(",".join([
            r.participant_id,
            group.value,
            _fmt_adr(r.adr_left),
            _fmt_adr(r.adr_right),
            _fmt_adr(r.adr_final),
        ]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_adr_results(data: bytes | str) -> list[AdrReportRow]:
    """Parse an .adr.csv report back into rows."""
    what = "ADR report"
    rows = _csv_lines(data, what, ADR_HEADER)
    out: list[AdrReportRow] = []
    seen: set[str] = set()
    for lineno, line in enumerate(rows):
        where = f"{what}: line {lineno + 2}"
        parts = line.split(",")
        if len(parts) != 5:
            raise SchemaError(f"{where}: expected 5 fields, got {len(parts)}")
        pid, group_tag, left_s, right_s, final_s = parts
        if not pid:
            raise SchemaError(f"{where}: participant_id must be non-empty")
        if pid in seen:
            raise SchemaError(f"{what}: duplicate participant_id {pid!r}")
        seen.add(pid)
        try:
            group = Group(group_tag)
        except ValueError:
            raise SchemaError(f"{where}: unknown group {group_tag!r}") from None
        left = None if left_s == "" else _parse_float_field(left_s, f"{where}: adr_left")
        right = None if right_s == "" else _parse_float_field(right_s, f"{where}: adr_right")
        if left is None and right is None:
            raise SchemaError(f"{where}: participant {pid!r} has neither view ADR")
        final = _parse_float_field(final_s, f"{where}: adr_final")
        out.append(AdrReportRow(pid, group, left, right, final))
    return out


# ---------------------------------------------------------------------------
# diagnosis reports
# ---------------------------------------------------------------------------

DIAG_HEADER = "participant_id,adr_final,threshold,threshold_mode,result"


def write_diagnoses(diagnoses: Sequence[Diagnosis], threshold_mode: str) -> bytes:
    """Serialize screening decisions; the threshold and its provenance ride along."""
    lines = [DIAG_HEADER]
    for d in sorted(diagnoses, key=lambda d: d.participant_id):
        lines.append(",".join([
            d.participant_id,
            f"{d.adr_final:.4f}",
            f"{d.threshold:.4f}",
            threshold_mode,
            d.result.value,
        ]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_diagnoses(data: bytes | str) -> tuple[list[Diagnosis], str]:
    """Parse a .diag.csv report; returns the rows and the threshold mode."""
    what = "diagnosis report"
    rows = _csv_lines(data, what, DIAG_HEADER)
    out: list[Diagnosis] = []
    modes: set[str] = set()
    for lineno, line in enumerate(rows):
        where = f"{what}: line {lineno + 2}"
        parts = line.split(",")
        if len(parts) != 5:
            raise SchemaError(f"{where}: expected 5 fields, got {len(parts)}")
        pid, adr_s, thr_s, mode, result_tag = parts
        if not pid:
            raise SchemaError(f"{where}: participant_id must be non-empty")
        if result_tag not in (Group.ADHD.value, Group.CONTROL.value):
            raise SchemaError(f"{where}: result must be ADHD or Control, got {result_tag!r}")
        out.append(Diagnosis(
            participant_id=pid,
            adr_final=_parse_float_field(adr_s, f"{where}: adr_final"),
            threshold=_parse_float_field(thr_s, f"{where}: threshold"),
            result=Group(result_tag),
        ))
        modes.add(mode)
    if not out:
        raise SchemaError(f"{what}: no rows")
    if len(modes) > 1:
        raise SchemaError(f"{what}: inconsistent threshold_mode values {sorted(modes)}")
    return out, modes.pop()


# ---------------------------------------------------------------------------
# timeline data
# ---------------------------------------------------------------------------

TIMELINE_HEADER = "window_index,start_frame,end_frame,label"


def write_timeline(labels: ActionLabelSequence) -> bytes:
    """Per-window frame spans, ready for external plotting."""
    size = labels.window_size
    lines = [TIMELINE_HEADER]
    lines.extend(
        f"{i},{i * size},{(i + 1) * size - 1},{int(label)}"
        for i, label in enumerate(labels.labels)
    )
    return ("\n".join(lines) + "\n").encode("utf-8")
