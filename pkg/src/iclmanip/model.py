"""Domain types shared across the toolkit, plus episode persistence.

Episodes are stored as line-delimited JSON, one episode per line, with
full float round-trip precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

TWO_PI = 2.0 * math.pi


class GripperState(Enum):
    """Parallel gripper state. Encoded as 1 = open, 0 = closed on the wire."""

    OPEN = "open"
    CLOSED = "closed"

    def to_bit(self) -> int:
        return 1 if self is GripperState.OPEN else 0

    @staticmethod
    def from_bit(bit: int) -> "GripperState":
        if bit == 1:
            return GripperState.OPEN
        if bit == 0:
            return GripperState.CLOSED
        raise ValueError(f"gripper bit must be 0 or 1, got {bit!r}")


def _wrap_angle(a: float) -> float:
    # Normalize to [0, 2*pi). The guard catches float mod landing exactly
    # on 2*pi for tiny negative inputs.
    r = a % TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


@dataclass(frozen=True)
class Pose6:
    """6-DoF pose: translation in meters, Euler rotation in radians.

    Rotations are normalized to [0, 2*pi) at construction.
    """

    x: float  # m
    y: float  # m
    z: float  # m
    roll: float  # rad
    pitch: float  # rad
    yaw: float  # rad

    def __post_init__(self):
        for name in ("x", "y", "z", "roll", "pitch", "yaw"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ValueError(f"Pose6.{name} must be a number, got {v!r}")
            if not math.isfinite(v):
                raise ValueError(f"Pose6.{name} must be finite, got {v!r}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        object.__setattr__(self, "roll", _wrap_angle(float(self.roll)))
        object.__setattr__(self, "pitch", _wrap_angle(float(self.pitch)))
        object.__setattr__(self, "yaw", _wrap_angle(float(self.yaw)))

    def translation(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def rotation(self) -> tuple[float, float, float]:
        return (self.roll, self.pitch, self.yaw)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z, self.roll, self.pitch, self.yaw]

    @staticmethod
    def from_list(values: Sequence[float]) -> "Pose6":
        if len(values) != 6:
            raise ValueError(f"Pose6 list length {len(values)} != 6")
        return Pose6(*values)


@dataclass(frozen=True)
class Action:
    """One macro-step command: a target pose plus a gripper state."""

    pose: Pose6
    gripper: GripperState

    def __post_init__(self):
        if not isinstance(self.pose, Pose6):
            raise ValueError(f"Action.pose must be a Pose6, got {self.pose!r}")
        if not isinstance(self.gripper, GripperState):
            raise ValueError(f"Action.gripper must be a GripperState, got {self.gripper!r}")


@dataclass(frozen=True)
class JointVelocities:
    """Instantaneous joint velocities for a 7-DoF arm, rad/s."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != 7:
            raise ValueError(f"JointVelocities length {len(vals)} != 7")
        for i, v in enumerate(vals):
            if not math.isfinite(v):
                raise ValueError(f"JointVelocities[{i}] must be finite, got {v!r}")
        object.__setattr__(self, "values", vals)

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))


@dataclass(frozen=True)
class ObjectObservation:
    """A named scene object and its observed pose."""

    name: str
    pose: Pose6

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError(f"ObjectObservation.name must be a non-empty string, got {self.name!r}")
        if not isinstance(self.pose, Pose6):
            raise ValueError(f"ObjectObservation.pose must be a Pose6, got {self.pose!r}")


@dataclass(frozen=True)
class Episode:
    """One recorded demonstration.

    `objects` holds the scene observations at the start of the episode.
    `velocities` and `actions` are dense, one entry per timestep, and must
    have equal length T >= 2.
    """

    instruction: str
    objects: tuple[ObjectObservation, ...]
    velocities: tuple[JointVelocities, ...]
    actions: tuple[Action, ...]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "velocities", tuple(self.velocities))
        object.__setattr__(self, "actions", tuple(self.actions))
        if not isinstance(self.instruction, str) or not self.instruction:
            raise ValueError("Episode.instruction must be a non-empty string")
        if not self.objects:
            raise ValueError("Episode.objects must be non-empty")
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise ValueError(f"Episode.objects names must be unique, got {names}")
        if len(self.velocities) != len(self.actions):
            raise ValueError(
                f"Episode length mismatch: {len(self.velocities)} velocities vs {len(self.actions)} actions"
            )
        if len(self.actions) < 2:
            raise ValueError(f"Episode must have T >= 2 timesteps, got T={len(self.actions)}")

    @property
    def length(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class WorkspaceBounds:
    """Axis-aligned workspace box; per-axis min must be strictly below max."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float

    def __post_init__(self):
        for axis in ("x", "y", "z"):
            lo = getattr(self, axis + "_min")
            hi = getattr(self, axis + "_max")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"WorkspaceBounds.{axis} limits must be finite")
            if not lo < hi:
                raise ValueError(f"WorkspaceBounds.{axis}_min {lo} must be < {axis}_max {hi}")

    def axis(self, index: int) -> tuple[float, float]:
        """Return (min, max) for axis 0=x, 1=y, 2=z."""
        return [
            (self.x_min, self.x_max),
            (self.y_min, self.y_max),
            (self.z_min, self.z_max),
        ][index]

    def contains(self, pose: Pose6, margin: float = 0.0) -> bool:
        """True if the pose translation lies inside the box grown by `margin` per side."""
        for i, v in enumerate(pose.translation()):
            lo, hi = self.axis(i)
            if v < lo - margin or v > hi + margin:
                return False
        return True


class PersistenceError(Exception):
    """Raised when an episode file cannot be written or read."""


def _episode_to_json(ep: Episode) -> dict:
    return {
        "instruction": ep.instruction,
        "objects": [{"name": o.name, "pose": o.pose.as_list()} for o in ep.objects],
        "velocities": [list(v.values) for v in ep.velocities],
        "actions": [{"pose": a.pose.as_list(), "gripper": a.gripper.to_bit()} for a in ep.actions],
    }


def _require(data: dict, key: str, kind: type, where: str):
    if key not in data:
        raise ValueError(f"{where} missing field {key!r}")
    value = data[key]
    if not isinstance(value, kind):
        raise ValueError(f"{where}.{key} must be {kind.__name__}, got {type(value).__name__}")
    return value


def _episode_from_json(data: dict) -> Episode:
    if not isinstance(data, dict):
        raise ValueError(f"episode record must be an object, got {type(data).__name__}")
    instruction = _require(data, "instruction", str, "episode")
    objects = []
    for item in _require(data, "objects", list, "episode"):
        name = _require(item, "name", str, "object")
        pose = _require(item, "pose", list, "object")
        objects.append(ObjectObservation(name, Pose6.from_list(pose)))
    velocities = [JointVelocities(tuple(v)) for v in _require(data, "velocities", list, "episode")]
    actions = []
    for item in _require(data, "actions", list, "episode"):
        pose = _require(item, "pose", list, "action")
        bit = item.get("gripper")
        if bit not in (0, 1):
            raise ValueError(f"action.gripper must be 0 or 1, got {bit!r}")
        actions.append(Action(Pose6.from_list(pose), GripperState.from_bit(bit)))
    return Episode(instruction, tuple(objects), tuple(velocities), tuple(actions))


def save_episodes(episodes: Iterable[Episode], path: str | Path) -> None:
    """Write episodes as line-delimited JSON, one episode per line."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as handle:
            for ep in episodes:
                handle.write(json.dumps(_episode_to_json(ep), allow_nan=False))
                handle.write("\n")
    except OSError as exc:
        raise PersistenceError(f"cannot write {path}: {exc}") from exc


def load_episodes(path: str | Path) -> list[Episode]:
    """Read episodes back; errors name the offending line and field."""
    path = Path(path)
    episodes: list[Episode] = []
    try:
        with path.open("r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise PersistenceError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
                try:
                    episodes.append(_episode_from_json(data))
                except (ValueError, TypeError) as exc:
                    raise PersistenceError(f"{path}:{line_no}: {exc}") from exc
    except OSError as exc:
        raise PersistenceError(f"cannot read {path}: {exc}") from exc
    return episodes


def verify_object_consistency(episodes: Sequence[Episode]) -> None:
    """Require every episode to list the same object names in the same order."""
    if not episodes:
        return
    reference = tuple(o.name for o in episodes[0].objects)
    for i, ep in enumerate(episodes[1:], start=1):
        names = tuple(o.name for o in ep.objects)
        if names != reference:
            raise ValueError(
                f"episode {i} object names {names} differ from episode 0 {reference}"
            )
