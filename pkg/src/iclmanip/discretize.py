"""Map continuous poses and actions to integer bins and back.

Translation axes use 100 uniform bins over the workspace extent, with
out-of-range values clamped to the edge bins. Rotation uses 72 bins of
5 degrees each over [0, 360). Dediscretization returns bin centers, so
the reconstruction error is at most half a bin per component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Action, GripperState, Pose6, WorkspaceBounds

TRANSLATION_BINS = 100
ROTATION_BINS = 72
DEGREES_PER_BIN = 360.0 / ROTATION_BINS  # 5 degrees


@dataclass(frozen=True)
class DiscretePose:
    """Binned 6-DoF pose: three translation bins, three rotation bins."""

    tx: int
    ty: int
    tz: int
    rr: int
    rp: int
    ry: int

    def __post_init__(self):
        for name in ("tx", "ty", "tz"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < TRANSLATION_BINS:
                raise ValueError(f"DiscretePose.{name} must be an int in [0, {TRANSLATION_BINS}), got {v!r}")
        for name in ("rr", "rp", "ry"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < ROTATION_BINS:
                raise ValueError(f"DiscretePose.{name} must be an int in [0, {ROTATION_BINS}), got {v!r}")

    def as_tuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.tx, self.ty, self.tz, self.rr, self.rp, self.ry)


@dataclass(frozen=True)
class DiscreteAction:
    """Binned action: a DiscretePose plus the gripper bit (1 open, 0 closed)."""

    pose: DiscretePose
    gripper: int

    def __post_init__(self):
        if not isinstance(self.pose, DiscretePose):
            raise ValueError(f"DiscreteAction.pose must be a DiscretePose, got {self.pose!r}")
        if self.gripper not in (0, 1) or isinstance(self.gripper, bool):
            raise ValueError(f"DiscreteAction.gripper must be 0 or 1, got {self.gripper!r}")

    def as_tuple(self) -> tuple[int, int, int, int, int, int, int]:
        return self.pose.as_tuple() + (self.gripper,)


def discretize_translation(value: float, axis_min: float, axis_max: float) -> int:
    """Bin = floor of the normalized position scaled to 100, clamped to [0, 99]."""
    if not axis_min < axis_max:
        raise ValueError(f"axis_min {axis_min} must be < axis_max {axis_max}")
    raw = (value - axis_min) / (axis_max - axis_min) * TRANSLATION_BINS
    return min(max(int(math.floor(raw)), 0), TRANSLATION_BINS - 1)


def dediscretize_translation(bin_index: int, axis_min: float, axis_max: float) -> float:
    """Center of the bin."""
    if not 0 <= bin_index < TRANSLATION_BINS:
        raise ValueError(f"translation bin {bin_index} out of range [0, {TRANSLATION_BINS})")
    span = axis_max - axis_min
    return axis_min + (bin_index + 0.5) * span / TRANSLATION_BINS


def discretize_rotation(angle_rad: float) -> int:
    """Normalize to [0, 360) degrees and take the 5-degree bin."""
    wrapped = angle_rad % (2.0 * math.pi)
    if wrapped >= 2.0 * math.pi:
        wrapped = 0.0
    deg = math.degrees(wrapped)
    return min(int(math.floor(deg / DEGREES_PER_BIN)), ROTATION_BINS - 1)


def dediscretize_rotation(bin_index: int) -> float:
    """Center of the bin, in radians."""
    if not 0 <= bin_index < ROTATION_BINS:
        raise ValueError(f"rotation bin {bin_index} out of range [0, {ROTATION_BINS})")
    return math.radians((bin_index + 0.5) * DEGREES_PER_BIN)


def discretize_pose(pose: Pose6, bounds: WorkspaceBounds) -> DiscretePose:
    tx = discretize_translation(pose.x, *bounds.axis(0))
    ty = discretize_translation(pose.y, *bounds.axis(1))
    tz = discretize_translation(pose.z, *bounds.axis(2))
    return DiscretePose(
        tx,
        ty,
        tz,
        discretize_rotation(pose.roll),
        discretize_rotation(pose.pitch),
        discretize_rotation(pose.yaw),
    )


def dediscretize_pose(dp: DiscretePose, bounds: WorkspaceBounds) -> Pose6:
    return Pose6(
        dediscretize_translation(dp.tx, *bounds.axis(0)),
        dediscretize_translation(dp.ty, *bounds.axis(1)),
        dediscretize_translation(dp.tz, *bounds.axis(2)),
        dediscretize_rotation(dp.rr),
        dediscretize_rotation(dp.rp),
        dediscretize_rotation(dp.ry),
    )


def discretize_action(action: Action, bounds: WorkspaceBounds) -> DiscreteAction:
    return DiscreteAction(discretize_pose(action.pose, bounds), action.gripper.to_bit())


def dediscretize_action(da: DiscreteAction, bounds: WorkspaceBounds) -> Action:
    return Action(dediscretize_pose(da.pose, bounds), GripperState.from_bit(da.gripper))
