"""Deterministic desk-scale tabletop simulator.

Kinematic only: the gripper teleports to each commanded pose, grasping is
proximity-based, released objects settle instantly onto the highest
support surface beneath them (table or another cube), and buttons latch
pressed when an empty gripper dips into their press zone. Everything is a
pure function of (task, seed, bounds), which is what makes end-to-end
evaluation reproducible.

Object pose convention: z is the object's resting base height (bottom
face), so a cube sitting on the table has z = 0 and a cube stacked on
another has z equal to the supporter's top face.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .model import (
    Action,
    Episode,
    GripperState,
    JointVelocities,
    ObjectObservation,
    Pose6,
    WorkspaceBounds,
)

CUBE_EDGE_M = 0.04
BUTTON_RADIUS_M = 0.025
TARGET_HALF_M = 0.06
GRASP_RADIUS_M = 0.02
PRESS_HEIGHT_M = 0.01
MIN_SEPARATION_M = 0.08
MAX_RESET_DRAWS = 1000
STEP_SIZE_M = 0.02
DWELL_STEPS = 3
MIN_EPISODE_STEPS = 60
TRAVEL_HEIGHT_M = 0.15
PRESS_Z_M = 0.004
HOME_POSE = Pose6(0.0, 0.0, 0.30, 0.0, 0.0, 0.0)
STACK_TOLERANCE_M = 0.01
BOUNDS_INFLATION = 0.1  # fraction of each axis span added per side

BASE_SIGMA_TRANSLATION_M = 0.0168
BASE_SIGMA_ROTATION_RAD = math.radians(4.61)


class TaskId(Enum):
    STACK_CUBE = "stack_cube"
    DESTACK_CUBE = "destack_cube"
    PUSH_BUTTON = "push_button"
    PUSH_MULTIPLE_BUTTONS = "push_multiple_buttons"
    SLIDE_BLOCK = "slide_block"


class Kind(Enum):
    CUBE = "cube"
    BUTTON = "button"
    TARGET = "target"  # flat goal region, neither graspable nor pressable


@dataclass
class SimObject:
    """A scene object. `size` is the cube edge, button radius, or target
    half-width depending on kind."""

    name: str
    kind: Kind
    pose: Pose6
    size: float
    pressed: bool = False
    supported_by: str | None = None

    def center(self) -> tuple[float, float, float]:
        z = self.pose.z + self.size / 2.0 if self.kind is Kind.CUBE else self.pose.z
        return (self.pose.x, self.pose.y, z)

    def top(self) -> float:
        return self.pose.z + self.size if self.kind is Kind.CUBE else self.pose.z


@dataclass
class WorldState:
    """Mutable simulator state; evolves through execute_action."""

    objects: list[SimObject]
    gripper_pose: Pose6
    gripper: GripperState
    bounds: WorkspaceBounds
    attached: str | None = None
    time: int = 0
    press_log: list[str] = field(default_factory=list)

    def object(self, name: str) -> SimObject:
        for obj in self.objects:
            if obj.name == name:
                return obj
        raise KeyError(f"no object named {name!r} in world")

    def clone(self) -> "WorldState":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class TaskVariation:
    """Which concrete goal a reset drew; empty fields do not apply."""

    top: str | None = None
    bottom: str | None = None
    buttons: tuple[str, ...] = ()


@dataclass(frozen=True)
class TaskSpec:
    """Static description of a task: roster plus enumerable variations."""

    task: TaskId
    roster: tuple[tuple[str, Kind, float], ...]
    variations: tuple[TaskVariation, ...]


class PlacementError(Exception):
    """reset() exhausted its rejection-sampling budget."""


class ExecutionError(Exception):
    """An action pose fell outside the inflated workspace bounds."""


class ExpertError(Exception):
    """The scripted expert could not plan for the given world/instruction."""


_CUBE_ROSTER = (("blue cube", Kind.CUBE, CUBE_EDGE_M), ("yellow cube", Kind.CUBE, CUBE_EDGE_M))
_BUTTON_ROSTER = (
    ("red button", Kind.BUTTON, BUTTON_RADIUS_M),
    ("yellow button", Kind.BUTTON, BUTTON_RADIUS_M),
    ("green button", Kind.BUTTON, BUTTON_RADIUS_M),
    ("blue button", Kind.BUTTON, BUTTON_RADIUS_M),
)
_SLIDE_ROSTER = (("block", Kind.CUBE, CUBE_EDGE_M), ("target", Kind.TARGET, TARGET_HALF_M))

_ROSTERS: dict[TaskId, tuple[tuple[str, Kind, float], ...]] = {
    TaskId.STACK_CUBE: _CUBE_ROSTER,
    TaskId.DESTACK_CUBE: _CUBE_ROSTER,
    TaskId.PUSH_BUTTON: _BUTTON_ROSTER,
    TaskId.PUSH_MULTIPLE_BUTTONS: _BUTTON_ROSTER,
    TaskId.SLIDE_BLOCK: _SLIDE_ROSTER,
}

# Tasks sharing a placement group draw identical layouts at equal seeds;
# push_button and push_multiple_buttons must coincide so single-button
# demos can exist in a multi-button world.
_PLACEMENT_GROUP: dict[TaskId, int] = {
    TaskId.STACK_CUBE: 0,
    TaskId.DESTACK_CUBE: 1,
    TaskId.PUSH_BUTTON: 2,
    TaskId.PUSH_MULTIPLE_BUTTONS: 2,
    TaskId.SLIDE_BLOCK: 3,
}

_CUBE_VARIATIONS = (
    TaskVariation(top="blue cube", bottom="yellow cube"),
    TaskVariation(top="yellow cube", bottom="blue cube"),
)
_BUTTON_VARIATIONS = tuple(TaskVariation(buttons=(name,)) for name, _, _ in _BUTTON_ROSTER)


def task_spec(task: TaskId) -> TaskSpec:
    if task in (TaskId.STACK_CUBE, TaskId.DESTACK_CUBE):
        variations = _CUBE_VARIATIONS
    elif task is TaskId.PUSH_BUTTON:
        variations = _BUTTON_VARIATIONS
    elif task is TaskId.SLIDE_BLOCK:
        variations = (TaskVariation(),)
    else:
        # push_multiple_buttons variations are sampled sequences, not enumerable
        variations = ()
    return TaskSpec(task=task, roster=_ROSTERS[task], variations=variations)


def render_instruction(task: TaskId, variation: TaskVariation) -> str:
    if task is TaskId.STACK_CUBE:
        return f"stack the {variation.top} on the {variation.bottom}"
    if task is TaskId.DESTACK_CUBE:
        return f"destack the {variation.top} that is on the {variation.bottom}"
    if task is TaskId.PUSH_BUTTON:
        return f"push the {variation.buttons[0]}"
    if task is TaskId.PUSH_MULTIPLE_BUTTONS:
        return ", then ".join(f"push the {name}" for name in variation.buttons)
    if task is TaskId.SLIDE_BLOCK:
        return "slide the block onto the target"
    raise ValueError(f"unknown task {task!r}")


def _placement_region(bounds: WorkspaceBounds) -> tuple[float, float, float, float]:
    """Central x/y box objects are placed in, 10% of span in from each edge."""
    mx = 0.1 * (bounds.x_max - bounds.x_min)
    my = 0.1 * (bounds.y_max - bounds.y_min)
    return (bounds.x_min + mx, bounds.x_max - mx, bounds.y_min + my, bounds.y_max - my)


def observations_of(world: WorldState) -> tuple[ObjectObservation, ...]:
    """Snapshot the scene as named pose observations, roster order."""
    return tuple(ObjectObservation(o.name, o.pose) for o in world.objects)


def _validate_world(world: WorldState) -> None:
    if world.attached is not None and world.gripper is not GripperState.CLOSED:
        raise RuntimeError("invariant violation: attached object with open gripper")
    for obj in world.objects:
        if obj.pressed and obj.kind is not Kind.BUTTON:
            raise RuntimeError(f"invariant violation: pressed flag on {obj.kind} {obj.name!r}")
        if obj.supported_by is not None:
            supporter = world.object(obj.supported_by)
            if abs(obj.pose.z - supporter.top()) > 1e-9:
                raise RuntimeError(
                    f"invariant violation: {obj.name!r} not resting on {supporter.name!r} top"
                )


def reset(task: TaskId, seed: int, bounds: WorkspaceBounds) -> tuple[WorldState, str, TaskVariation]:
    """Build the initial world for (task, seed): same inputs, same world.

    Placements are drawn before the variation so tasks in one placement
    group share layouts at equal seeds. Worlds that would already satisfy
    check_success are rejected and redrawn.
    """
    rng = np.random.default_rng([_PLACEMENT_GROUP[task], seed])
    roster = _ROSTERS[task]
    lo_x, hi_x, lo_y, hi_y = _placement_region(bounds)
    for _ in range(MAX_RESET_DRAWS):
        if task is TaskId.DESTACK_CUBE:
            x = rng.uniform(lo_x, hi_x)
            y = rng.uniform(lo_y, hi_y)
            yaw_bottom = rng.uniform(0.0, 2.0 * math.pi)
            yaw_top = rng.uniform(0.0, 2.0 * math.pi)
            placements = [(x, y, yaw_bottom), (x, y, yaw_top)]
            separated = True
        else:
            placements = []
            for _ in roster:
                placements.append(
                    (rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y), rng.uniform(0.0, 2.0 * math.pi))
                )
            separated = all(
                math.hypot(a[0] - b[0], a[1] - b[1]) >= MIN_SEPARATION_M
                for i, a in enumerate(placements)
                for b in placements[i + 1 :]
            )
        if not separated:
            continue

        if task is TaskId.STACK_CUBE:
            variation = _CUBE_VARIATIONS[int(rng.integers(0, 2))]
        elif task is TaskId.DESTACK_CUBE:
            variation = _CUBE_VARIATIONS[int(rng.integers(0, 2))]
        elif task is TaskId.PUSH_BUTTON:
            variation = _BUTTON_VARIATIONS[int(rng.integers(0, 4))]
        elif task is TaskId.PUSH_MULTIPLE_BUTTONS:
            count = int(rng.integers(1, 7))
            names = tuple(_BUTTON_ROSTER[int(i)][0] for i in rng.integers(0, 4, size=count))
            variation = TaskVariation(buttons=names)
        else:
            variation = TaskVariation()

        objects = []
        if task is TaskId.DESTACK_CUBE:
            x, y, yaw_bottom = placements[0]
            _, _, yaw_top = placements[1]
            bottom = variation.bottom
            top = variation.top
            by_name = {
                bottom: SimObject(bottom, Kind.CUBE, Pose6(x, y, 0.0, 0.0, 0.0, yaw_bottom), CUBE_EDGE_M),
                top: SimObject(
                    top,
                    Kind.CUBE,
                    Pose6(x, y, CUBE_EDGE_M, 0.0, 0.0, yaw_top),
                    CUBE_EDGE_M,
                    supported_by=bottom,
                ),
            }
            objects = [by_name[name] for name, _, _ in roster]
        else:
            for (name, kind, size), (x, y, yaw) in zip(roster, placements):
                objects.append(SimObject(name, kind, Pose6(x, y, 0.0, 0.0, 0.0, yaw), size))

        world = WorldState(
            objects=objects,
            gripper_pose=HOME_POSE,
            gripper=GripperState.OPEN,
            bounds=bounds,
        )
        if check_success(task, world, variation):
            continue  # e.g. the block sampled already inside the target square
        _validate_world(world)
        return world, render_instruction(task, variation), variation
    raise PlacementError(f"no legal placement for {task.value} seed {seed} in {MAX_RESET_DRAWS} draws")


def _press_zone(button: SimObject, pose: Pose6) -> bool:
    in_xy = math.hypot(pose.x - button.pose.x, pose.y - button.pose.y) <= button.size
    return in_xy and pose.z <= PRESS_HEIGHT_M


def execute_action(world: WorldState, action: Action) -> None:
    """One macro-step: teleport the gripper, then apply grasp/release/press
    rules at the destination. Mutates the world in place.

    Raises ExecutionError when the commanded pose leaves the workspace
    bounds inflated by 10% of each axis span per side.
    """
    pose = action.pose
    for i, axis in enumerate(("x", "y", "z")):
        lo, hi = world.bounds.axis(i)
        margin = BOUNDS_INFLATION * (hi - lo)
        v = pose.translation()[i]
        if v < lo - margin or v > hi + margin:
            raise ExecutionError(
                f"action pose {axis}={v:.3f} outside inflated bounds [{lo - margin:.3f}, {hi + margin:.3f}]"
            )

    prev_pose = world.gripper_pose
    prev_grip = world.gripper
    world.gripper_pose = pose

    # Whatever is held tracks the gripper point (cube center at the tool tip).
    if world.attached is not None:
        held = world.object(world.attached)
        held.pose = Pose6(pose.x, pose.y, pose.z - held.size / 2.0, 0.0, 0.0, held.pose.yaw)
        held.supported_by = None

    if action.gripper is GripperState.CLOSED and prev_grip is GripperState.OPEN:
        # Closing: attach the nearest cube within reach, if any.
        best: tuple[float, SimObject] | None = None
        for obj in world.objects:
            if obj.kind is not Kind.CUBE:
                continue
            cx, cy, cz = obj.center()
            d = math.sqrt((pose.x - cx) ** 2 + (pose.y - cy) ** 2 + (pose.z - cz) ** 2)
            if d <= GRASP_RADIUS_M and (best is None or d < best[0]):
                best = (d, obj)
        if best is not None:
            obj = best[1]
            world.attached = obj.name
            obj.pose = Pose6(pose.x, pose.y, pose.z - obj.size / 2.0, 0.0, 0.0, obj.pose.yaw)
            obj.supported_by = None
    elif action.gripper is GripperState.OPEN and prev_grip is GripperState.CLOSED:
        if world.attached is not None:
            dropped = world.object(world.attached)
            world.attached = None
            support: SimObject | None = None
            for obj in world.objects:
                if obj is dropped or obj.kind is not Kind.CUBE:
                    continue
                if math.hypot(dropped.pose.x - obj.pose.x, dropped.pose.y - obj.pose.y) < obj.size / 2.0:
                    if support is None or obj.top() > support.top():
                        support = obj
            if support is None:
                dropped.pose = Pose6(
                    dropped.pose.x, dropped.pose.y, 0.0, 0.0, 0.0, dropped.pose.yaw
                )
                dropped.supported_by = None
            else:
                dropped.pose = Pose6(
                    dropped.pose.x, dropped.pose.y, support.top(), 0.0, 0.0, dropped.pose.yaw
                )
                dropped.supported_by = support.name

    world.gripper = action.gripper

    # Press fires on the transition into the zone, with an empty hand.
    if world.attached is None:
        for obj in world.objects:
            if obj.kind is not Kind.BUTTON:
                continue
            if _press_zone(obj, pose) and not _press_zone(obj, prev_pose):
                obj.pressed = True
                world.press_log.append(obj.name)

    world.time += 1
    _validate_world(world)


def check_success(task: TaskId, world: WorldState, variation: TaskVariation) -> bool:
    """Task-specific goal predicate on the current world state."""
    if task is TaskId.STACK_CUBE:
        top = world.object(variation.top)
        bottom = world.object(variation.bottom)
        xy_ok = (
            math.hypot(top.pose.x - bottom.pose.x, top.pose.y - bottom.pose.y)
            <= bottom.size / 2.0
        )
        z_ok = abs(top.pose.z - bottom.top()) <= STACK_TOLERANCE_M
        return xy_ok and z_ok and world.attached is None
    if task is TaskId.DESTACK_CUBE:
        moved = world.object(variation.top)
        return moved.pose.z <= moved.size / 2.0 + STACK_TOLERANCE_M
    if task is TaskId.PUSH_BUTTON:
        return world.object(variation.buttons[0]).pressed
    if task is TaskId.PUSH_MULTIPLE_BUTTONS:
        return tuple(world.press_log) == variation.buttons
    if task is TaskId.SLIDE_BLOCK:
        block = world.object("block")
        target = world.object("target")
        dx = block.pose.x - target.pose.x
        dy = block.pose.y - target.pose.y
        c = math.cos(-target.pose.yaw)
        s = math.sin(-target.pose.yaw)
        local_x = c * dx - s * dy
        local_y = s * dx + c * dy
        return abs(local_x) <= target.size and abs(local_y) <= target.size
    raise ValueError(f"unknown task {task!r}")


def synth_joint_velocities(trajectory: Sequence[Pose6]) -> tuple[JointVelocities, ...]:
    """Stand-in joint velocities whose norm equals the translational speed.

    Each of the seven components is speed/sqrt(7), so a dwell step reads
    as exactly zero and a motion step's norm equals the step length.
    """
    out = []
    for t, pose in enumerate(trajectory):
        if t == 0:
            speed = 0.0
        else:
            prev = trajectory[t - 1]
            speed = math.sqrt(
                (pose.x - prev.x) ** 2 + (pose.y - prev.y) ** 2 + (pose.z - prev.z) ** 2
            )
        component = speed / math.sqrt(7.0)
        out.append(JointVelocities((component,) * 7))
    return tuple(out)


def _lerp_yaw(a: float, b: float, frac: float) -> float:
    delta = ((b - a + math.pi) % (2.0 * math.pi)) - math.pi
    return a + delta * frac


@dataclass(frozen=True)
class _Waypoint:
    x: float
    y: float
    z: float
    yaw: float
    grip: GripperState  # gripper state to hold after this waypoint's dwell


def _expand_waypoints(
    start_pose: Pose6, start_grip: GripperState, waypoints: Sequence[_Waypoint]
) -> list[Action]:
    """Dense trajectory: linear legs at <= STEP_SIZE_M per step, then a
    DWELL_STEPS dwell at each waypoint; gripper toggles happen inside dwells."""
    frames: list[Action] = []
    pose = start_pose
    grip = start_grip
    # Initial dwell marks the home keyframe.
    for _ in range(DWELL_STEPS):
        frames.append(Action(pose, grip))
    for wp in waypoints:
        dist = math.sqrt((wp.x - pose.x) ** 2 + (wp.y - pose.y) ** 2 + (wp.z - pose.z) ** 2)
        steps = max(1, math.ceil(dist / STEP_SIZE_M)) if dist > 0 else 0
        for s in range(1, steps + 1):
            frac = s / steps
            frames.append(
                Action(
                    Pose6(
                        pose.x + (wp.x - pose.x) * frac,
                        pose.y + (wp.y - pose.y) * frac,
                        pose.z + (wp.z - pose.z) * frac,
                        0.0,
                        0.0,
                        _lerp_yaw(pose.yaw, wp.yaw, frac),
                    ),
                    grip,
                )
            )
        wp_pose = Pose6(wp.x, wp.y, wp.z, 0.0, 0.0, wp.yaw)
        for i in range(DWELL_STEPS):
            frames.append(Action(wp_pose, grip if i == 0 else wp.grip))
        pose = wp_pose
        grip = wp.grip
    while len(frames) < MIN_EPISODE_STEPS:
        frames.append(frames[-1])
    return frames


def _names_in_order(instruction: str, names: Sequence[str]) -> list[str]:
    found = sorted(
        ((instruction.find(n), n) for n in names if instruction.find(n) >= 0),
        key=lambda p: p[0],
    )
    return [n for _, n in found]


def _free_spot(
    world: WorldState, avoid_x: float, avoid_y: float
) -> tuple[float, float]:
    lo_x, hi_x, lo_y, hi_y = _placement_region(world.bounds)
    for dx, dy in ((0.15, 0.0), (-0.15, 0.0), (0.0, 0.15), (0.0, -0.15), (0.15, 0.15), (-0.15, -0.15)):
        x, y = avoid_x + dx, avoid_y + dy
        if lo_x <= x <= hi_x and lo_y <= y <= hi_y:
            return x, y
    raise ExpertError("no free table spot inside the placement region")


def _pick_and_place(
    pick: SimObject, place_x: float, place_y: float, place_z: float
) -> list[_Waypoint]:
    px, py, pz = pick.center()
    yaw = pick.pose.yaw
    return [
        _Waypoint(px, py, TRAVEL_HEIGHT_M, yaw, GripperState.OPEN),
        _Waypoint(px, py, pz, yaw, GripperState.CLOSED),
        _Waypoint(px, py, TRAVEL_HEIGHT_M, yaw, GripperState.CLOSED),
        _Waypoint(place_x, place_y, TRAVEL_HEIGHT_M, yaw, GripperState.CLOSED),
        _Waypoint(place_x, place_y, place_z, yaw, GripperState.OPEN),
        _Waypoint(place_x, place_y, TRAVEL_HEIGHT_M, 0.0, GripperState.OPEN),
        _Waypoint(HOME_POSE.x, HOME_POSE.y, HOME_POSE.z, 0.0, GripperState.OPEN),
    ]


def scripted_expert(task: TaskId, world: WorldState, instruction: str) -> Episode:
    """Plan and record a demonstration for the given world and instruction.

    Does not mutate the world. The emitted episode is dense (>= 60 steps)
    with synthetic joint velocities; replaying its keyframe actions through
    execute_action solves the task.
    """
    names = [o.name for o in world.objects]
    if task is TaskId.STACK_CUBE:
        ordered = _names_in_order(instruction, names)
        if len(ordered) != 2:
            raise ExpertError(f"cannot identify two cubes in instruction {instruction!r}")
        top, bottom = world.object(ordered[0]), world.object(ordered[1])
        # Place so the carried cube's base lands on the bottom cube's top.
        place_z = bottom.top() + top.size / 2.0
        waypoints = _pick_and_place(top, bottom.pose.x, bottom.pose.y, place_z)
    elif task is TaskId.DESTACK_CUBE:
        ordered = _names_in_order(instruction, names)
        if len(ordered) != 2:
            raise ExpertError(f"cannot identify two cubes in instruction {instruction!r}")
        moving = world.object(ordered[0])
        spot_x, spot_y = _free_spot(world, moving.pose.x, moving.pose.y)
        waypoints = _pick_and_place(moving, spot_x, spot_y, moving.size / 2.0)
    elif task is TaskId.SLIDE_BLOCK:
        block = world.object("block")
        target = world.object("target")
        waypoints = _pick_and_place(block, target.pose.x, target.pose.y, block.size / 2.0)
    elif task in (TaskId.PUSH_BUTTON, TaskId.PUSH_MULTIPLE_BUTTONS):
        segments = instruction.split(", then ")
        sequence = []
        for segment in segments:
            hit = _names_in_order(segment, names)
            if len(hit) != 1:
                raise ExpertError(f"cannot identify a button in segment {segment!r}")
            sequence.append(world.object(hit[0]))
        waypoints = []
        for button in sequence:
            waypoints.append(
                _Waypoint(button.pose.x, button.pose.y, TRAVEL_HEIGHT_M, 0.0, GripperState.OPEN)
            )
            waypoints.append(
                _Waypoint(button.pose.x, button.pose.y, PRESS_Z_M, 0.0, GripperState.OPEN)
            )
        last = sequence[-1]
        waypoints.append(
            _Waypoint(last.pose.x, last.pose.y, TRAVEL_HEIGHT_M, 0.0, GripperState.OPEN)
        )
        waypoints.append(
            _Waypoint(HOME_POSE.x, HOME_POSE.y, HOME_POSE.z, 0.0, GripperState.OPEN)
        )
    else:
        raise ExpertError(f"no expert for task {task!r}")

    frames = _expand_waypoints(world.gripper_pose, world.gripper, waypoints)
    velocities = synth_joint_velocities([a.pose for a in frames])
    return Episode(
        instruction=instruction,
        objects=observations_of(world),
        velocities=velocities,
        actions=tuple(frames),
    )


def add_pose_noise(
    observations: Sequence[ObjectObservation],
    k: float,
    seed: int,
    sigma_translation_m: float = BASE_SIGMA_TRANSLATION_M,
    sigma_rotation_rad: float = BASE_SIGMA_ROTATION_RAD,
) -> tuple[ObjectObservation, ...]:
    """Perturb poses with zero-mean Gaussian noise scaled by k.

    k = 0 returns the observations unchanged. Deterministic per seed.
    """
    if k < 0:
        raise ValueError(f"noise scale k must be >= 0, got {k}")
    if k == 0:
        return tuple(observations)
    rng = np.random.default_rng(seed)
    noised = []
    for obs in observations:
        draw = rng.normal(0.0, 1.0, size=6)
        noised.append(
            ObjectObservation(
                obs.name,
                Pose6(
                    obs.pose.x + draw[0] * k * sigma_translation_m,
                    obs.pose.y + draw[1] * k * sigma_translation_m,
                    obs.pose.z + draw[2] * k * sigma_translation_m,
                    obs.pose.roll + draw[3] * k * sigma_rotation_rad,
                    obs.pose.pitch + draw[4] * k * sigma_rotation_rad,
                    obs.pose.yaw + draw[5] * k * sigma_rotation_rad,
                ),
            )
        )
    return tuple(noised)
