"""Simulator: reset determinism and placement rules, action semantics
(attach, settle, press), success predicates, scripted experts, synthetic
velocities, observation noise.
"""

import math

import numpy as np
import pytest

from iclmanip.keyframes import extract_keyframes
from iclmanip.model import (
    Action,
    GripperState,
    ObjectObservation,
    Pose6,
    WorkspaceBounds,
)
from iclmanip.sim import (
    BUTTON_RADIUS_M,
    CUBE_EDGE_M,
    GRASP_RADIUS_M,
    HOME_POSE,
    MIN_EPISODE_STEPS,
    MIN_SEPARATION_M,
    STEP_SIZE_M,
    ExecutionError,
    ExpertError,
    Kind,
    PlacementError,
    SimObject,
    TaskId,
    TaskVariation,
    WorldState,
    add_pose_noise,
    check_success,
    execute_action,
    observations_of,
    render_instruction,
    reset,
    scripted_expert,
    synth_joint_velocities,
    task_spec,
)

from conftest import BOUNDS

OPEN = GripperState.OPEN
CLOSED = GripperState.CLOSED


def act(x, y, z, grip=OPEN, yaw=0.0):
    return Action(Pose6(x, y, z, 0.0, 0.0, yaw), grip)


def button_world(x=0.0, y=0.0):
    objects = [
        SimObject("red button", Kind.BUTTON, Pose6(x, y, 0, 0, 0, 0), BUTTON_RADIUS_M)
    ]
    return WorldState(objects, HOME_POSE, OPEN, BOUNDS)


def two_cube_world(bx=-0.1, by=0.0, yx=0.1, yy=0.0):
    objects = [
        SimObject("blue cube", Kind.CUBE, Pose6(bx, by, 0, 0, 0, 0), CUBE_EDGE_M),
        SimObject("yellow cube", Kind.CUBE, Pose6(yx, yy, 0, 0, 0, 0), CUBE_EDGE_M),
    ]
    return WorldState(objects, HOME_POSE, OPEN, BOUNDS)


# ---------------------------------------------------------------- reset


def test_reset_is_deterministic_per_seed():
    for task in TaskId:
        a_world, a_instr, a_var = reset(task, 7, BOUNDS)
        b_world, b_instr, b_var = reset(task, 7, BOUNDS)
        assert a_instr == b_instr
        assert a_var == b_var
        assert [o.pose for o in a_world.objects] == [o.pose for o in b_world.objects]
        c_world, c_instr, c_var = reset(task, 8, BOUNDS)
        assert (
            [o.pose for o in a_world.objects] != [o.pose for o in c_world.objects]
            or a_instr != c_instr
        )


def test_reset_objects_separated_and_inside_region():
    for task in TaskId:
        span_x = BOUNDS.x_max - BOUNDS.x_min
        span_y = BOUNDS.y_max - BOUNDS.y_min
        lo_x, hi_x = BOUNDS.x_min + 0.1 * span_x, BOUNDS.x_max - 0.1 * span_x
        lo_y, hi_y = BOUNDS.y_min + 0.1 * span_y, BOUNDS.y_max - 0.1 * span_y
        for seed in range(40):
            world, _, _ = reset(task, seed, BOUNDS)
            ground = [o for o in world.objects if o.supported_by is None]
            for i, a in enumerate(ground):
                assert lo_x <= a.pose.x <= hi_x and lo_y <= a.pose.y <= hi_y
                for b in ground[i + 1 :]:
                    d = math.hypot(a.pose.x - b.pose.x, a.pose.y - b.pose.y)
                    assert d >= MIN_SEPARATION_M - 1e-12


def test_reset_gives_up_when_region_cannot_separate():
    # Region shrinks to a point; two ground objects can never be 8 cm apart.
    tight = WorkspaceBounds(-0.001, 0.001, -0.001, 0.001, 0.0, 0.5)
    with pytest.raises(PlacementError):
        reset(TaskId.STACK_CUBE, 0, tight)


def test_reset_destack_starts_stacked():
    world, instr, var = reset(TaskId.DESTACK_CUBE, 3, BOUNDS)
    top = world.object(var.top)
    bottom = world.object(var.bottom)
    assert top.supported_by == bottom.name
    assert top.pose.z == pytest.approx(CUBE_EDGE_M)
    assert (top.pose.x, top.pose.y) == (bottom.pose.x, bottom.pose.y)
    assert var.top in instr and var.bottom in instr


def test_reset_never_returns_a_solved_world():
    for task in TaskId:
        for seed in range(60):
            world, _, var = reset(task, seed, BOUNDS)
            assert not check_success(task, world, var)


def test_reset_button_layouts_shared_between_single_and_multi():
    # Multi-button episodes learn from single-button demos, so at equal
    # seeds both tasks must see the buttons in the same places.
    for seed in range(10):
        single, _, _ = reset(TaskId.PUSH_BUTTON, seed, BOUNDS)
        multi, _, _ = reset(TaskId.PUSH_MULTIPLE_BUTTONS, seed, BOUNDS)
        assert [o.pose for o in single.objects] == [o.pose for o in multi.objects]


def test_reset_variation_coverage():
    seen = set()
    for seed in range(60):
        _, _, var = reset(TaskId.PUSH_BUTTON, seed, BOUNDS)
        seen.add(var.buttons)
    assert len(seen) == 4  # every button color shows up as the goal

    lengths = set()
    for seed in range(80):
        _, _, var = reset(TaskId.PUSH_MULTIPLE_BUTTONS, seed, BOUNDS)
        lengths.add(len(var.buttons))
    assert lengths == {1, 2, 3, 4, 5, 6}


def test_render_instruction_templates():
    assert render_instruction(
        TaskId.STACK_CUBE, TaskVariation(top="blue cube", bottom="yellow cube")
    ) == "stack the blue cube on the yellow cube"
    assert render_instruction(
        TaskId.DESTACK_CUBE, TaskVariation(top="blue cube", bottom="yellow cube")
    ) == "destack the blue cube that is on the yellow cube"
    assert render_instruction(
        TaskId.PUSH_BUTTON, TaskVariation(buttons=("red button",))
    ) == "push the red button"
    assert render_instruction(
        TaskId.PUSH_MULTIPLE_BUTTONS,
        TaskVariation(buttons=("red button", "blue button")),
    ) == "push the red button, then push the blue button"
    assert render_instruction(TaskId.SLIDE_BLOCK, TaskVariation()) == (
        "slide the block onto the target"
    )


def test_task_spec_rosters():
    assert [n for n, _, _ in task_spec(TaskId.STACK_CUBE).roster] == ["blue cube", "yellow cube"]
    assert [n for n, _, _ in task_spec(TaskId.PUSH_BUTTON).roster] == [
        "red button",
        "yellow button",
        "green button",
        "blue button",
    ]
    assert len(task_spec(TaskId.STACK_CUBE).variations) == 2
    assert len(task_spec(TaskId.PUSH_BUTTON).variations) == 4


# ------------------------------------------------------- execute_action


def test_execute_teleports_and_counts_time():
    world = button_world()
    execute_action(world, act(0.1, 0.2, 0.3))
    assert world.gripper_pose.x == pytest.approx(0.1)
    assert world.time == 1
    execute_action(world, act(0.0, 0.0, 0.3))
    assert world.time == 2


def test_execute_rejects_poses_outside_inflated_bounds():
    world = button_world()
    # x span is 1.0, inflation 0.1 per side: [-0.6, 0.6] is legal.
    execute_action(world, act(0.59, 0.0, 0.3))
    with pytest.raises(ExecutionError):
        execute_action(world, act(0.61, 0.0, 0.3))
    with pytest.raises(ExecutionError):
        execute_action(world, act(0.0, 0.0, 0.61))  # z span 0.5 inflates to 0.55


def test_grasp_requires_transition_and_proximity():
    world = two_cube_world()
    blue = world.object("blue cube")
    cx, cy, cz = blue.center()

    # Closing exactly at the center attaches.
    execute_action(world, act(cx, cy, cz, OPEN))
    execute_action(world, act(cx, cy, cz, CLOSED))
    assert world.attached == "blue cube"

    # The cube snaps to the tool tip and tracks it while held.
    execute_action(world, act(0.0, 0.3, 0.2, CLOSED))
    assert blue.pose.x == pytest.approx(0.0)
    assert blue.pose.y == pytest.approx(0.3)
    assert blue.center()[2] == pytest.approx(0.2)
    assert blue.supported_by is None


def test_grasp_outside_radius_does_nothing():
    world = two_cube_world()
    blue = world.object("blue cube")
    cx, cy, cz = blue.center()
    off = GRASP_RADIUS_M + 0.005
    execute_action(world, act(cx + off, cy, cz, OPEN))
    execute_action(world, act(cx + off, cy, cz, CLOSED))
    assert world.attached is None
    assert world.gripper is CLOSED
    # Closing while already closed near the cube still attaches nothing.
    execute_action(world, act(cx, cy, cz, CLOSED))
    assert world.attached is None


def test_grasp_picks_nearest_cube():
    world = two_cube_world(bx=-0.011, by=0.0, yx=0.011, yy=0.0)
    # Gripper slightly nearer the yellow cube.
    execute_action(world, act(0.002, 0.0, 0.02, OPEN))
    execute_action(world, act(0.002, 0.0, 0.02, CLOSED))
    assert world.attached == "yellow cube"


def test_release_settles_on_table():
    world = two_cube_world()
    blue = world.object("blue cube")
    cx, cy, cz = blue.center()
    execute_action(world, act(cx, cy, cz, OPEN))
    execute_action(world, act(cx, cy, cz, CLOSED))
    execute_action(world, act(0.3, 0.3, 0.2, CLOSED))
    execute_action(world, act(0.3, 0.3, 0.2, OPEN))
    assert world.attached is None
    assert blue.pose.z == pytest.approx(0.0)
    assert blue.supported_by is None


def test_release_settles_on_other_cube():
    world = two_cube_world()
    blue = world.object("blue cube")
    yellow = world.object("yellow cube")
    cx, cy, cz = blue.center()
    execute_action(world, act(cx, cy, cz, OPEN))
    execute_action(world, act(cx, cy, cz, CLOSED))
    execute_action(world, act(yellow.pose.x, yellow.pose.y, 0.2, CLOSED))
    execute_action(world, act(yellow.pose.x, yellow.pose.y, 0.2, OPEN))
    assert blue.pose.z == pytest.approx(CUBE_EDGE_M)
    assert blue.supported_by == "yellow cube"
    assert check_success(
        TaskId.STACK_CUBE,
        world,
        TaskVariation(top="blue cube", bottom="yellow cube"),
    )


def test_press_requires_empty_gripper_descent():
    world = button_world()
    execute_action(world, act(0.0, 0.0, 0.2, OPEN))
    execute_action(world, act(0.0, 0.0, 0.005, OPEN))
    assert world.object("red button").pressed
    assert world.press_log == ["red button"]


def test_press_logs_transitions_not_dwell():
    world = button_world()
    execute_action(world, act(0.0, 0.0, 0.005))
    execute_action(world, act(0.001, 0.0, 0.005))  # still inside: no new entry
    execute_action(world, act(0.0, 0.0, 0.2))      # leave
    execute_action(world, act(0.0, 0.0, 0.005))    # re-enter: logs again
    assert world.press_log == ["red button", "red button"]


def test_press_needs_xy_within_radius_and_low_z():
    world = button_world()
    execute_action(world, act(BUTTON_RADIUS_M + 0.002, 0.0, 0.005))
    assert world.press_log == []
    execute_action(world, act(0.0, 0.0, 0.02))  # above press height
    assert world.press_log == []


def test_carried_cube_does_not_press():
    objects = [
        SimObject("red button", Kind.BUTTON, Pose6(0, 0, 0, 0, 0, 0), BUTTON_RADIUS_M),
        SimObject("blue cube", Kind.CUBE, Pose6(0.2, 0.0, 0, 0, 0, 0), CUBE_EDGE_M),
    ]
    world = WorldState(objects, HOME_POSE, OPEN, BOUNDS)
    cube = world.object("blue cube")
    cx, cy, cz = cube.center()
    execute_action(world, act(cx, cy, cz, OPEN))
    execute_action(world, act(cx, cy, cz, CLOSED))
    execute_action(world, act(0.0, 0.0, 0.005, CLOSED))
    assert world.press_log == []


def test_clone_is_independent():
    world = button_world()
    copy = world.clone()
    execute_action(world, act(0.0, 0.0, 0.005))
    assert world.press_log == ["red button"]
    assert copy.press_log == []
    assert copy.gripper_pose == HOME_POSE


# --------------------------------------------------------- check_success


def test_destack_success_predicate():
    world, _, var = reset(TaskId.DESTACK_CUBE, 5, BOUNDS)
    assert not check_success(TaskId.DESTACK_CUBE, world, var)
    top = world.object(var.top)
    top.pose = Pose6(0.3, 0.3, 0.0, 0, 0, 0)
    top.supported_by = None
    assert check_success(TaskId.DESTACK_CUBE, world, var)


def test_stack_success_requires_released_gripper():
    world = two_cube_world()
    blue = world.object("blue cube")
    yellow = world.object("yellow cube")
    cx, cy, cz = blue.center()
    execute_action(world, act(cx, cy, cz, OPEN))
    execute_action(world, act(cx, cy, cz, CLOSED))
    execute_action(world, act(yellow.pose.x, yellow.pose.y, CUBE_EDGE_M + CUBE_EDGE_M / 2, CLOSED))
    var = TaskVariation(top="blue cube", bottom="yellow cube")
    # Perfectly placed but still held: not done yet.
    assert not check_success(TaskId.STACK_CUBE, world, var)
    execute_action(world, act(yellow.pose.x, yellow.pose.y, CUBE_EDGE_M + CUBE_EDGE_M / 2, OPEN))
    assert check_success(TaskId.STACK_CUBE, world, var)


def test_multi_button_success_needs_exact_order():
    objects = [
        SimObject("red button", Kind.BUTTON, Pose6(-0.2, 0, 0, 0, 0, 0), BUTTON_RADIUS_M),
        SimObject("blue button", Kind.BUTTON, Pose6(0.2, 0, 0, 0, 0, 0), BUTTON_RADIUS_M),
    ]
    var = TaskVariation(buttons=("red button", "blue button"))

    def run(order):
        world = WorldState([o for o in map(_copy_obj, objects)], HOME_POSE, OPEN, BOUNDS)
        for name in order:
            b = world.object(name)
            execute_action(world, act(b.pose.x, b.pose.y, 0.2))
            execute_action(world, act(b.pose.x, b.pose.y, 0.005))
            execute_action(world, act(b.pose.x, b.pose.y, 0.2))
        return check_success(TaskId.PUSH_MULTIPLE_BUTTONS, world, var)

    assert run(["red button", "blue button"])
    assert not run(["blue button", "red button"])
    assert not run(["red button"])
    assert not run(["red button", "blue button", "red button"])


def _copy_obj(o):
    return SimObject(o.name, o.kind, o.pose, o.size, o.pressed, o.supported_by)


def test_slide_success_respects_target_rotation():
    # Target rotated 45 degrees: a block just past the axis-aligned corner
    # distance still counts when inside the rotated square.
    yaw = math.radians(45)
    half = 0.06
    objects = [
        SimObject("block", Kind.CUBE, Pose6(0.0, 0.0, 0, 0, 0, 0), CUBE_EDGE_M),
        SimObject("target", Kind.TARGET, Pose6(0.2, 0.2, 0, 0, 0, yaw), half),
    ]
    var = TaskVariation()

    def block_at(x, y):
        world = WorldState([_copy_obj(o) for o in objects], HOME_POSE, OPEN, BOUNDS)
        world.object("block").pose = Pose6(x, y, 0, 0, 0, 0)
        return check_success(TaskId.SLIDE_BLOCK, world, var)

    assert block_at(0.2, 0.2)
    # Along the rotated diagonal the reach is half*sqrt(2).
    assert block_at(0.2 + 0.080, 0.2)
    assert not block_at(0.2 + 0.090, 0.2)
    # Along the rotated edge direction the reach is half.
    assert block_at(0.2 + 0.059 / math.sqrt(2), 0.2 + 0.059 / math.sqrt(2))
    assert not block_at(0.2 + 0.070 / math.sqrt(2), 0.2 + 0.070 / math.sqrt(2))


# ------------------------------------------------------ scripted experts


def test_expert_episodes_replay_to_success():
    for task in TaskId:
        for seed in range(12):
            world, instruction, var = reset(task, seed, BOUNDS)
            episode = scripted_expert(task, world, instruction)
            assert episode.length >= MIN_EPISODE_STEPS
            frames = extract_keyframes(episode, 0.01)
            assert 5 <= len(frames) <= 15, (task, seed, len(frames))
            replay = world.clone()
            for t in list(frames)[1:]:
                execute_action(replay, episode.actions[t])
            assert check_success(task, replay, var), (task, seed)


def test_expert_does_not_mutate_world():
    world, instruction, _ = reset(TaskId.STACK_CUBE, 1, BOUNDS)
    before = [(o.name, o.pose) for o in world.objects]
    scripted_expert(TaskId.STACK_CUBE, world, instruction)
    assert [(o.name, o.pose) for o in world.objects] == before
    assert world.gripper_pose == HOME_POSE


def test_expert_step_size_and_dwells():
    world, instruction, _ = reset(TaskId.STACK_CUBE, 2, BOUNDS)
    episode = scripted_expert(TaskId.STACK_CUBE, world, instruction)
    poses = [a.pose for a in episode.actions]
    steps = [
        math.dist(a.translation(), b.translation()) for a, b in zip(poses, poses[1:])
    ]
    assert max(steps) <= STEP_SIZE_M + 1e-9
    # Dwells exist: some consecutive frames do not move.
    assert sum(1 for s in steps if s < 1e-12) >= 8


def test_expert_rejects_unknown_instruction():
    world, _, _ = reset(TaskId.PUSH_BUTTON, 0, BOUNDS)
    with pytest.raises(ExpertError):
        scripted_expert(TaskId.PUSH_BUTTON, world, "push the purple button")


def test_observations_match_roster_order():
    world, _, _ = reset(TaskId.PUSH_BUTTON, 0, BOUNDS)
    names = [o.name for o in observations_of(world)]
    assert names == ["red button", "yellow button", "green button", "blue button"]


# --------------------------------------------- velocities and keyframes


def test_synth_velocities_norm_equals_step_distance():
    poses = [
        Pose6(0.0, 0.0, 0.1, 0, 0, 0),
        Pose6(STEP_SIZE_M, 0.0, 0.1, 0, 0, 0),
        Pose6(STEP_SIZE_M, 0.0, 0.1, 0, 0, 0),
        Pose6(STEP_SIZE_M, 0.03, 0.1, 0, 0, 0),
    ]
    vels = synth_joint_velocities(poses)
    assert len(vels) == 4
    assert vels[0].norm() == pytest.approx(0.0, abs=1e-15)
    assert vels[1].norm() == pytest.approx(STEP_SIZE_M, abs=1e-12)
    assert vels[2].norm() == pytest.approx(0.0, abs=1e-15)
    assert vels[3].norm() == pytest.approx(0.03, abs=1e-12)
    assert all(len(v.values) == 7 for v in vels)
    # Equal components: the norm is spread evenly over the seven joints.
    assert len(set(vels[1].values)) == 1


def test_far_apart_cubes_make_long_episodes():
    # On a desk four times wider, travel legs stretch past 200 frames.
    wide = WorkspaceBounds(-2.0, 2.0, -2.0, 2.0, 0.0, 0.5)
    best = 0
    for seed in range(30):
        world, instruction, _ = reset(TaskId.STACK_CUBE, seed, wide)
        episode = scripted_expert(TaskId.STACK_CUBE, world, instruction)
        best = max(best, episode.length)
    assert best > 200


# ----------------------------------------------------------------- noise


def test_noise_zero_k_is_identity():
    obs = observations_of(reset(TaskId.STACK_CUBE, 0, BOUNDS)[0])
    assert add_pose_noise(obs, 0.0, seed=1) == tuple(obs)


def test_noise_is_deterministic_per_seed():
    obs = observations_of(reset(TaskId.STACK_CUBE, 0, BOUNDS)[0])
    a = add_pose_noise(obs, 1.0, seed=9)
    b = add_pose_noise(obs, 1.0, seed=9)
    c = add_pose_noise(obs, 1.0, seed=10)
    assert a == b
    assert a != c


def test_noise_rejects_negative_k():
    obs = observations_of(reset(TaskId.STACK_CUBE, 0, BOUNDS)[0])
    with pytest.raises(ValueError):
        add_pose_noise(obs, -0.5, seed=1)


def test_noise_scales_with_k():
    obs = (ObjectObservation("blue cube", Pose6(0, 0, 0.25, 1, 1, 1)),)
    dx1, dx2 = [], []
    for seed in range(4000):
        dx1.append(add_pose_noise(obs, 1.0, seed=seed)[0].pose.x)
        dx2.append(add_pose_noise(obs, 2.0, seed=seed)[0].pose.x)
    s1, s2 = np.std(dx1), np.std(dx2)
    assert s2 / s1 == pytest.approx(2.0, rel=0.05)
    assert s1 == pytest.approx(0.0168, rel=0.06)


def test_noise_preserves_names_and_wraps_angles():
    obs = (ObjectObservation("blue cube", Pose6(0, 0, 0.25, 0.01, 6.27, 3.0)),)
    for seed in range(50):
        noisy = add_pose_noise(obs, 2.0, seed=seed)[0]
        assert noisy.name == "blue cube"
        assert all(0 <= a < 2 * math.pi for a in noisy.pose.rotation())
