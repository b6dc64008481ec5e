"""A tour of the tabletop world.

Resets each task, shows the drawn layout and goal, then replays the
scripted expert's keyframe actions and confirms the success predicate.

Run:  python3 demos/03_simulator_tour.py
"""

from iclmanip import (
    DEFAULT_BOUNDS,
    TaskId,
    check_success,
    execute_action,
    extract_keyframes,
    reset,
    scripted_expert,
)

for task in TaskId:
    world, instruction, variation = reset(task, seed=11, bounds=DEFAULT_BOUNDS)
    print(f"== {task.value}")
    print(f"   instruction: {instruction!r}")
    for obj in world.objects:
        tag = f" (on {obj.supported_by})" if obj.supported_by else ""
        print(f"   {obj.name:14s} at ({obj.pose.x:+.3f}, {obj.pose.y:+.3f}, {obj.pose.z:.3f}){tag}")

    episode = scripted_expert(task, world, instruction)
    frames = extract_keyframes(episode, delta=0.01)
    replay = world.clone()
    for t in list(frames)[1:]:
        execute_action(replay, episode.actions[t])
    done = check_success(task, replay, variation)
    print(f"   replayed {len(frames) - 1} keyframe actions -> success={done}")
    if task is TaskId.PUSH_MULTIPLE_BUTTONS:
        print(f"   press order: {replay.press_log}")
    print()
