"""Why keyframes: token budget against fixed-interval sampling.

Keyframe selection keeps the handful of frames where the arm pauses or
the gripper changes; uniform sampling at a small interval floods the
prompt, and at a large interval it skips the moments that matter.

Run:  python3 demos/02_keyframes_vs_uniform.py
"""

from iclmanip import (
    DEFAULT_BOUNDS,
    TaskId,
    build_icl_example,
    extract_keyframes,
    reset,
    sample_uniform,
    scripted_expert,
)

world, instruction, _ = reset(TaskId.STACK_CUBE, seed=4, bounds=DEFAULT_BOUNDS)
episode = scripted_expert(TaskId.STACK_CUBE, world, instruction)
print(f"episode length: {episode.length} frames\n")

frames = extract_keyframes(episode, delta=0.01)
example = build_icl_example(episode, frames, DEFAULT_BOUNDS)
print(f"{'scheme':>12}  {'frames':>6}  {'output chars':>12}")
print(f"{'keyframes':>12}  {len(frames):>6}  {len(example.output):>12}")

for interval in (5, 10, 20, 40, 80):
    uniform = sample_uniform(episode.length, interval)
    ex = build_icl_example(episode, uniform, DEFAULT_BOUNDS)
    print(f"{f'uniform-{interval}':>12}  {len(uniform):>6}  {len(ex.output):>12}")

grip_frames = [
    t
    for t in range(episode.length - 1)
    if episode.actions[t].gripper != episode.actions[t + 1].gripper
]
print(f"\ngripper toggles happen at frames {grip_frames}")
print(f"keyframes {list(frames)} bracket every toggle; uniform grids may miss them")
