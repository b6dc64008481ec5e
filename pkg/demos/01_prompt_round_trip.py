"""From a recorded episode to a prompt and back.

Generates one scripted stacking episode, selects its keyframes, formats
them into the in-context grammar, then parses the formatted output and
checks the parsed actions land on the same bins.

Run:  python3 demos/01_prompt_round_trip.py
"""

from iclmanip import (
    DEFAULT_BOUNDS,
    TaskId,
    assemble_prompt,
    build_example_input,
    build_icl_example,
    default_system_prompts,
    discretize_action,
    extract_keyframes,
    observations_of,
    parse_response,
    reset,
    scripted_expert,
)

world, instruction, _ = reset(TaskId.STACK_CUBE, seed=0, bounds=DEFAULT_BOUNDS)
episode = scripted_expert(TaskId.STACK_CUBE, world, instruction)
print(f"episode: {episode.length} steps, instruction: {instruction!r}")

frames = extract_keyframes(episode, delta=0.01)
print(f"keyframes at delta=0.01: {list(frames)}")

example = build_icl_example(episode, frames, DEFAULT_BOUNDS)
print("\nexample input:")
print(" ", example.input)
print("example output:")
print(" ", example.output)

# A second world poses the test question; the prompt ends with an open
# output slot for the model to fill.
test_world, test_instruction, _ = reset(TaskId.STACK_CUBE, seed=1, bounds=DEFAULT_BOUNDS)
test_input = build_example_input(
    observations_of(test_world), test_instruction, DEFAULT_BOUNDS
)
bundle = assemble_prompt([example], test_input, default_system_prompts()[0])
print(f"\nassembled body ({len(bundle.body)} chars) ends with: ...{bundle.body[-60:]!r}")

# Parsing the demo's own output must reproduce its discretized actions.
parsed = parse_response(example.output)
expected = [discretize_action(episode.actions[t], DEFAULT_BOUNDS) for t in list(frames)[1:]]
assert parsed == expected
print(f"\nparsed {len(parsed)} actions back out; they match the discretized originals")
