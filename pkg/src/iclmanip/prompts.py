"""Prompt wire format: build ICL examples from episodes and parse replies.

The grammar is deliberately rigid so that prompts are reproducible byte
for byte:

    observation   name: [tx, ty, tz, rr, rp, ry]
    action        [tx, ty, tz, rr, rp, ry, g]
    example in    {obs, obs, ..., instruction}
    example out   {[action], [action], ...}
    prompt body   in > out, in > out, ..., test_in >

parse_response is total: any byte string either yields actions or raises
ParseError with a kind of no_actions, arity, range, or (strict mode only)
grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .discretize import (
    ROTATION_BINS,
    TRANSLATION_BINS,
    DiscreteAction,
    DiscretePose,
    discretize_action,
    discretize_pose,
)
from .keyframes import KeyframeIndices
from .model import Episode, ObjectObservation, WorkspaceBounds

SYSTEM_PROMPT_ORIGINAL = (
    "You are a Franka Panda robot with a parallel gripper. We provide you with some "
    "demos in the format of observation>[action_1, action_2, ...]. Then you will "
    "receive a new observation and you need to output a sequence of actions that "
    "match the trends in the demos. Do not output anything else."
)

SYSTEM_PROMPT_PARAPHRASE_1 = (
    "You are an end-effector Franka Panda robot equipped with a parallel gripper. "
    "We will give you a series of demonstrations in the format "
    "observation>[action_1, action_2, ...]. Afterward, you will receive a new "
    "observation, and your task is to generate a sequence of actions that align "
    "with the patterns shown in the demos. Make sure to only output the actions "
    "and nothing else."
)

SYSTEM_PROMPT_PARAPHRASE_2 = (
    "You are a Franka Panda robot equipped with a parallel gripper. We will provide "
    "you with demonstrations in the format: observation>[action_1, action_2, ...]. "
    "Afterward, you will receive a new observation and must generate a sequence of "
    "actions that align with the patterns shown in the demos. Ensure that nothing "
    "else is included in your output."
)


def default_system_prompts() -> tuple[str, str, str]:
    """Three interchangeable system prompts; index 0 is the canonical one."""
    return (SYSTEM_PROMPT_ORIGINAL, SYSTEM_PROMPT_PARAPHRASE_1, SYSTEM_PROMPT_PARAPHRASE_2)


@dataclass(frozen=True)
class IclExample:
    """One in-context example: formatted input and output strings."""

    input: str
    output: str

    def __post_init__(self):
        if not self.input or not self.output:
            raise ValueError("IclExample input and output must be non-empty")


@dataclass(frozen=True)
class PromptBundle:
    """A complete prompt: system text plus the assembled body."""

    system: str
    body: str

    def __post_init__(self):
        if not self.body.endswith("> "):
            raise ValueError("PromptBundle.body must end with '> '")


class ParseError(Exception):
    """Response text could not be converted to actions.

    kind is one of: no_actions, arity, range, grammar.
    position is a character offset into the input text.
    """

    def __init__(self, kind: str, position: int, message: str):
        super().__init__(message)
        self.kind = kind
        self.position = position


def format_observation(name: str, pose: DiscretePose) -> str:
    return f"{name}: [{', '.join(str(b) for b in pose.as_tuple())}]"


def format_action(action: DiscreteAction) -> str:
    return f"[{', '.join(str(b) for b in action.as_tuple())}]"


def _observation_block(observations: Sequence[ObjectObservation], bounds: WorkspaceBounds) -> str:
    return ", ".join(
        format_observation(o.name, discretize_pose(o.pose, bounds)) for o in observations
    )


def build_example_input(
    observations: Sequence[ObjectObservation], instruction: str, bounds: WorkspaceBounds
) -> str:
    """Format the input half of an example: observations then the instruction."""
    if not observations:
        raise ValueError("need at least one observation")
    if not instruction:
        raise ValueError("instruction must be non-empty")
    return "{" + _observation_block(observations, bounds) + ", " + instruction + "}"


def build_icl_example(
    episode: Episode, keyframes: KeyframeIndices, bounds: WorkspaceBounds
) -> IclExample:
    """Open-loop example: initial observations in, keyframe actions out.

    The first keyframe's action is dropped; the starting action carries no
    information because every episode begins from the same home state.
    """
    if len(keyframes) < 2:
        raise ValueError(f"need at least 2 keyframes to build an example, got {len(keyframes)}")
    if keyframes.episode_length != episode.length:
        raise ValueError(
            f"keyframes were taken on length {keyframes.episode_length}, episode has {episode.length}"
        )
    actions = [
        format_action(discretize_action(episode.actions[t], bounds)) for t in keyframes[1:]
    ]
    return IclExample(
        input=build_example_input(episode.objects, episode.instruction, bounds),
        output="{" + ", ".join(actions) + "}",
    )


def build_closed_loop_example(
    episode: Episode,
    keyframes: KeyframeIndices,
    bounds: WorkspaceBounds,
    object_pose_fn: Callable[[int], Sequence[ObjectObservation]],
) -> IclExample:
    """Closed-loop example: one observation block per keyframe, paired with
    that keyframe's action.

    Input holds the first keyframe's observations plus the instruction;
    output interleaves the remaining blocks with the actions, starting with
    the first keyframe's action. `object_pose_fn(t)` must supply the scene
    observations at timestep t for every keyframe.
    """
    if len(keyframes) < 2:
        raise ValueError(f"need at least 2 keyframes to build an example, got {len(keyframes)}")
    if keyframes.episode_length != episode.length:
        raise ValueError(
            f"keyframes were taken on length {keyframes.episode_length}, episode has {episode.length}"
        )
    roster = tuple(o.name for o in episode.objects)
    blocks: list[str] = []
    for t in keyframes:
        try:
            observations = object_pose_fn(t)
        except (KeyError, IndexError) as exc:
            raise ValueError(f"object_pose_fn has no observations for keyframe {t}") from exc
        if observations is None:
            raise ValueError(f"object_pose_fn has no observations for keyframe {t}")
        names = tuple(o.name for o in observations)
        if names != roster:
            raise ValueError(f"object_pose_fn names {names} at t={t} differ from episode roster {roster}")
        blocks.append(_observation_block(observations, bounds))
    actions = [format_action(discretize_action(episode.actions[t], bounds)) for t in keyframes]
    parts = [actions[0]]
    for block, act in zip(blocks[1:], actions[1:]):
        parts.append(block)
        parts.append(act)
    return IclExample(
        input="{" + blocks[0] + ", " + episode.instruction + "}",
        output="{" + ", ".join(parts) + "}",
    )


def assemble_prompt(
    examples: Sequence[IclExample], test_input: str, system: str
) -> PromptBundle:
    """Join examples as `in > out` pairs and append the test input with a
    trailing `> ` so the model completes the final output slot."""
    if not test_input:
        raise ValueError("test_input must be non-empty")
    pieces = [f"{e.input} > {e.output}" for e in examples]
    pieces.append(f"{test_input} > ")
    return PromptBundle(system=system, body=", ".join(pieces[:-1]) + (", " if examples else "") + pieces[-1])


_BRACKET = re.compile(r"\[([^\[\]]*)\]")
_INT_TOKEN = re.compile(r"[+-]?\d+")
_FENCE = re.compile(r"```[a-zA-Z0-9_-]*")
_STRICT_ACTION = r"\[\d+(?:, \d+){6}\]"
_STRICT_BODY = re.compile(r"\{" + _STRICT_ACTION + r"(?:, " + _STRICT_ACTION + r")*\}")

_COMPONENT_LIMITS = (
    ("tx", TRANSLATION_BINS),
    ("ty", TRANSLATION_BINS),
    ("tz", TRANSLATION_BINS),
    ("rr", ROTATION_BINS),
    ("rp", ROTATION_BINS),
    ("ry", ROTATION_BINS),
)


def _int_list(content: str) -> list[int] | None:
    """Parse a comma-separated integer list, or None if it is not one."""
    tokens = [t.strip() for t in content.split(",")]
    if not tokens or any(not t for t in tokens):
        return None
    values = []
    for t in tokens:
        if not _INT_TOKEN.fullmatch(t):
            return None
        digits = t.lstrip("+-")
        if len(digits) > 6:
            # Cannot be a valid bin; flag as range rather than converting
            # arbitrarily long digit strings.
            raise ParseError("range", 0, f"integer {t[:12]}... far outside any bin range")
        values.append(int(t))
    return values


def _action_from_ints(values: list[int], position: int) -> DiscreteAction:
    for (name, limit), v in zip(_COMPONENT_LIMITS, values):
        if not 0 <= v < limit:
            raise ParseError(
                "range", position, f"{name} bin {v} out of range [0, {limit}) at offset {position}"
            )
    g = values[6]
    if g not in (0, 1):
        raise ParseError("range", position, f"gripper bit {g} must be 0 or 1 at offset {position}")
    return DiscreteAction(DiscretePose(*values[:6]), g)


def _is_observation_echo(text: str, bracket_start: int) -> bool:
    # Observation blocks look like "name: [...]"; their brackets are not actions.
    j = bracket_start - 1
    while j >= 0 and text[j] in " \t":
        j -= 1
    return j >= 0 and text[j] == ":"


def parse_response(text: str | bytes, strict: bool = False) -> list[DiscreteAction]:
    """Extract the predicted action sequence from a model reply.

    Lenient mode tolerates surrounding prose, markdown fences, optional
    braces, and observation echoes; it fails only on integer brackets with
    the wrong arity, bins out of range, or no actions at all. Strict mode
    additionally requires the exact output grammar.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    if not isinstance(text, str):
        raise ParseError("no_actions", 0, f"expected text, got {type(text).__name__}")
    if strict:
        if not _STRICT_BODY.fullmatch(text):
            raise ParseError("grammar", 0, "text does not match the strict output grammar")
    cleaned = _FENCE.sub("", text)
    actions: list[DiscreteAction] = []
    for match in _BRACKET.finditer(cleaned):
        if not strict and _is_observation_echo(cleaned, match.start()):
            continue
        try:
            values = _int_list(match.group(1))
        except ParseError as exc:
            raise ParseError(exc.kind, match.start(), str(exc)) from None
        if values is None:
            continue
        if len(values) != 7:
            raise ParseError(
                "arity",
                match.start(),
                f"action bracket has {len(values)} integers, expected 7, at offset {match.start()}",
            )
        actions.append(_action_from_ints(values, match.start()))
    if not actions:
        raise ParseError("no_actions", 0, "no action brackets found")
    return actions


_OBSERVATION = re.compile(r"\s*(.+?)\s*:\s*\[([^\[\]]*)\]\s*")


def parse_observation(text: str) -> tuple[str, DiscretePose]:
    """Inverse of format_observation; accepts surrounding whitespace."""
    match = _OBSERVATION.fullmatch(text)
    if match is None:
        raise ParseError("no_actions", 0, f"not an observation: {text!r}")
    values = _int_list(match.group(2))
    if values is None or len(values) != 6:
        raise ParseError("arity", match.start(2), f"observation needs 6 integer bins: {text!r}")
    for (name, limit), v in zip(_COMPONENT_LIMITS, values):
        if not 0 <= v < limit:
            raise ParseError("range", match.start(2), f"{name} bin {v} out of range [0, {limit})")
    return match.group(1), DiscretePose(*values)


def parse_example_input(text: str) -> tuple[list[tuple[str, DiscretePose]], str]:
    """Split a formatted example input back into observations and instruction."""
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    observations: list[tuple[str, DiscretePose]] = []
    cursor = 0
    pattern = re.compile(r"([^{},]+?):\s*\[([^\[\]]*)\]")
    for match in pattern.finditer(body):
        observations.append(parse_observation(match.group(0)))
        cursor = match.end()
    instruction = body[cursor:].lstrip(", ").strip()
    if not observations:
        raise ParseError("no_actions", 0, "no observations found in example input")
    if not instruction:
        raise ParseError("no_actions", cursor, "no instruction found in example input")
    return observations, instruction
