"""Evaluation harness: closed pipeline runs, ablation sweeps, CSV reports.

A run is fully described by a RunConfig. Demo episodes come from seeds
scanned upward from config.seed so that task variations cycle round-robin
(and a smaller demo pool is always a prefix of a larger one); eval
episodes use seeds offset by 100000, so the two sets never overlap unless
the caller explicitly passes eval_seeds.
"""

from __future__ import annotations

import csv
import dataclasses
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .discretize import dediscretize_action, discretize_pose
from .keyframes import KeyframeIndices, extract_keyframes, sample_uniform
from .llm import (
    CompletionRequest,
    CompletionResult,
    DemoRecord,
    Provider,
    TokenBucket,
    complete_mock_compositional,
    complete_mock_nearest,
    complete_remote,
)
from .model import Episode, ObjectObservation, WorkspaceBounds, verify_object_consistency
from .prompts import (
    IclExample,
    ParseError,
    assemble_prompt,
    build_closed_loop_example,
    build_example_input,
    build_icl_example,
    default_system_prompts,
    parse_response,
)
from .sim import (
    BASE_SIGMA_ROTATION_RAD,
    BASE_SIGMA_TRANSLATION_M,
    ExecutionError,
    TaskId,
    add_pose_noise,
    check_success,
    execute_action,
    observations_of,
    reset,
    scripted_expert,
    task_spec,
)

DEFAULT_BOUNDS = WorkspaceBounds(-0.5, 0.5, -0.5, 0.5, 0.0, 0.5)
EVAL_SEED_OFFSET = 100_000
CSV_HEADER = ("task", "provider", "arm", "seed", "success", "parse_error", "n_actions", "latency_ms")

DEFAULT_SAMPLING_INTERVALS = (5, 10, 20, 40, 80)
DEFAULT_SHOT_COUNTS = (1, 2, 5, 10)
DEFAULT_NOISE_SCALES = (0.5, 1.0, 1.5, 2.0)


class KeyframeMode(Enum):
    KEYFRAMES = "keyframes"
    UNIFORM = "uniform"


class LoopMode(Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class NoiseSpec:
    """Observation noise: std per axis is k times the base sigma."""

    k: float
    sigma_translation_m: float = BASE_SIGMA_TRANSLATION_M
    sigma_rotation_rad: float = BASE_SIGMA_ROTATION_RAD

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"NoiseSpec.k must be >= 0, got {self.k}")


@dataclass(frozen=True)
class RunConfig:
    """Everything one evaluation run depends on."""

    task: TaskId
    n_demos: int = 10
    n_eval: int = 25
    delta: float = 0.01  # rad/s keyframe velocity threshold
    bounds: WorkspaceBounds = DEFAULT_BOUNDS
    provider: Provider = Provider.MOCK_NEAREST
    endpoint: str = ""
    model: str = ""
    credential_env: str = "ICLMANIP_API_KEY"
    system_prompt_index: int = 0
    keyframe_mode: KeyframeMode = KeyframeMode.KEYFRAMES
    uniform_interval: int = 10
    loop_mode: LoopMode = LoopMode.OPEN
    noise: NoiseSpec | None = None
    seed: int = 0
    max_tokens: int = 1024
    requests_per_second: float = 1.0
    eval_seeds: tuple[int, ...] | None = None  # explicit override; default is derived

    def __post_init__(self):
        if self.n_demos < 1:
            raise ValueError(f"n_demos must be >= 1, got {self.n_demos}")
        if self.n_eval < 1:
            raise ValueError(f"n_eval must be >= 1, got {self.n_eval}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.system_prompt_index not in (0, 1, 2):
            raise ValueError(f"system_prompt_index must be 0, 1, or 2, got {self.system_prompt_index}")
        if self.uniform_interval < 1:
            raise ValueError(f"uniform_interval must be >= 1, got {self.uniform_interval}")
        if self.eval_seeds is not None:
            object.__setattr__(self, "eval_seeds", tuple(int(s) for s in self.eval_seeds))
            if len(self.eval_seeds) != self.n_eval:
                raise ValueError(
                    f"eval_seeds has {len(self.eval_seeds)} entries but n_eval is {self.n_eval}"
                )


@dataclass(frozen=True)
class EpisodeRecord:
    """Outcome of one evaluation episode."""

    seed: int
    success: bool
    parse_error: bool
    n_actions: int
    latency_ms: int
    prompt_chars: int


@dataclass(frozen=True)
class EvalReport:
    """One arm's worth of episode records plus its config."""

    task: TaskId
    provider: Provider
    arm: str
    records: tuple[EpisodeRecord, ...]
    config: RunConfig

    @property
    def success_rate(self) -> float:
        return sum(1 for r in self.records if r.success) / len(self.records)


def demo_task(task: TaskId) -> TaskId:
    """Multi-button evaluations learn from single-button demos."""
    return TaskId.PUSH_BUTTON if task is TaskId.PUSH_MULTIPLE_BUTTONS else task


def demo_seeds(config: RunConfig) -> tuple[int, ...]:
    """Scan seeds upward from config.seed, accepting one whose naturally
    drawn variation matches the next round-robin slot.

    Because acceptance depends only on earlier slots, a k-demo pool is a
    prefix of any larger pool for the same config.
    """
    task = demo_task(config.task)
    variations = task_spec(task).variations
    if not variations:
        raise ValueError(f"task {task.value} has no enumerable demo variations")
    slots = [variations[i % len(variations)] for i in range(config.n_demos)]
    chosen: list[int] = []
    seed = config.seed
    budget = config.n_demos * 200
    for slot in slots:
        while budget > 0:
            _, _, variation = reset(task, seed, config.bounds)
            seed += 1
            budget -= 1
            if variation == slot:
                chosen.append(seed - 1)
                break
        else:
            raise RuntimeError(f"could not fill demo variation slots within budget for {task.value}")
    return tuple(chosen)


def eval_seeds(config: RunConfig) -> tuple[int, ...]:
    if config.eval_seeds is not None:
        return config.eval_seeds
    return tuple(config.seed + EVAL_SEED_OFFSET + j for j in range(config.n_eval))


def _noise_seed(base: int, *tags: int) -> int:
    return int(np.random.SeedSequence([base, *tags]).generate_state(1)[0])


def obs_bins_vector(
    observations: Sequence[ObjectObservation], bounds: WorkspaceBounds
) -> tuple[int, ...]:
    """Concatenated discretized pose bins, observation order preserved."""
    bins: list[int] = []
    for obs in observations:
        bins.extend(discretize_pose(obs.pose, bounds).as_tuple())
    return tuple(bins)


@dataclass(frozen=True)
class _Demo:
    episode: Episode
    example: IclExample
    record: DemoRecord


def _noised(
    observations: Sequence[ObjectObservation], config: RunConfig, *tags: int
) -> tuple[ObjectObservation, ...]:
    if config.noise is None:
        return tuple(observations)
    spec = config.noise
    return add_pose_noise(
        observations,
        spec.k,
        seed=_noise_seed(config.seed, *tags),
        sigma_translation_m=spec.sigma_translation_m,
        sigma_rotation_rad=spec.sigma_rotation_rad,
    )


_DEMO_NOISE_TAG = 1
_TEST_NOISE_TAG = 2


def _keyframes_for(config: RunConfig, episode: Episode) -> KeyframeIndices:
    if config.keyframe_mode is KeyframeMode.KEYFRAMES:
        return extract_keyframes(episode, config.delta)
    return sample_uniform(episode.length, config.uniform_interval)


def _build_demo(config: RunConfig, position: int, seed: int) -> _Demo:
    task = demo_task(config.task)
    world, instruction, _ = reset(task, seed, config.bounds)
    episode = scripted_expert(task, world, instruction)
    frames = _keyframes_for(config, episode)
    if config.loop_mode is LoopMode.OPEN:
        start_obs = _noised(episode.objects, config, _DEMO_NOISE_TAG, position)
        example = build_icl_example(
            dataclasses.replace(episode, objects=start_obs), frames, config.bounds
        )
    else:
        # Closed loop re-observes the scene at each keyframe; replay the
        # dense trajectory to know where objects actually are.
        poses_by_t: dict[int, tuple[ObjectObservation, ...]] = {}
        sim = world.clone()
        wanted = set(frames)
        for t, act in enumerate(episode.actions):
            execute_action(sim, act)
            if t in wanted:
                poses_by_t[t] = _noised(
                    observations_of(sim), config, _DEMO_NOISE_TAG, position, t
                )
        start_obs = poses_by_t[frames[0]]
        example = build_closed_loop_example(
            episode, frames, config.bounds, lambda t: poses_by_t[t]
        )
    record = DemoRecord(
        obs_bins=obs_bins_vector(start_obs, config.bounds),
        instruction=instruction,
        output=example.output,
    )
    return _Demo(episode=episode, example=example, record=record)


def build_demo_pool(config: RunConfig) -> list[_Demo]:
    demos = [_build_demo(config, i, s) for i, s in enumerate(demo_seeds(config))]
    verify_object_consistency([d.episode for d in demos])
    return demos


def _complete(
    config: RunConfig,
    demos: list[_Demo],
    system: str,
    body: str,
    test_bins: tuple[int, ...],
    instruction: str,
    credential: str | None,
    bucket: TokenBucket | None,
) -> CompletionResult:
    if config.provider is Provider.REMOTE:
        request = CompletionRequest(
            system=system,
            user=body,
            model=config.model,
            max_tokens=config.max_tokens,
            temperature=0.0,
        )
        assert credential is not None
        return complete_remote(
            request, config.endpoint, credential, rate_limiter=bucket
        )
    records = [d.record for d in demos]
    if config.provider is Provider.MOCK_NEAREST:
        return complete_mock_nearest(records, test_bins, instruction)
    return complete_mock_compositional(records, test_bins, instruction)


def run_eval(config: RunConfig, arm: str = "eval") -> EvalReport:
    """Run the closed pipeline over n_eval fresh worlds and score successes.

    Parse failures count as failed episodes and never abort the run;
    transport and protocol errors from the remote provider do abort.
    """
    demos = build_demo_pool(config)
    d_seeds = demo_seeds(config)
    e_seeds = eval_seeds(config)
    if config.eval_seeds is None and set(d_seeds) & set(e_seeds):
        raise RuntimeError("derived demo and eval seeds overlap; widen EVAL_SEED_OFFSET")

    system = default_system_prompts()[config.system_prompt_index]
    examples = [d.example for d in demos]
    credential = None
    bucket = None
    if config.provider is Provider.REMOTE:
        credential = os.environ.get(config.credential_env)
        if not credential:
            raise ValueError(
                f"credential environment variable {config.credential_env!r} is not set"
            )
        bucket = TokenBucket(config.requests_per_second)

    records = []
    for j, seed in enumerate(e_seeds):
        world, instruction, variation = reset(config.task, seed, config.bounds)
        test_obs = _noised(observations_of(world), config, _TEST_NOISE_TAG, j)
        test_input = build_example_input(test_obs, instruction, config.bounds)
        bundle = assemble_prompt(examples, test_input, system)
        prompt_chars = len(bundle.system) + len(bundle.body)
        result = _complete(
            config,
            demos,
            system,
            bundle.body,
            obs_bins_vector(test_obs, config.bounds),
            instruction,
            credential,
            bucket,
        )
        try:
            predicted = parse_response(result.text)
        except ParseError:
            records.append(
                EpisodeRecord(
                    seed=seed,
                    success=False,
                    parse_error=True,
                    n_actions=0,
                    latency_ms=result.latency_ms,
                    prompt_chars=prompt_chars,
                )
            )
            continue
        try:
            for da in predicted:
                execute_action(world, dediscretize_action(da, config.bounds))
        except ExecutionError:
            pass  # stop early; score whatever state we reached
        records.append(
            EpisodeRecord(
                seed=seed,
                success=check_success(config.task, world, variation),
                parse_error=False,
                n_actions=len(predicted),
                latency_ms=result.latency_ms,
                prompt_chars=prompt_chars,
            )
        )
    return EvalReport(
        task=config.task,
        provider=config.provider,
        arm=arm,
        records=tuple(records),
        config=config,
    )


def ablate_sampling(
    config: RunConfig, intervals: Sequence[int] = DEFAULT_SAMPLING_INTERVALS
) -> list[EvalReport]:
    """Keyframe selection vs fixed-interval sampling, shared seeds."""
    reports = [
        run_eval(
            dataclasses.replace(config, keyframe_mode=KeyframeMode.KEYFRAMES), arm="keyframes"
        )
    ]
    for interval in intervals:
        cfg = dataclasses.replace(
            config, keyframe_mode=KeyframeMode.UNIFORM, uniform_interval=interval
        )
        reports.append(run_eval(cfg, arm=f"uniform-{interval}"))
    return reports


def ablate_shots(
    config: RunConfig, shot_counts: Sequence[int] = DEFAULT_SHOT_COUNTS
) -> list[EvalReport]:
    """Demo-count sweep; smaller pools are prefixes of larger ones."""
    reports = []
    for n in shot_counts:
        cfg = dataclasses.replace(config, n_demos=n)
        reports.append(run_eval(cfg, arm=f"shots-{n}"))
    return reports


def ablate_noise(
    config: RunConfig, scales: Sequence[float] = DEFAULT_NOISE_SCALES
) -> list[EvalReport]:
    """Observation-noise sweep; noise hits demo and test observations."""
    base = config.noise or NoiseSpec(k=1.0)
    reports = []
    for k in scales:
        cfg = dataclasses.replace(config, noise=dataclasses.replace(base, k=k))
        reports.append(run_eval(cfg, arm=f"noise-{k:g}"))
    return reports


def ablate_prompts(config: RunConfig) -> list[EvalReport]:
    """One arm per system prompt; mock providers must tie exactly."""
    reports = []
    for i in range(3):
        cfg = dataclasses.replace(config, system_prompt_index=i)
        reports.append(run_eval(cfg, arm=f"prompt-{i}"))
    return reports


def ablate_loop(config: RunConfig) -> list[EvalReport]:
    """Open-loop vs closed-loop prompt construction."""
    reports = []
    for mode in (LoopMode.OPEN, LoopMode.CLOSED):
        cfg = dataclasses.replace(config, loop_mode=mode)
        reports.append(run_eval(cfg, arm=f"loop-{mode.value}"))
    return reports


def emit_csv(reports: Sequence[EvalReport], path: str | Path) -> None:
    """Write per-episode rows sorted by (arm, seed); stable across reruns."""
    rows = []
    for report in reports:
        for record in report.records:
            rows.append(
                (
                    report.task.value,
                    report.provider.value,
                    report.arm,
                    record.seed,
                    int(record.success),
                    int(record.parse_error),
                    record.n_actions,
                    record.latency_ms,
                )
            )
    rows.sort(key=lambda r: (r[2], r[3]))
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
