"""Command-line front end.

Subcommands:
  generate-demos   write scripted-expert episodes as line-delimited JSON
  build-prompt     assemble one prompt bundle and print it as JSON
  eval             run the closed pipeline and report the success rate
  ablate           run one ablation sweep (sampling|shots|noise|prompts|loop)

Settings resolve in three layers: RunConfig defaults, then a JSON config
file (--config), then explicit flags. The remote credential is never a
flag; it is read from the environment variable named by credential_env.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    DEFAULT_NOISE_SCALES,
    DEFAULT_SAMPLING_INTERVALS,
    DEFAULT_SHOT_COUNTS,
    EvalReport,
    KeyframeMode,
    LoopMode,
    NoiseSpec,
    RunConfig,
    ablate_loop,
    ablate_noise,
    ablate_prompts,
    ablate_sampling,
    ablate_shots,
    build_demo_pool,
    demo_seeds,
    demo_task,
    emit_csv,
    eval_seeds,
    run_eval,
)
from .llm import Provider
from .model import WorkspaceBounds, save_episodes
from .prompts import assemble_prompt, build_example_input, default_system_prompts
from .sim import TaskId, observations_of, reset, scripted_expert

_CONFIG_KEYS = {
    "task",
    "n_demos",
    "n_eval",
    "delta",
    "bounds",
    "provider",
    "endpoint",
    "model",
    "credential_env",
    "system_prompt_index",
    "keyframe_mode",
    "uniform_interval",
    "loop_mode",
    "noise",
    "seed",
    "max_tokens",
    "requests_per_second",
}


def _load_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"cannot read config file {path}: {exc}")
    if not isinstance(raw, dict):
        raise SystemExit(f"config file {path} must hold a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise SystemExit(f"config file {path} has unknown keys: {sorted(unknown)}")
    return raw


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    if "task" not in values:
        raise SystemExit("a task is required (flag --task or config file key \"task\")")
    try:
        values["task"] = TaskId(values["task"]) if not isinstance(values["task"], TaskId) else values["task"]
        if "provider" in values and not isinstance(values["provider"], Provider):
            values["provider"] = Provider(values["provider"])
        if "keyframe_mode" in values and not isinstance(values["keyframe_mode"], KeyframeMode):
            values["keyframe_mode"] = KeyframeMode(values["keyframe_mode"])
        if "loop_mode" in values and not isinstance(values["loop_mode"], LoopMode):
            values["loop_mode"] = LoopMode(values["loop_mode"])
    except ValueError as exc:
        raise SystemExit(str(exc))
    if "bounds" in values and not isinstance(values["bounds"], WorkspaceBounds):
        b = values["bounds"]
        if not isinstance(b, (list, tuple)) or len(b) != 6:
            raise SystemExit("bounds must be six numbers: x_min x_max y_min y_max z_min z_max")
        values["bounds"] = WorkspaceBounds(*(float(v) for v in b))
    if "noise" in values and values["noise"] is not None and not isinstance(values["noise"], NoiseSpec):
        n = values["noise"]
        if isinstance(n, (int, float)):
            values["noise"] = NoiseSpec(k=float(n))
        elif isinstance(n, dict):
            try:
                values["noise"] = NoiseSpec(**{k: float(v) for k, v in n.items()})
            except (TypeError, ValueError) as exc:
                raise SystemExit(f"bad noise spec: {exc}")
        else:
            raise SystemExit("noise must be a number (k) or an object with k and sigmas")
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise SystemExit(str(exc))


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--task", choices=[t.value for t in TaskId])
    parser.add_argument("--n-demos", dest="n_demos", type=int)
    parser.add_argument("--n-eval", dest="n_eval", type=int)
    parser.add_argument("--delta", type=float, help="keyframe velocity threshold (rad/s)")
    parser.add_argument(
        "--bounds",
        type=float,
        nargs=6,
        metavar=("XMIN", "XMAX", "YMIN", "YMAX", "ZMIN", "ZMAX"),
    )
    parser.add_argument("--provider", choices=[p.value for p in Provider])
    parser.add_argument("--endpoint")
    parser.add_argument("--model")
    parser.add_argument(
        "--credential-env",
        dest="credential_env",
        help="environment variable holding the API credential",
    )
    parser.add_argument(
        "--system-prompt-index", dest="system_prompt_index", type=int, choices=(0, 1, 2)
    )
    parser.add_argument(
        "--keyframe-mode", dest="keyframe_mode", choices=[m.value for m in KeyframeMode]
    )
    parser.add_argument("--uniform-interval", dest="uniform_interval", type=int)
    parser.add_argument("--loop-mode", dest="loop_mode", choices=[m.value for m in LoopMode])
    parser.add_argument("--noise-k", dest="noise", type=float, help="noise scale k (omit for none)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--max-tokens", dest="max_tokens", type=int)
    parser.add_argument(
        "--requests-per-second", dest="requests_per_second", type=float
    )


def _summary_line(report: EvalReport) -> str:
    return (
        f"task={report.task.value} provider={report.provider.value} arm={report.arm} "
        f"n={len(report.records)} success_rate={report.success_rate:.2f}"
    )


def _cmd_generate_demos(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    task = demo_task(config.task)
    episodes = []
    for seed in demo_seeds(config):
        world, instruction, _ = reset(task, seed, config.bounds)
        episodes.append(scripted_expert(task, world, instruction))
    save_episodes(episodes, args.out)
    print(f"wrote {len(episodes)} episodes to {args.out}")
    return 0


def _cmd_build_prompt(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    demos = build_demo_pool(config)
    seed = eval_seeds(config)[0]
    world, instruction, _ = reset(config.task, seed, config.bounds)
    test_input = build_example_input(observations_of(world), instruction, config.bounds)
    system = default_system_prompts()[config.system_prompt_index]
    bundle = assemble_prompt([d.example for d in demos], test_input, system)
    payload = json.dumps({"system": bundle.system, "body": bundle.body}, indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"wrote prompt bundle to {args.out}")
    else:
        print(payload)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    report = run_eval(config)
    if args.csv:
        emit_csv([report], args.csv)
    print(_summary_line(report))
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = _build_run_config(args)
    if args.sweep == "sampling":
        intervals = args.intervals or DEFAULT_SAMPLING_INTERVALS
        reports = ablate_sampling(config, intervals)
    elif args.sweep == "shots":
        shots = args.shots or DEFAULT_SHOT_COUNTS
        reports = ablate_shots(config, shots)
    elif args.sweep == "noise":
        scales = args.scales or DEFAULT_NOISE_SCALES
        reports = ablate_noise(config, scales)
    elif args.sweep == "prompts":
        reports = ablate_prompts(config)
    else:
        reports = ablate_loop(config)
    if args.csv:
        emit_csv(reports, args.csv)
    for report in reports:
        print(_summary_line(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iclmanip",
        description="Prompt robot demonstrations into a text-only LLM and score the replies in simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-demos", help="write scripted demo episodes as JSON lines")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output episodes file")
    p.set_defaults(func=_cmd_generate_demos)

    p = sub.add_parser("build-prompt", help="assemble one prompt bundle")
    _add_config_flags(p)
    p.add_argument("--out", help="write the JSON bundle here instead of stdout")
    p.set_defaults(func=_cmd_build_prompt)

    p = sub.add_parser("eval", help="run the closed pipeline and score it")
    _add_config_flags(p)
    p.add_argument("--csv", help="write per-episode rows to this CSV file")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ablate", help="run an ablation sweep")
    p.add_argument("sweep", choices=("sampling", "shots", "noise", "prompts", "loop"))
    _add_config_flags(p)
    p.add_argument("--intervals", type=int, nargs="+", help="uniform sampling intervals")
    p.add_argument("--shots", type=int, nargs="+", help="demo counts for the shots sweep")
    p.add_argument("--scales", type=float, nargs="+", help="noise scales k")
    p.add_argument("--csv", help="write per-episode rows to this CSV file")
    p.set_defaults(func=_cmd_ablate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
