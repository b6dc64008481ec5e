"""Ablation sweeps in miniature.

Runs the loop, prompts, and shots ablations with small counts and prints
one line per arm. With the offline oracles the interesting outputs are
structural (prompt sizes, arm determinism); plug in a remote model to
see the success-rate columns move.

Run:  python3 demos/05_ablations.py
"""

from iclmanip import RunConfig, TaskId, ablate_loop, ablate_prompts, ablate_shots

cfg = RunConfig(task=TaskId.PUSH_BUTTON, n_demos=4, n_eval=4, seed=0)


def show(title, reports):
    print(f"== {title}")
    for r in reports:
        chars = r.records[0].prompt_chars
        print(
            f"   {r.arm:12s} success_rate={r.success_rate:.2f} "
            f"prompt_chars={chars}"
        )
    print()


show("open vs closed loop", ablate_loop(cfg))
show("system prompt paraphrases (oracle ignores them)", ablate_prompts(cfg))
show("number of demos", ablate_shots(cfg, shot_counts=(1, 2, 4)))
