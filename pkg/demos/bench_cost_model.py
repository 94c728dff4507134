#!/usr/bin/env python3
"""Provider-call accounting and wall-clock cost per decoding strategy.

Under the cheap cost model only the call counts are meaningful: single-pass
strategies make exactly one provider call per token, contrastive ones exactly
two. Under the padded model every provider call busy-waits a fixed number of
microseconds (emulating a model forward pass), so wall-clock ratios become
interpretable: contrastive decoding lands near 2x the baseline while the
boosted sampler stays within a few percent of 1x.
"""

import argparse

from logit_anchor import CostModel, parse_strategy, run_bench
from logit_anchor.config import resolve_scene


def show(report, base_label):
    base = report.row(base_label).wall_ms_per_token
    print(f"cost model: {report.cost_model.kind} pad_us={report.cost_model.pad_us:g}")
    print(f"{'strategy':<56} {'calls/tok':>9} {'ms/tok':>9} {'vs base':>8}")
    for row in report.rows:
        print(
            f"{row.strategy:<56} {row.provider_calls_per_token:>9.2f} "
            f"{row.wall_ms_per_token:>9.4f} {row.wall_ms_per_token / base:>8.3f}"
        )
    print()


def main(args):
    scene, scene_name = resolve_scene(args.scene)
    strategies = [parse_strategy(s) for s in args.strategies.split(";") if s.strip()]
    seeds = range(args.runs)
    print(f"scene={scene_name} runs={args.runs} max_steps={args.max_steps}\n")

    cheap = run_bench(scene, strategies, seeds, CostModel("cheap"),
                      max_steps=args.max_steps, min_tokens=args.min_tokens)
    show(cheap, strategies[0].label())

    padded = run_bench(scene, strategies, seeds, CostModel("padded", args.pad_us),
                       max_steps=args.max_steps, min_tokens=args.min_tokens)
    show(padded, strategies[0].label())


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scene", default="default")
    parser.add_argument("--strategies", default="baseline;vcd;flb")
    parser.add_argument("--runs", type=int, default=60)
    parser.add_argument("--pad-us", type=float, default=500.0, dest="pad_us")
    parser.add_argument("--max-steps", type=int, default=60, dest="max_steps")
    parser.add_argument("--min-tokens", type=int, default=1000, dest="min_tokens")
    main(parser.parse_args())
