"""Bind strategy descriptors to scene providers and execute runs.

Every run gets fresh provider instances (so call counters and grammar state
never leak between runs) and its own seed-derived random streams. Fan-out
over (strategy, seed) pairs is thread-based; results are keyed and sorted,
so the output is identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from .core import GenerationRecord
from .errors import ConfigError
from .simulator import NegativeProvider, NegativeVariantSpec, SceneSpec, SyntheticProvider
from .strategies import (
    CONTRASTIVE_KINDS,
    FLB,
    GREEDY,
    Strategy,
    decode_baseline,
    decode_contrastive,
    decode_flb,
)

ProviderWrap = Callable[[object], object]


def make_providers(
    scene: SceneSpec,
    strategy: Strategy,
    wrap: ProviderWrap | None = None,
) -> tuple[object, object | None]:
    """Fresh positive (and, for contrastive kinds, negative) providers."""
    positive = SyntheticProvider(scene)
    negative = None
    if strategy.kind in CONTRASTIVE_KINDS:
        variant = NegativeVariantSpec(
            kind=strategy.contrastive.negative_kind,
            strength=strategy.resolved_strength(),
        )
        negative = NegativeProvider(scene, variant)
    if wrap is not None:
        positive = wrap(positive)
        if negative is not None:
            negative = wrap(negative)
    return positive, negative


def run_strategy(
    scene: SceneSpec,
    strategy: Strategy,
    *,
    seed: int,
    max_steps: int = 60,
    temperature: float = 1.0,
    prompt_id: str = "scene",
    wrap: ProviderWrap | None = None,
) -> GenerationRecord:
    """Execute one decoding run of ``strategy`` on ``scene``."""
    provider, negative = make_providers(scene, strategy, wrap)
    common = dict(
        prompt_id=prompt_id,
        max_steps=max_steps,
        seed=seed,
        temperature=temperature,
        label=strategy.label(),
    )
    if strategy.kind in CONTRASTIVE_KINDS:
        return decode_contrastive(provider, negative, strategy.contrastive, **common)
    if strategy.kind == FLB:
        return decode_flb(
            provider, strategy.flb, noun_ids=scene.noun_ids, **common
        )
    mode = "greedy" if strategy.kind == GREEDY else "sample"
    return decode_baseline(provider, mode=mode, beta=strategy.beta, **common)


def run_many(
    scene: SceneSpec,
    strategies: Sequence[Strategy],
    seeds: Sequence[int],
    *,
    max_steps: int = 60,
    temperature: float = 1.0,
    prompt_id: str = "scene",
    jobs: int = 1,
) -> list[GenerationRecord]:
    """All (strategy, seed) runs, ordered by strategy position then seed.

    ``jobs > 1`` fans runs out over a thread pool; ordering and content of
    the result are independent of the worker count.
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    labels = [s.label() for s in strategies]
    if len(set(labels)) != len(labels):
        raise ConfigError("strategy labels must be unique within one run")
    tasks = [
        (si, seed, strategy)
        for si, strategy in enumerate(strategies)
        for seed in seeds
    ]

    def one(task):
        si, seed, strategy = task
        return (si, seed), run_strategy(
            scene, strategy,
            seed=seed, max_steps=max_steps,
            temperature=temperature, prompt_id=prompt_id,
        )

    if jobs == 1:
        keyed = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            keyed = list(pool.map(one, tasks))
    keyed.sort(key=lambda kv: kv[0])
    return [record for _, record in keyed]
