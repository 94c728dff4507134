"""Numeric core: vocabularies, masked logit vectors, distributions, traces.

Everything downstream (decoding strategies, the simulator, metrics) is built
on four small operations defined here: a numerically stable masked softmax,
Shannon entropy in nats, seeded categorical sampling, and deterministic
argmax. All vectors are float64 numpy arrays indexed by token id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ContractError, ExclusionError

TokenId = int


@dataclass(frozen=True)
class Vocabulary:
    """An ordered, duplicate-free list of token strings.

    Token ids are positions in ``tokens``. The mapping is fixed for the
    lifetime of the object; everything else in the package refers to tokens
    by id and renders through :meth:`token`.
    """

    tokens: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise ContractError("vocabulary contains duplicate tokens")
        if not self.tokens:
            raise ContractError("vocabulary is empty")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.tokens)}

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> TokenId:
        try:
            return self._index[token]
        except KeyError:
            raise ContractError(f"token {token!r} not in vocabulary") from None

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def token(self, token_id: TokenId) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise ContractError(f"token id {token_id} out of range")
        return self.tokens[token_id]

    def render(self, ids: Sequence[TokenId]) -> str:
        return " ".join(self.tokens[i] for i in ids)


def _as_float64(scores) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractError(f"expected a 1-d score vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class LogitVector:
    """Per-token scores plus a boolean exclusion lane.

    ``mask[i]`` True means token ``i`` is excluded: it receives exactly zero
    probability under :func:`softmax` and is never chosen by :func:`argmax`
    or :func:`sample`. Unmasked scores must be finite. Arrays are frozen
    (read-only views) so a vector can be shared between traces safely.
    """

    scores: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        scores = _as_float64(self.scores)
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != scores.shape:
            raise ContractError(
                f"mask shape {mask.shape} does not match scores shape {scores.shape}"
            )
        if not mask.all() and not np.isfinite(scores[~mask]).all():
            raise ContractError("unmasked scores must be finite")
        scores = scores.copy()
        mask = mask.copy()
        scores.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def of(cls, scores, mask=None) -> "LogitVector":
        scores = _as_float64(scores)
        if mask is None:
            mask = np.zeros(scores.shape, dtype=bool)
        return cls(scores, mask)

    @classmethod
    def _trusted(cls, scores: np.ndarray, mask: np.ndarray) -> "LogitVector":
        """Wrap arrays without copying or re-validating (decode hot path).

        Caller contract: both are 1-d, same shape, float64/bool, unmasked
        scores finite, and no writable alias survives outside. The arrays are
        write-locked in place instead of copied.
        """
        scores.setflags(write=False)
        mask.setflags(write=False)
        vec = object.__new__(cls)
        object.__setattr__(vec, "scores", scores)
        object.__setattr__(vec, "mask", mask)
        return vec

    @property
    def size(self) -> int:
        return self.scores.shape[0]

    def unmasked_count(self) -> int:
        return int((~self.mask).sum())

    def with_scores(self, scores) -> "LogitVector":
        return LogitVector(_as_float64(scores), self.mask)

    def with_mask(self, mask) -> "LogitVector":
        return LogitVector(self.scores, np.asarray(mask, dtype=bool))


@dataclass(frozen=True)
class ProbDist:
    """A categorical distribution over token ids.

    Probabilities sum to 1 within 1e-9; excluded tokens carry exactly 0.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = _as_float64(self.probs)
        if (probs < 0).any():
            raise ContractError("probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ContractError(f"probabilities sum to {total!r}, not 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    def prob(self, token_id: TokenId) -> float:
        return float(self.probs[token_id])


def masked_probs(scores: np.ndarray, mask: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """The softmax kernel on raw arrays; masked entries get exactly zero.

    This is the single source of probability values: :func:`softmax` wraps it,
    and decode loops call it directly when they only need the array, so both
    routes are bit-identical.
    """
    if temperature <= 0:
        raise ContractError(f"temperature must be positive, got {temperature}")
    if mask.all():
        raise ExclusionError("softmax over a fully masked vector")
    live = ~mask
    scaled = scores[live]
    if temperature != 1.0:
        scaled = scaled / temperature
    shifted = scaled - scaled.max()
    exps = np.exp(shifted)
    probs = np.zeros(scores.shape[0], dtype=np.float64)
    probs[live] = exps / exps.sum()
    return probs


def softmax(logits: LogitVector, temperature: float = 1.0) -> ProbDist:
    """Masked softmax with max-subtraction for numerical stability.

    Masked tokens get exactly zero probability. ``temperature`` divides the
    scores before exponentiation; it must be positive.
    """
    return ProbDist(masked_probs(logits.scores, logits.mask, temperature))


def entropy(dist: ProbDist) -> float:
    """Shannon entropy in nats, with the 0*log(0) = 0 convention."""
    p = dist.probs[dist.probs > 0]
    return float(-(p * np.log(p)).sum())


def sample(dist: ProbDist, rng: np.random.Generator) -> TokenId:
    """Draw one token id by inverse CDF over the positive-probability support.

    Consumes exactly one uniform variate, so parallel runs with aligned
    generators stay step-for-step comparable. Never returns a token with
    zero probability.
    """
    support = np.flatnonzero(dist.probs > 0)
    if support.size == 0:
        raise ExclusionError("sampling from an all-zero distribution")
    cum = np.cumsum(dist.probs[support])
    u = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, u, side="right"))
    if idx >= support.size:
        idx = support.size - 1
    return int(support[idx])


def argmax(logits: LogitVector) -> TokenId:
    """Highest-scoring unmasked token; ties break toward the lowest id."""
    if logits.mask.all():
        raise ExclusionError("argmax over a fully masked vector")
    scores = np.where(logits.mask, -np.inf, logits.scores)
    return int(np.argmax(scores))


@dataclass(frozen=True)
class StepTrace:
    """Everything observable about one decoding step.

    ``raw_logits`` are the provider's scores before any strategy adjustment,
    ``adjusted_logits`` are what the final distribution was computed from
    (including the candidate mask), and ``provider_calls`` counts how many
    provider evaluations this step consumed.
    """

    step_index: int
    raw_logits: LogitVector
    adjusted_logits: LogitVector
    dist: ProbDist
    chosen: TokenId
    entropy_nats: float
    provider_calls: int

    def __post_init__(self):
        if self.adjusted_logits.mask[self.chosen]:
            raise ContractError(
                f"step {self.step_index} chose a masked token {self.chosen}"
            )
        if self.dist.prob(self.chosen) <= 0.0:
            raise ContractError(
                f"step {self.step_index} chose a zero-probability token {self.chosen}"
            )


@dataclass(frozen=True)
class GenerationRecord:
    """One completed decoding run: per-step traces plus the rendered text."""

    prompt_id: str
    strategy: str
    seed: int
    steps: tuple[StepTrace, ...] = field(repr=False)
    text: str

    @property
    def token_ids(self) -> tuple[TokenId, ...]:
        return tuple(s.chosen for s in self.steps)
