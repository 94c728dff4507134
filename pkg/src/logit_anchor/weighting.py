"""Boost-weight schedules and the combined object score.

A schedule maps the generation step t (first generated token at t = 0) to a
nonnegative weight that scales the cached first-step logits when they are
added back into later steps. Three shapes are supported:

    increasing   w_t = gamma * (1 - exp(-lam * t))
    decreasing   w_t = gamma * exp(-lam * t)
    constant     w_t = gamma

The increasing shape starts at exactly 0 and saturates at gamma; for
practical purposes it has converged (within 1e-6) by t = ceil(14 / lam).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

INCREASING = "increasing"
DECREASING = "decreasing"
CONSTANT = "constant"
SCHEDULE_KINDS = (INCREASING, DECREASING, CONSTANT)

DEFAULT_GAMMA = 0.3
DEFAULT_LAM = 0.05


@dataclass(frozen=True)
class WeightSchedule:
    """A named schedule shape with its two scalars.

    gamma is the asymptotic (or initial, for the decreasing shape) weight and
    must be >= 0; lam is the rate and must be > 0 for the two exponential
    shapes. lam is ignored by the constant shape but still validated.
    """

    kind: str = INCREASING
    gamma: float = DEFAULT_GAMMA
    lam: float = DEFAULT_LAM

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ConfigError(
                f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}"
            )
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ConfigError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigError(f"lam must be finite and > 0, got {self.lam!r}")

    def converged_step(self) -> int:
        """First step at which |w_t - gamma| < 1e-6 is guaranteed (increasing)."""
        return math.ceil(14.0 / self.lam)


def weight_at(schedule: WeightSchedule, t: int) -> float:
    """Evaluate the schedule at step t >= 0."""
    if t < 0:
        raise ConfigError(f"step index must be >= 0, got {t}")
    if schedule.kind == INCREASING:
        return schedule.gamma * (1.0 - math.exp(-schedule.lam * t))
    if schedule.kind == DECREASING:
        return schedule.gamma * math.exp(-schedule.lam * t)
    return schedule.gamma


def object_score(chair: float, cover: float, *, percent: bool = False) -> float:
    """Combine a hallucination rate and a coverage rate into one score.

    Both inputs must be on the same scale: fractions in [0, 1] by default,
    or percentages in [0, 100] with ``percent=True``. Higher is better; the
    score rewards low hallucination and high coverage equally:

        0.5 * ((scale_max - chair) + cover)
    """
    scale_max = 100.0 if percent else 1.0
    for name, value in (("chair", chair), ("cover", cover)):
        if not (0.0 <= value <= scale_max):
            raise ConfigError(
                f"{name} must lie in [0, {scale_max:g}], got {value!r}"
            )
    return 0.5 * ((scale_max - chair) + cover)
