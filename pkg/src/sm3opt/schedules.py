"""Learning-rate schedules with optional linear warmup.

The per-step multiplier scales the base learning rate:

    constant         1
    rsqrt_model_dim  sqrt(model_dim / t)
    linear_decay     1 - t / total_steps
    staircase        max(floor, decay ** (t // interval))

Warmup composes multiplicatively: for t <= warmup_steps the multiplier is
additionally scaled by t / warmup_steps. `floor` is expressed as a
fraction of the base learning rate so the multiplier is a function of
(spec, t) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidScheduleError

KINDS = ("constant", "rsqrt_model_dim", "linear_decay", "staircase")


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str = "constant"
    warmup_steps: int = 0
    model_dim: int | None = None
    total_steps: int | None = None
    decay: float | None = None
    interval: int | None = None
    floor: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidScheduleError(f"unknown schedule kind {self.kind!r}")
        if self.warmup_steps < 0:
            raise InvalidScheduleError("warmup_steps must be >= 0")
        if self.floor < 0:
            raise InvalidScheduleError("floor must be >= 0")
        if self.kind == "rsqrt_model_dim":
            if self.model_dim is None or self.model_dim < 1:
                raise InvalidScheduleError("rsqrt_model_dim needs model_dim >= 1")
        if self.kind == "linear_decay":
            if self.total_steps is None or self.total_steps < 1:
                raise InvalidScheduleError("linear_decay needs total_steps >= 1")
            if self.warmup_steps > self.total_steps:
                raise InvalidScheduleError(
                    "warmup_steps exceeds total_steps for linear_decay"
                )
        if self.kind == "staircase":
            if self.decay is None or not 0.0 < self.decay < 1.0:
                raise InvalidScheduleError("staircase needs decay in (0, 1)")
            if self.interval is None or self.interval < 1:
                raise InvalidScheduleError("staircase needs interval >= 1")

    @classmethod
    def constant(cls, warmup_steps: int = 0) -> "ScheduleSpec":
        return cls(kind="constant", warmup_steps=warmup_steps)

    @classmethod
    def rsqrt(cls, model_dim: int, warmup_steps: int = 0) -> "ScheduleSpec":
        return cls(kind="rsqrt_model_dim", model_dim=model_dim, warmup_steps=warmup_steps)

    @classmethod
    def linear(cls, total_steps: int, warmup_steps: int = 0) -> "ScheduleSpec":
        return cls(kind="linear_decay", total_steps=total_steps, warmup_steps=warmup_steps)

    @classmethod
    def staircase(
        cls, decay: float, interval: int, floor: float = 0.0, warmup_steps: int = 0
    ) -> "ScheduleSpec":
        return cls(
            kind="staircase",
            decay=decay,
            interval=interval,
            floor=floor,
            warmup_steps=warmup_steps,
        )


def schedule_multiplier(spec: ScheduleSpec, t: int) -> float:
    """Multiplier applied to the base learning rate on step t (t >= 1)."""
    if t < 1:
        raise ValueError(f"step must be >= 1, got {t}")
    if spec.kind == "constant":
        base = 1.0
    elif spec.kind == "rsqrt_model_dim":
        base = math.sqrt(spec.model_dim / t)
    elif spec.kind == "linear_decay":
        base = max(0.0, 1.0 - t / spec.total_steps)
    else:  # staircase
        base = max(spec.floor, spec.decay ** (t // spec.interval))
    if spec.warmup_steps > 0 and t <= spec.warmup_steps:
        base *= t / spec.warmup_steps
    return base
