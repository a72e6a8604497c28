"""Experiment execution: step loops, shadow accumulator tracking, and
per-step invariant auditing.

Shadow accumulators consume the realized gradient stream of whatever
optimizer drives the run, so the three statistics (exact per-coordinate
sums, SM3-I, SM3-II) are always comparable: they saw the same gradients
even on problems whose gradients depend on the iterate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cover import Cover
from .errors import InvariantViolationError
from .metrics import RunRecord
from .optim import (
    AdagradAccumulator,
    Optimizer,
    OptimizerConfig,
    build_optimizer,
    sm3_accumulator,
)
from .problems import Problem
from .schedules import schedule_multiplier
from .tensor import ParamTensor

SANDWICH_RTOL = 1e-9


class ShadowAccumulators:
    """Adagrad / SM3-I / SM3-II statistics fed by one gradient stream,
    with the previous step's effective vectors retained so monotonicity
    is checkable across steps and accumulator dumps stay cheap."""

    def __init__(self, cover: Cover):
        self.cover = cover
        self.adagrad = AdagradAccumulator(cover.d)
        self.sm3_i = sm3_accumulator("sm3-i", cover)
        self.sm3_ii = sm3_accumulator("sm3-ii", cover)
        self.last_gamma: np.ndarray | None = None
        self.last_nu: np.ndarray | None = None
        self.last_nu_prime: np.ndarray | None = None

    def update(self, g2: np.ndarray, step: int, check: bool = False) -> None:
        gamma = self.adagrad.update(g2)
        nu = self.sm3_i.update(g2)
        nu_prime = self.sm3_ii.update(g2)
        if check:
            self._check(gamma, nu, nu_prime, step)
        self.last_gamma, self.last_nu, self.last_nu_prime = gamma, nu, nu_prime

    def _check(self, gamma, nu, nu_prime, step: int) -> None:
        # monotonicity holds exactly: the updates only add nonnegative
        # terms and take exact max/min, so no tolerance is allowed
        for name, new, old in (
            ("adagrad accumulator", gamma, self.last_gamma),
            ("sm3-i effective accumulator", nu, self.last_nu),
            ("sm3-ii effective accumulator", nu_prime, self.last_nu_prime),
        ):
            if old is not None and np.any(new < old):
                i = int(np.flatnonzero(new < old)[0])
                raise InvariantViolationError(f"{name} decreased", step, i)
        _check_sandwich(gamma, nu_prime, nu, step)

    def state_dict(self) -> dict:
        state = {
            "adagrad": self.adagrad.state_dict(),
            "sm3_i": self.sm3_i.state_dict(),
            "sm3_ii": self.sm3_ii.state_dict(),
        }
        for name in ("last_gamma", "last_nu", "last_nu_prime"):
            vec = getattr(self, name)
            state[name] = None if vec is None else vec.tolist()
        return state

    def load_state_dict(self, state: dict) -> None:
        self.adagrad.load_state_dict(state["adagrad"])
        self.sm3_i.load_state_dict(state["sm3_i"])
        self.sm3_ii.load_state_dict(state["sm3_ii"])
        for name in ("last_gamma", "last_nu", "last_nu_prime"):
            vec = state[name]
            setattr(self, name, None if vec is None else np.asarray(vec, dtype=np.float64))


def _check_sandwich(gamma, nu_prime, nu, step: int) -> None:
    """gamma <= nu' <= nu, allowing only float-roundoff slack."""
    for name, lhs, rhs in (
        ("sandwich gamma <= nu'", gamma, nu_prime),
        ("sandwich nu' <= nu", nu_prime, nu),
    ):
        bad = lhs > rhs * (1.0 + SANDWICH_RTOL)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise InvariantViolationError(f"{name} violated", step, i)


@dataclass
class RunResult:
    config: OptimizerConfig
    records: list[RunRecord]
    final_w: ParamTensor
    optimizer: Optimizer
    shadows: ShadowAccumulators | None = None
    gradients: list[np.ndarray] | None = None

    @property
    def losses(self) -> list[float]:
        return [r.loss for r in self.records]

    @property
    def final_loss(self) -> float | None:
        return self.records[-1].loss if self.records else None

    @property
    def final_regret(self) -> float | None:
        return self.records[-1].regret if self.records else None


def execute_run(
    problem: Problem,
    config: OptimizerConfig,
    cover: Cover | None,
    steps: int,
    *,
    shadows: ShadowAccumulators | None = None,
    audit_checks: bool = False,
    collect_gradients: bool = False,
    record_timing: bool = False,
    optimizer: Optimizer | None = None,
    start_w: ParamTensor | None = None,
    start_step: int = 0,
    prior_regret: float = 0.0,
) -> RunResult:
    """Run rounds start_step+1 .. steps of one optimizer on the problem.

    Iterates start at zero unless resuming. All outputs are deterministic
    functions of (problem seed, config, steps) when timing is off.
    """
    if optimizer is None:
        optimizer = build_optimizer(config, problem.dimension, cover)
    w = ParamTensor.zeros(problem.shape) if start_w is None else start_w
    w_star = problem.comparator(steps)
    cumulative_regret = prior_regret
    records: list[RunRecord] = []
    gradients: list[np.ndarray] | None = [] if collect_gradients else None

    for t in range(start_step + 1, steps + 1):
        t0 = time.perf_counter() if record_timing else 0.0
        loss, g = problem.evaluate(w, t)
        multiplier = schedule_multiplier(config.schedule, t)
        lr = config.learning_rate * multiplier
        w, diag = optimizer.step(w, g, lr)
        if shadows is not None:
            shadows.update(np.square(g.data), t, check=audit_checks)
        if gradients is not None:
            gradients.append(g.data.copy())
        if w_star is not None:
            cumulative_regret += loss - problem.loss(w_star, t)
            regret_value = cumulative_regret
        else:
            regret_value = None
        step_ms = (time.perf_counter() - t0) * 1000.0 if record_timing else 0.0
        records.append(
            RunRecord(
                step=t,
                loss=loss,
                regret=regret_value,
                lr_multiplier=multiplier,
                update_norm=diag.update_norm,
                step_ms=step_ms,
            )
        )
    return RunResult(
        config=config,
        records=records,
        final_w=w,
        optimizer=optimizer,
        shadows=shadows,
        gradients=gradients,
    )


@dataclass
class CompareResult:
    labels: list[str]
    runs: list[RunResult] = field(default_factory=list)


def execute_compare(
    problem: Problem,
    configs: list[OptimizerConfig],
    cover: Cover | None,
    steps: int,
    *,
    record_timing: bool = False,
) -> CompareResult:
    """Independent runs of several optimizers on the same seeded problem.

    Problem randomness is a function of (seed, t), so all optimizers face
    identical draws; on problems whose gradients depend on the iterate
    each optimizer still follows its own trajectory.
    """
    labels = unique_labels(configs)
    result = CompareResult(labels=labels)
    for config in configs:
        result.runs.append(
            execute_run(problem, config, cover, steps, record_timing=record_timing)
        )
    return result


def unique_labels(configs: list[OptimizerConfig]) -> list[str]:
    labels: list[str] = []
    seen: dict[str, int] = {}
    for config in configs:
        base = config.display_label
        count = seen.get(base, 0)
        seen[base] = count + 1
        labels.append(base if count == 0 else f"{base}_{count + 1}")
    return labels
