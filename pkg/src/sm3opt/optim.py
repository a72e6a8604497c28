"""Adaptive optimizers with cover-compressed second-moment state.

SM3-I keeps one running accumulator per cover set:

    mu_t(r)  = mu_{t-1}(r) + max_{j in S_r} g_t(j)^2
    nu_t(i)  = min_{r : S_r contains i} mu_t(r)
    w_{t+1}(i) = w_t(i) - lr * g_t(i) / sqrt(nu_t(i))      (0/0 = 0)

SM3-II refines the estimate by adding the fresh squared gradient before
re-maximizing, which keeps nu' between the exact Adagrad sum and SM3-I's
nu (tighter accumulators mean larger effective learning rates):

    nu'_t(i) = min_{r : S_r contains i} mu'_{t-1}(r) + g_t(i)^2
    w_{t+1}(i) = w_t(i) - lr * g_t(i) / sqrt(nu'_t(i))     (0/0 = 0)
    mu'_t(r) = max_{j in S_r} nu'_t(j)

Under the singleton cover both reduce exactly to Adagrad. Accumulator
state is k scalars for SM3-I and 2k for SM3-II (double buffer), versus d
for Adagrad and 2d for Adam.

Both SM3 variants run in two interchangeable execution paths: a generic
path over explicit index sets, and a structured path over axis-slice
covers that uses whole-tensor max/min reductions. The two agree to the
last bit; tests cross-check them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .cover import AxisCover, Cover, GenericCover
from .errors import ConfigError, NonFiniteGradientError, ShapeMismatchError
from .schedules import ScheduleSpec, schedule_multiplier
from .tensor import ParamTensor, div0

ALGORITHMS = ("sm3-i", "sm3-ii", "adagrad", "adam")

COVERED_ALGORITHMS = ("sm3-i", "sm3-ii")


@dataclass(frozen=True)
class OptimizerConfig:
    """Validated optimizer settings shared by all algorithms.

    momentum is the heavy-ball coefficient for sm3-*/adagrad (applied to
    the preconditioned update; 0 disables) and doubles as Adam's beta1.
    epsilon and beta2 are Adam-only. projection_radius, when set, clamps
    iterates into the centered L-infinity ball after each step.
    """

    algorithm: str
    learning_rate: float
    momentum: float = 0.0
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    projection_radius: float | None = None
    epsilon: float = 1e-8
    beta2: float = 0.999
    label: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        if self.projection_radius is not None and not self.projection_radius > 0:
            raise ConfigError("projection_radius must be > 0")
        if self.algorithm == "adam":
            if not self.epsilon > 0:
                raise ConfigError("epsilon must be > 0")
            if not 0.0 < self.beta2 < 1.0:
                raise ConfigError("beta2 must be in (0, 1)")

    @property
    def display_label(self) -> str:
        return self.label if self.label is not None else self.algorithm


@dataclass
class StepDiagnostics:
    """Per-step observability: the effective accumulator vector used for
    the denominator, the resulting per-parameter rates, and the L2 norm of
    the applied iterate change."""

    nu: np.ndarray
    effective_lr: np.ndarray
    update_norm: float


class Accumulator(Protocol):
    """Second-moment statistic with a per-step effective vector."""

    d: int

    def update(self, g2: np.ndarray) -> np.ndarray:
        """Consume one squared gradient, return the effective accumulator
        (length d) for this step's denominator."""
        ...

    def state_dict(self) -> dict:
        ...

    def load_state_dict(self, state: dict) -> None:
        ...


class AdagradAccumulator:
    """Exact per-coordinate sums of squared gradients."""

    def __init__(self, d: int):
        self.d = d
        self.gamma = np.zeros(d)

    def update(self, g2: np.ndarray) -> np.ndarray:
        self.gamma += g2
        return self.gamma.copy()

    def state_dict(self) -> dict:
        return {"gamma": self.gamma.tolist()}

    def load_state_dict(self, state: dict) -> None:
        self.gamma = _restore_vector(state["gamma"], self.d, "gamma")


class SM3IAccumulator:
    """Generic-cover SM3-I statistic: k running sums of per-set maxima."""

    def __init__(self, cover: GenericCover):
        self.cover = cover
        self.d = cover.d
        self.mu = np.zeros(cover.k)

    def update(self, g2: np.ndarray) -> np.ndarray:
        for r, idx in enumerate(self.cover.index_arrays):
            self.mu[r] += g2[idx].max()
        return self.nu()

    def nu(self) -> np.ndarray:
        out = np.full(self.d, np.inf)
        for r, idx in enumerate(self.cover.index_arrays):
            np.minimum.at(out, idx, self.mu[r])
        return out

    def state_dict(self) -> dict:
        return {"mu": self.mu.tolist()}

    def load_state_dict(self, state: dict) -> None:
        self.mu = _restore_vector(state["mu"], self.cover.k, "mu")


class SM3IAxisAccumulator:
    """Axis-slice SM3-I statistic: one vector per active axis, updated with
    whole-tensor reductions. Matches the generic path bit for bit."""

    def __init__(self, cover: AxisCover):
        self.cover = cover
        self.d = cover.d
        self.mus = [np.zeros(cover.shape.dims[a]) for a in cover.active_axes]

    def update(self, g2: np.ndarray) -> np.ndarray:
        grid = g2.reshape(self.cover.shape.dims)
        rank = self.cover.shape.rank
        for mu_a, a in zip(self.mus, self.cover.active_axes):
            others = tuple(ax for ax in range(rank) if ax != a)
            mu_a += grid.max(axis=others) if others else grid
        return self.nu()

    def nu(self) -> np.ndarray:
        out = _axis_min(self.mus, self.cover)
        return out.reshape(-1)

    def state_dict(self) -> dict:
        return {"mu_axes": [m.tolist() for m in self.mus]}

    def load_state_dict(self, state: dict) -> None:
        self.mus = _restore_axis_vectors(state["mu_axes"], self.cover, "mu_axes")


class SM3IIAccumulator:
    """Generic-cover SM3-II statistic with a k-vector double buffer.

    The effective vector nu' reads only the previous round's buffer, so
    the result is independent of the iteration order over parameters;
    `update(..., order=...)` runs an explicitly ordered scalar loop to
    make that property checkable.
    """

    def __init__(self, cover: GenericCover):
        self.cover = cover
        self.d = cover.d
        self.mu_prime = np.zeros(cover.k)
        self._scratch = np.zeros(cover.k)

    def update(self, g2: np.ndarray, order: np.ndarray | None = None) -> np.ndarray:
        if order is None:
            nu_p = np.full(self.d, np.inf)
            for r, idx in enumerate(self.cover.index_arrays):
                np.minimum.at(nu_p, idx, self.mu_prime[r])
            nu_p += g2
            for r, idx in enumerate(self.cover.index_arrays):
                self._scratch[r] = nu_p[idx].max()
        else:
            nu_p = np.empty(self.d)
            self._scratch[:] = 0.0
            for i in order:
                val = self.mu_prime[self.cover.memberships[i]].min() + g2[i]
                nu_p[i] = val
                for r in self.cover.memberships[i]:
                    if val > self._scratch[r]:
                        self._scratch[r] = val
        self.mu_prime, self._scratch = self._scratch, self.mu_prime
        return nu_p

    def state_dict(self) -> dict:
        return {"mu_prime": self.mu_prime.tolist()}

    def load_state_dict(self, state: dict) -> None:
        self.mu_prime = _restore_vector(state["mu_prime"], self.cover.k, "mu_prime")
        self._scratch = np.zeros(self.cover.k)


class SM3IIAxisAccumulator:
    """Axis-slice SM3-II statistic; double buffer of per-axis vectors."""

    def __init__(self, cover: AxisCover):
        self.cover = cover
        self.d = cover.d
        self.mus = [np.zeros(cover.shape.dims[a]) for a in cover.active_axes]

    def update(self, g2: np.ndarray) -> np.ndarray:
        nu_p = _axis_min(self.mus, self.cover)
        nu_p += g2.reshape(self.cover.shape.dims)
        rank = self.cover.shape.rank
        new_mus = []
        for a in self.cover.active_axes:
            others = tuple(ax for ax in range(rank) if ax != a)
            new_mus.append(nu_p.max(axis=others) if others else nu_p.copy())
        self.mus = new_mus
        return nu_p.reshape(-1)

    def state_dict(self) -> dict:
        return {"mu_prime_axes": [m.tolist() for m in self.mus]}

    def load_state_dict(self, state: dict) -> None:
        self.mus = _restore_axis_vectors(state["mu_prime_axes"], self.cover, "mu_prime_axes")


def _axis_min(mus: list[np.ndarray], cover: AxisCover) -> np.ndarray:
    """Grid whose entries are the min of the covering per-axis values."""
    dims = cover.shape.dims
    out = np.full(dims, np.inf)
    for mu_a, a in zip(mus, cover.active_axes):
        view = [1] * len(dims)
        view[a] = dims[a]
        np.minimum(out, mu_a.reshape(view), out=out)
    return out


def _restore_vector(values, expected_len: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (expected_len,):
        raise ValueError(f"checkpoint field {name!r} has length {arr.size}, expected {expected_len}")
    return arr


def _restore_axis_vectors(values, cover: AxisCover, name: str) -> list[np.ndarray]:
    expected = [cover.shape.dims[a] for a in cover.active_axes]
    if len(values) != len(expected):
        raise ValueError(f"checkpoint field {name!r} has {len(values)} vectors, expected {len(expected)}")
    return [_restore_vector(v, n, name) for v, n in zip(values, expected)]


def sm3_accumulator(algorithm: str, cover: Cover):
    """Accumulator for an SM3 variant, picking the structured path for
    axis covers and the generic path otherwise."""
    if algorithm == "sm3-i":
        return SM3IAxisAccumulator(cover) if isinstance(cover, AxisCover) else SM3IAccumulator(cover)
    if algorithm == "sm3-ii":
        return SM3IIAxisAccumulator(cover) if isinstance(cover, AxisCover) else SM3IIAccumulator(cover)
    raise ValueError(f"not an SM3 algorithm: {algorithm!r}")


def apply_momentum(
    buffer: np.ndarray, update: np.ndarray, beta1: float
) -> tuple[np.ndarray, np.ndarray]:
    """Heavy-ball smoothing of the preconditioned update:
    buffer' = beta1 * buffer + update, applied update = buffer'."""
    new_buffer = beta1 * buffer + update
    return new_buffer, new_buffer


def project_linf(w: ParamTensor, radius: float) -> ParamTensor:
    """Clamp every coordinate into [-radius, radius]."""
    if not radius > 0:
        raise ValueError("radius must be > 0")
    return ParamTensor(w.shape, np.clip(w.data, -radius, radius), _trusted=True)


class _OptimizerBase:
    """Step plumbing shared by all algorithms: input guards, scheduled
    learning rate, momentum, projection, diagnostics, checkpointing."""

    def __init__(self, config: OptimizerConfig, d: int):
        self.config = config
        self.d = d
        self.step_count = 0
        self.momentum_buffer = np.zeros(d) if self._uses_heavy_ball() else None

    def _uses_heavy_ball(self) -> bool:
        return self.config.momentum > 0 and self.config.algorithm != "adam"

    def step(
        self, w: ParamTensor, g: ParamTensor, lr: float | None = None
    ) -> tuple[ParamTensor, StepDiagnostics]:
        """Advance one round; returns the new iterate and diagnostics.

        When lr is omitted it is computed as base learning rate times the
        schedule multiplier at the new step count.
        """
        if w.shape.dims != g.shape.dims:
            raise ShapeMismatchError(
                f"iterate shape {w.shape.dims} != gradient shape {g.shape.dims}"
            )
        if w.shape.size != self.d:
            raise ShapeMismatchError(
                f"optimizer built for d={self.d}, got tensors of size {w.shape.size}"
            )
        if not np.all(np.isfinite(g.data)):
            raise NonFiniteGradientError("gradient contains NaN or Inf")
        self.step_count += 1
        if lr is None:
            lr = self.config.learning_rate * schedule_multiplier(
                self.config.schedule, self.step_count
            )
        nu, update = self._preconditioned_update(g.data, lr)
        if self.momentum_buffer is not None:
            self.momentum_buffer, update = apply_momentum(
                self.momentum_buffer, update, self.config.momentum
            )
        new_data = w.data - update
        if self.config.projection_radius is not None:
            np.clip(
                new_data,
                -self.config.projection_radius,
                self.config.projection_radius,
                out=new_data,
            )
        diag = StepDiagnostics(
            nu=nu,
            effective_lr=self._effective_lr(nu, lr),
            update_norm=float(np.linalg.norm(new_data - w.data)),
        )
        return ParamTensor(w.shape, new_data, _trusted=True), diag

    def _preconditioned_update(self, g: np.ndarray, lr: float) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _effective_lr(self, nu: np.ndarray, lr: float) -> np.ndarray:
        out = np.zeros_like(nu)
        positive = nu > 0
        out[positive] = lr / np.sqrt(nu[positive])
        return out

    # checkpointing

    def state_dict(self) -> dict:
        state = {
            "algorithm": self.config.algorithm,
            "step_count": self.step_count,
            "accumulators": self._accumulator_state(),
        }
        if self.momentum_buffer is not None:
            state["momentum_buffer"] = self.momentum_buffer.tolist()
        return state

    def load_state_dict(self, state: dict) -> None:
        if state.get("algorithm") != self.config.algorithm:
            raise ValueError(
                f"checkpoint is for {state.get('algorithm')!r}, "
                f"optimizer is {self.config.algorithm!r}"
            )
        self.step_count = int(state["step_count"])
        self._load_accumulator_state(state["accumulators"])
        if self.momentum_buffer is not None:
            if "momentum_buffer" not in state:
                raise ValueError("checkpoint lacks momentum_buffer")
            self.momentum_buffer = _restore_vector(
                state["momentum_buffer"], self.d, "momentum_buffer"
            )

    def _accumulator_state(self) -> dict:
        raise NotImplementedError

    def _load_accumulator_state(self, state: dict) -> None:
        raise NotImplementedError


class _CoveredOptimizer(_OptimizerBase):
    """SM3-I / SM3-II / Adagrad: divide by the square root of an
    accumulator statistic, with the 0/0 = 0 convention."""

    def __init__(self, config: OptimizerConfig, accumulator):
        super().__init__(config, accumulator.d)
        self.accumulator = accumulator

    def _preconditioned_update(self, g, lr):
        nu = self.accumulator.update(np.square(g))
        update = div0(lr * g, np.sqrt(nu))
        return nu, update

    def _accumulator_state(self) -> dict:
        return self.accumulator.state_dict()

    def _load_accumulator_state(self, state: dict) -> None:
        self.accumulator.load_state_dict(state)


class SM3I(_CoveredOptimizer):
    def __init__(self, config: OptimizerConfig, cover: Cover):
        if config.algorithm != "sm3-i":
            raise ConfigError(f"SM3I requires algorithm 'sm3-i', got {config.algorithm!r}")
        super().__init__(config, sm3_accumulator("sm3-i", cover))
        self.cover = cover


class SM3II(_CoveredOptimizer):
    def __init__(self, config: OptimizerConfig, cover: Cover):
        if config.algorithm != "sm3-ii":
            raise ConfigError(f"SM3II requires algorithm 'sm3-ii', got {config.algorithm!r}")
        super().__init__(config, sm3_accumulator("sm3-ii", cover))
        self.cover = cover


class Adagrad(_CoveredOptimizer):
    def __init__(self, config: OptimizerConfig, d: int):
        if config.algorithm != "adagrad":
            raise ConfigError(f"Adagrad requires algorithm 'adagrad', got {config.algorithm!r}")
        super().__init__(config, AdagradAccumulator(d))


class Adam(_OptimizerBase):
    """Standard Adam baseline with bias correction:

        m_t = beta1 m_{t-1} + (1 - beta1) g_t
        v_t = beta2 v_{t-1} + (1 - beta2) g_t^2
        w_{t+1} = w_t - lr * (m_t / (1 - beta1^t)) / (sqrt(v_t / (1 - beta2^t)) + eps)

    config.momentum plays the role of beta1; no separate heavy-ball
    buffer is kept.
    """

    def __init__(self, config: OptimizerConfig, d: int):
        if config.algorithm != "adam":
            raise ConfigError(f"Adam requires algorithm 'adam', got {config.algorithm!r}")
        super().__init__(config, d)
        self.m = np.zeros(d)
        self.v = np.zeros(d)

    def _uses_heavy_ball(self) -> bool:
        return False

    def _preconditioned_update(self, g, lr):
        beta1 = self.config.momentum
        beta2 = self.config.beta2
        t = self.step_count
        self.m = beta1 * self.m + (1.0 - beta1) * g
        self.v = beta2 * self.v + (1.0 - beta2) * np.square(g)
        m_hat = self.m / (1.0 - beta1**t)
        v_hat = self.v / (1.0 - beta2**t)
        update = lr * m_hat / (np.sqrt(v_hat) + self.config.epsilon)
        return v_hat, update

    def _effective_lr(self, nu: np.ndarray, lr: float) -> np.ndarray:
        return lr / (np.sqrt(nu) + self.config.epsilon)

    def _accumulator_state(self) -> dict:
        return {"m": self.m.tolist(), "v": self.v.tolist()}

    def _load_accumulator_state(self, state: dict) -> None:
        self.m = _restore_vector(state["m"], self.d, "m")
        self.v = _restore_vector(state["v"], self.d, "v")


Optimizer = _OptimizerBase


def build_optimizer(config: OptimizerConfig, d: int, cover: Cover | None = None) -> Optimizer:
    """Construct the optimizer named by the config.

    SM3 variants require a cover whose universe matches d; the baselines
    ignore the cover.
    """
    if config.algorithm in COVERED_ALGORITHMS:
        if cover is None:
            raise ConfigError(f"{config.algorithm} requires a cover")
        if cover.d != d:
            raise ConfigError(f"cover is over d={cover.d}, model has d={d}")
        return SM3I(config, cover) if config.algorithm == "sm3-i" else SM3II(config, cover)
    if config.algorithm == "adagrad":
        return Adagrad(config, d)
    return Adam(config, d)
