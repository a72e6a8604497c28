"""Online convex optimization problems with deterministic gradient streams.

Randomness is derived per step from (seed, stream tag, t) through numpy's
SeedSequence feeding a PCG64 generator, so every loss/gradient at round t
is a pure function of the seed and t: streams can be replayed, accessed
out of order, and are bit-identical across runs.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .tensor import ParamTensor, Shape

_STREAM = 0x5EED
_SETUP = 0xBA5E


def step_rng(seed: int, t: int, tag: int = _STREAM) -> np.random.Generator:
    """Independent generator for round t of a seeded stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, tag, t))))


class Problem(ABC):
    """A sequence of losses over a fixed parameter shape.

    loss/gradient take the current iterate and the 1-based round index.
    comparator(horizon) returns the reference point w* used for regret,
    or None when no closed form exists. diameter() bounds the
    L-infinity distance between iterates and w* when known.
    """

    shape: Shape
    seed: int

    @abstractmethod
    def loss(self, w: ParamTensor, t: int) -> float:
        ...

    @abstractmethod
    def gradient(self, w: ParamTensor, t: int) -> ParamTensor:
        ...

    def evaluate(self, w: ParamTensor, t: int) -> tuple[float, ParamTensor]:
        """Loss and gradient together; overridden where the two share the
        per-step random draw."""
        return self.loss(w, t), self.gradient(w, t)

    def comparator(self, horizon: int) -> ParamTensor | None:
        return None

    def diameter(self) -> float | None:
        return None

    def spec_dict(self) -> dict:
        """Serializable description for run summaries."""
        return {"kind": type(self).__name__, "seed": self.seed}

    @property
    def dimension(self) -> int:
        return self.shape.size


class QuadraticProblem(Problem):
    """Tracking loss 0.5 * ||w - c_t||^2 with c_t = center + noise * xi_t.

    The population minimizer is the center itself, which doubles as the
    comparator. gradient = w - c_t.
    """

    def __init__(
        self,
        dim: int,
        seed: int,
        center: np.ndarray | None = None,
        noise: float = 1.0,
    ):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if noise < 0:
            raise ValueError("noise must be >= 0")
        self.shape = Shape((dim,))
        self.seed = seed
        self.noise = float(noise)
        if center is None:
            center = step_rng(seed, 0, _SETUP).normal(0.0, 1.0, size=dim)
        self.center = np.asarray(center, dtype=np.float64).reshape(-1)
        if self.center.size != dim:
            raise ValueError(f"center has length {self.center.size}, expected {dim}")

    def _target(self, t: int) -> np.ndarray:
        if self.noise == 0.0:
            return self.center
        xi = step_rng(self.seed, t).normal(0.0, 1.0, size=self.dimension)
        return self.center + self.noise * xi

    def loss(self, w: ParamTensor, t: int) -> float:
        diff = w.data - self._target(t)
        return 0.5 * float(diff @ diff)

    def gradient(self, w: ParamTensor, t: int) -> ParamTensor:
        return ParamTensor(self.shape, w.data - self._target(t), _trusted=True)

    def evaluate(self, w: ParamTensor, t: int) -> tuple[float, ParamTensor]:
        diff = w.data - self._target(t)
        return 0.5 * float(diff @ diff), ParamTensor(self.shape, diff, _trusted=True)

    def comparator(self, horizon: int) -> ParamTensor:
        return ParamTensor.from_array(self.center)

    def spec_dict(self) -> dict:
        return {
            "kind": "quadratic",
            "dim": self.dimension,
            "seed": self.seed,
            "noise": self.noise,
        }


@dataclass(frozen=True)
class ActivationPatternSpec:
    """Row/column magnitude structure for synthetic matrix gradients.

    Gradients are rank-1 outer products, so every entry in an active row
    scales with that row's magnitude (and likewise for columns); sparsity
    is the per-step probability that a given row or column is active.
    """

    row_scales: tuple[float, ...]
    col_scales: tuple[float, ...]
    sparsity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "row_scales", tuple(float(s) for s in self.row_scales))
        object.__setattr__(self, "col_scales", tuple(float(s) for s in self.col_scales))
        if any(s <= 0 for s in self.row_scales) or any(s <= 0 for s in self.col_scales):
            raise ValueError("pattern scales must be > 0")
        if not 0.0 < self.sparsity <= 1.0:
            raise ValueError("sparsity must be in (0, 1]")

    @classmethod
    def uniform(cls, m: int, n: int, sparsity: float = 1.0) -> "ActivationPatternSpec":
        return cls((1.0,) * m, (1.0,) * n, sparsity)


class SparseLogregProblem(Problem):
    """Binary logistic regression over an m x n weight matrix whose
    per-step feature matrix is a rank-1 outer product u_t v_t^T.

    Row i of the gradient scales with u_t(i) and column j with v_t(j),
    giving gradients the row/column activation structure that slice
    covers exploit. Labels follow a fixed planted logistic model, so the
    loss has a finite minimizer and loss(0) = ln 2 per example.
    """

    def __init__(self, shape: Shape, pattern: ActivationPatternSpec, seed: int):
        if shape.rank != 2:
            raise ValueError("logistic problem needs a rank-2 shape")
        m, n = shape.dims
        if len(pattern.row_scales) != m or len(pattern.col_scales) != n:
            raise ValueError("pattern scales must match the weight shape")
        self.shape = shape
        self.seed = seed
        self.pattern = pattern
        rng = step_rng(seed, 0, _SETUP)
        # planted model, scaled so typical |logit| is near 1.5: learnable
        # but with enough label noise to keep a finite minimizer
        self.target = 6.0 * rng.normal(size=(m, n)) / np.sqrt(m * n)
        self._rows = np.asarray(pattern.row_scales)
        self._cols = np.asarray(pattern.col_scales)

    def _example(self, t: int) -> tuple[np.ndarray, np.ndarray, float]:
        m, n = self.shape.dims
        rng = step_rng(self.seed, t)
        sp = self.pattern.sparsity
        row_mask = rng.random(m) < sp if sp < 1.0 else np.ones(m, dtype=bool)
        col_mask = rng.random(n) < sp if sp < 1.0 else np.ones(n, dtype=bool)
        u = row_mask * self._rows * rng.uniform(0.5, 1.5, size=m)
        v = col_mask * self._cols * rng.uniform(0.5, 1.5, size=n)
        z_star = float(u @ self.target @ v)
        label = 1.0 if rng.random() < _sigmoid(z_star) else -1.0
        return u, v, label

    def loss(self, w: ParamTensor, t: int) -> float:
        u, v, y = self._example(t)
        z = float(u @ w.as_ndarray() @ v)
        return float(np.logaddexp(0.0, -y * z))

    def gradient(self, w: ParamTensor, t: int) -> ParamTensor:
        u, v, y = self._example(t)
        z = float(u @ w.as_ndarray() @ v)
        coeff = -y * _sigmoid(-y * z)
        return ParamTensor(self.shape, (coeff * np.outer(u, v)).reshape(-1), _trusted=True)

    def evaluate(self, w: ParamTensor, t: int) -> tuple[float, ParamTensor]:
        u, v, y = self._example(t)
        z = float(u @ w.as_ndarray() @ v)
        loss = float(np.logaddexp(0.0, -y * z))
        coeff = -y * _sigmoid(-y * z)
        grad = ParamTensor(self.shape, (coeff * np.outer(u, v)).reshape(-1), _trusted=True)
        return loss, grad

    def spec_dict(self) -> dict:
        return {
            "kind": "sparse_logreg",
            "shape": list(self.shape.dims),
            "seed": self.seed,
            "sparsity": self.pattern.sparsity,
        }


class LinearAdversaryProblem(Problem):
    """Linear losses <g_t, w> with g_t uniform in [-1, 1]^d.

    Gradients do not depend on the iterate, so every optimizer consuming
    this problem sees the identical stream. The best fixed point in the
    L-infinity ball of the given radius has the closed form
    -radius * sign(sum_t g_t); the comparator diameter is 2 * radius.
    """

    def __init__(self, dim: int, radius: float, seed: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if not radius > 0:
            raise ValueError("radius must be > 0")
        self.shape = Shape((dim,))
        self.seed = seed
        self.radius = float(radius)
        self._comparator_cache: dict[int, np.ndarray] = {}

    def stream(self, t: int) -> np.ndarray:
        return step_rng(self.seed, t).uniform(-1.0, 1.0, size=self.dimension)

    def loss(self, w: ParamTensor, t: int) -> float:
        return float(self.stream(t) @ w.data)

    def gradient(self, w: ParamTensor, t: int) -> ParamTensor:
        return ParamTensor(self.shape, self.stream(t), _trusted=True)

    def evaluate(self, w: ParamTensor, t: int) -> tuple[float, ParamTensor]:
        g = self.stream(t)
        return float(g @ w.data), ParamTensor(self.shape, g, _trusted=True)

    def comparator(self, horizon: int) -> ParamTensor:
        if horizon not in self._comparator_cache:
            total = np.zeros(self.dimension)
            for t in range(1, horizon + 1):
                total += self.stream(t)
            self._comparator_cache[horizon] = linf_comparator(total, self.radius)
        return ParamTensor.from_array(self._comparator_cache[horizon])

    def diameter(self) -> float:
        return 2.0 * self.radius

    def spec_dict(self) -> dict:
        return {
            "kind": "linear_adversary",
            "dim": self.dimension,
            "seed": self.seed,
            "radius": self.radius,
        }


def linf_comparator(total_gradient: np.ndarray, radius: float) -> np.ndarray:
    """argmin over the L-infinity ball of <total_gradient, w>:
    -radius at positive coordinates, +radius at negative ones, 0 at zeros
    (any value is optimal there)."""
    return -radius * np.sign(total_gradient)


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


def quadratic_problem(
    dim: int, seed: int, center: np.ndarray | None = None, noise: float = 1.0
) -> QuadraticProblem:
    return QuadraticProblem(dim, seed, center=center, noise=noise)


def sparse_logreg_problem(
    shape: Shape, pattern: ActivationPatternSpec, seed: int
) -> SparseLogregProblem:
    return SparseLogregProblem(shape, pattern, seed)


def linear_adversary_problem(dim: int, radius: float, seed: int) -> LinearAdversaryProblem:
    return LinearAdversaryProblem(dim, radius, seed)


def estimate_comparator(problem: Problem, steps: int = 100_000, lr: float = 0.1) -> ParamTensor:
    """Empirical comparator for problems without a closed form: the
    average iterate of a long reference Adagrad run on the problem."""
    from .optim import Adagrad, OptimizerConfig

    opt = Adagrad(OptimizerConfig(algorithm="adagrad", learning_rate=lr), problem.dimension)
    w = ParamTensor.zeros(problem.shape)
    total = np.zeros(problem.dimension)
    for t in range(1, steps + 1):
        g = problem.gradient(w, t)
        w, _ = opt.step(w, g, lr)
        total += w.data
    return ParamTensor(problem.shape, total / steps)
