"""Regret accounting, the regret-bound evaluator, accumulator dumps, and
optimizer-state memory accounting.

CSV schemas (headers mandatory, UTF-8, LF line endings):

    run records:       step,loss,regret,lr_multiplier,update_norm,step_ms
    accumulator dumps: param_index,adagrad,sm3_ii,sm3_i
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cover import AxisCover, Cover, CoverSpec
from .errors import InconsistentDimensionsError, LengthMismatchError
from .tensor import ParamTensor, Shape


def regret(losses_alg: Sequence[float], losses_star: Sequence[float]) -> np.ndarray:
    """Cumulative regret: prefix sums of per-round loss differences."""
    alg = np.asarray(losses_alg, dtype=np.float64)
    star = np.asarray(losses_star, dtype=np.float64)
    if alg.shape != star.shape:
        raise LengthMismatchError(
            f"loss sequences have lengths {alg.size} and {star.size}"
        )
    return np.cumsum(alg - star)


def regret_bound_rhs(
    D: float, gradient_stream: Iterable[np.ndarray | ParamTensor], cover: Cover
) -> float:
    """Worst-case regret bound of the cover-compressed method:

        2 * D * sum_i sqrt( min_{r : S_r covers i} sum_t max_{j in S_r} g_t(j)^2 )

    Evaluated directly from the realized gradient stream; under the
    singleton cover this is exactly Adagrad's bound 2D sum_i sqrt(sum_t g_t(i)^2).
    """
    if not D > 0:
        raise ValueError("D must be > 0")
    generic = cover.expand() if isinstance(cover, AxisCover) else cover
    per_set = np.zeros(generic.k)
    for g in gradient_stream:
        g2 = np.square(g.data if isinstance(g, ParamTensor) else np.asarray(g)).reshape(-1)
        for r, idx in enumerate(generic.index_arrays):
            per_set[r] += g2[idx].max()
    total = 0.0
    for i in range(generic.d):
        total += math.sqrt(per_set[generic.memberships[i]].min())
    return 2.0 * D * total


@dataclass(frozen=True)
class DumpRow:
    param_index: int
    adagrad: float
    sm3_ii: float
    sm3_i: float


def accumulator_dump(
    gamma: np.ndarray,
    nu_sm3_ii: np.ndarray,
    nu_sm3_i: np.ndarray,
    top_n: int,
) -> list[DumpRow]:
    """Align the three effective accumulators by parameter index and keep
    the top_n rows by Adagrad magnitude (descending, ties by index).

    All vectors must come from the same gradient stream for the sandwich
    relation adagrad <= sm3_ii <= sm3_i to hold rowwise.
    """
    gamma = np.asarray(gamma, dtype=np.float64).reshape(-1)
    nu_ii = np.asarray(nu_sm3_ii, dtype=np.float64).reshape(-1)
    nu_i = np.asarray(nu_sm3_i, dtype=np.float64).reshape(-1)
    if not gamma.size == nu_ii.size == nu_i.size:
        raise InconsistentDimensionsError(
            f"accumulator lengths differ: {gamma.size}, {nu_ii.size}, {nu_i.size}"
        )
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    order = np.argsort(-gamma, kind="stable")[: min(top_n, gamma.size)]
    return [
        DumpRow(int(i), float(gamma[i]), float(nu_ii[i]), float(nu_i[i]))
        for i in order
    ]


@dataclass(frozen=True)
class TensorAccount:
    dims: tuple[int, ...]
    param_slots: int
    accumulator_slots: int
    momentum_slots: int


@dataclass(frozen=True)
class MemoryAccount:
    """Optimizer-state size in 64-bit scalar slots (multiply by 8 for a
    bytes view); slot counts are exact and platform independent."""

    algorithm: str
    tensors: tuple[TensorAccount, ...]

    @property
    def param_slots(self) -> int:
        return sum(t.param_slots for t in self.tensors)

    @property
    def accumulator_slots(self) -> int:
        return sum(t.accumulator_slots for t in self.tensors)

    @property
    def momentum_slots(self) -> int:
        return sum(t.momentum_slots for t in self.tensors)

    @property
    def state_slots(self) -> int:
        return self.accumulator_slots + self.momentum_slots

    @property
    def state_bytes(self) -> int:
        return 8 * self.state_slots


def memory_account(
    model_shapes: Sequence[Shape],
    algorithm: str,
    cover_spec: CoverSpec | None = None,
    momentum: float = 0.0,
) -> MemoryAccount:
    """Exact state-slot counts per tensor.

    Accumulators: d for adagrad, 2d for adam, k for sm3-i, 2k for sm3-ii
    (double buffer), where k is the cover's set count for that tensor.
    Heavy-ball momentum adds d slots for every algorithm except adam,
    whose first moment is already inside the 2d.
    """
    tensors = []
    for shape in model_shapes:
        d = shape.size
        if algorithm == "adagrad":
            acc = d
        elif algorithm == "adam":
            acc = 2 * d
        elif algorithm in ("sm3-i", "sm3-ii"):
            if cover_spec is None:
                raise ValueError(f"{algorithm} accounting needs a cover spec")
            k = cover_spec.slot_count(shape)
            acc = k if algorithm == "sm3-i" else 2 * k
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        mom = d if (momentum > 0 and algorithm != "adam") else 0
        tensors.append(
            TensorAccount(
                dims=shape.dims,
                param_slots=d,
                accumulator_slots=acc,
                momentum_slots=mom,
            )
        )
    return MemoryAccount(algorithm=algorithm, tensors=tuple(tensors))


@dataclass
class RunRecord:
    """One optimization round as written to the run CSV."""

    step: int
    loss: float
    regret: float | None
    lr_multiplier: float
    update_norm: float
    step_ms: float


def _fmt(x: float) -> str:
    return repr(float(x))


def write_run_csv(path: str | Path, records: Sequence[RunRecord]) -> None:
    lines = ["step,loss,regret,lr_multiplier,update_norm,step_ms"]
    for r in records:
        regret_field = "" if r.regret is None else _fmt(r.regret)
        lines.append(
            f"{r.step},{_fmt(r.loss)},{regret_field},"
            f"{_fmt(r.lr_multiplier)},{_fmt(r.update_norm)},{_fmt(r.step_ms)}"
        )
    _write_lines(path, lines)


def write_compare_csv(
    path: str | Path, labels: Sequence[str], losses: Sequence[Sequence[float]]
) -> None:
    """Side-by-side per-step losses: a shared step column plus one loss
    column per optimizer label."""
    if len(labels) != len(losses):
        raise LengthMismatchError("one loss column per label required")
    steps = len(losses[0])
    if any(len(col) != steps for col in losses):
        raise LengthMismatchError("loss columns must have equal lengths")
    header = "step," + ",".join(f"loss_{label}" for label in labels)
    lines = [header]
    for t in range(steps):
        lines.append(f"{t + 1}," + ",".join(_fmt(col[t]) for col in losses))
    _write_lines(path, lines)


def write_dump_csv(path: str | Path, rows: Sequence[DumpRow]) -> None:
    lines = ["param_index,adagrad,sm3_ii,sm3_i"]
    for row in rows:
        lines.append(
            f"{row.param_index},{_fmt(row.adagrad)},{_fmt(row.sm3_ii)},{_fmt(row.sm3_i)}"
        )
    _write_lines(path, lines)


def _write_lines(path: str | Path, lines: list[str]) -> None:
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
