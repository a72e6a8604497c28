"""Dense rank-p tensors over flat float64 storage.

Storage is a flat 64-bit buffer in row-major order; the shape is carried
separately so optimizer state can stay one-dimensional while axis-wise
reductions (max/min over co-dimension-1 slices) remain available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AxisOutOfRangeError,
    DivisionByZeroError,
    LengthMismatchError,
    ShapeMismatchError,
)


@dataclass(frozen=True)
class Shape:
    """Rank-p shape (n_1, ..., n_p) with row-major linearization."""

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(n) for n in dims)
        if len(dims) == 0:
            raise ValueError("shape needs rank >= 1")
        if any(n < 1 for n in dims):
            raise ValueError(f"all dims must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def ravel(self, index: Sequence[int]) -> int:
        """Flat position of a multi-index: sum_a i_a * prod_{b>a} n_b."""
        if len(index) != self.rank:
            raise ValueError(f"index rank {len(index)} != shape rank {self.rank}")
        flat = 0
        for i, n in zip(index, self.dims):
            if not 0 <= i < n:
                raise IndexError(f"index {tuple(index)} out of bounds for {self.dims}")
            flat = flat * n + i
        return flat

    def unravel(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.size:
            raise IndexError(f"flat index {flat} out of bounds for size {self.size}")
        out = []
        for n in reversed(self.dims):
            out.append(flat % n)
            flat //= n
        return tuple(reversed(out))

    def __iter__(self):
        return iter(self.dims)


class ParamTensor:
    """Finite float64 tensor; the value container for iterates and gradients.

    Treated as immutable by all public operations (each returns a new
    tensor). Construction rejects NaN/Inf so downstream arithmetic can
    assume finite inputs.
    """

    __slots__ = ("shape", "data")

    def __init__(self, shape: Shape, data: np.ndarray, *, _trusted: bool = False):
        if not _trusted:
            data = np.asarray(data, dtype=np.float64).reshape(-1).copy()
            if data.size != shape.size:
                raise ShapeMismatchError(
                    f"data length {data.size} != shape size {shape.size}"
                )
            if not np.all(np.isfinite(data)):
                raise ValueError("tensor entries must be finite")
        self.shape = shape
        self.data = data

    @classmethod
    def zeros(cls, shape: Shape) -> "ParamTensor":
        return cls(shape, np.zeros(shape.size), _trusted=True)

    @classmethod
    def from_array(cls, array: np.ndarray | Sequence) -> "ParamTensor":
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        return cls(Shape(arr.shape), arr.reshape(-1))

    def as_ndarray(self) -> np.ndarray:
        """Row-major view of the buffer with the tensor's dims."""
        return self.data.reshape(self.shape.dims)

    def copy(self) -> "ParamTensor":
        return ParamTensor(self.shape, self.data.copy(), _trusted=True)

    def __len__(self) -> int:
        return self.shape.size

    def __repr__(self) -> str:
        return f"ParamTensor(shape={self.shape.dims}, data={self.data!r})"


def div0(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """Elementwise division with the convention 0/0 = 0.

    A zero denominator against a nonzero numerator is a genuine error and
    raises; it never occurs in the optimizers (their accumulators dominate
    the squared gradient) so hitting it means corrupted state.
    """
    zero_den = denominator == 0.0
    if np.any(zero_den & (numerator != 0.0)):
        bad = int(np.flatnonzero(zero_den & (numerator != 0.0))[0])
        raise DivisionByZeroError(
            f"division by zero with nonzero numerator at flat index {bad}"
        )
    out = np.zeros_like(numerator)
    np.divide(numerator, denominator, out=out, where=~zero_den)
    return out


_UNARY = {
    "square": np.square,
    "sqrt": np.sqrt,
}

_BINARY = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


def elementwise(op: str, a: ParamTensor, b: ParamTensor | float | None = None) -> ParamTensor:
    """Apply an elementwise operation; `op` is one of
    add, sub, mul, div, square, sqrt, scale.

    Binary ops require matching shapes; `scale` takes a scalar `b`;
    `div` follows the 0/0 = 0 convention and raises DivisionByZeroError
    for x/0 with x != 0.
    """
    if op in _UNARY:
        if op == "sqrt" and np.any(a.data < 0.0):
            raise ValueError("sqrt of negative entries")
        return ParamTensor(a.shape, _UNARY[op](a.data), _trusted=True)
    if op == "scale":
        if b is None or isinstance(b, ParamTensor):
            raise TypeError("scale needs a scalar second argument")
        return ParamTensor(a.shape, a.data * float(b), _trusted=True)
    if not isinstance(b, ParamTensor):
        raise TypeError(f"{op} needs a ParamTensor second argument")
    if a.shape.dims != b.shape.dims:
        raise ShapeMismatchError(f"shape {a.shape.dims} != shape {b.shape.dims}")
    if op == "div":
        return ParamTensor(a.shape, div0(a.data, b.data), _trusted=True)
    if op in _BINARY:
        return ParamTensor(a.shape, _BINARY[op](a.data, b.data), _trusted=True)
    raise ValueError(f"unknown elementwise op {op!r}")


def slice_reduce(t: ParamTensor, axis: int, op: str) -> np.ndarray:
    """Reduce with max or min over all entries sharing each coordinate of
    `axis` (0-based); returns a vector of length dims[axis].

    out[i] ranges over the co-dimension-1 slice that fixes coordinate i
    along `axis`.
    """
    if not 0 <= axis < t.shape.rank:
        raise AxisOutOfRangeError(f"axis {axis} out of range for rank {t.shape.rank}")
    if op not in ("max", "min"):
        raise ValueError(f"slice_reduce op must be max or min, got {op!r}")
    grid = t.as_ndarray()
    others = tuple(a for a in range(t.shape.rank) if a != axis)
    if not others:
        return grid.copy()
    fn = np.max if op == "max" else np.min
    return fn(grid, axis=others)


def broadcast_min(vectors: Sequence[np.ndarray], shape: Shape) -> ParamTensor:
    """Tensor whose entry (i_1,...,i_p) is min_a vectors[a][i_a].

    One vector per axis, vector a of length dims[a]. This realizes the
    per-parameter minimum over axis-slice accumulators.
    """
    if len(vectors) != shape.rank:
        raise LengthMismatchError(
            f"need {shape.rank} vectors (one per axis), got {len(vectors)}"
        )
    out = np.full(shape.dims, np.inf)
    for a, vec in enumerate(vectors):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (shape.dims[a],):
            raise LengthMismatchError(
                f"vector for axis {a} has length {vec.size}, expected {shape.dims[a]}"
            )
        view = [1] * shape.rank
        view[a] = shape.dims[a]
        np.minimum(out, vec.reshape(view), out=out)
    return ParamTensor(shape, out.reshape(-1), _trusted=True)
