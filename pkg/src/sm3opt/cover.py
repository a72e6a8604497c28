"""Covers of the parameter index set.

A cover is a collection of k nonempty index sets over [0, d) whose union
is the whole index range; sets may overlap and may repeat. One accumulator
scalar is kept per set, so the cover determines optimizer-state memory.

Two representations:

* GenericCover: explicit index sets, arbitrary structure.
* AxisCover: the structured co-dimension-1 slice cover of a tensor
  (rows and columns of a matrix, and their higher-rank analogues),
  storable in sum(n_a) slots instead of the expanded set lists.

All indices are 0-based, both in memory and in the JSON file format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AxisOutOfRangeError,
    EmptyAxesError,
    EmptySetError,
    IndexOutOfRangeError,
    UncoveredIndexError,
)
from .tensor import Shape


@dataclass(frozen=True)
class CoverStats:
    """Size accounting: k sets, sum of set sizes, accumulator slots (= k)."""

    k: int
    edge_count: int
    slots: int


class GenericCover:
    """Explicit cover {S_r} of [0, d); validates on construction.

    Per-index membership lists are precomputed so the min over covering
    sets is O(#memberships) per index. Duplicate sets are allowed (the
    min over duplicates is a no-op).
    """

    __slots__ = ("d", "sets", "index_arrays", "memberships")

    def __init__(self, d: int, sets: Sequence[Iterable[int]]):
        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")
        if len(sets) < 1:
            raise ValueError("cover needs at least one set")
        norm: list[tuple[int, ...]] = []
        for r, s in enumerate(sets):
            members = sorted({int(i) for i in s})
            if not members:
                raise EmptySetError(r)
            if members[0] < 0 or members[-1] >= d:
                bad = members[0] if members[0] < 0 else members[-1]
                raise IndexOutOfRangeError(bad, d)
            norm.append(tuple(members))

        covered = np.zeros(d, dtype=bool)
        for members in norm:
            covered[list(members)] = True
        if not covered.all():
            raise UncoveredIndexError(int(np.flatnonzero(~covered)[0]))

        member_lists: list[list[int]] = [[] for _ in range(d)]
        for r, members in enumerate(norm):
            for i in members:
                member_lists[i].append(r)

        self.d = d
        self.sets = tuple(norm)
        self.index_arrays = tuple(np.array(s, dtype=np.intp) for s in norm)
        self.memberships = tuple(np.array(m, dtype=np.intp) for m in member_lists)

    @property
    def k(self) -> int:
        return len(self.sets)

    def stats(self) -> CoverStats:
        edges = sum(len(s) for s in self.sets)
        return CoverStats(k=self.k, edge_count=edges, slots=self.k)

    def validate(self) -> None:
        """Re-run the construction checks (covers are immutable, so this
        is a no-op unless internals were tampered with)."""
        GenericCover(self.d, self.sets)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GenericCover)
            and self.d == other.d
            and self.sets == other.sets
        )

    def __repr__(self) -> str:
        return f"GenericCover(d={self.d}, k={self.k})"


class AxisCover:
    """Co-dimension-1 slice cover of a tensor along the active axes.

    For an n_1 x ... x n_p shape with all axes active the induced cover
    has k = sum(n_a) sets: one per coordinate value per axis. Axes are
    0-based.
    """

    __slots__ = ("shape", "active_axes")

    def __init__(self, shape: Shape, active_axes: Iterable[int]):
        axes = tuple(sorted({int(a) for a in active_axes}))
        if not axes:
            raise EmptyAxesError()
        for a in axes:
            if not 0 <= a < shape.rank:
                raise AxisOutOfRangeError(
                    f"axis {a} out of range for rank {shape.rank}"
                )
        self.shape = shape
        self.active_axes = axes

    @property
    def d(self) -> int:
        return self.shape.size

    @property
    def k(self) -> int:
        return sum(self.shape.dims[a] for a in self.active_axes)

    def stats(self) -> CoverStats:
        # every element lies in exactly one slice per active axis
        return CoverStats(
            k=self.k,
            edge_count=self.d * len(self.active_axes),
            slots=self.k,
        )

    def expand(self) -> GenericCover:
        """Explicit-set form; the bridge used to cross-check the
        structured execution path against the generic one."""
        flat = np.arange(self.d).reshape(self.shape.dims)
        sets: list[list[int]] = []
        for a in self.active_axes:
            for i in range(self.shape.dims[a]):
                sets.append(flat.take(i, axis=a).reshape(-1).tolist())
        return GenericCover(self.d, sets)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AxisCover)
            and self.shape.dims == other.shape.dims
            and self.active_axes == other.active_axes
        )

    def __repr__(self) -> str:
        return f"AxisCover(shape={self.shape.dims}, axes={self.active_axes})"


Cover = GenericCover | AxisCover


def singleton_cover(d: int) -> GenericCover:
    """The cover {{0}, {1}, ..., {d-1}}; one accumulator per parameter,
    under which SM3 degenerates exactly to Adagrad."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return GenericCover(d, [[i] for i in range(d)])


def axis_cover(shape: Shape, active_axes: Iterable[int]) -> AxisCover:
    return AxisCover(shape, active_axes)


def full_axis_cover(shape: Shape) -> AxisCover:
    return AxisCover(shape, range(shape.rank))


@dataclass(frozen=True)
class CoverSpec:
    """Recipe for building a cover over a given tensor shape.

    kind "singleton" covers each index by itself; "axes" uses the
    co-dimension-1 slices of the listed axes (None = all axes); "custom"
    loads an explicit cover from a JSON file. slot_count never
    materializes the sets, so accounting stays cheap for huge tensors.
    """

    kind: str
    axes: tuple[int, ...] | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("singleton", "axes", "custom"):
            raise ValueError(f"unknown cover kind {self.kind!r}")
        if self.kind == "custom" and self.path is None:
            raise ValueError("custom cover needs a file path")
        if self.axes is not None:
            object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))

    def build(self, shape: Shape) -> Cover:
        if self.kind == "singleton":
            return singleton_cover(shape.size)
        if self.kind == "axes":
            axes = self.axes if self.axes is not None else tuple(range(shape.rank))
            return AxisCover(shape, axes)
        cover = load_cover(self.path)
        if cover.d != shape.size:
            raise ValueError(
                f"cover file {self.path} covers d={cover.d}, tensor has d={shape.size}"
            )
        return cover

    def slot_count(self, shape: Shape) -> int:
        """Accumulator slots one SM3-I instance needs under this cover."""
        if self.kind == "singleton":
            return shape.size
        if self.kind == "axes":
            axes = self.axes if self.axes is not None else tuple(range(shape.rank))
            for a in axes:
                if not 0 <= a < shape.rank:
                    raise AxisOutOfRangeError(
                        f"axis {a} out of range for rank {shape.rank}"
                    )
            return sum(shape.dims[a] for a in set(axes))
        return load_cover(self.path).k


def save_cover(cover: GenericCover, path: str | Path) -> None:
    """Write the JSON form {"d": ..., "sets": [[...], ...]} (0-based)."""
    payload = {"d": cover.d, "sets": [list(s) for s in cover.sets]}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_cover(path: str | Path) -> GenericCover:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, dict) or set(payload) != {"d", "sets"}:
        raise ValueError(f"cover file {path} must contain exactly 'd' and 'sets'")
    return GenericCover(int(payload["d"]), payload["sets"])
