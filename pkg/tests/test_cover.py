import itertools
import json

import numpy as np
import pytest

from sm3opt import AxisCover, CoverSpec, GenericCover, Shape, axis_cover, load_cover, save_cover, singleton_cover
from sm3opt.errors import (
    AxisOutOfRangeError,
    EmptyAxesError,
    EmptySetError,
    IndexOutOfRangeError,
    UncoveredIndexError,
)


class TestGenericCover:
    def test_valid_cover(self):
        c = GenericCover(3, [[0, 1], [1, 2]])
        assert c.k == 2
        assert c.sets == ((0, 1), (1, 2))

    def test_uncovered_index(self):
        with pytest.raises(UncoveredIndexError) as exc:
            GenericCover(3, [[0, 1]])
        assert exc.value.index == 2

    def test_empty_set(self):
        with pytest.raises(EmptySetError) as exc:
            GenericCover(2, [[0, 1], []])
        assert exc.value.set_index == 1

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRangeError):
            GenericCover(2, [[0, 2]])
        with pytest.raises(IndexOutOfRangeError):
            GenericCover(2, [[-1, 0], [1]])

    def test_duplicate_sets_permitted(self):
        c = GenericCover(2, [[0, 1], [0, 1]])
        assert c.k == 2

    def test_memberships_nonempty_for_every_index(self):
        c = GenericCover(5, [[0, 2, 4], [1, 3], [2, 3]])
        assert all(len(m) >= 1 for m in c.memberships)
        assert c.memberships[3].tolist() == [1, 2]


class TestSingletonCover:
    def test_d_one(self):
        assert singleton_cover(1).sets == ((0,),)

    def test_d_three(self):
        assert singleton_cover(3).sets == ((0,), (1,), (2,))

    def test_edge_count_equals_d(self):
        assert singleton_cover(5).stats().edge_count == 5


class TestAxisCover:
    def test_k_for_2x3_both_axes(self):
        c = axis_cover(Shape((2, 3)), (0, 1))
        assert c.k == 5  # memory Theta(m + n)
        assert c.stats().slots == 5

    def test_k_for_rank3(self):
        assert axis_cover(Shape((4, 3, 2)), (0, 1, 2)).k == 9

    def test_row_expansion_is_row_major(self):
        c = axis_cover(Shape((2, 3)), (0,))
        assert c.expand().sets == ((0, 1, 2), (3, 4, 5))

    def test_empty_axes(self):
        with pytest.raises(EmptyAxesError):
            axis_cover(Shape((2, 2)), ())

    def test_axis_out_of_range(self):
        with pytest.raises(AxisOutOfRangeError):
            axis_cover(Shape((2, 2)), (2,))


class TestExpand:
    def test_1x1(self):
        assert axis_cover(Shape((1, 1)), (0, 1)).expand().sets == ((0,), (0,))

    def test_2x2_both_axes(self):
        c = axis_cover(Shape((2, 2)), (0, 1)).expand()
        assert c.sets == ((0, 1), (2, 3), (0, 2), (1, 3))

    def test_edge_count_counts_every_membership(self):
        # each cell of a 2x3 grid lies in one row set and one column set
        c = axis_cover(Shape((2, 3)), (0, 1))
        assert c.stats().edge_count == 12
        assert c.expand().stats().edge_count == 12

    def test_exhaustive_small_scan(self):
        """expand . axis_cover validates for all shapes with dims <= 5 and
        rank <= 4, for every nonempty axis subset."""
        checked = 0
        for rank in range(1, 5):
            for dims in itertools.product(range(1, 6), repeat=rank):
                shape = Shape(dims)
                axes_pool = list(range(rank))
                for r in range(1, rank + 1):
                    for axes in itertools.combinations(axes_pool, r):
                        cover = axis_cover(shape, axes)
                        expanded = cover.expand()  # GenericCover validates on build
                        assert expanded.k == cover.k
                        assert expanded.stats().edge_count == cover.stats().edge_count
                        checked += 1
        assert checked > 0


class TestCoverFile:
    def test_round_trip_bit_exact(self, tmp_path):
        c = GenericCover(4, [[0, 1], [1, 2, 3], [3]])
        path = tmp_path / "cover.json"
        save_cover(c, path)
        first = path.read_bytes()
        loaded = load_cover(path)
        assert loaded == c
        save_cover(loaded, path)
        assert path.read_bytes() == first

    def test_zero_based_serialization(self, tmp_path):
        path = tmp_path / "cover.json"
        save_cover(GenericCover(2, [[0], [1]]), path)
        payload = json.loads(path.read_text())
        assert payload == {"d": 2, "sets": [[0], [1]]}

    def test_load_rejects_invalid(self, tmp_path):
        path = tmp_path / "cover.json"
        path.write_text(json.dumps({"d": 3, "sets": [[0, 1]]}))
        with pytest.raises(UncoveredIndexError):
            load_cover(path)


class TestCoverSpec:
    def test_singleton_slot_count_avoids_materialization(self):
        spec = CoverSpec(kind="singleton")
        assert spec.slot_count(Shape((1024, 8192))) == 1024 * 8192

    def test_axes_slot_count(self):
        spec = CoverSpec(kind="axes")
        assert spec.slot_count(Shape((1024, 8192))) == 9216

    def test_build_axes(self):
        cover = CoverSpec(kind="axes", axes=(0,)).build(Shape((2, 3)))
        assert isinstance(cover, AxisCover)
        assert cover.active_axes == (0,)

    def test_custom_requires_path(self):
        with pytest.raises(ValueError):
            CoverSpec(kind="custom")

    def test_custom_build_checks_dimension(self, tmp_path):
        path = tmp_path / "cover.json"
        save_cover(GenericCover(3, [[0, 1, 2]]), path)
        spec = CoverSpec(kind="custom", path=str(path))
        assert spec.slot_count(Shape((3,))) == 1
        with pytest.raises(ValueError):
            spec.build(Shape((4,)))
