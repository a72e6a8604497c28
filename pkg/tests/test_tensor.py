import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sm3opt import ParamTensor, Shape, broadcast_min, elementwise, slice_reduce
from sm3opt.errors import (
    AxisOutOfRangeError,
    DivisionByZeroError,
    LengthMismatchError,
    ShapeMismatchError,
)


def t(values) -> ParamTensor:
    return ParamTensor.from_array(np.asarray(values, dtype=np.float64))


class TestShape:
    def test_size_and_rank(self):
        s = Shape((4, 3, 2))
        assert s.rank == 3
        assert s.size == 24

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            Shape(())
        with pytest.raises(ValueError):
            Shape((2, 0))

    def test_ravel_matches_row_major(self):
        s = Shape((2, 3))
        # flat index of (i, j) is i*3 + j
        assert [s.ravel((i, j)) for i in range(2) for j in range(3)] == list(range(6))

    def test_linearization_round_trip_exhaustive(self):
        # every shape with dims bounded by 4x3x2, every index
        dims_options = [(n1,) for n1 in range(1, 5)]
        dims_options += [(n1, n2) for n1 in range(1, 5) for n2 in range(1, 4)]
        dims_options += [
            (n1, n2, n3)
            for n1 in range(1, 5)
            for n2 in range(1, 4)
            for n3 in range(1, 3)
        ]
        for dims in dims_options:
            s = Shape(dims)
            for flat in range(s.size):
                assert s.ravel(s.unravel(flat)) == flat


class TestElementwise:
    def test_div_zero_over_zero_is_zero(self):
        out = elementwise("div", t([2.0, 0.0]), t([4.0, 0.0]))
        assert out.data.tolist() == [0.5, 0.0]

    def test_div_nonzero_over_zero_raises(self):
        with pytest.raises(DivisionByZeroError):
            elementwise("div", t([1.0, 2.0]), t([1.0, 0.0]))

    def test_square(self):
        assert elementwise("square", t([-3.0, 1.0, 2.0])).data.tolist() == [9.0, 1.0, 4.0]

    def test_add_zeros_is_identity(self):
        x = t([1.5, -2.0, 0.25])
        out = elementwise("add", x, ParamTensor.zeros(x.shape))
        assert out.data.tolist() == x.data.tolist()

    def test_scale(self):
        assert elementwise("scale", t([1.0, -2.0]), 0.5).data.tolist() == [0.5, -1.0]

    def test_sqrt_rejects_negative(self):
        with pytest.raises(ValueError):
            elementwise("sqrt", t([-1.0]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            elementwise("add", t([1.0, 2.0]), t([1.0, 2.0, 3.0]))

    def test_construction_rejects_non_finite(self):
        with pytest.raises(ValueError):
            ParamTensor.from_array([1.0, np.nan])
        with pytest.raises(ValueError):
            ParamTensor.from_array([np.inf])


class TestSliceReduce:
    def test_max_rows_2x2(self):
        x = t([[1.0, 5.0], [3.0, 2.0]])
        assert slice_reduce(x, 0, "max").tolist() == [5.0, 3.0]

    def test_min_cols_2x2(self):
        x = t([[1.0, 5.0], [3.0, 2.0]])
        assert slice_reduce(x, 1, "min").tolist() == [1.0, 2.0]

    def test_zeros(self):
        x = ParamTensor.zeros(Shape((3, 4)))
        assert slice_reduce(x, 0, "max").tolist() == [0.0, 0.0, 0.0]

    def test_axis_out_of_range(self):
        with pytest.raises(AxisOutOfRangeError):
            slice_reduce(t([1.0, 2.0]), 1, "max")

    def test_rank_one_is_identity(self):
        x = t([4.0, -1.0, 2.0])
        assert slice_reduce(x, 0, "min").tolist() == [4.0, -1.0, 2.0]


class TestBroadcastMin:
    def test_singleton_row(self):
        out = broadcast_min([np.array([9.0]), np.array([4.0, 7.0])], Shape((1, 2)))
        assert out.as_ndarray().tolist() == [[4.0, 7.0]]

    def test_hand_enumerated_2x2(self):
        out = broadcast_min([np.array([1.0, 2.0]), np.array([3.0, 4.0])], Shape((2, 2)))
        assert out.as_ndarray().tolist() == [[1.0, 1.0], [2.0, 2.0]]

    def test_constant_vectors(self):
        out = broadcast_min([np.full(2, 5.0), np.full(3, 5.0)], Shape((2, 3)))
        assert np.all(out.data == 5.0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            broadcast_min([np.array([1.0])], Shape((2,)))
        with pytest.raises(LengthMismatchError):
            broadcast_min([np.array([1.0, 2.0]), np.array([1.0])], Shape((2, 2)))


@st.composite
def small_tensors(draw):
    dims = draw(st.lists(st.integers(1, 4), min_size=1, max_size=3))
    values = draw(
        st.lists(
            st.floats(-100, 100, allow_nan=False, allow_infinity=False),
            min_size=int(np.prod(dims)),
            max_size=int(np.prod(dims)),
        )
    )
    return ParamTensor(Shape(dims), np.array(values))


@given(small_tensors())
@settings(max_examples=100, deadline=None)
def test_max_slice_broadcast_dominates_entries(x: ParamTensor):
    """Broadcasting any axis's per-slice max back over the tensor gives an
    entrywise upper bound."""
    grid = x.as_ndarray()
    for axis in range(x.shape.rank):
        maxima = slice_reduce(x, axis, "max")
        view = [1] * x.shape.rank
        view[axis] = x.shape.dims[axis]
        assert np.all(maxima.reshape(view) >= grid)


@given(small_tensors())
@settings(max_examples=100, deadline=None)
def test_broadcast_min_is_tight_lower_envelope(x: ParamTensor):
    """broadcast_min is bounded by each axis vector and attains at least
    one of them at every entry."""
    vectors = [slice_reduce(x, a, "max") for a in range(x.shape.rank)]
    out = broadcast_min(vectors, x.shape).as_ndarray()
    stacked = []
    for a, vec in enumerate(vectors):
        view = [1] * x.shape.rank
        view[a] = x.shape.dims[a]
        stacked.append(np.broadcast_to(vec.reshape(view), x.shape.dims))
    assert all(np.all(out <= s) for s in stacked)
    attained = np.zeros(x.shape.dims, dtype=bool)
    for s in stacked:
        attained |= out == s
    assert attained.all()
