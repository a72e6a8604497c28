import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sm3opt import ScheduleSpec, schedule_multiplier
from sm3opt.errors import InvalidScheduleError


def test_constant_is_one():
    assert schedule_multiplier(ScheduleSpec.constant(), 1) == 1.0
    assert schedule_multiplier(ScheduleSpec.constant(), 10_000) == 1.0


def test_rsqrt_value():
    assert schedule_multiplier(ScheduleSpec.rsqrt(model_dim=4), 16) == 0.5


def test_linear_decay_value():
    assert schedule_multiplier(ScheduleSpec.linear(total_steps=100), 50) == 0.5


def test_staircase_value():
    spec = ScheduleSpec.staircase(decay=0.5, interval=10)
    assert schedule_multiplier(spec, 25) == 0.25


def test_staircase_floor_engages():
    spec = ScheduleSpec.staircase(decay=0.5, interval=1, floor=0.125)
    assert schedule_multiplier(spec, 10) == 0.125


def test_warmup_ramp_midpoint():
    spec = ScheduleSpec.constant(warmup_steps=10)
    assert schedule_multiplier(spec, 5) == 0.5
    assert schedule_multiplier(spec, 10) == 1.0
    assert schedule_multiplier(spec, 11) == 1.0


def test_warmup_composes_multiplicatively():
    spec = ScheduleSpec.rsqrt(model_dim=4, warmup_steps=8)
    assert schedule_multiplier(spec, 4) == 0.5 * math.sqrt(4 / 4)


def test_step_must_be_positive():
    with pytest.raises(ValueError):
        schedule_multiplier(ScheduleSpec.constant(), 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="nope"),
        dict(kind="constant", warmup_steps=-1),
        dict(kind="rsqrt_model_dim"),
        dict(kind="rsqrt_model_dim", model_dim=0),
        dict(kind="linear_decay"),
        dict(kind="linear_decay", total_steps=10, warmup_steps=11),
        dict(kind="staircase", decay=1.5, interval=10),
        dict(kind="staircase", decay=0.5, interval=0),
        dict(kind="staircase", decay=0.5, interval=5, floor=-0.1),
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(InvalidScheduleError):
        ScheduleSpec(**kwargs)


@given(
    kind=st.sampled_from(["constant", "rsqrt_model_dim", "staircase"]),
    t=st.integers(1, 100_000),
    warmup=st.integers(0, 1000),
)
@settings(max_examples=200, deadline=None)
def test_multiplier_finite_and_positive(kind, t, warmup):
    if kind == "constant":
        spec = ScheduleSpec.constant(warmup_steps=warmup)
    elif kind == "rsqrt_model_dim":
        spec = ScheduleSpec.rsqrt(model_dim=512, warmup_steps=warmup)
    else:
        spec = ScheduleSpec.staircase(decay=0.9, interval=7, floor=1e-6, warmup_steps=warmup)
    m = schedule_multiplier(spec, t)
    assert math.isfinite(m)
    assert m > 0
