"""Shared helpers: random cover/stream generation for invariant suites."""

from __future__ import annotations

import numpy as np
import pytest

from sm3opt import GenericCover


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_cover(rng: np.random.Generator, d: int, k: int) -> GenericCover:
    """Random cover of [0, d) with k sets; every index is covered."""
    sets = []
    for _ in range(k):
        size = int(rng.integers(1, d + 1))
        sets.append(list(rng.choice(d, size=size, replace=False)))
    covered = set()
    for s in sets:
        covered.update(s)
    for i in set(range(d)) - covered:
        sets[int(rng.integers(0, k))].append(i)
    return GenericCover(d, sets)


def random_trial(rng: np.random.Generator, max_d: int = 50, max_k: int = 10, max_t: int = 200):
    """One (cover, gradient stream) pair with uniform [-1, 1] gradients."""
    d = int(rng.integers(2, max_d + 1))
    k = int(rng.integers(1, max_k + 1))
    t = int(rng.integers(10, max_t + 1))
    cover = random_cover(rng, d, k)
    stream = rng.uniform(-1.0, 1.0, size=(t, d))
    return cover, stream


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(0xC0FFEE)
