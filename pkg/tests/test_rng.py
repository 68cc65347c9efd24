"""Stream determinism, substream independence, and distribution oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsim.rng import GENERATOR_ID, RandomStream, derive_seed, substream


def test_same_seed_same_sequence():
    a = RandomStream(1234)
    b = RandomStream(1234)
    seq_a = [a.uniform(0, 1) for _ in range(50)] + [a.gaussian(0, 1) for _ in range(50)]
    seq_b = [b.uniform(0, 1) for _ in range(50)] + [b.gaussian(0, 1) for _ in range(50)]
    assert seq_a == seq_b


def test_different_seeds_differ():
    a = [RandomStream(1).random() for _ in range(8)]
    b = [RandomStream(2).random() for _ in range(8)]
    assert a != b


def test_seed_range_validated():
    RandomStream(0)
    RandomStream(2**64 - 1)
    with pytest.raises(ValueError):
        RandomStream(-1)
    with pytest.raises(ValueError):
        RandomStream(2**64)


def test_uniform_bounds_and_degenerate():
    rng = RandomStream(7)
    vals = [rng.uniform(2.0, 5.0) for _ in range(1000)]
    assert all(2.0 <= v < 5.0 for v in vals)
    # degenerate range returns the point and must not consume the stream
    before = rng.uniform(0.3, 0.3)
    assert before == 0.3
    twin = RandomStream(7)
    for _ in range(1000):
        twin.uniform(2.0, 5.0)
    assert rng.random() == twin.random()


def test_uniform_rejects_inverted_range():
    with pytest.raises(ValueError):
        RandomStream(0).uniform(1.0, 0.0)


def test_gaussian_zero_sd_exact_and_consumes_nothing():
    rng = RandomStream(99)
    assert rng.gaussian(0.42, 0.0) == 0.42
    twin = RandomStream(99)
    assert rng.gaussian(1.0, 1.0) == twin.gaussian(1.0, 1.0)


def test_gaussian_rejects_negative_sd():
    with pytest.raises(ValueError):
        RandomStream(0).gaussian(0.0, -0.1)


def test_uniform_sample_mean():
    # fixed seed; 3 standard errors of the uniform mean over 1e5 draws
    rng = RandomStream(2024)
    n = 100_000
    mean = sum(rng.uniform(0.0, 1.0) for _ in range(n)) / n
    assert abs(mean - 0.5) < 3.0 / math.sqrt(12 * n)


def test_gaussian_sample_moments():
    rng = RandomStream(2025)
    n = 100_000
    draws = np.array([rng.gaussian(3.0, 2.0) for _ in range(n)])
    assert abs(draws.mean() - 3.0) < 3 * 2.0 / math.sqrt(n)
    assert abs(draws.std() / 2.0 - 1.0) < 0.02


def test_shuffle_preserves_multiset_and_input():
    rng = RandomStream(5)
    items = [3, 1, 4, 1, 5, 9, 2, 6]
    out = rng.shuffle(items)
    assert sorted(out) == sorted(items)
    assert items == [3, 1, 4, 1, 5, 9, 2, 6]
    assert out is not items


@given(st.lists(st.integers(), max_size=30), st.integers(min_value=0, max_value=2**32))
@settings(max_examples=60, deadline=None)
def test_shuffle_multiset_property(items, seed):
    out = RandomStream(seed).shuffle(items)
    assert sorted(out) == sorted(items)


def test_shuffle_uniformity_three_items():
    # every permutation of 3 items within +-0.01 of 1/6 over 1e5 shuffles
    rng = RandomStream(31337)
    counts = {}
    n = 100_000
    for _ in range(n):
        perm = tuple(rng.shuffle(["a", "b", "c"]))
        counts[perm] = counts.get(perm, 0) + 1
    assert len(counts) == 6
    for perm, c in counts.items():
        assert abs(c / n - 1 / 6) < 0.01, perm


def test_derive_seed_reproducible_and_distinct():
    s = [derive_seed(42, i) for i in range(20)]
    assert s == [derive_seed(42, i) for i in range(20)]
    assert len(set(s)) == 20
    assert all(0 <= x < 2**64 for x in s)
    assert derive_seed(43, 0) != derive_seed(42, 0)


def test_substream_matches_derive_seed():
    a = substream(42, 3)
    b = RandomStream(derive_seed(42, 3))
    assert [a.random() for _ in range(10)] == [b.random() for _ in range(10)]


def test_substreams_uncorrelated():
    # crude independence check: correlation of sibling streams near zero
    s0, s1 = substream(7, 0), substream(7, 1)
    xs = np.array([s0.random() for _ in range(2000)])
    ys = np.array([s1.random() for _ in range(2000)])
    assert abs(np.corrcoef(xs, ys)[0, 1]) < 0.08


def test_generator_id_stable():
    assert GENERATOR_ID == "numpy-pcg64"
