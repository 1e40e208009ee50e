from __future__ import annotations

import pytest

from qmitm.rng import MASK64, SplitMix64, derive_seed


def test_first_output_matches_reference_splitmix64():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


def test_same_seed_same_stream():
    a = SplitMix64(12345)
    b = SplitMix64(12345)
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]


def test_seed_is_reduced_to_64_bits():
    assert SplitMix64(1 << 64).seed == 0
    assert SplitMix64(-1).seed == MASK64


def test_random_is_in_unit_interval():
    rng = SplitMix64(7)
    values = [rng.random() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert 0.4 < sum(values) / len(values) < 0.6


@pytest.mark.parametrize("n", [1, 2, 3, 7, 1000, (1 << 63) + 5])
def test_randbelow_stays_in_range(n: int):
    rng = SplitMix64(n)
    assert all(0 <= rng.randbelow(n) < n for _ in range(200))


def test_randbelow_rejects_empty_range():
    with pytest.raises(ValueError):
        SplitMix64(0).randbelow(0)


def test_randbelow_covers_small_range():
    rng = SplitMix64(3)
    assert {rng.randbelow(5) for _ in range(500)} == {0, 1, 2, 3, 4}


def test_shuffle_is_a_permutation():
    items = list(range(50))
    SplitMix64(4).shuffle(items)
    assert sorted(items) == list(range(50))
    assert items != list(range(50))


def test_sample_without_replacement():
    rng = SplitMix64(11)
    sample = rng.sample_without_replacement(1 << 40, 100)
    assert len(set(sample)) == 100
    assert all(0 <= v < 1 << 40 for v in sample)
    assert sorted(SplitMix64(1).sample_without_replacement(8, 8)) == list(range(8))


def test_sample_without_replacement_rejects_oversized_draw():
    with pytest.raises(ValueError):
        SplitMix64(0).sample_without_replacement(3, 4)


def test_derive_seed_separates_keys():
    seeds = {derive_seed(0, size, trial) for size in range(10) for trial in range(10)}
    assert len(seeds) == 100
    assert derive_seed(5, 1, 2) != derive_seed(5, 2, 1)
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    assert derive_seed(5) == 5
