from __future__ import annotations

import threading
from typing import Optional, Sequence

import pytest

from qmitm.errors import InstanceError
from qmitm.rangetree import RangePoint, RangeTree, VisitCounter, build, query_dominated
from qmitm.rng import SplitMix64


def naive_dominated(points: Sequence[RangePoint], bounds: Sequence[int]) -> Optional[RangePoint]:
    hits = [p for p in points if all(c <= q for c, q in zip(p.coords, bounds))]
    return min(hits, key=lambda p: p.payload) if hits else None


def random_points(rng: SplitMix64, count: int, d: int, spread: int) -> list[RangePoint]:
    return [
        RangePoint(tuple(rng.randbelow(2 * spread) - spread for _ in range(d)), payload=i)
        for i in range(count)
    ]


@pytest.fixture
def small_tree() -> RangeTree:
    points = [RangePoint((1, 5), 0), RangePoint((3, 2), 1), RangePoint((4, 4), 2)]
    return build(points, 2)


def test_empty_tree_answers_none():
    tree = RangeTree.build([], 3)
    assert len(tree) == 0
    assert tree.query_dominated((10, 10, 10)) is None


def test_small_tree_holds_all_points(small_tree):
    assert len(small_tree) == 3
    assert sorted(p.payload for p in small_tree) == [0, 1, 2]
    assert small_tree.dimension == 2


def test_unique_qualifier(small_tree):
    assert query_dominated(small_tree, (3, 3)) == RangePoint((3, 2), 1)


def test_nothing_below_origin(small_tree):
    assert query_dominated(small_tree, (0, 0)) is None


def test_smallest_payload_wins(small_tree):
    assert query_dominated(small_tree, (10, 10)).payload == 0


def test_wrong_query_dimension(small_tree):
    with pytest.raises(InstanceError):
        small_tree.query_dominated((1, 2, 3))


def test_point_dimension_checked():
    with pytest.raises(InstanceError):
        RangeTree([RangePoint((1, 2), 0), RangePoint((1,), 1)], 2)


def test_payloads_must_be_unique():
    with pytest.raises(InstanceError):
        RangeTree([RangePoint((1, 2), 0), RangePoint((3, 4), 0)], 2)


def test_matches_naive_scan_in_two_dimensions():
    rng = SplitMix64(2024)
    points = random_points(rng, 1000, 2, 500)
    tree = build(points, 2)
    for _ in range(1000):
        bounds = (rng.randbelow(1000) - 500, rng.randbelow(1000) - 500)
        assert tree.query_dominated(bounds) == naive_dominated(points, bounds)


@pytest.mark.parametrize("d", [1, 3, 4])
def test_matches_naive_scan_in_other_dimensions(d: int):
    rng = SplitMix64(d)
    points = random_points(rng, 300, d, 50)
    tree = build(points, d)
    for _ in range(300):
        bounds = tuple(rng.randbelow(100) - 50 for _ in range(d))
        assert tree.query_dominated(bounds) == naive_dominated(points, bounds)


def test_every_point_finds_itself():
    rng = SplitMix64(99)
    points = random_points(rng, 1024, 3, 1 << 20)
    tree = build(points, 3)
    for p in points:
        found = tree.query_dominated(p.coords)
        assert found is not None
        assert found.payload <= p.payload
        assert all(c <= q for c, q in zip(found.coords, p.coords))


def test_duplicate_coordinates():
    points = [RangePoint((2, 2), 5), RangePoint((2, 2), 3), RangePoint((2, 2), 4)]
    assert build(points, 2).query_dominated((2, 2)).payload == 3


def test_visit_counts_are_polylogarithmic():
    rng = SplitMix64(5)
    points = random_points(rng, 4096, 2, 1 << 16)
    tree = build(points, 2)
    counter = VisitCounter()
    for _ in range(200):
        tree.query_dominated((rng.randbelow(1 << 17) - (1 << 16),) * 2, counter)
    assert counter.queries == 200
    # 12 levels on each of two axes
    assert counter.mean() <= 4 * 13 * 13
    assert tree.visit_counter.nodes == counter.nodes


def _query_bounds(rng: SplitMix64, d: int, spread: int) -> tuple[int, ...]:
    return tuple(rng.randbelow(2 * spread) - spread for _ in range(d))


def test_same_input_builds_identical_trees():
    points = random_points(SplitMix64(17), 2048, 3, 1 << 12)
    first, second = build(points, 3), build(points, 3)
    rng = SplitMix64(18)
    for _ in range(200):
        bounds = _query_bounds(rng, 3, 1 << 12)
        assert first.query_dominated(bounds) == second.query_dominated(bounds)
    assert first.visit_counter.queries == second.visit_counter.queries == 200
    assert first.visit_counter.nodes == second.visit_counter.nodes


def test_shared_counter_keeps_every_query():
    tree = build(random_points(SplitMix64(4), 512, 2, 1000), 2)
    counter = VisitCounter()

    def worker(seed: int) -> None:
        rng = SplitMix64(seed)
        for _ in range(100):
            tree.query_dominated(_query_bounds(rng, 2, 1000), counter)

    threads = [threading.Thread(target=worker, args=(seed,)) for seed in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert counter.queries == 400
    assert tree.visit_counter.queries == 400
    assert tree.visit_counter.nodes == counter.nodes


@pytest.mark.slow
@pytest.mark.parametrize("d", [1, 2, 3])
def test_matches_naive_scan_at_4096_points(d: int):
    rng = SplitMix64(4096 + d)
    points = random_points(rng, 4096, d, 1 << 10)
    tree = build(points, d)
    for _ in range(1000):
        bounds = _query_bounds(rng, d, 1 << 10)
        assert tree.query_dominated(bounds) == naive_dominated(points, bounds)


@pytest.mark.slow
@pytest.mark.parametrize("d", [1, 2, 3])
def test_visit_growth_is_polylogarithmic(d: int):
    spread = 1 << 20
    means = {}
    for log_n in (10, 12, 14):
        rng = SplitMix64(log_n * 10 + d)
        tree = build(random_points(rng, 1 << log_n, d, spread), d)
        for _ in range(500):
            tree.query_dominated(_query_bounds(rng, d, spread))
        means[log_n] = tree.visit_counter.mean()
    for log_n in (10, 12):
        # two doublings, each allowed ((log2(2N) + 2) / (log2 N + 2))^d * 1.5
        allowed = ((log_n + 4) / (log_n + 2)) ** d * 1.5**2
        assert means[log_n + 2] / means[log_n] <= allowed
