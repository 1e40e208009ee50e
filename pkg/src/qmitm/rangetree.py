"""
Static layered range tree answering one-sided dominance queries: given bounds q, return a
stored point p with p_i <= q_i on every axis, choosing the qualifying point with the
smallest payload.

The outer layer is a balanced tree over the points sorted by the first coordinate; every
internal node owns a (d-1)-dimensional structure over the points below it. The last axis is
a sorted array with prefix minima of the payloads. A dominance query turns the first-axis
condition into a prefix of the sorted order, splits the prefix into O(log N) canonical
nodes and asks each node's associated structure for the rest of the bounds.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .errors import InstanceError

__all__ = ["RangePoint", "RangeTree", "VisitCounter", "build", "query_dominated"]


@dataclass(frozen=True)
class RangePoint:
    coords: tuple[int, ...]
    payload: int


class VisitCounter:
    """
    Aggregates query statistics. Safe to share between threads querying the same tree.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._queries = 0
        self._nodes = 0

    def add(self, nodes: int) -> None:
        with self._lock:
            self._queries += 1
            self._nodes += nodes

    @property
    def queries(self) -> int:
        with self._lock:
            return self._queries

    @property
    def nodes(self) -> int:
        with self._lock:
            return self._nodes

    def mean(self) -> float:
        with self._lock:
            return self._nodes / self._queries if self._queries else 0.0


class _Visits:
    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0


def _better(a: Optional[RangePoint], b: Optional[RangePoint]) -> Optional[RangePoint]:
    if a is None:
        return b
    if b is None or a.payload <= b.payload:
        return a
    return b


class _SortedLayer:
    """Last axis: points sorted by coordinate, with the min-payload point of every prefix."""

    __slots__ = ("_keys", "_prefix_best")

    def __init__(self, points: Sequence[RangePoint], axis: int) -> None:
        # points arrive sorted by (coords[axis], payload)
        self._keys = [p.coords[axis] for p in points]
        best: list[RangePoint] = []
        for p in points:
            best.append(p if not best or p.payload < best[-1].payload else best[-1])
        self._prefix_best = best

    def query(self, bounds: tuple[int, ...], axis: int, visits: _Visits) -> Optional[RangePoint]:
        bound = bounds[axis]
        lo, hi = 0, len(self._keys)
        # upper-bound binary search; every probe is one node of the implicit search tree
        while lo < hi:
            mid = (lo + hi) // 2
            visits.count += 1
            if self._keys[mid] <= bound:
                lo = mid + 1
            else:
                hi = mid
        visits.count += 1
        return self._prefix_best[lo - 1] if lo else None


@dataclass
class _Node:
    lo: int
    hi: int
    left: Optional[_Node] = None
    right: Optional[_Node] = None
    assoc: Union[_TreeLayer, _SortedLayer, None] = None


class _TreeLayer:
    """Axis `axis` < d-1: balanced tree over the points sorted by that axis."""

    __slots__ = ("_axis", "_dim", "_points", "_keys", "_root")

    def __init__(self, points: Sequence[RangePoint], axis: int, dim: int) -> None:
        self._axis = axis
        self._dim = dim
        self._points = list(points)
        self._keys = [p.coords[axis] for p in self._points]
        self._root, _ = self._build(0, len(self._points)) if self._points else (None, [])

    def _next_axis_key(self, p: RangePoint) -> tuple[int, int]:
        return (p.coords[self._axis + 1], p.payload)

    def _make_assoc(self, by_next: list[RangePoint]) -> Union[_TreeLayer, _SortedLayer]:
        if self._axis + 1 == self._dim - 1:
            return _SortedLayer(by_next, self._axis + 1)
        return _TreeLayer(by_next, self._axis + 1, self._dim)

    def _build(self, lo: int, hi: int) -> tuple[_Node, list[RangePoint]]:
        """Returns the subtree over [lo, hi) and its points ordered by the next axis."""
        node = _Node(lo, hi)
        if hi - lo == 1:
            return node, [self._points[lo]]
        mid = (lo + hi) // 2
        node.left, left_pts = self._build(lo, mid)
        node.right, right_pts = self._build(mid, hi)
        by_next = list(heapq.merge(left_pts, right_pts, key=self._next_axis_key))
        node.assoc = self._make_assoc(by_next)
        return node, by_next

    def _leaf_check(self, p: RangePoint, bounds: tuple[int, ...]) -> Optional[RangePoint]:
        for i in range(self._axis + 1, self._dim):
            if p.coords[i] > bounds[i]:
                return None
        return p

    def query(self, bounds: tuple[int, ...], axis: int, visits: _Visits) -> Optional[RangePoint]:
        if self._root is None:
            visits.count += 1
            return None
        # prefix [0, k) is every point whose coordinate on this axis is within bounds
        bound = bounds[self._axis]
        lo, hi = 0, len(self._keys)
        while lo < hi:
            mid = (lo + hi) // 2
            visits.count += 1
            if self._keys[mid] <= bound:
                lo = mid + 1
            else:
                hi = mid
        k = lo
        best: Optional[RangePoint] = None
        stack = [self._root]
        while stack:
            node = stack.pop()
            visits.count += 1
            if node.lo >= k:
                continue
            if node.hi <= k:
                if node.assoc is None:
                    found = self._leaf_check(self._points[node.lo], bounds)
                else:
                    found = node.assoc.query(bounds, self._axis + 1, visits)
                best = _better(best, found)
                continue
            assert node.left is not None and node.right is not None
            stack.append(node.right)
            stack.append(node.left)
        return best


class RangeTree:
    """
    Immutable d-dimensional dominance structure. Build with :meth:`build`; query with
    :meth:`query_dominated`.
    """

    def __init__(self, points: Sequence[RangePoint], d: int) -> None:
        if d < 1:
            raise InstanceError(f"range tree dimension must be at least 1, got {d}")
        for p in points:
            if len(p.coords) != d:
                raise InstanceError(
                    f"point with payload {p.payload} has {len(p.coords)} coordinates, expected {d}"
                )
        if len({p.payload for p in points}) != len(points):
            raise InstanceError("range tree payloads must be unique")
        self._d = d
        ordered = sorted(points, key=lambda p: (p.coords[0], p.payload))
        self._points = tuple(ordered)
        self._layer: Union[_TreeLayer, _SortedLayer]
        if d == 1:
            self._layer = _SortedLayer(ordered, 0)
        else:
            self._layer = _TreeLayer(ordered, 0, d)
        self.visit_counter = VisitCounter()

    @classmethod
    def build(cls, points: Sequence[RangePoint], d: int) -> RangeTree:
        return cls(points, d)

    @property
    def dimension(self) -> int:
        return self._d

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[RangePoint]:
        return iter(self._points)

    def query_dominated(
        self, bounds: Sequence[int], counter: VisitCounter | None = None
    ) -> Optional[RangePoint]:
        """
        :param bounds: One upper bound per axis.
        :param counter: Optional per-caller accumulator, updated in addition to the tree's own.

        :returns: The qualifying point with the smallest payload, or None.

        :raises: InstanceError: If bounds has the wrong dimension.
        """
        bounds = tuple(bounds)
        if len(bounds) != self._d:
            raise InstanceError(f"query has {len(bounds)} bounds, tree dimension is {self._d}")
        visits = _Visits()
        if self._points:
            found = self._layer.query(bounds, 0, visits)
        else:
            visits.count += 1
            found = None
        self.visit_counter.add(visits.count)
        if counter is not None:
            counter.add(visits.count)
        return found


def build(points: Sequence[RangePoint], d: int) -> RangeTree:
    return RangeTree.build(points, d)


def query_dominated(t: RangeTree, bounds: Sequence[int]) -> Optional[RangePoint]:
    return t.query_dominated(bounds)
