"""Rank-oracle matroids: uniform, graphic and user-supplied.

Elements are the integers ``0 .. ground_size - 1``.  Subsets are any iterable
of such integers; results that are sets come back as ``frozenset``.
"""

from __future__ import annotations

import itertools
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np


class NoFiniteBasisError(ValueError):
    """Every basis uses an excluded (infinite-cost) element."""


class UnionFind:
    """Disjoint sets over ``0 .. n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.components -= 1
        return True


class Matroid:
    """A matroid given by its rank function.

    ``rank_fn`` receives a ``frozenset`` of valid element indices.  With
    ``check_axioms=True`` every call also verifies ``0 <= rank(S) <= |S|``,
    which catches most broken oracles cheaply; use :func:`check_axioms` for an
    exhaustive test on small ground sets.
    """

    kind = "custom"

    def __init__(self, ground_size: int, rank_fn: Callable[[frozenset], int] | None = None,
                 check_axioms: bool = False):
        if ground_size < 0:
            raise ValueError("ground_size must be non-negative")
        self.ground_size = int(ground_size)
        self._rank_fn = rank_fn
        self.check_axioms = check_axioms

    # -- subsets -----------------------------------------------------------
    @property
    def ground_set(self) -> frozenset:
        return frozenset(range(self.ground_size))

    def _subset(self, subset: Iterable[int]) -> frozenset:
        s = frozenset(int(a) for a in subset)
        for a in s:
            if not 0 <= a < self.ground_size:
                raise IndexError(f"element {a} outside ground set of size {self.ground_size}")
        return s

    # -- oracle ------------------------------------------------------------
    def _rank(self, s: frozenset) -> int:
        if self._rank_fn is None:
            raise NotImplementedError("custom matroid needs a rank function")
        return int(self._rank_fn(s))

    def rank(self, subset: Iterable[int] = None) -> int:
        s = self.ground_set if subset is None else self._subset(subset)
        r = self._rank(s)
        if self.check_axioms and not 0 <= r <= len(s):
            raise ValueError(f"rank oracle returned {r} for a set of size {len(s)}")
        return r

    @cached_property
    def full_rank(self) -> int:
        return self.rank(None)

    def bridges(self, subset: Iterable[int] = None) -> frozenset:
        """Elements ``a`` of ``subset`` with ``rank(subset - a) < rank(subset)``."""
        s = self.ground_set if subset is None else self._subset(subset)
        r = self._rank(s)
        return frozenset(a for a in s if self._rank(s - {a}) < r)

    def is_bridgeless(self) -> bool:
        return not self.bridges()

    def is_independent(self, subset: Iterable[int]) -> bool:
        s = self._subset(subset)
        return self._rank(s) == len(s)

    def tracker(self) -> "_RankTracker":
        """Incremental independence test used by the greedy algorithm."""
        return _RankTracker(self)

    def to_dict(self) -> dict:
        raise TypeError("custom matroids are not serializable")

    def __repr__(self):
        return f"{type(self).__name__}(ground_size={self.ground_size})"


class _RankTracker:
    def __init__(self, matroid: Matroid):
        self.m = matroid
        self.chosen: set = set()
        self.r = 0

    def try_add(self, a: int) -> bool:
        r = self.m._rank(frozenset(self.chosen | {a}))
        if r > self.r:
            self.chosen.add(a)
            self.r = r
            return True
        return False

    def spans(self, a: int) -> bool:
        """True when ``a`` is in the closure of everything added so far."""
        return self.m._rank(frozenset(self.chosen | {a})) == self.r


class UniformMatroid(Matroid):
    """``U_{n,k}``: every ``k``-subset of ``n`` elements is a basis."""

    kind = "uniform"

    def __init__(self, n: int, k: int):
        if not 0 <= k <= n:
            raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
        super().__init__(n)
        self.n, self.k = int(n), int(k)

    def _rank(self, s):
        return min(len(s), self.k)

    def tracker(self):
        return _CountTracker(self.k)

    def to_dict(self):
        return {"kind": "uniform", "n": self.n, "k": self.k}

    def __repr__(self):
        return f"UniformMatroid(n={self.n}, k={self.k})"


class _CountTracker:
    def __init__(self, k):
        self.k = k
        self.count = 0
        self.seen = set()

    def try_add(self, a):
        self.seen.add(a)
        if self.count < self.k:
            self.count += 1
            return True
        return False

    def spans(self, a):
        return self.count >= self.k or a in self.seen


class GraphicMatroid(Matroid):
    """Cycle matroid of a multigraph; element ``i`` is ``edges[i]``.

    ``rank(F) = vertex_count - components(F)``, computed with a fresh
    union-find per call.
    """

    kind = "graphic"

    def __init__(self, vertex_count: int, edges: Sequence[tuple[int, int]], name: str | None = None):
        edges = tuple((int(u), int(v)) for u, v in edges)
        if vertex_count <= 0:
            raise ValueError("vertex_count must be positive")
        for u, v in edges:
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u}, {v}) has a vertex outside 0..{vertex_count - 1}")
        super().__init__(len(edges))
        self.vertex_count = int(vertex_count)
        self.edges = edges
        self.name = name

    def components(self, subset: Iterable[int] = None) -> int:
        s = self.ground_set if subset is None else self._subset(subset)
        uf = UnionFind(self.vertex_count)
        for e in s:
            u, v = self.edges[e]
            uf.union(u, v)
        return uf.components

    def _rank(self, s):
        t = _GraphTracker(self)
        return sum(t.try_add(e) for e in s)

    def tracker(self):
        return _GraphTracker(self)

    def bridges(self, subset: Iterable[int] = None) -> frozenset:
        """Graph bridges of the edge subset, by DFS low-link in linear time."""
        s = self.ground_set if subset is None else self._subset(subset)
        adj = [[] for _ in range(self.vertex_count)]
        for e in s:
            u, v = self.edges[e]
            if u != v:                      # loops never disconnect anything
                adj[u].append((v, e))
                adj[v].append((u, e))
        disc = [-1] * self.vertex_count
        low = [0] * self.vertex_count
        out = []
        clock = 0
        for root in range(self.vertex_count):
            if disc[root] >= 0 or not adj[root]:
                continue
            disc[root] = low[root] = clock
            clock += 1
            # frames: (vertex, edge used to enter it, next adjacency index)
            stack = [(root, -1, 0)]
            while stack:
                u, via, i = stack[-1]
                if i < len(adj[u]):
                    stack[-1] = (u, via, i + 1)
                    w, e = adj[u][i]
                    if e == via:
                        continue
                    if disc[w] < 0:
                        disc[w] = low[w] = clock
                        clock += 1
                        stack.append((w, e, 0))
                    elif disc[w] < low[u]:
                        low[u] = disc[w]
                    continue
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    if low[u] < low[p]:
                        low[p] = low[u]
                    if low[u] > disc[p]:
                        out.append(via)
        return frozenset(out)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        return e[:, 0].copy(), e[:, 1].copy()

    def to_dict(self):
        return {"kind": "graphic", "vertex_count": self.vertex_count,
                "edges": [list(e) for e in self.edges]}

    def __repr__(self):
        label = self.name or f"{self.vertex_count} vertices"
        return f"GraphicMatroid({label}, {self.ground_size} edges)"


class _GraphTracker:
    # bare union-find; trackers are created for every greedy run
    def __init__(self, g: GraphicMatroid):
        self.edges = g.edges
        self.parent = list(range(g.vertex_count))

    def try_add(self, a):
        parent = self.parent
        u, v = self.edges[a]
        while parent[u] != u:
            parent[u] = u = parent[parent[u]]
        while parent[v] != v:
            parent[v] = v = parent[parent[v]]
        if u == v:
            return False
        parent[u] = v
        return True

    def spans(self, a):
        parent = self.parent
        u, v = self.edges[a]
        while parent[u] != u:
            u = parent[u]
        while parent[v] != v:
            v = parent[v]
        return u == v


# -- construction helpers ---------------------------------------------------

def complete_graph(n: int) -> GraphicMatroid:
    edges = list(itertools.combinations(range(n), 2))
    return GraphicMatroid(n, edges, name=f"K{n}")


def cycle_graph(n: int) -> GraphicMatroid:
    if n < 2:
        raise ValueError("cycle needs at least 2 vertices")
    edges = [(i, (i + 1) % n) for i in range(n)]
    return GraphicMatroid(n, edges, name=f"C{n}")


def path_graph(n: int) -> GraphicMatroid:
    """A path on ``n`` vertices; a tree, so every edge is a bridge."""
    return GraphicMatroid(n, [(i, i + 1) for i in range(n - 1)], name=f"P{n}")


def parse_edge_list(text: str, vertex_count: int | None = None) -> GraphicMatroid:
    """Parse ``u v`` pairs, one per line, 0-based.  ``#`` starts a comment."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if vertex_count is None:
        vertex_count = 1 + max((max(e) for e in edges), default=0)
    return GraphicMatroid(vertex_count, edges)


def read_edge_list(path: str | Path, vertex_count: int | None = None) -> GraphicMatroid:
    g = parse_edge_list(Path(path).read_text(), vertex_count)
    g.name = Path(path).name
    return g


def format_edge_list(g: GraphicMatroid) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges)


def matroid_from_dict(d: dict) -> Matroid:
    kind = d.get("kind")
    if kind == "uniform":
        return UniformMatroid(d["n"], d["k"])
    if kind == "graphic":
        return GraphicMatroid(d["vertex_count"], [tuple(e) for e in d["edges"]], name=d.get("name"))
    raise ValueError(f"unknown matroid kind {kind!r}")


# -- algorithms -------------------------------------------------------------

def rank(matroid: Matroid, subset: Iterable[int]) -> int:
    return matroid.rank(subset)


def bridges(matroid: Matroid, subset: Iterable[int] = None) -> frozenset:
    return matroid.bridges(subset)


def is_bridgeless(matroid: Matroid) -> bool:
    return matroid.is_bridgeless()


def greedy_order(costs: Sequence[float]) -> list[int]:
    """Element indices sorted by ``(cost, index)``."""
    return sorted(range(len(costs)), key=lambda a: (costs[a], a))


def greedy_min_basis(matroid: Matroid, costs: Sequence[float],
                     excluded: Iterable[int] = (), zeroed: Iterable[int] = (),
                     order: Sequence[int] | None = None) -> tuple[frozenset, float]:
    """Minimum-cost basis by the greedy algorithm.

    ``excluded`` elements behave as if their cost were infinite and
    ``zeroed`` elements as if it were 0.  Ties are broken by element index.
    ``order`` may pass a precomputed :func:`greedy_order` of ``costs``.
    Raises :class:`NoFiniteBasisError` if no basis avoids ``excluded``.
    """
    if len(costs) != matroid.ground_size:
        raise ValueError(f"expected {matroid.ground_size} costs, got {len(costs)}")
    if not isinstance(excluded, (set, frozenset)):
        excluded = frozenset(excluded)
    if not isinstance(zeroed, (set, frozenset)):
        zeroed = frozenset(zeroed)
    if order is None:
        order = greedy_order(costs)
    tracker = matroid.tracker()
    full = matroid.full_rank
    basis = []
    total = 0.0
    tail = order
    if zeroed:
        # zeroed items join the cost-0 prefix, which stays ordered by index
        i0 = 0
        while i0 < len(order) and costs[order[i0]] == 0:
            i0 += 1
        for a in sorted(zeroed.union(order[:i0])):
            if a not in excluded and tracker.try_add(a):
                basis.append(a)
        tail = order[i0:]
        excluded = excluded | zeroed
    for a in tail:
        if len(basis) == full:
            break
        if a not in excluded and tracker.try_add(a):
            basis.append(a)
            total += costs[a]
    if len(basis) < full:
        raise NoFiniteBasisError(f"no basis avoids excluded elements {sorted(excluded)}")
    return frozenset(basis), total


def enumerate_bases(matroid: Matroid) -> list[frozenset]:
    """All bases by exhaustive search over subsets of size ``rank(A)``."""
    r = matroid.full_rank
    return [frozenset(c) for c in itertools.combinations(range(matroid.ground_size), r)
            if matroid.rank(c) == r]


@lru_cache(maxsize=64)
def _cached_bases(matroid: Matroid) -> tuple[frozenset, ...]:
    return tuple(enumerate_bases(matroid))


def check_axioms(matroid: Matroid, max_ground: int = 10) -> None:
    """Exhaustively verify the rank axioms; raises ``AssertionError`` on failure."""
    n = matroid.ground_size
    if n > max_ground:
        raise ValueError(f"exhaustive check limited to {max_ground} elements")
    ranks = {}
    for mask in range(1 << n):
        s = frozenset(i for i in range(n) if mask >> i & 1)
        ranks[mask] = matroid.rank(s)
    assert ranks[0] == 0, "rank(empty) != 0"
    for mask, r in ranks.items():
        assert 0 <= r <= bin(mask).count("1"), f"rank bound violated at {mask:b}"
        for i in range(n):
            if not mask >> i & 1:
                bigger = ranks[mask | 1 << i]
                assert r <= bigger <= r + 1, f"unit increase/monotonicity violated at {mask:b}+{i}"
    for s in ranks:
        for t in ranks:
            assert ranks[s | t] + ranks[s & t] <= ranks[s] + ranks[t], "submodularity violated"
