"""Edge-count bounds for orbit-structured graphs.

Tree minima are computed with Kruskal's algorithm over the complete
cluster graph; path minima with a subset dynamic program over
``(visited set, endpoint)`` states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .automorphisms import UnionFind
from .synthesis import (
    ClusterSpec,
    PathOrder,
    TreeTopology,
    build_robust,
    build_sparse,
    global_bound_path,
    path_pairs,
    robust_edge_count,
)

EXACT_PATH_LIMIT = 16

Weight = Callable[[int, int], int]


def gcd(a: int, b: int) -> int:
    if a < 1 or b < 1:
        raise ValueError(f"gcd needs positive integers, got {a}, {b}")
    return math.gcd(a, b)


def lcm(a: int, b: int) -> int:
    if a < 1 or b < 1:
        raise ValueError(f"lcm needs positive integers, got {a}, {b}")
    return a * b // math.gcd(a, b)


def lcm_weight(spec: ClusterSpec) -> Weight:
    return lambda i, j: lcm(spec.size(i), spec.size(j))


def product_weight(spec: ClusterSpec) -> Weight:
    return lambda i, j: spec.size(i) * spec.size(j)


def min_spanning_tree(k: int, weight: Weight) -> tuple[int, TreeTopology]:
    """Kruskal on the complete graph over ``1..k``; ties broken by (i, j)."""
    pairs = sorted(
        ((weight(i, j), i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1))
    )
    uf = UnionFind(k + 1)
    total, tree = 0, []
    for w, i, j in pairs:
        if uf.find(i) != uf.find(j):
            uf.union(i, j)
            total += w
            tree.append((i, j))
            if len(tree) == k - 1:
                break
    return total, tuple(tree)


def path_cost(path: PathOrder, weight: Weight) -> int:
    return sum(weight(i, j) for i, j in path_pairs(path))


def min_hamiltonian_path(k: int, weight: Weight) -> tuple[int, PathOrder]:
    """Exact minimum-weight Hamiltonian path; lexicographically smallest optimum.

    ``best[mask, v]`` is the cheapest path covering ``mask`` that ends at
    ``v``.  Costs are symmetric, so it is also the cheapest one starting at
    ``v``, which lets the optimum be read off greedily from the front.
    """
    if k == 1:
        return 0, (1,)
    w = np.array([[weight(i + 1, j + 1) if i != j else 0 for j in range(k)] for i in range(k)],
                 dtype=np.int64)
    inf = np.iinfo(np.int64).max // 4
    full = (1 << k) - 1
    best = np.full((1 << k, k), inf, dtype=np.int64)
    for v in range(k):
        best[1 << v, v] = 0
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        ends = [v for v in range(k) if mask >> v & 1]
        prev = np.array([mask ^ (1 << v) for v in ends])
        # cand[a, u] = best[mask - v_a, u] + w[u, v_a]
        cand = best[prev] + w[:, ends].T
        best[mask, ends] = cand.min(axis=1)

    opt = int(best[full].min())
    start = int(np.flatnonzero(best[full] == opt)[0])
    order, mask, cur, remaining = [start], full, start, opt
    while len(order) < k:
        mask ^= 1 << cur
        for nxt in range(k):
            if mask >> nxt & 1 and best[mask, nxt] + w[cur, nxt] == remaining:
                remaining -= int(w[cur, nxt])
                order.append(nxt)
                cur = nxt
                break
    return opt, tuple(v + 1 for v in order)


def lower_bound(spec: ClusterSpec) -> tuple[int, TreeTopology]:
    return min_spanning_tree(spec.k, lcm_weight(spec))


@dataclass(frozen=True)
class PathBound:
    value: int
    path: PathOrder
    optimal: bool


def _path_minimum(spec: ClusterSpec, weight: Weight, limit: int) -> tuple[int, PathOrder, bool]:
    if spec.k <= limit:
        cost, path = min_hamiltonian_path(spec.k, weight)
        return cost, path, True
    path = global_bound_path(spec)
    return path_cost(path, weight), path, False


def upper_bound(spec: ClusterSpec, limit: int = EXACT_PATH_LIMIT) -> PathBound:
    cost, path, exact = _path_minimum(spec, lcm_weight(spec), limit)
    return PathBound(cost + min(spec.r), path, exact)


@dataclass(frozen=True)
class RobustBounds:
    m_robust: int
    M_robust: int
    path: PathOrder
    optimal: bool
    tree: TreeTopology = ()


def robust_bounds(spec: ClusterSpec, limit: int = EXACT_PATH_LIMIT) -> RobustBounds:
    weight = product_weight(spec)
    m_r, tree = min_spanning_tree(spec.k, weight)
    cost, path, exact = _path_minimum(spec, weight, limit)
    return RobustBounds(m_r, cost, path, exact, tree)


def global_upper_bound(spec: ClusterSpec) -> Fraction:
    return Fraction((spec.k - 1) * spec.n**2, spec.k**2)


def gcd_ratio(spec: ClusterSpec) -> int:
    """Largest pairwise gcd of cluster sizes (1 when there is a single cluster)."""
    r = spec.r
    return max((math.gcd(a, b) for i, a in enumerate(r) for b in r[i + 1:]), default=1)


def bounded_size_cap(spec: ClusterSpec, through_q: bool = False) -> int:
    """Cap on the sorted-path sparse construction for sizes bounded by ``q``.

    ``sum_{l: m_l > 0} (m_l - 1) l + sum_{l=1}^{q-1} l (l - 1) + r_min`` where
    ``m_l`` counts clusters of size ``l``.  Stopping the middle sum at
    ``q - 1`` can undercount the jump into the largest size, e.g. sizes
    (1, 2); ``through_q=True`` runs it up to ``q``, which always dominates
    the construction.
    """
    counts: dict[int, int] = {}
    for x in spec.r:
        counts[x] = counts.get(x, 0) + 1
    q = max(spec.r)
    top = q if through_q else q - 1
    return (
        sum((m - 1) * size for size, m in counts.items())
        + sum(l * (l - 1) for l in range(1, top + 1))
        + min(spec.r)
    )


@dataclass
class BoundReport:
    spec: ClusterSpec
    m: int
    m_tree: TreeTopology
    M: int
    M_path: PathOrder
    M_optimal: bool
    m_robust: int
    m_robust_tree: TreeTopology
    M_robust: int
    M_robust_path: PathOrder
    global_cap: Fraction
    global_path: PathOrder
    global_path_robust_edges: int
    realized_sparse_edges: int
    realized_robust_edges: int
    rho: int
    bounded_size_cap: int
    bounded_size_cap_through_q: int
    sorted_path_sparse_edges: int
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "clusters": list(self.spec.r),
            "n": self.spec.n,
            "k": self.spec.k,
            "m": self.m,
            "m_tree": [list(e) for e in self.m_tree],
            "M": self.M,
            "M_path": list(self.M_path),
            "M_optimal": self.M_optimal,
            "m_robust": self.m_robust,
            "m_robust_tree": [list(e) for e in self.m_robust_tree],
            "M_robust": self.M_robust,
            "M_robust_path": list(self.M_robust_path),
            "global_cap": str(self.global_cap),
            "global_path": list(self.global_path),
            "global_path_robust_edges": self.global_path_robust_edges,
            "realized_sparse_edges": self.realized_sparse_edges,
            "realized_robust_edges": self.realized_robust_edges,
            "rho": self.rho,
            "bounded_size_cap": self.bounded_size_cap,
            "bounded_size_cap_through_q": self.bounded_size_cap_through_q,
            "sorted_path_sparse_edges": self.sorted_path_sparse_edges,
            "notes": list(self.notes),
        }


def bound_report(spec: ClusterSpec, limit: int = EXACT_PATH_LIMIT) -> BoundReport:
    m, tree = lower_bound(spec)
    ub = upper_bound(spec, limit)
    rb = robust_bounds(spec, limit)
    gpath = global_bound_path(spec)
    sorted_spec = ClusterSpec(tuple(sorted(spec.r)))
    sorted_edges = build_sparse(sorted_spec, range(1, spec.k + 1)).edge_count
    report = BoundReport(
        spec=spec,
        m=m,
        m_tree=tree,
        M=ub.value,
        M_path=ub.path,
        M_optimal=ub.optimal,
        m_robust=rb.m_robust,
        m_robust_tree=rb.tree,
        M_robust=rb.M_robust,
        M_robust_path=rb.path,
        global_cap=global_upper_bound(spec),
        global_path=gpath,
        global_path_robust_edges=robust_edge_count(spec, gpath),
        realized_sparse_edges=build_sparse(spec, ub.path).edge_count,
        realized_robust_edges=build_robust(spec, rb.path).edge_count,
        rho=gcd_ratio(spec),
        bounded_size_cap=bounded_size_cap(spec),
        bounded_size_cap_through_q=bounded_size_cap(spec, through_q=True),
        sorted_path_sparse_edges=sorted_edges,
    )
    if spec.k == 1 and spec.n > 1:
        report.notes.append("single cluster: the robust graph is complete, outside the path-product bounds")
    if min(spec.r) == 1 and spec.k > 1:
        report.notes.append("M adds min r_i = 1 but the construction adds no cycle edges")
    if not ub.optimal:
        report.notes.append(f"k > {limit}: path values use the alternating heuristic, not certified optimal")
    if report.bounded_size_cap < sorted_edges:
        report.notes.append("cap with the sum stopping at q-1 is below the sorted-path edge count")
    return report
