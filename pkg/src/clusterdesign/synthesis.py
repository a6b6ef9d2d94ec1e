"""Construction of graphs whose automorphism orbits have prescribed sizes.

Clusters and path positions are 1-based throughout, matching how cluster
sizes are quoted (``r_1..r_k``).  Node ids are assigned cluster by cluster:
cluster 1 occupies ids ``0..r_1-1``, cluster 2 the next ``r_2`` ids, etc.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Iterable, Sequence

from .graph_core import NodeLabel, OrientedGraph

PathOrder = tuple[int, ...]
TreeTopology = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ClusterSpec:
    r: tuple[int, ...]

    def __post_init__(self) -> None:
        r = tuple(int(x) for x in self.r)
        if not r:
            raise ValueError("at least one cluster is required")
        if any(x < 1 for x in r):
            raise ValueError(f"cluster sizes must be positive, got {r}")
        object.__setattr__(self, "r", r)

    @classmethod
    def of(cls, *sizes: int) -> "ClusterSpec":
        return cls(tuple(sizes))

    @classmethod
    def parse(cls, text: str) -> "ClusterSpec":
        try:
            return cls(tuple(int(x) for x in text.split(",") if x.strip()))
        except ValueError as exc:
            raise ValueError(f"bad cluster list {text!r}: {exc}") from None

    @property
    def k(self) -> int:
        return len(self.r)

    @property
    def n(self) -> int:
        return sum(self.r)

    def size(self, cluster: int) -> int:
        return self.r[cluster - 1]

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for x in self.r:
            out.append(acc)
            acc += x
        return out

    def node_id(self, cluster: int, index: int) -> int:
        return self.offsets()[cluster - 1] + index - 1

    def labels(self) -> tuple[NodeLabel, ...]:
        return tuple(NodeLabel(j, p) for j, rj in enumerate(self.r, 1) for p in range(1, rj + 1))


def wrap(p: int, r: int) -> int:
    """Map ``p >= 1`` onto ``1..r`` cyclically (``r`` maps to ``r``)."""
    return (p - 1) % r + 1


def check_path(spec: ClusterSpec, path: Sequence[int]) -> PathOrder:
    path = tuple(int(x) for x in path)
    if sorted(path) != list(range(1, spec.k + 1)):
        raise ValueError(f"path {path} is not a permutation of 1..{spec.k}")
    return path


def path_pairs(path: Sequence[int]) -> list[tuple[int, int]]:
    return list(zip(path[:-1], path[1:]))


def _lcm_edges(spec: ClusterSpec, i: int, j: int) -> set[tuple[int, int]]:
    ri, rj = spec.size(i), spec.size(j)
    return {
        (spec.node_id(i, wrap(p, ri)), spec.node_id(j, wrap(p, rj)))
        for p in range(1, lcm(ri, rj) + 1)
    }


def _smallest_cluster_cycle(spec: ClusterSpec) -> set[tuple[int, int]]:
    r_min = min(spec.r)
    if r_min < 2:
        return set()
    smallest = spec.r.index(r_min) + 1
    return {
        (spec.node_id(smallest, p), spec.node_id(smallest, wrap(p + 1, r_min)))
        for p in range(1, r_min + 1)
    }


def build_on_tree(spec: ClusterSpec, tree: Iterable[tuple[int, int]]) -> OrientedGraph:
    """Apply the modular edge rule over arbitrary oriented cluster pairs.

    Each ``(i, j)`` pair adds ``lcm(r_i, r_j)`` edges from cluster ``i`` to
    cluster ``j``; the smallest cluster gets a directed cycle when its size
    is at least 2.  Only paths are guaranteed to give the prescribed orbits.
    """
    edges: set[tuple[int, int]] = set()
    for i, j in tree:
        edges |= _lcm_edges(spec, i, j)
    edges |= _smallest_cluster_cycle(spec)
    return OrientedGraph(spec.n, tuple(edges), spec.labels())


def build_sparse(spec: ClusterSpec, path: Sequence[int]) -> OrientedGraph:
    path = check_path(spec, path)
    return build_on_tree(spec, path_pairs(path))


def build_robust(spec: ClusterSpec, path: Sequence[int]) -> OrientedGraph:
    path = check_path(spec, path)
    if spec.k == 1:
        n = spec.n
        edges = tuple((a, b) for a in range(n) for b in range(n) if a != b)
        return OrientedGraph(n, edges, spec.labels())
    edges = set()
    for i, j in path_pairs(path):
        for pi in range(1, spec.size(i) + 1):
            for pj in range(1, spec.size(j) + 1):
                edges.add((spec.node_id(i, pi), spec.node_id(j, pj)))
    return OrientedGraph(spec.n, tuple(edges), spec.labels())


def global_bound_path(spec: ClusterSpec) -> PathOrder:
    """Largest, smallest, second largest, second smallest, ... cluster."""
    ranked = sorted(range(1, spec.k + 1), key=lambda j: (-spec.size(j), j))
    order = []
    lo, hi = 0, len(ranked) - 1
    while lo <= hi:
        order.append(ranked[lo])
        if lo != hi:
            order.append(ranked[hi])
        lo += 1
        hi -= 1
    return tuple(order)


def sparse_edge_count(spec: ClusterSpec, path: Sequence[int]) -> int:
    """Edge count of ``build_sparse`` without building the graph."""
    total = sum(lcm(spec.size(i), spec.size(j)) for i, j in path_pairs(path))
    r_min = min(spec.r)
    if r_min >= 2:
        total += r_min
    return total


def robust_edge_count(spec: ClusterSpec, path: Sequence[int]) -> int:
    if spec.k == 1:
        return spec.n * (spec.n - 1)
    return sum(spec.size(i) * spec.size(j) for i, j in path_pairs(path))
