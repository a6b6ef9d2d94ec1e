"""Automorphism group action of oriented graphs.

``orbit_partition`` never builds the group.  It refines node colours until
stable, then for each candidate pair ``(u, v)`` inside one colour cell runs an
individualise-and-refine backtracking search for a single automorphism
mapping ``u`` to ``v``.  Every automorphism found is folded into a
union-find, so most pairs are settled without a search.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .graph_core import OrientedGraph, Partition, normalize_partition

Permutation = tuple[int, ...]

ORACLE_LIMIT = 9


class OracleLimitError(ValueError):
    pass


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # smaller id wins so roots are block minima
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx

    def blocks(self) -> Partition:
        groups: dict[int, list[int]] = {}
        for v in range(len(self.parent)):
            groups.setdefault(self.find(v), []).append(v)
        return normalize_partition(groups.values())


@dataclass(frozen=True)
class OrbitPartition:
    partition: Partition

    @property
    def blocks(self) -> Partition:
        return self.partition

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.partition)

    def size_multiset(self) -> tuple[int, ...]:
        return tuple(sorted(self.sizes))

    def to_dict(self) -> dict:
        return {"blocks": [list(b) for b in self.partition], "sizes": list(self.sizes)}


def _check_perm(g: OrientedGraph, psi: Sequence[int]) -> None:
    if len(psi) != g.node_count:
        raise ValueError(f"permutation has {len(psi)} entries, graph has {g.node_count} nodes")
    if sorted(psi) != list(range(g.node_count)):
        raise ValueError("not a permutation of the node ids")


def is_automorphism(g: OrientedGraph, psi: Sequence[int]) -> bool:
    """True iff ``u -> v`` is an edge exactly when ``psi[u] -> psi[v]`` is."""
    _check_perm(g, psi)
    edges = g.edge_set
    # psi is a bijection on a finite edge set, so image inclusion is enough
    return all((psi[t], psi[h]) in edges for t, h in g.edges)


def enumerate_automorphisms(g: OrientedGraph, limit: int = ORACLE_LIMIT) -> list[Permutation]:
    """Brute force over all ``n!`` permutations; a test oracle only."""
    if g.node_count > limit:
        raise OracleLimitError(
            f"{g.node_count} nodes exceeds the brute-force limit of {limit}; "
            "use orbit_partition instead"
        )
    return [p for p in itertools.permutations(range(g.node_count)) if is_automorphism(g, p)]


def orbits_from_group(n: int, perms: Sequence[Sequence[int]]) -> Partition:
    uf = UnionFind(n)
    for p in perms:
        for v in range(n):
            uf.union(v, p[v])
    return uf.blocks()


# --- colour refinement -------------------------------------------------


def _refine(g: OrientedGraph, colourings: list[list[int]]) -> list[list[int]]:
    """Jointly refine several colourings until the cell count is stable.

    New colour ids come from one shared sorted signature table, so equal
    colours mean the same thing across all colourings being refined.
    """
    outs, ins = g.out_neighbors, g.in_neighbors
    cells = len(set(c for col in colourings for c in col))
    while True:
        sigs = [
            [
                (col[v], tuple(sorted(col[w] for w in outs[v])), tuple(sorted(col[w] for w in ins[v])))
                for v in g.nodes
            ]
            for col in colourings
        ]
        table = {s: i for i, s in enumerate(sorted(set(s for row in sigs for s in row)))}
        colourings = [[table[s] for s in row] for row in sigs]
        if len(table) == cells:
            return colourings
        cells = len(table)


def equitable_colouring(g: OrientedGraph) -> list[int]:
    """Stable colouring seeded by (in-degree, out-degree)."""
    seed = [(len(g.in_neighbors[v]), len(g.out_neighbors[v])) for v in g.nodes]
    table = {s: i for i, s in enumerate(sorted(set(seed)))}
    return _refine(g, [[table[s] for s in seed]])[0]


def _individualise(colouring: list[int], v: int) -> list[int]:
    # fresh colour above every existing one
    out = list(colouring)
    out[v] = max(colouring) + 1
    return out


def _histogram(col: list[int]) -> dict[int, int]:
    hist: dict[int, int] = {}
    for c in col:
        hist[c] = hist.get(c, 0) + 1
    return hist


def _search(g: OrientedGraph, left: list[int], right: list[int]) -> Optional[Permutation]:
    """Find an automorphism mapping the ``left`` colouring onto ``right``."""
    left, right = _refine(g, [left, right])
    if _histogram(left) != _histogram(right):
        return None
    n = g.node_count
    if len(set(left)) == n:
        where = {c: v for v, c in enumerate(right)}
        psi = tuple(where[left[v]] for v in range(n))
        return psi if is_automorphism(g, psi) else None
    # first non-singleton cell (smallest colour), smallest node on the left
    hist = _histogram(left)
    target = min(c for c, k in hist.items() if k > 1)
    a = min(v for v in range(n) if left[v] == target)
    for b in (v for v in range(n) if right[v] == target):
        psi = _search(g, _individualise(left, a), _individualise(right, b))
        if psi is not None:
            return psi
    return None


def find_automorphism(
    g: OrientedGraph, u: int, v: int, colouring: Optional[list[int]] = None
) -> Optional[Permutation]:
    """Some automorphism sending ``u`` to ``v``, or None if they are not exchangeable."""
    if colouring is None:
        colouring = equitable_colouring(g)
    if colouring[u] != colouring[v]:
        return None
    n = g.node_count
    if u == v:
        return tuple(range(n))
    swap = list(range(n))
    swap[u], swap[v] = v, u
    if is_automorphism(g, swap):
        return tuple(swap)
    return _search(g, _individualise(colouring, u), _individualise(colouring, v))


def orbit_partition(g: OrientedGraph) -> OrbitPartition:
    colouring = equitable_colouring(g)
    uf = UnionFind(g.node_count)
    reps: dict[int, list[int]] = {}
    for v in g.nodes:
        cell_reps = reps.setdefault(colouring[v], [])
        for u in cell_reps:
            if uf.find(u) == uf.find(v):
                break
            psi = find_automorphism(g, u, v, colouring)
            if psi is not None:
                for w in g.nodes:
                    uf.union(w, psi[w])
                break
        else:
            cell_reps.append(v)
    return OrbitPartition(uf.blocks())


def exchangeable(g: OrientedGraph, u: int, v: int) -> bool:
    for x in (u, v):
        if not 0 <= x < g.node_count:
            raise ValueError(f"node {x} not in graph")
    return find_automorphism(g, u, v) is not None


def iter_orbit_generators(g: OrientedGraph) -> Iterator[Permutation]:
    """Automorphisms that together connect every orbit (not a full group)."""
    for block in orbit_partition(g).partition:
        for v in block[1:]:
            psi = find_automorphism(g, block[0], v)
            assert psi is not None
            yield psi
