"""Oriented graphs with optional cluster-tagged nodes.

Nodes are the integers ``0..n-1``; an edge ``(tail, head)`` points from
``tail`` to ``head``.  Graphs are immutable and their edge tuple is kept
sorted so serialization and incidence columns are deterministic.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

Edge = tuple[int, int]
Partition = tuple[tuple[int, ...], ...]


@dataclass(frozen=True, order=True)
class NodeLabel:
    cluster: int
    index: int


@dataclass(frozen=True)
class OrientedGraph:
    node_count: int
    edges: tuple[Edge, ...] = ()
    labels: tuple[Optional[NodeLabel], ...] = field(default=(), compare=True)

    def __post_init__(self) -> None:
        n = self.node_count
        if n < 1:
            raise ValueError("a graph needs at least one node")
        edges = tuple(sorted((int(t), int(h)) for t, h in self.edges))
        for t, h in edges:
            if not (0 <= t < n and 0 <= h < n):
                raise ValueError(f"edge {(t, h)} references a node outside 0..{n - 1}")
            if t == h:
                raise ValueError(f"self-loop at node {t}")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate directed edge")
        labels = tuple(self.labels) if self.labels else (None,) * n
        if len(labels) != n:
            raise ValueError("one label (or None) per node is required")
        tagged = [lab for lab in labels if lab is not None]
        if len(set(tagged)) != len(tagged):
            raise ValueError("(cluster, index) labels must be unique")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", labels)

    @property
    def nodes(self) -> range:
        return range(self.node_count)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for t, h in self.edges:
            out[t].append(h)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in self.nodes]
        for t, h in self.edges:
            inc[h].append(t)
        return tuple(tuple(x) for x in inc)

    def has_edge(self, tail: int, head: int) -> bool:
        return (tail, head) in self.edge_set

    def cluster_blocks(self) -> Partition:
        """Node blocks grouped by cluster tag, ordered by cluster index."""
        if any(lab is None for lab in self.labels):
            raise ValueError("graph has untagged nodes")
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(self.labels):
            groups.setdefault(lab.cluster, []).append(v)
        return tuple(tuple(groups[c]) for c in sorted(groups))

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        nodes = []
        for v, lab in enumerate(self.labels):
            nodes.append(
                {
                    "id": v,
                    "cluster": lab.cluster if lab else None,
                    "index": lab.index if lab else None,
                }
            )
        return {"nodes": nodes, "edges": [[t, h] for t, h in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "OrientedGraph":
        nodes = sorted(doc["nodes"], key=lambda d: d["id"])
        if [d["id"] for d in nodes] != list(range(len(nodes))):
            raise ValueError("node ids must be 0..n-1")
        labels = []
        for d in nodes:
            c, i = d.get("cluster"), d.get("index")
            labels.append(NodeLabel(int(c), int(i)) if c is not None and i is not None else None)
        return cls(len(nodes), tuple(tuple(e) for e in doc["edges"]), tuple(labels))

    @classmethod
    def from_json(cls, text: str) -> "OrientedGraph":
        return cls.from_dict(json.loads(text))


# Palette indexed by cluster number (cycled).
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def to_dot(g: OrientedGraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{", "  node [style=filled, fontcolor=white];"]
    for v, lab in enumerate(g.labels):
        if lab is None:
            lines.append(f'  {v} [label="{v}", fillcolor="#444444"];')
        else:
            color = PALETTE[(lab.cluster - 1) % len(PALETTE)]
            lines.append(
                f'  {v} [label="v{lab.cluster}_{lab.index}", fillcolor="{color}"];'
            )
    for t, h in g.edges:
        lines.append(f"  {t} -> {h};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def normalize_partition(blocks: Iterable[Iterable[int]]) -> Partition:
    """Sort members inside blocks and order blocks by their minimum node."""
    out = [tuple(sorted(b)) for b in blocks]
    out = [b for b in out if b]
    return tuple(sorted(out, key=lambda b: b[0]))


def check_partition(parts: Sequence[Iterable[int]], node_count: int) -> Partition:
    parts = [tuple(b) for b in parts]
    seen = [v for b in parts for v in b]
    if any(not b for b in parts):
        raise ValueError("partition blocks must be non-empty")
    if sorted(seen) != list(range(node_count)):
        raise ValueError("blocks must cover every node exactly once")
    return tuple(parts)


def incidence_matrix(g: OrientedGraph) -> np.ndarray:
    """Node-by-edge incidence matrix: +1 at the head row, -1 at the tail row."""
    mat = np.zeros((g.node_count, g.edge_count), dtype=np.int64)
    for e, (t, h) in enumerate(g.edges):
        mat[h, e] = 1
        mat[t, e] = -1
    return mat


def is_weakly_connected(g: OrientedGraph) -> bool:
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in g.out_neighbors[v] + g.in_neighbors[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == g.node_count


def induced_subgraph(g: OrientedGraph, keep: Iterable[int]) -> OrientedGraph:
    """Subgraph on ``keep`` re-indexed in ascending order; labels carried over."""
    kept = sorted(set(keep))
    if not kept:
        raise ValueError("induced subgraph needs at least one node")
    if kept[0] < 0 or kept[-1] >= g.node_count:
        raise ValueError("keep set references unknown nodes")
    pos = {v: i for i, v in enumerate(kept)}
    edges = tuple((pos[t], pos[h]) for t, h in g.edges if t in pos and h in pos)
    return OrientedGraph(len(kept), edges, tuple(g.labels[v] for v in kept))


def quotient(g: OrientedGraph, parts: Sequence[Iterable[int]]) -> OrientedGraph:
    """Collapse each block to a node; block ``l`` becomes node ``l``."""
    parts = check_partition(parts, g.node_count)
    where = {}
    for l, block in enumerate(parts):
        for v in block:
            where[v] = l
    edges = {(where[t], where[h]) for t, h in g.edges if where[t] != where[h]}
    return OrientedGraph(len(parts), tuple(edges))
