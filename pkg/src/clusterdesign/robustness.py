"""Orbit-structure checks, including survival under node removal."""
from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .automorphisms import orbit_partition
from .graph_core import (
    OrientedGraph,
    Partition,
    check_partition,
    induced_subgraph,
    is_weakly_connected,
    normalize_partition,
)
from .synthesis import ClusterSpec

EXHAUSTIVE_BUDGET = 2**14
DEFAULT_SAMPLES = 10_000


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    removed: tuple[int, ...]
    expected: Partition
    actual: Partition
    connected: bool

    def to_dict(self) -> dict:
        return {
            "removed": list(self.removed),
            "expected": [list(b) for b in self.expected],
            "actual": [list(b) for b in self.actual],
            "induced_weakly_connected": self.connected,
        }


def _check_sizes(g: OrientedGraph, spec: ClusterSpec) -> None:
    if g.node_count != spec.n:
        raise ValueError(f"graph has {g.node_count} nodes but the clusters sum to {spec.n}")


def verify_os_type(g: OrientedGraph, spec: ClusterSpec) -> bool:
    _check_sizes(g, spec)
    if not is_weakly_connected(g):
        return False
    return orbit_partition(g).size_multiset() == tuple(sorted(spec.r))


def check_removal(g: OrientedGraph, clusters: Partition, removed: Sequence[int]) -> Optional[Witness]:
    """None if the induced orbits equal the surviving parts of ``clusters``."""
    gone = set(removed)
    kept = [v for v in g.nodes if v not in gone]
    sub = induced_subgraph(g, kept)
    expected = normalize_partition([v for v in block if v not in gone] for block in clusters)
    actual = normalize_partition(
        [kept[i] for i in block] for block in orbit_partition(sub).partition
    )
    if actual == expected:
        return None
    return Witness(tuple(sorted(gone)), expected, actual, is_weakly_connected(sub))


def removal_count(n: int, s: int) -> int:
    return sum(math.comb(n, j) for j in range(1, min(s, n - 1) + 1))


def iter_removals(n: int, s: int) -> Iterator[tuple[int, ...]]:
    """All removal sets of size 1..s leaving at least one node, smallest first."""
    for size in range(1, min(s, n - 1) + 1):
        yield from itertools.combinations(range(n), size)


def sample_removals(n: int, s: int, count: int, seed: int = 0) -> list[tuple[int, ...]]:
    """Uniform draws from the removal sets enumerated by ``iter_removals``."""
    rng = random.Random(seed)
    sizes = list(range(1, min(s, n - 1) + 1))
    weights = [math.comb(n, j) for j in sizes]
    out = []
    for size in rng.choices(sizes, weights=weights, k=count):
        out.append(tuple(sorted(rng.sample(range(n), size))))
    return out


def verify_s_robust(
    g: OrientedGraph,
    spec: ClusterSpec,
    s: int,
    *,
    budget: int = EXHAUSTIVE_BUDGET,
    sample: Optional[int] = None,
    seed: int = 0,
) -> tuple[bool, Optional[Witness]]:
    """Check every removal of up to ``s`` nodes preserves the orbit structure.

    Removal sets are tried in (size, lexicographic) order, so the returned
    witness is the first failing one in that order.  When more than
    ``budget`` sets exist, ``sample`` must give a number of seeded random
    draws to try instead.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    if not verify_os_type(g, spec):
        raise ValueError("graph is not of the requested orbit structure")
    clusters = orbit_partition(g).partition
    total = removal_count(g.node_count, s)
    if total > budget:
        if sample is None:
            raise BudgetExceeded(
                f"{total} removal sets exceed the budget of {budget}; pass sample=N for sampled mode"
            )
        removals: Iterable[tuple[int, ...]] = sorted(
            set(sample_removals(g.node_count, s, sample, seed)), key=lambda a: (len(a), a)
        )
    else:
        removals = iter_removals(g.node_count, s)
    for removed in removals:
        witness = check_removal(g, clusters, removed)
        if witness is not None:
            return False, witness
    return True, None


def verify_totally_robust(g: OrientedGraph, spec: ClusterSpec, **kwargs) -> tuple[bool, Optional[Witness]]:
    return verify_s_robust(g, spec, g.node_count, **kwargs)


def block_status(g: OrientedGraph, parts: Sequence[Sequence[int]]) -> dict[tuple[int, int], str]:
    """Classify each inter-block edge set as empty, complete or partial.

    Keys are 1-based block positions ``(i, j)`` with ``i < j``.  A block pair
    is complete when each direction it uses holds all ``r_i * r_j`` edges.
    """
    parts = check_partition(parts, g.node_count)
    where = {v: l for l, block in enumerate(parts) for v in block}
    counts = Counter((where[t], where[h]) for t, h in g.edges if where[t] != where[h])
    status = {}
    for i, j in itertools.combinations(range(len(parts)), 2):
        full = len(parts[i]) * len(parts[j])
        fwd, bwd = counts[(i, j)], counts[(j, i)]
        if fwd == bwd == 0:
            status[(i + 1, j + 1)] = "empty"
        elif fwd in (0, full) and bwd in (0, full):
            status[(i + 1, j + 1)] = "complete"
        else:
            status[(i + 1, j + 1)] = "partial"
    return status


@dataclass
class RobustnessReport:
    is_os: bool
    orbit_sizes: tuple[int, ...]
    blocks: Partition
    weakly_connected: bool
    block_status: dict[tuple[int, int], str]
    requested_s: int = 0
    max_verified_s: int = 0
    robust: Optional[bool] = None
    sampled: bool = False
    subsets_checked: int = 0
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.is_os and (self.requested_s == 0 or bool(self.robust))

    def to_dict(self) -> dict:
        return {
            "is_os": self.is_os,
            "weakly_connected": self.weakly_connected,
            "orbit_sizes": sorted(self.orbit_sizes),
            "blocks": [list(b) for b in self.blocks],
            "block_status": {f"{i},{j}": v for (i, j), v in sorted(self.block_status.items())},
            "requested_s": self.requested_s,
            "max_verified_s": self.max_verified_s,
            "robust": self.robust,
            "sampled": self.sampled,
            "subsets_checked": self.subsets_checked,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "passed": self.passed,
        }


def robustness_report(
    g: OrientedGraph,
    spec: ClusterSpec,
    s: int = 0,
    *,
    budget: int = EXHAUSTIVE_BUDGET,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> RobustnessReport:
    """Orbit structure plus, when ``s >= 1``, removal robustness up to ``s``.

    Unlike ``verify_s_robust`` this never raises on a large removal space;
    it switches to ``samples`` seeded draws and flags the report as sampled.
    ``max_verified_s`` is the largest removal size below which no failure
    was seen (capped at ``s``).
    """
    _check_sizes(g, spec)
    orbits = orbit_partition(g)
    connected = is_weakly_connected(g)
    is_os = connected and orbits.size_multiset() == tuple(sorted(spec.r))
    report = RobustnessReport(
        is_os=is_os,
        orbit_sizes=orbits.sizes,
        blocks=orbits.partition,
        weakly_connected=connected,
        block_status=block_status(g, orbits.partition),
        requested_s=s,
    )
    if s < 1 or not is_os:
        if s >= 1:
            report.robust = False
        return report

    n = g.node_count
    if removal_count(n, s) > budget:
        report.sampled = True
        removals: Iterable[tuple[int, ...]] = sorted(
            set(sample_removals(n, s, samples, seed)), key=lambda a: (len(a), a)
        )
    else:
        removals = iter_removals(n, s)
    failed_size = None
    for removed in removals:
        if failed_size is not None and len(removed) > failed_size:
            break
        report.subsets_checked += 1
        witness = check_removal(g, orbits.partition, removed)
        if witness is not None:
            failed_size = len(removed)
            report.witnesses.append(witness)
    report.robust = failed_size is None
    report.max_verified_s = min(s, n) if failed_size is None else failed_size - 1
    return report
