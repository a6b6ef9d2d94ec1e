"""Synthesis and analysis of graphs whose automorphism orbits have prescribed sizes.

The orbits of a graph's automorphism group decide how homogeneous,
diffusively coupled agents group together at steady state.  This package
builds such graphs for requested cluster sizes, bounds how many edges they
need, checks whether the grouping survives node removal, and simulates
the coupled closed loop.
"""
__version__ = "0.1.0"

from .automorphisms import (
    OrbitPartition,
    enumerate_automorphisms,
    exchangeable,
    is_automorphism,
    orbit_partition,
)
from .bounds import (
    BoundReport,
    bound_report,
    bounded_size_cap,
    gcd,
    global_upper_bound,
    lcm,
    lower_bound,
    robust_bounds,
    upper_bound,
)
from .graph_core import (
    NodeLabel,
    OrientedGraph,
    incidence_matrix,
    induced_subgraph,
    is_weakly_connected,
    quotient,
)
from .netsim import (
    SimConfig,
    Trajectory,
    check_nonzero_offset,
    check_symmetry_invariance,
    detect_clusters,
    simulate,
)
from .robustness import (
    RobustnessReport,
    block_status,
    verify_os_type,
    verify_s_robust,
    verify_totally_robust,
)
from .synthesis import ClusterSpec, build_robust, build_sparse, global_bound_path

__all__ = [name for name in dir() if not name.startswith("_")]
