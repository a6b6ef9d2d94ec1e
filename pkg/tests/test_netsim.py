import numpy as np
import pytest

from clusterdesign.automorphisms import enumerate_automorphisms, iter_orbit_generators, orbit_partition
from clusterdesign.graph_core import OrientedGraph
from clusterdesign.netsim import (
    AssumptionWarning,
    SimConfig,
    SimulationDiverged,
    check_nonzero_offset,
    check_symmetry_invariance,
    controller,
    detect_clusters,
    run_experiment,
    simulate,
    steady_state_residual,
    with_overrides,
)
from clusterdesign.synthesis import ClusterSpec, build_sparse


def bisect(f, lo, hi, iters=200):
    # f is strictly increasing here: 1 + 2 a2 (1 - sin z) > 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@pytest.fixture(scope="module")
def mixed_graph():
    return build_sparse(ClusterSpec((1, 2, 3, 4)), (4, 2, 1, 3))


@pytest.fixture(scope="module")
def mixed_run(mixed_graph):
    return run_experiment(mixed_graph, 11, expected=orbit_partition(mixed_graph).partition)


def test_nonzero_offset():
    assert check_nonzero_offset(SimConfig(alpha=0.5, a1=1.0, a2=1.0))
    assert not check_nonzero_offset(SimConfig(alpha=0.5, a1=-2.5, a2=2.5))
    assert check_nonzero_offset(SimConfig(alpha=0.5, a1=0.5, a2=0.1))


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(alpha=0.5, a1=0.0, a2=1.0, dt=0.0)
    with pytest.raises(ValueError):
        SimConfig(alpha=0.5, a1=0.0, a2=1.0, ss_tol=-1.0)


def test_draw_is_reproducible_and_in_range():
    for seed in range(30):
        cfg, x0 = SimConfig.draw(seed, 4)
        again, x1 = SimConfig.draw(seed, 4)
        assert cfg == again and np.array_equal(x0, x1)
        assert 0.1 <= cfg.alpha <= 1.0
        assert 0.1 <= cfg.a2 <= 10.0
    cfg, _ = SimConfig.draw(0, 3, a1=2.0, dt=0.01)
    assert cfg.a1 == 2.0 and cfg.dt == 0.01


def test_single_node_converges_to_alpha():
    cfg = SimConfig(alpha=0.37, a1=1.0, a2=1.0)
    traj = simulate(OrientedGraph(1), cfg, [0.0])
    assert traj.converged
    assert traj.y_ss[0] == pytest.approx(0.37, abs=1e-8)
    assert traj.states.shape == (len(traj.times), 1)


def test_two_node_steady_state_matches_root_finding():
    g = OrientedGraph(2, ((0, 1),))
    cfg = SimConfig(alpha=0.6, a1=1.5, a2=0.8)
    traj = simulate(g, cfg, [0.3, -1.2], stride=1)
    sums = traj.states.sum(axis=1)
    # coupling cancels in the sum: s' = -s + 2 alpha
    assert np.allclose(sums, 2 * 0.6 + (sums[0] - 2 * 0.6) * np.exp(-traj.times), atol=1e-9)
    # edge 0 -> 1 gives z = y1 - y0 and z = -2 mu(z) at steady state
    z = bisect(lambda z: z + 2 * float(controller(cfg, np.array(z))), -50.0, 50.0)
    assert traj.y_ss[1] - traj.y_ss[0] == pytest.approx(z, abs=1e-7)
    assert traj.y_ss.sum() == pytest.approx(1.2, abs=1e-7)


def test_mixed_graph_clusters(mixed_graph, mixed_run):
    traj = mixed_run.trajectory
    assert traj.converged
    assert mixed_run.clusters == orbit_partition(mixed_graph).partition
    assert len(mixed_run.clusters) == 4
    assert abs(mixed_run.sum_check) <= 1e-6


def test_steady_state_residual(mixed_graph, mixed_run):
    cfg = mixed_run.config
    assert steady_state_residual(mixed_graph, cfg, mixed_run.trajectory.y_ss) <= 10 * cfg.ss_tol


def test_symmetry_invariance_on_run(mixed_graph, mixed_run):
    autos = list(iter_orbit_generators(mixed_graph))
    assert check_symmetry_invariance(mixed_run.trajectory.y_ss, autos, 1e-6)


def test_halving_dt_changes_little(mixed_graph, mixed_run):
    cfg = with_overrides(mixed_run.config, dt=mixed_run.config.dt / 2)
    finer = simulate(mixed_graph, cfg, mixed_run.x0)
    assert np.max(np.abs(finer.y_ss - mixed_run.trajectory.y_ss)) < 1e-8


def test_equal_clusters_graph_clusters():
    g = build_sparse(ClusterSpec((3,) * 5), (1, 2, 3, 4, 5))
    exp = run_experiment(g, 5, expected=orbit_partition(g).partition)
    assert exp.trajectory.converged
    assert exp.clusters == g.cluster_blocks()


def test_cycle_consensus_and_rotations():
    n = 5
    g = OrientedGraph(n, tuple((i, (i + 1) % n) for i in range(n)))
    exp = run_experiment(g, 2)
    autos = enumerate_automorphisms(g)
    assert check_symmetry_invariance(exp.trajectory.y_ss, autos, 1e-6)
    assert len(exp.clusters) == 1


def test_consensus_when_offset_vanishes(mixed_graph):
    with pytest.warns(AssumptionWarning):
        exp = run_experiment(mixed_graph, 11, a1=-1.7, a2=1.7)
    assert len(exp.clusters) == 1
    assert np.allclose(exp.trajectory.y_ss, exp.config.alpha, atol=1e-7)


def test_detect_clusters():
    assert detect_clusters([0.2, 0.2, 0.2], 0.1) == ((0, 1, 2),)
    assert detect_clusters([0.0, 0.05, 1.0], 0.1) == ((0, 1), (2,))
    assert detect_clusters([3.0, 0.0, 3.0, 0.0], 1e-6) == ((0, 2), (1, 3))
    # single linkage chains through small gaps
    assert detect_clusters([0.0, 0.08, 0.16], 0.1) == ((0, 1, 2),)
    with pytest.raises(ValueError):
        detect_clusters([0.0, float("nan")], 0.1)


def test_symmetry_invariance_violation():
    y = np.array([1.0, 1.0, 2.0])
    swap = (1, 0, 2)
    assert check_symmetry_invariance(y, [(0, 1, 2)], 1e-6)
    assert check_symmetry_invariance(y, [swap], 1e-6)
    y[1] += 10e-6
    assert not check_symmetry_invariance(y, [swap], 1e-6)


def test_divergence_reported():
    cfg = SimConfig(alpha=0.5, a1=1.0, a2=1.0, dt=5.0, t_final=5000.0)
    g = OrientedGraph(2, ((0, 1),))
    with pytest.raises(SimulationDiverged):
        simulate(g, cfg, [1.0, -1.0])


def test_csv_layout(mixed_run):
    text = mixed_run.trajectory.to_csv()
    lines = text.splitlines()
    assert lines[0] == "t," + ",".join(f"x_{i}" for i in range(1, 11))
    assert len(lines) == len(mixed_run.trajectory.times) + 1
    assert lines[1].split(",")[0] == "0"


def test_non_monotone_gain_warns():
    cfg = SimConfig(alpha=0.5, a1=3.0, a2=-0.5, t_final=1.0)
    with pytest.warns(AssumptionWarning, match="monotone"):
        simulate(OrientedGraph(2, ((0, 1),)), cfg, [0.0, 0.0])
