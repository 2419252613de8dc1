import io

import pytest

from agentsim.apps import compute_mds, compute_mis, gather
from agentsim.graph import generate_graph
from agentsim.oracles import (
    brute_force_mds_check,
    brute_force_mis_check,
    validate_mds,
    validate_mis,
)
from agentsim.runtime import TraceSink, World, make_ids, make_placement
from helpers import PLACEMENTS, TOPOLOGIES, fresh_world, try_generate


def test_gather_collects_everyone():
    g = generate_graph("path", 6, seed=2)
    world = fresh_world(g, "dispersed", seed=1)
    before = world.round
    report = gather(world)
    assert report.terminated
    node = report.output["gather_node"]
    assert all(ag.pos == node for ag in world.agents.values())
    assert report.output["occupancy"] == [g.n] + [0] * (g.n - 1)
    # the gathering walk itself stays linear in the graph size
    assert report.rounds - before <= 4 * g.m + 2 * g.n + 8


@pytest.mark.parametrize("topo", TOPOLOGIES)
@pytest.mark.parametrize("placement", PLACEMENTS)
def test_gather_across_topologies(topo, placement):
    for n in (2, 5, 10):
        g = try_generate(topo, n, seed=6)
        if g is None:
            continue
        world = fresh_world(g, placement, seed=4)
        report = gather(world)
        assert report.terminated, (topo, n, placement)
        node = report.output["gather_node"]
        assert all(ag.pos == node for ag in world.agents.values())


@pytest.mark.parametrize("topo", TOPOLOGIES)
def test_mis_valid_and_redispersed(topo):
    for n in (2, 6, 12):
        g = try_generate(topo, n, seed=8)
        if g is None:
            continue
        world = fresh_world(g, "dispersed", seed=2)
        report = compute_mis(world)
        assert report.terminated, (topo, n)
        nodes = report.output["mis_nodes"]
        assert validate_mis(g, nodes), (topo, n)
        if n <= 12:
            assert brute_force_mis_check(g, nodes), (topo, n)
        assert sorted(ag.pos for ag in world.agents.values()) == list(range(n))


@pytest.mark.parametrize("topo", TOPOLOGIES)
def test_mds_valid(topo):
    for n in (2, 6, 12):
        g = try_generate(topo, n, seed=8)
        if g is None:
            continue
        world = fresh_world(g, "general:2", seed=2)
        report = compute_mds(world)
        assert report.terminated, (topo, n)
        nodes = report.output["mds_nodes"]
        assert validate_mds(g, nodes), (topo, n)
        if n <= 12:
            assert brute_force_mds_check(g, nodes), (topo, n)


def test_marks_cover_all_nodes():
    g = generate_graph("random_connected", 9, seed=3, extra=4)
    world = fresh_world(g, "dispersed", seed=5)
    report = compute_mis(world)
    marks = report.output["marks"]
    assert set(marks) == set(world.agents)
    assert set(marks.values()) <= {"in", "out"}
    assert report.output["mis_nodes"] == frozenset(
        world.agents[aid].pos for aid, m in marks.items() if m == "in"
    )


def _traced_world(g, seed):
    buf = io.StringIO()
    placement = make_placement(g, "general:3", seed)
    ids = make_ids(g.n, "perm", seed)
    world = World(g, placement, ids, trace=TraceSink(buf, level=1))
    return world, buf


def test_election_segment_identical_across_apps():
    g = generate_graph("ring", 7, seed=4)
    logs = []
    for fn in (gather, compute_mis, compute_mds):
        world, buf = _traced_world(g, seed=9)
        fn(world)
        logs.append(buf.getvalue())
    # the leader election prefix is the same run in all three pipelines
    prefix = min(len(l) for l in logs) // 4
    assert logs[0][:prefix] and logs[0][:200] == logs[1][:200] == logs[2][:200]


def test_determinism():
    g = generate_graph("complete", 6, seed=1)
    outs = []
    for _ in range(2):
        world = fresh_world(g, "dispersed", seed=3)
        report = compute_mds(world)
        outs.append((report.rounds, report.output["mds_nodes"], report.output["marks"]))
    assert outs[0] == outs[1]
