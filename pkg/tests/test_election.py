import pytest
from hypothesis import given, settings, strategies as st

from agentsim.election import ElectionProgram, elect_leader
from agentsim.graph import generate_graph
from agentsim.oracles import validate_dispersion, validate_leader
from helpers import PLACEMENTS, TOPOLOGIES, fresh_world, random_weighted_graph, try_generate


@pytest.mark.parametrize("topo", TOPOLOGIES)
@pytest.mark.parametrize("placement", PLACEMENTS)
def test_unique_leader_and_dispersion(topo, placement):
    for n in (2, 5, 9):
        g = try_generate(topo, n, seed=11)
        if g is None:
            continue
        world = fresh_world(g, placement, seed=3)
        report = elect_leader(world)
        assert report.terminated, (topo, n, placement)
        assert validate_leader(world), (topo, n, placement)
        assert validate_dispersion(world), (topo, n, placement)


def test_round_budget():
    g = generate_graph("random_connected", 12, seed=5, extra=6)
    world = fresh_world(g, "rooted:0", seed=1)
    report = elect_leader(world)
    assert report.terminated
    assert report.rounds <= 64 * g.m


def test_determinism():
    g = generate_graph("ring", 8, seed=2)
    runs = []
    for _ in range(2):
        world = fresh_world(g, "general:9", seed=7)
        report = elect_leader(world)
        runs.append((report.rounds, report.leader, report.positions))
    assert runs[0] == runs[1]


def test_two_agents():
    g = generate_graph("path", 2, seed=0)
    world = fresh_world(g, "dispersed", seed=0)
    report = elect_leader(world)
    assert report.leader is not None


def test_rerun_on_finished_world_is_stable():
    g = generate_graph("star", 6, seed=0)
    world = fresh_world(g, "dispersed", seed=2)
    first = elect_leader(world)
    world.max_rounds += 4
    second = world.run(ElectionProgram())
    assert second.leader == first.leader
    assert second.positions == first.positions


@settings(deadline=None, max_examples=40)
@given(
    n=st.integers(min_value=2, max_value=20),
    gseed=st.integers(min_value=0, max_value=10_000),
    pseed=st.integers(min_value=0, max_value=10_000),
    placement=st.sampled_from(("dispersed", "rooted:0", "general:1")),
)
def test_property_random_graphs(n, gseed, pseed, placement):
    g = random_weighted_graph(n, gseed)
    world = fresh_world(g, placement, pseed)
    report = elect_leader(world)
    assert report.terminated
    assert validate_leader(world)
    assert validate_dispersion(world)
