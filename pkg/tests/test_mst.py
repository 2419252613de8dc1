import math
from fractions import Fraction

import pytest

from agentsim.graph import PortGraph, generate_graph
from agentsim.mst import mst_edges_from_world, run_mst
from agentsim.oracles import kruskal_mst, validate_tree_pointers
from helpers import PLACEMENTS, TOPOLOGIES, fresh_world, random_weighted_graph, try_generate


def _edge_by_weight(g):
    return {w: (u, v) for u, v, _, _, w in g.edges()}


def _forest_ok(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def test_triangle_frozen():
    g = PortGraph(3, [
        (0, 1, 1, 1, Fraction(1)),
        (1, 2, 2, 1, Fraction(2)),
        (0, 2, 2, 2, Fraction(3)),
    ])
    world = fresh_world(g, "dispersed", seed=0)
    report = run_mst(world)
    assert report.output["mst_edges"] == frozenset({
        (0, 1, Fraction(1)), (1, 2, Fraction(2)),
    })
    assert report.output["mst_weight"] == Fraction(3)


def test_path_frozen():
    g = generate_graph("path", 5, seed=3)
    world = fresh_world(g, "dispersed", seed=0)
    report = run_mst(world)
    expect, total = kruskal_mst(g)
    assert report.output["mst_edges"] == expect
    assert report.output["mst_weight"] == total


@pytest.mark.parametrize("topo", TOPOLOGIES)
@pytest.mark.parametrize("placement", PLACEMENTS)
def test_matches_kruskal(topo, placement):
    for n in (2, 6, 11):
        g = try_generate(topo, n, seed=13)
        if g is None:
            continue
        world = fresh_world(g, placement, seed=5)
        report = run_mst(world)
        assert report.terminated, (topo, n, placement)
        expect, total = kruskal_mst(g)
        assert report.output["mst_edges"] == expect, (topo, n, placement)
        assert report.output["mst_weight"] == total
        assert validate_tree_pointers(world), (topo, n, placement)


def test_forest_invariant_across_merges():
    for seed in range(6):
        g = random_weighted_graph(10, seed, extra_frac=1.5)
        world = fresh_world(g, "dispersed", seed=seed)
        report = run_mst(world)
        assert report.terminated
        by_weight = _edge_by_weight(g)
        taken = []
        for ev in report.events:
            if ev["kind"] != "merge":
                continue
            taken.append(by_weight[ev["weight"]])
            assert _forest_ok(g.n, taken), (seed, len(taken))
        assert len(taken) == g.n - 1


def test_phase_count_and_halving():
    for n in (4, 9, 16):
        g = random_weighted_graph(n, seed=n, extra_frac=1.0)
        world = fresh_world(g, "dispersed", seed=1)
        report = run_mst(world)
        assert report.terminated
        cap = math.ceil(math.log2(n)) + 1
        assert report.output["phases"] <= cap, n
        merges_before = 0
        comps = []
        for ev in report.events:
            if ev["kind"] == "merge":
                merges_before += 1
            elif ev["kind"] == "phase":
                comps.append(n - merges_before)
        assert comps and comps[0] == n
        for prev, cur in zip(comps, comps[1:]):
            assert cur <= math.ceil(prev / 2), (n, comps)


def test_rounds_within_budget():
    g = random_weighted_graph(14, seed=4, extra_frac=2.0)
    world = fresh_world(g, "general:5", seed=2)
    report = run_mst(world)
    assert report.terminated
    budget = 16 * g.m + 24 * (g.m + g.n) * ((g.n).bit_length() + 1)
    assert report.rounds <= budget


def test_edges_recoverable_from_world_state():
    g = generate_graph("random_connected", 9, seed=7, extra=4)
    world = fresh_world(g, "dispersed", seed=3)
    report = run_mst(world)
    edges, total = mst_edges_from_world(world)
    assert edges == report.output["mst_edges"]
    assert total == report.output["mst_weight"]


def test_determinism():
    g = generate_graph("complete", 7, seed=1)
    runs = []
    for _ in range(2):
        world = fresh_world(g, "rooted:2", seed=6)
        report = run_mst(world)
        runs.append((report.rounds, report.output["mst_edges"], report.events))
    assert runs[0] == runs[1]
