"""Shared builders for the test suite."""

import random
from fractions import Fraction

from agentsim.graph import PortGraph, generate_graph, GraphError
from agentsim.runtime import World, make_placement, make_ids

TOPOLOGIES = ("path", "ring", "star", "complete", "random_tree", "random_connected")
PLACEMENTS = ("dispersed", "rooted:0", "general:7")


def random_weighted_graph(n, seed, extra_frac=1.0):
    """Connected random graph with contiguous ports and distinct weights."""
    rng = random.Random(seed)
    edges = set()
    for i in range(1, n):
        j = rng.randrange(i)
        edges.add((min(i, j), max(i, j)))
    for _ in range(int(extra_frac * n)):
        if n < 2:
            break
        a, b = rng.sample(range(n), 2)
        edges.add((min(a, b), max(a, b)))
    weights = rng.sample(range(1, 10 * len(edges) + 1), len(edges)) if edges else []
    nextport = [1] * n
    wedges = []
    for (u, v), w in zip(sorted(edges), weights):
        wedges.append((u, v, nextport[u], nextport[v], Fraction(w)))
        nextport[u] += 1
        nextport[v] += 1
    return PortGraph(n, wedges)


def try_generate(kind, n, seed=0, extra=0):
    """Generated graph, or None where the topology is undefined (ring n<3)."""
    try:
        return generate_graph(kind, n, seed=seed, extra=extra)
    except GraphError:
        return None


def fresh_world(g, placement, seed):
    return World(g, make_placement(g, placement, seed), make_ids(g.n, "perm", seed))


def sweep_configs(sizes, placements=PLACEMENTS, seeds=range(1, 4)):
    for kind in TOPOLOGIES:
        for n in sizes:
            for placement in placements:
                for seed in seeds:
                    yield kind, n, placement, seed
