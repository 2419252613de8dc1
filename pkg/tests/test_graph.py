import pytest
from fractions import Fraction

from agentsim.graph import (
    GraphError,
    PortGraph,
    bfs_distances,
    generate_graph,
    graph_stats,
    parse_graph,
    serialize_graph,
)
from helpers import TOPOLOGIES, random_weighted_graph, try_generate

TRIANGLE = "3 3\n0 1 1 1 1\n1 2 2 1 2\n0 2 2 2 3\n"


def test_parse_serialize_roundtrip():
    g = parse_graph(TRIANGLE)
    assert g.n == 3 and g.m == 3
    assert parse_graph(serialize_graph(g)).edge_set() == g.edge_set()


def test_parse_comments_and_blanks():
    text = "# triangle\n\n3 3\n0 1 1 1 1  # first\n1 2 2 1 2\n0 2 2 2 3\n"
    assert parse_graph(text).m == 3


def test_parse_edge_count_mismatch():
    with pytest.raises(GraphError, match="edge count mismatch"):
        parse_graph("3 2\n0 1 1 1 1\n")


def test_parse_malformed_header():
    with pytest.raises(GraphError, match="header"):
        parse_graph("3\n")


def test_parse_rejects_duplicate_weight():
    with pytest.raises(GraphError, match="duplicate weight"):
        parse_graph("3 3\n0 1 1 1 1\n1 2 2 1 1\n0 2 2 2 3\n")


def test_parse_perturb_separates_ties():
    g = parse_graph("3 3\n0 1 1 1 1\n1 2 2 1 1\n0 2 2 2 3\n", perturb_weights=True)
    weights = sorted(w for _, _, w in g.edge_set())
    assert weights[0] == 1 and weights[1] == 1 + Fraction(1, 2 ** 20)


def test_rejects_self_loop_and_bad_ports():
    with pytest.raises(GraphError, match="self-loop"):
        PortGraph(2, [(0, 0, 1, 2, 1)])
    with pytest.raises(GraphError, match="contiguous"):
        PortGraph(2, [(0, 1, 2, 1, 1)])
    with pytest.raises(GraphError, match="port conflict"):
        PortGraph(3, [(0, 1, 1, 1, 1), (0, 2, 1, 1, 2)])


def test_rejects_disconnected():
    with pytest.raises(GraphError, match="connected"):
        PortGraph(4, [(0, 1, 1, 1, 1), (2, 3, 1, 1, 2)])


def test_rejects_nonpositive_weight():
    with pytest.raises(GraphError, match="positive"):
        PortGraph(2, [(0, 1, 1, 1, 0)])


def test_neighbor_is_symmetric():
    g = parse_graph(TRIANGLE)
    for v in range(g.n):
        for p in range(1, g.degree(v) + 1):
            nbr, rport, w = g.neighbor(v, p)
            assert g.neighbor(nbr, rport) == (v, p, w)


@pytest.mark.parametrize("kind", TOPOLOGIES)
@pytest.mark.parametrize("n", [1, 2, 3, 5, 12])
def test_generators_build_valid_graphs(kind, n):
    g = try_generate(kind, n, seed=3, extra=2)
    if g is None:
        assert kind == "ring" and n < 3
        return
    assert g.n == n
    weights = [w for _, _, w in g.edge_set()]
    assert len(set(weights)) == len(weights)
    # PortGraph construction already validates connectivity and ports


def test_ring_requires_three_nodes():
    with pytest.raises(GraphError, match="ring"):
        generate_graph("ring", 2)


def test_unknown_kind():
    with pytest.raises(GraphError, match="unknown graph kind"):
        generate_graph("torus", 4)


def test_generate_is_deterministic():
    a = generate_graph("random_connected", 9, seed=5, extra=4)
    b = generate_graph("random_connected", 9, seed=5, extra=4)
    assert serialize_graph(a) == serialize_graph(b)


def test_bfs_distances_on_path():
    g = generate_graph("path", 5, seed=0)
    # generated paths keep node order 0..n-1 along the line
    assert bfs_distances(g, 0) == [0, 1, 2, 3, 4]


def test_graph_stats_fields():
    g = generate_graph("star", 6, seed=0)
    assert graph_stats(g) == {"n": 6, "m": 5, "max_degree": 5, "diameter": 2}


def test_random_weighted_graph_helper():
    g = random_weighted_graph(10, 4)
    assert g.n == 10
    weights = [w for _, _, w in g.edge_set()]
    assert len(set(weights)) == len(weights)
