"""Centralized reference checks for simulator outputs.

Everything here may use node labels and a global view of the world, which
the simulated agents themselves never see. Validators return a
ValidationReport whose witness pins down the offending nodes, edges, or
agents whenever a check fails.
"""

from dataclasses import dataclass
from itertools import combinations

from .graph import GraphError

__all__ = [
    "ValidationReport",
    "kruskal_mst",
    "exhaustive_mst",
    "min_cut_edge",
    "brute_force_mis_check",
    "brute_force_mds_check",
    "validate_leader",
    "validate_dispersion",
    "validate_mis",
    "validate_mds",
    "validate_tree_pointers",
]


@dataclass(frozen=True)
class ValidationReport:
    check: str
    ok: bool
    witness: tuple = ()
    detail: str = ""

    def __bool__(self):
        return self.ok


def _ok(check, detail=""):
    return ValidationReport(check, True, (), detail)


def _fail(check, witness, detail=""):
    return ValidationReport(check, False, tuple(witness), detail)


# -- minimum spanning tree ------------------------------------------------

class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def kruskal_mst(g):
    """The unique MST of g as (frozenset of (u, v, w), total weight)."""
    uf = _UnionFind(g.n)
    chosen = []
    total = 0
    for u, v, _, _, w in sorted(g.edges(), key=lambda e: e[4]):
        if uf.union(u, v):
            chosen.append((min(u, v), max(u, v), w))
            total += w
    if len(chosen) != g.n - 1:
        raise GraphError("kruskal_mst: graph is not connected")
    return frozenset(chosen), total


def exhaustive_mst(g):
    """Minimum spanning tree by enumerating every spanning edge subset.

    Exponential; intended only as a cross-check for small graphs."""
    edges = [(min(u, v), max(u, v), w) for (u, v, _, _, w) in g.edges()]
    best = None
    for subset in combinations(edges, g.n - 1):
        uf = _UnionFind(g.n)
        if all(uf.union(u, v) for u, v, _ in subset):
            weight = sum(w for _, _, w in subset)
            if best is None or weight < best[1]:
                best = (frozenset(subset), weight)
    if best is None:
        raise GraphError("exhaustive_mst: graph is not connected")
    return best


def min_cut_edge(g, component):
    """Minimum-weight edge leaving `component` (a set of nodes), or None."""
    best = None
    for u, v, _, _, w in g.edges():
        if (u in component) != (v in component):
            if best is None or w < best[2]:
                best = (min(u, v), max(u, v), w)
    return best


# -- set problems ---------------------------------------------------------

def _neighbors(g, v):
    return [nbr for nbr, _, _ in g.adj[v]]


def _is_independent(g, nodes):
    return all(v not in nodes for u in nodes for v in _neighbors(g, u))


def _is_dominating(g, nodes):
    return all(
        v in nodes or any(u in nodes for u in _neighbors(g, v))
        for v in range(g.n)
    )


def brute_force_mis_check(g, nodes):
    """True iff `nodes` is independent and no strict superset is."""
    nodes = frozenset(nodes)
    if not _is_independent(g, nodes):
        return False
    return all(
        v in nodes or not _is_independent(g, nodes | {v})
        for v in range(g.n)
    )


def brute_force_mds_check(g, nodes):
    """True iff `nodes` dominates g and no strict subset does."""
    nodes = frozenset(nodes)
    if not _is_dominating(g, nodes):
        return False
    return all(not _is_dominating(g, nodes - {v}) for v in nodes)


def validate_mis(g, nodes):
    """Independence plus maximality by direct scan."""
    nodes = set(nodes)
    for u in nodes:
        for v in _neighbors(g, u):
            if v in nodes:
                return _fail("mis", [(u, v)], "adjacent pair inside the set")
    for v in range(g.n):
        if v not in nodes and not any(u in nodes for u in _neighbors(g, v)):
            return _fail("mis", [v], "node could be added; set not maximal")
    return _ok("mis")


def validate_mds(g, nodes):
    """Domination plus minimality by direct scan."""
    nodes = set(nodes)
    for v in range(g.n):
        if v not in nodes and not any(u in nodes for u in _neighbors(g, v)):
            return _fail("mds", [v], "node is not dominated")
    for v in sorted(nodes):
        if _is_dominating(g, nodes - {v}):
            return _fail("mds", [v], "member is redundant; set not minimal")
    return _ok("mds")


# -- world-level validators ----------------------------------------------

def validate_leader(world):
    """Exactly one leader, with every other agent a non-candidate."""
    leaders = []
    stragglers = []
    for aid in sorted(world.agents):
        status = world.agents[aid].shared["status"]
        if status == "leader":
            leaders.append(aid)
        elif status != "noncand":
            stragglers.append(aid)
    if len(leaders) != 1:
        return _fail("leader", leaders, f"{len(leaders)} leaders present")
    if stragglers:
        return _fail("leader", stragglers, "agents neither leader nor settled")
    return _ok("leader", f"leader={leaders[0]}")


def validate_dispersion(world):
    """Every node holds exactly one agent."""
    bad = [node for node, occ in enumerate(world.occupants) if len(occ) != 1]
    if bad:
        counts = {node: len(world.occupants[node]) for node in bad}
        return _fail("dispersion", bad, f"occupancy {counts}")
    return _ok("dispersion")


def validate_tree_pointers(world):
    """Component parent pointers form a forest with preorder-consistent ranks.

    Agents without a `tree` entry count as singleton components."""
    g = world.graph
    agent_at = {}
    for node, occ in enumerate(world.occupants):
        if len(occ) != 1:
            return _fail("tree", [node], "tree check requires a dispersed world")
        agent_at[node] = world.agents[occ[0]]

    parent = {}
    for node, ag in agent_at.items():
        tree = ag.shared.get("tree")
        if tree is None or tree.get("parent_port") is None:
            continue
        port = tree["parent_port"]
        if not 1 <= port <= g.degree(node):
            return _fail("tree", [node], f"parent port {port} out of range")
        parent[node] = g.neighbor(node, port)[0]

    for node, pnode in parent.items():
        here, there = agent_at[node].shared.get("tree"), agent_at[pnode].shared.get("tree")
        if there is None:
            return _fail("tree", [node, pnode], "parent has no tree state")
        if here.get("comp") != there.get("comp"):
            return _fail("tree", [node, pnode], "parent in a different component")

    for start in parent:
        seen = set()
        node = start
        while node in parent:
            if node in seen:
                return _fail("tree", sorted(seen), "parent pointers form a cycle")
            seen.add(node)
            node = parent[node]
        # `node` is now the component root reached from `start`
        tree = agent_at[node].shared.get("tree")
        if tree is not None and tree.get("rank") is not None:
            comp = agent_at[start].shared["tree"].get("comp")
            if comp is not None and tree["rank"] != comp:
                return _fail("tree", [start, node],
                             "component rank differs from its root's rank")
            rank = agent_at[start].shared["tree"].get("rank")
            if comp is not None and rank is not None and rank < comp:
                return _fail("tree", [start], "member rank below component rank")
    return _ok("tree")
