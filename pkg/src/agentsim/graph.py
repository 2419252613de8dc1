"""Port-labeled weighted graphs: parsing, generation, stats, serialization.

Nodes are 0..n-1 only on the simulator side; agents never see labels.
Each endpoint of an edge carries a local port number in 1..deg(v), and
weights are exact rationals so weight comparisons never tie by accident.
"""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction


class GraphError(ValueError):
    """Raised on malformed graph files or impossible generator parameters."""


class PortGraph:
    """Immutable connected undirected graph with per-endpoint port labels."""

    __slots__ = ("n", "adj", "_edges")

    def __init__(self, n, edges):
        """Build from a list of (u, v, pu, pv, w) tuples; validates everything.

        Ports must form a contiguous 1..deg(v) labeling at every node.
        """
        self.n = n
        slots = [{} for _ in range(n)]
        seen_pairs = set()
        seen_weights = {}
        for idx, (u, v, pu, pv, w) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge {idx + 1}: endpoint out of range")
            if u == v:
                raise GraphError(f"edge {idx + 1}: self-loop at node {u}")
            key = (min(u, v), max(u, v))
            if key in seen_pairs:
                raise GraphError(f"edge {idx + 1}: duplicate edge {key[0]}-{key[1]}")
            seen_pairs.add(key)
            w = Fraction(w)
            if w <= 0:
                raise GraphError(f"edge {idx + 1}: weight must be positive")
            if w in seen_weights:
                raise GraphError(
                    f"edge {idx + 1}: duplicate weight {w} (also on edge {seen_weights[w]})"
                )
            seen_weights[w] = idx + 1
            for node, port, other, rport in ((u, pu, v, pv), (v, pv, u, pu)):
                if port < 1:
                    raise GraphError(f"edge {idx + 1}: port {port} out of range at node {node}")
                if port in slots[node]:
                    raise GraphError(f"edge {idx + 1}: port conflict at node {node} port {port}")
                slots[node][port] = (other, rport, w)
        adj = []
        for v in range(n):
            deg = len(slots[v])
            for p in range(1, deg + 1):
                if p not in slots[v]:
                    raise GraphError(f"node {v}: ports are not contiguous 1..{deg}")
            adj.append(tuple(slots[v][p] for p in range(1, deg + 1)))
        self.adj = tuple(adj)
        self._edges = tuple(
            (u, v, pu, pv, Fraction(w)) for (u, v, pu, pv, w) in edges
        )
        if n > 1 and not self._connected():
            raise GraphError("graph is not connected")

    def _connected(self):
        seen = [False] * self.n
        seen[0] = True
        q = deque([0])
        while q:
            v = q.popleft()
            for nbr, _, _ in self.adj[v]:
                if not seen[nbr]:
                    seen[nbr] = True
                    q.append(nbr)
        return all(seen)

    @property
    def m(self):
        return len(self._edges)

    def degree(self, v):
        return len(self.adj[v])

    @property
    def max_degree(self):
        return max((len(a) for a in self.adj), default=0)

    def neighbor(self, v, port):
        """Follow port (1-based) from v; returns (neighbor, reverse_port, weight)."""
        return self.adj[v][port - 1]

    def edges(self):
        return self._edges

    def edge_set(self):
        """Edges as a frozenset of (min, max, weight) triples."""
        return frozenset((min(u, v), max(u, v), w) for (u, v, _, _, w) in self._edges)

    def weight_between(self, u, v):
        for nbr, _, w in self.adj[u]:
            if nbr == v:
                return w
        raise KeyError((u, v))


def _fmt_weight(w):
    if w.denominator == 1:
        return str(w.numerator)
    return f"{w.numerator}/{w.denominator}"


def serialize_graph(g):
    """Canonical text form; parse_graph(serialize_graph(g)) rebuilds g exactly."""
    lines = [f"{g.n} {g.m}"]
    for u, v, pu, pv, w in sorted(g.edges(), key=lambda e: (min(e[0], e[1]), max(e[0], e[1]))):
        if u > v:
            u, v, pu, pv = v, u, pv, pu
        lines.append(f"{u} {v} {pu} {pv} {_fmt_weight(w)}")
    return "\n".join(lines) + "\n"


def parse_graph(text, perturb_weights=False):
    """Parse the `n m` header + `u v p_u p_v w` edge-line format.

    `#` starts a comment; blank lines are skipped. With perturb_weights,
    tied weights are separated by adding rank * 1/2**20 in tie order.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    if not rows:
        raise GraphError("empty graph file")
    hln, header = rows[0]
    parts = header.split()
    if len(parts) != 2:
        raise GraphError(f"line {hln}: malformed header, expected 'n m'")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphError(f"line {hln}: malformed header, expected integers") from None
    if n < 1 or m < 0:
        raise GraphError(f"line {hln}: malformed header values n={n} m={m}")
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"edge count mismatch: header says {m}, file has {len(body)}")
    edges = []
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 5:
            raise GraphError(f"line {lineno}: expected 'u v p_u p_v w'")
        try:
            u, v, pu, pv = (int(x) for x in parts[:4])
            w = Fraction(parts[4])
        except (ValueError, ZeroDivisionError):
            raise GraphError(f"line {lineno}: malformed edge line") from None
        edges.append([u, v, pu, pv, w, lineno])
    if perturb_weights:
        eps = Fraction(1, 2 ** 20)
        by_weight = {}
        for e in sorted(edges, key=lambda e: (e[4], e[5])):
            by_weight.setdefault(e[4], []).append(e)
        for group in by_weight.values():
            for rank, e in enumerate(group[1:], start=1):
                e[4] = e[4] + rank * eps
    try:
        return PortGraph(n, [(u, v, pu, pv, w) for u, v, pu, pv, w, _ in edges])
    except GraphError as exc:
        # Re-raise with the source line of the offending edge where possible.
        msg = str(exc)
        if msg.startswith("edge "):
            idx = int(msg.split()[1].rstrip(":"))
            raise GraphError(f"line {edges[idx - 1][5]}: {msg.split(': ', 1)[1]}") from None
        raise


def load_graph(path, perturb_weights=False):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read(), perturb_weights=perturb_weights)


GENERATOR_KINDS = ("path", "ring", "star", "complete", "random_tree", "random_connected")


def generate_graph(kind, n, seed=0, extra=0):
    """Deterministically generate a named topology with shuffled ports.

    Weights are distinct random positive integers; port numbers at each
    node are an independent seeded permutation so port labels carry no
    structural hint.
    """
    if n < 1:
        raise GraphError(f"{kind}: n must be >= 1")
    rng = random.Random((kind, n, seed, extra).__repr__())
    pairs = []
    if kind == "path":
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif kind == "ring":
        if n < 3:
            raise GraphError("ring: n must be >= 3 (smaller rings need parallel edges)")
        pairs = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "star":
        pairs = [(0, i) for i in range(1, n)]
    elif kind == "complete":
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif kind == "random_tree":
        pairs = [(rng.randrange(i), i) for i in range(1, n)]
    elif kind == "random_connected":
        pairs = [(rng.randrange(i), i) for i in range(1, n)]
        have = {(min(a, b), max(a, b)) for a, b in pairs}
        candidates = [
            (i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in have
        ]
        rng.shuffle(candidates)
        want = min(extra, len(candidates))
        pairs.extend(candidates[:want])
    else:
        raise GraphError(f"unknown graph kind {kind!r}")
    m = len(pairs)
    weights = rng.sample(range(1, 8 * m + 8), m)
    deg = [0] * n
    for a, b in pairs:
        deg[a] += 1
        deg[b] += 1
    free_ports = []
    for v in range(n):
        ports = list(range(1, deg[v] + 1))
        rng.shuffle(ports)
        free_ports.append(ports)
    edges = []
    for (a, b), w in zip(pairs, weights):
        pa = free_ports[a].pop()
        pb = free_ports[b].pop()
        edges.append((a, b, pa, pb, Fraction(w)))
    return PortGraph(n, edges)


def bfs_distances(g, src):
    dist = [None] * g.n
    dist[src] = 0
    q = deque([src])
    while q:
        v = q.popleft()
        for nbr, _, _ in g.adj[v]:
            if dist[nbr] is None:
                dist[nbr] = dist[v] + 1
                q.append(nbr)
    return dist


def graph_stats(g):
    """n, m, max degree, and hop diameter (0 for a single node)."""
    diameter = 0
    for v in range(g.n):
        dist = bfs_distances(g, v)
        diameter = max(diameter, max(d for d in dist if d is not None))
    return {"n": g.n, "m": g.m, "max_degree": g.max_degree, "diameter": diameter}
