"""Synchronous agent runtime.

A round is communicate/compute/move: every agent computes from a snapshot
of the previous round's state, state writes are buffered and applied in
ascending writer id, then all moves happen simultaneously. Agents never
see node labels; they see their current node's degree, edge weights by
port, the port they arrived through, and co-located agents' shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class SimulationFault(RuntimeError):
    """An internal protocol invariant broke (bad move, lost message, ...)."""


def _bits_for(x):
    """Bits to represent values in [0, x]; at least 1."""
    return max(1, math.ceil(math.log2(x + 1)))


class Accounting:
    """Field widths for the declared-width memory ledger."""

    __slots__ = ("n", "max_id", "delta", "max_rounds", "id_bits", "port_bits", "round_bits")

    def __init__(self, n, max_id, delta, max_rounds):
        self.n = n
        self.max_id = max_id
        self.delta = delta
        self.max_rounds = max_rounds
        self.id_bits = max(1, math.ceil(math.log2(max_id))) if max_id > 1 else 1
        self.port_bits = _bits_for(delta)
        self.round_bits = _bits_for(max_rounds)

    def counter(self, bound):
        return _bits_for(bound)

    @staticmethod
    def boolean():
        return 1

    @staticmethod
    def enum(k):
        return max(1, math.ceil(math.log2(k)))


class Agent:
    """One mobile agent. `shared` is readable by co-located agents;

    `machine` holds the protocol state object (private, but accounted)."""

    __slots__ = ("id", "pos", "arrival_port", "shared", "machine")

    def __init__(self, aid, pos):
        self.id = aid
        self.pos = pos
        self.arrival_port = 0
        self.shared = {
            "status": "cand",
            "init_alone": False,
            "away": False,
            "stationed": False,
            "dfs": {},
            "home_notes": [],
        }
        self.machine = None


class TraceSink:
    """Writes one `key=value` line per event, tiered by level.

    Level 0: moves only. Level 1: plus protocol events and writes.
    Level 2: plus a per-round state snapshot line per agent.
    """

    def __init__(self, fh, level=0):
        self.fh = fh
        self.level = level

    def move(self, rnd, aid, node, port, dest):
        self.fh.write(f"round={rnd} agent={aid} node={node} action=move port={port} dest={dest}\n")

    def event(self, rnd, aid, node, action, detail=""):
        if self.level >= 1:
            extra = f" {detail}" if detail else ""
            self.fh.write(f"round={rnd} agent={aid} node={node} action={action}{extra}\n")

    def snapshot(self, rnd, agent):
        if self.level >= 2:
            st = agent.shared
            self.fh.write(
                f"round={rnd} agent={agent.id} node={agent.pos} action=state"
                f" status={st['status']} away={int(st['away'])}"
                f" stationed={int(st['stationed'])} records={len(st['dfs'])}\n"
            )


class Ctx:
    """Per-round view handed to programs.

    All shared-state mutation (own or other) goes through write(); reads of
    any agent's `shared` therefore always see the previous round.
    """

    __slots__ = ("world", "_ops", "_seq")

    def __init__(self, world):
        self.world = world
        self._ops = []
        self._seq = 0

    @property
    def round(self):
        return self.world.round

    def degree(self, agent):
        return self.world.graph.degree(agent.pos)

    def port_weight(self, agent, port):
        return self.world.graph.neighbor(agent.pos, port)[2]

    def others(self, agent):
        """Co-located agents (excluding the asking one), ascending id."""
        return [
            self.world.agents[aid]
            for aid in self.world.occupants[agent.pos]
            if aid != agent.id
        ]

    def write(self, writer_id, fn):
        self._ops.append((writer_id, self._seq, fn))
        self._seq += 1

    def trace(self, agent, action, detail=""):
        if self.world.trace is not None:
            self.world.trace.event(self.world.round, agent.id, agent.pos, action, detail)

    def emit(self, kind, **data):
        self.world.events.append({"round": self.world.round, "kind": kind, **data})


@dataclass
class RunReport:
    rounds: int = 0
    terminated: bool = False
    leader: int | None = None
    statuses: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)
    peak_bits: dict = field(default_factory=dict)
    peak_bits_max: int = 0
    events: list = field(default_factory=list)
    output: dict = field(default_factory=dict)


class World:
    """Deterministic single-threaded world; all randomness lives in setup."""

    def __init__(self, graph, placement, ids, max_rounds=None, trace=None):
        """placement: list mapping agent index -> node; ids: agent index -> id."""
        self.graph = graph
        if max_rounds is None:
            max_rounds = 64 * max(graph.m, 1)
        self.max_rounds = max_rounds
        self.trace = trace
        self.round = 0
        self.events = []
        self.agents = {}
        self.occupants = [[] for _ in range(graph.n)]
        for idx, node in enumerate(placement):
            aid = ids[idx]
            if aid in self.agents:
                raise SimulationFault(f"duplicate agent id {aid}")
            ag = Agent(aid, node)
            self.agents[aid] = ag
            self.occupants[node].append(aid)
        for occ in self.occupants:
            occ.sort()
        for ag in self.agents.values():
            ag.shared["init_alone"] = len(self.occupants[ag.pos]) == 1
        self.acct = Accounting(
            n=graph.n,
            max_id=max(self.agents),
            delta=max(graph.max_degree, 1),
            max_rounds=max_rounds,
        )
        self.peak_bits = {aid: 0 for aid in self.agents}

    def co_located(self, agent):
        return [self.agents[a] for a in self.occupants[agent.pos] if a != agent.id]

    def step(self, program):
        ctx = Ctx(self)
        moves = []
        for aid in sorted(self.agents):
            ag = self.agents[aid]
            port = program.act(ag, ctx)
            if port is not None:
                moves.append((aid, port))
        for _, _, fn in sorted(ctx._ops, key=lambda t: (t[0], t[1])):
            fn()
        for aid, port in moves:
            ag = self.agents[aid]
            deg = self.graph.degree(ag.pos)
            if not (1 <= port <= deg):
                raise SimulationFault(
                    f"agent {aid} moved via port {port} at a degree-{deg} node"
                )
            nbr, rev, _ = self.graph.neighbor(ag.pos, port)
            if self.trace is not None:
                self.trace.move(self.round, aid, ag.pos, port, nbr)
            self.occupants[ag.pos].remove(aid)
            self.occupants[nbr].append(aid)
            self.occupants[nbr].sort()
            ag.pos = nbr
            ag.arrival_port = rev
        for aid, ag in self.agents.items():
            bits = program.memory_bits(ag, self.acct)
            if bits > self.peak_bits[aid]:
                self.peak_bits[aid] = bits
            if self.trace is not None:
                self.trace.snapshot(self.round, ag)
        self.round += 1

    def run(self, program):
        program.setup(self)
        report = RunReport()
        while self.round < self.max_rounds:
            if program.done_all(self):
                report.terminated = True
                break
            self.step(program)
        report.rounds = self.round
        report.terminated = report.terminated or program.done_all(self)
        report.statuses = {aid: ag.shared["status"] for aid, ag in self.agents.items()}
        report.positions = {aid: ag.pos for aid, ag in self.agents.items()}
        leaders = [aid for aid, st in report.statuses.items() if st == "leader"]
        report.leader = leaders[0] if len(leaders) == 1 else None
        report.peak_bits = dict(self.peak_bits)
        report.peak_bits_max = max(self.peak_bits.values(), default=0)
        report.events = list(self.events)
        program.finalize(self, report)
        return report


def make_placement(graph, spec, seed=0):
    """Agent index -> node list for dispersed / rooted:NODE / general:SEED,

    or an explicit list of nodes."""
    n = graph.n
    if spec == "dispersed":
        return list(range(n))
    if spec.startswith("rooted"):
        node = int(spec.split(":", 1)[1]) if ":" in spec else 0
        if not (0 <= node < n):
            raise ValueError(f"rooted placement node {node} out of range")
        return [node] * n
    if spec.startswith("general"):
        import random

        s = int(spec.split(":", 1)[1]) if ":" in spec else seed
        rng = random.Random(("placement", n, s).__repr__())
        return [rng.randrange(n) for _ in range(n)]
    raise ValueError(f"unknown placement spec {spec!r}")


def make_ids(n, policy="sequential", seed=0):
    """Agent index -> id; ids are a permutation of 1..n."""
    ids = list(range(1, n + 1))
    if policy == "sequential":
        return ids
    if policy == "perm":
        import random

        random.Random(("ids", n, seed).__repr__()).shuffle(ids)
        return ids
    raise ValueError(f"unknown id policy {policy!r}")
