"""Running message-passing algorithms on dispersed agents.

A synchronous message-passing round is replayed by a fixed meeting
schedule built from agent ids. Every id is zero-padded to L bits; each
bit owns a block of 2*Delta rounds. On a '1' bit the agent sweeps all
its ports (two rounds per neighbor, idle remainder); on a '0' bit it
stays home and acts as a mailbox. Distinct ids differ in some bit, so
every adjacent pair shares a block where one sweeps and one waits, and
the visit exchanges messages in both directions for that edge. One full
schedule therefore delivers everything a message-passing round produced.

Payload algorithms are node programs: `initial(degree, ident)` builds a
node state, `step(state, inbox, degree)` maps a state and a list of
(port, message) pairs to (new state, outbox). `direct_mp` runs the same
payload centrally and is the reference the simulation is checked against.
"""

import math

from .runtime import SimulationFault
from .election import ElectionProgram

__all__ = [
    "meeting_schedule", "MpSimProgram", "simulate_mp",
    "simulate_mp_from_any_config", "direct_mp",
    "Flood", "BfsLabel", "MaxIdLeader", "PAYLOADS",
]


def meeting_schedule(ident, n, c=2):
    """The per-block action bits for one agent: '1' sweep, '0' stay."""
    length = max(1, math.ceil(c * math.log2(max(n, 2))))
    if ident < 0 or ident.bit_length() > length:
        raise ValueError(f"id {ident} does not fit in {length} schedule bits")
    return format(ident, f"0{length}b")


class MpSimProgram:
    """Execute `T` message-passing rounds of a payload on a dispersed world."""

    def __init__(self, alg, T, c=2):
        self.alg = alg
        self.T = T
        self.c = c
        self.start = None
        self.span = None
        self.delta = None
        self.finished = T == 0

    def setup(self, world):
        for occ in world.occupants:
            if len(occ) != 1:
                raise SimulationFault("mp simulation requires a dispersed world")
        self.start = world.round
        self.delta = max(world.graph.max_degree, 1)
        bits_len = len(meeting_schedule(max(world.agents), world.graph.n, self.c))
        self.span = 2 * self.delta * bits_len
        for ag in world.agents.values():
            ag.arrival_port = None
            deg = world.graph.degree(ag.pos)
            ag.shared["mp"] = {
                "home": ag.pos,
                "bits": meeting_schedule(ag.id, world.graph.n, self.c),
                "state": self.alg.initial(deg, ag.id),
                "inbox": [],
                "pending": {},
                "round": 0,
            }
        if self.T == 0:
            self.finished = True

    def done_all(self, world):
        return self.finished or world.round - self.start >= self.T * self.span

    def act(self, agent, ctx):
        mp = agent.shared["mp"]
        off = (ctx.world.round - self.start) % self.span
        if off == 0:
            self._begin_round(agent, ctx, mp)
        block, step = divmod(off, 2 * self.delta)
        if agent.pos != mp["home"]:
            # finish the current trip regardless of the schedule position
            self._exchange(agent, ctx, mp, step // 2 + 1)
            return agent.arrival_port
        if mp["bits"][block] == "0":
            return None
        port = step // 2 + 1
        if step % 2 == 0 and port <= ctx.degree(agent):
            return port
        return None

    def _begin_round(self, agent, ctx, mp):
        if any(mp["pending"].values()):
            raise SimulationFault(
                f"agent {agent.id} kept undelivered messages past a round")
        mp["round"] += 1
        state, outbox = self.alg.step(mp["state"], mp["inbox"], ctx.degree(agent))
        mp["state"] = state
        mp["inbox"] = []
        mp["pending"] = {}
        for port, msg in outbox:
            mp["pending"].setdefault(port, []).append(msg)

    def _exchange(self, agent, ctx, mp, port):
        """Standing at a neighbor: swap this edge's messages with its mailbox."""
        back = agent.arrival_port
        for other in ctx.others(agent):
            omp = other.shared.get("mp")
            if omp is None or omp["home"] != agent.pos:
                continue
            for msg in mp["pending"].pop(port, ()):
                omp["inbox"].append((back, msg))
            for msg in omp["pending"].pop(back, ()):
                mp["inbox"].append((port, msg))
            ctx.trace(agent, "mp_exchange", f"with={other.id}")
            return

    def memory_bits(self, agent, acct):
        # payload state is accounted separately from the agent model
        return acct.id_bits + acct.round_bits + 2 * acct.port_bits

    def finalize(self, world, report):
        complete = self.span and world.round - self.start >= self.T * self.span
        states = {}
        for ag in world.agents.values():
            mp = ag.shared["mp"]
            if complete and any(mp["pending"].values()):
                raise SimulationFault(
                    f"agent {ag.id} finished with undelivered messages")
            states[ag.id] = mp["state"]
        report.output["mp_states"] = states
        report.output["mp_rounds_simulated"] = min(
            self.T, (world.round - self.start) // self.span if self.span else 0)


def simulate_mp(world, alg, T, c=2, max_rounds=None):
    """Run `T` payload rounds on an already dispersed world."""
    prog = MpSimProgram(alg, T, c)
    delta = max(world.graph.max_degree, 1)
    bits_len = len(meeting_schedule(max(world.agents), world.graph.n, c))
    budget = max_rounds if max_rounds is not None else 2 * delta * bits_len * T + 4
    world.max_rounds = world.round + budget
    return world.run(prog)


def simulate_mp_from_any_config(world, alg, T, c=2, max_rounds=None):
    """Disperse first (leader election settles one agent per node), then run."""
    dispersed = all(len(occ) <= 1 for occ in world.occupants)
    if not dispersed:
        world.run(ElectionProgram())
    return simulate_mp(world, alg, T, c, max_rounds)


def direct_mp(g, alg, ids_by_node, T):
    """Reference executor: the same payload run centrally on the graph."""
    states = {v: alg.initial(g.degree(v), ids_by_node[v]) for v in range(g.n)}
    inboxes = {v: [] for v in range(g.n)}
    for _ in range(T):
        nxt_in = {v: [] for v in range(g.n)}
        for v in range(g.n):
            states[v], outbox = alg.step(states[v], inboxes[v], g.degree(v))
            for port, msg in outbox:
                nbr, rport, _ = g.neighbor(v, port)
                nxt_in[nbr].append((rport, msg))
        inboxes = nxt_in
    return {ids_by_node[v]: states[v] for v in range(g.n)}


class Flood:
    """Spread one token from the node holding a given id."""

    def __init__(self, source_id):
        self.source_id = source_id

    def initial(self, degree, ident):
        return {"reached": ident == self.source_id, "sent": False}

    def step(self, state, inbox, degree):
        reached = state["reached"] or bool(inbox)
        if reached and not state["sent"]:
            return ({"reached": True, "sent": True},
                    [(p, 1) for p in range(1, degree + 1)])
        return {"reached": reached, "sent": state["sent"]}, []


class BfsLabel:
    """Label every node with its hop distance from the source id's node."""

    def __init__(self, source_id):
        self.source_id = source_id

    def initial(self, degree, ident):
        return {"dist": 0 if ident == self.source_id else None, "sent": False}

    def step(self, state, inbox, degree):
        dist = state["dist"]
        if dist is None and inbox:
            dist = min(msg for _, msg in inbox) + 1
        if dist is not None and not state["sent"]:
            return ({"dist": dist, "sent": True},
                    [(p, dist) for p in range(1, degree + 1)])
        return {"dist": dist, "sent": state["sent"]}, []


class MaxIdLeader:
    """Every node learns the maximum id; its holder considers itself leader."""

    def initial(self, degree, ident):
        return {"best": ident, "own": ident, "announced": None}

    def step(self, state, inbox, degree):
        best = max([state["best"]] + [msg for _, msg in inbox])
        if best != state["announced"]:
            return ({"best": best, "own": state["own"], "announced": best},
                    [(p, best) for p in range(1, degree + 1)])
        return dict(state, best=best), []


PAYLOADS = {"flood": Flood, "bfs_label": BfsLabel, "max_id_leader": MaxIdLeader}
