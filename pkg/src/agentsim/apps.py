"""Leader-driven applications on a dispersed world: gathering, MIS, MDS.

All three share one movement pattern: the leader walks a depth-first
traversal and a group of agents travels with it. Gathering collects the
settled agent at each node as its subtree completes, so everyone ends up
at the leader's home. The set-selection programs run after gathering:
the group redisperses along a fresh traversal, one agent dropped per
node, and the leader alone probes the dropped agent's neighbors to apply
a greedy membership rule in visit order. Processing nodes one at a time
makes the greedy rule sequential, which is what the validity of the
resulting sets rests on.

Group coordination: agents act in ascending id order within a round, so
the first group member to act computes the round's decision once and
caches it; every member then reads its own move from the cache.
"""

from .runtime import SimulationFault
from .election import ElectionProgram

__all__ = ["GatherProgram", "SpreadProgram", "gather", "compute_mis", "compute_mds"]


class _GroupWalk:
    """Shared plumbing for a leader plus a co-located follower group."""

    def __init__(self):
        self.world = None
        self.walker = None
        self.finished = False
        self.stack = []
        self._cache_round = -1
        self._wmove = None
        self._fmove = None

    def _find_leader(self, world):
        leaders = [ag for ag in world.agents.values()
                   if ag.shared["status"] == "leader"]
        if len(leaders) != 1:
            raise SimulationFault(f"{self.NAME} requires exactly one leader")
        return leaders[0]

    def done_all(self, world):
        return self.finished

    def act(self, agent, ctx):
        if self.finished:
            return None
        walker = self.world.agents[self.walker]
        if self._cache_round != self.world.round:
            self._wmove, self._fmove = self._decide(walker, ctx)
            self._cache_round = self.world.round
        if agent.id == self.walker:
            return self._wmove
        if agent.shared.get("gathered"):
            return self._fmove
        return None

    def memory_bits(self, agent, acct):
        bits = acct.id_bits + 4
        if agent.id == self.walker:
            for rec in self.stack:
                bits += acct.port_bits * (1 + len(rec["tried"]))
        return bits

    @staticmethod
    def _settled(walker, ctx):
        """The agent stationed at the walker's node, if it is still one."""
        for other in ctx.others(walker):
            if not other.shared.get("gathered"):
                return other
        return None


class GatherProgram(_GroupWalk):
    """Collect every agent at the leader's node by one DFS traversal.

    Settled agents join the walking group when the walker leaves their
    node for the last time, so pickup order is deepest-first."""

    NAME = "gather"

    def setup(self, world):
        self.world = world
        leader = self._find_leader(world)
        for occ in world.occupants:
            if len(occ) != 1:
                raise SimulationFault("gather requires a dispersed world")
        self.walker = leader.id
        leader.arrival_port = None
        self.state = "walk"
        self.stack = [{"parent": None, "tried": set()}]
        if world.graph.n == 1:
            self.finished = True

    def _decide(self, walker, ctx):
        if self.state == "arrive":
            self.state = "walk"
            occ = self._settled(walker, ctx)
            if occ is None or occ.shared.get("gvisited"):
                return walker.arrival_port, walker.arrival_port
            occ.shared["gvisited"] = True
            self.stack.append({"parent": walker.arrival_port,
                               "tried": {walker.arrival_port}})
        rec = self.stack[-1]
        for port in range(1, ctx.degree(walker) + 1):
            if port not in rec["tried"]:
                rec["tried"].add(port)
                self.state = "arrive"
                return port, port
        occ = self._settled(walker, ctx)
        if occ is not None:
            # collect the local agent; it joins the group next round
            occ.shared["gathered"] = True
            ctx.trace(walker, "collect", f"agent={occ.id}")
            return None, None
        self.stack.pop()
        if rec["parent"] is None:
            self.finished = True
            ctx.emit("gathered", node=walker.pos)
            return None, None
        return rec["parent"], rec["parent"]

    def finalize(self, world, report):
        report.output["gather_node"] = world.agents[self.walker].pos
        report.output["occupancy"] = sorted(
            (len(occ) for occ in world.occupants), reverse=True)


class SpreadProgram(_GroupWalk):
    """Redisperse a gathered group and build a greedy node set.

    The walker drops one agent at each node in DFS visit order and probes
    all of that node's neighbors alone; the node joins the set exactly
    when no already-decided neighbor is a member. Because members never
    gain member neighbors, the result is independent, and because every
    skipped node saw a member next door, it is dominating and maximal.
    The walker itself settles at the last node discovered."""

    def __init__(self, kind):
        super().__init__()
        if kind not in ("mis", "mds"):
            raise ValueError(f"unknown selection kind {kind!r}")
        self.kind = kind
        self.state = "enter"
        self.owner = None
        self.probe_ports = []
        self.seen_member = False

    @property
    def NAME(self):
        return self.kind

    def setup(self, world):
        self.world = world
        leader = self._find_leader(world)
        if len(world.occupants[leader.pos]) != world.graph.n:
            raise SimulationFault(f"{self.kind} requires a gathered world")
        self.walker = leader.id
        leader.arrival_port = None

    def _decide(self, walker, ctx):
        if self.state == "arrive":
            if any(o.shared.get("dropped") for o in ctx.others(walker)):
                self.state = "walk"
                return walker.arrival_port, walker.arrival_port
            self.state = "enter"
        if self.state == "enter":
            arrival = walker.arrival_port
            self.stack.append({"parent": arrival,
                               "tried": set() if arrival is None else {arrival}})
            group = [o for o in ctx.others(walker) if o.shared.get("gathered")]
            if group:
                self.owner = group[0]
                self.owner.shared["gathered"] = False
            else:
                self.owner = walker
            self.owner.shared["dropped"] = True
            self.probe_ports = list(range(1, ctx.degree(walker) + 1))
            self.seen_member = False
            self.state = "probe"
        return self._probe_or_walk(walker, ctx)

    def _probe_or_walk(self, walker, ctx):
        if self.state == "probe":
            if self.probe_ports:
                port = self.probe_ports.pop(0)
                self.state = "probe_back"
                return port, None
            mark = "out" if self.seen_member else "in"
            self.owner.shared["mark"] = mark
            ctx.emit(f"{self.kind}_mark", node=walker.pos, agent=self.owner.id,
                     mark=mark)
            if self.owner is walker:
                self.finished = True
                return None, None
            self.state = "walk"
        if self.state == "probe_back":
            for other in ctx.others(walker):
                if other.shared.get("dropped") and other.shared.get("mark") == "in":
                    self.seen_member = True
            self.state = "probe"
            return walker.arrival_port, None
        rec = self.stack[-1]
        for port in range(1, ctx.degree(walker) + 1):
            if port not in rec["tried"]:
                rec["tried"].add(port)
                self.state = "arrive"
                return port, port
        self.stack.pop()
        if rec["parent"] is None:
            raise SimulationFault("group exhausted the graph before its agents")
        return rec["parent"], rec["parent"]

    def finalize(self, world, report):
        marks = {}
        nodes = []
        for node, occ in enumerate(world.occupants):
            for aid in occ:
                mark = world.agents[aid].shared.get("mark")
                marks[aid] = mark
                if mark == "in":
                    nodes.append(node)
        report.output[f"{self.kind}_nodes"] = frozenset(nodes)
        report.output["marks"] = marks


def _ensure_leader(world):
    if all(ag.shared["status"] != "leader" for ag in world.agents.values()):
        world.run(ElectionProgram())


def gather(world, max_rounds=None):
    """Elect a leader if needed, then collect all agents at its node."""
    _ensure_leader(world)
    g = world.graph
    budget = max_rounds if max_rounds is not None else 4 * g.m + 2 * g.n + 8
    world.max_rounds = world.round + budget
    return world.run(GatherProgram())


def _run_selection(world, kind, max_rounds):
    gather(world)
    g = world.graph
    budget = max_rounds if max_rounds is not None else 10 * g.m + 4 * g.n + 16
    world.max_rounds = world.round + budget
    return world.run(SpreadProgram(kind))


def compute_mis(world, max_rounds=None):
    """Maximal independent set of the nodes, chosen greedily in DFS order."""
    return _run_selection(world, "mis", max_rounds)


def compute_mds(world, max_rounds=None):
    """Minimal dominating set; the greedy independent set is one."""
    return _run_selection(world, "mds", max_rounds)
