"""Minimum spanning tree construction driven by an elected leader.

The leader walks the dispersed world and coordinates everything itself; it
is the only agent that ever moves. The protocol has three layers:

 - a fresh depth-first traversal builds a routing tree over all agents and
   assigns each one a distinct rank in first-visit order (leader = rank 1);
 - the leader then runs merge phases: it carries the token to agents in
   rank order, and at each component representative (the member whose rank
   equals its component's rank) it searches the component for the minimum
   outgoing edge and merges across it when this component's rank is the
   lower one, reversing parent pointers on the absorbed side;
 - a final sweep announces completion once the leader's component spans
   the whole graph.

Each agent's `tree` entry in shared state holds its rank, current
component rank, routing-tree pointers, and which of its ports carry MST
edges. Only the walker mutates any of it, one node at a time, so plain
in-place updates are race-free.
"""

from .runtime import SimulationFault
from .election import ElectionProgram

__all__ = ["MSTProgram", "run_mst", "mst_edges_from_world"]


class MSTProgram:
    """Post-election program; requires a dispersed world with one leader."""

    def __init__(self):
        self.walker = None
        self.state = "build"
        self.finished = False
        self.next_rank = 2
        self.descending = False
        self.bounced = False
        self.phase = 0
        self.holder_rank = 1
        self.rep_rank = None
        self.nonce = None
        self.tour = None
        self.tour_started = False
        self.probing = None
        self.probe_weight = None
        self.probe_queue = []
        self.scan_comp = None
        self.best = None          # (weight, far-side component rank)
        self.moe_port = None
        self.merge_stage = None
        self.new_comp = None
        self.climb_home = True

    # -- program contract ---------------------------------------------

    def setup(self, world):
        leaders = [ag for ag in world.agents.values()
                   if ag.shared["status"] == "leader"]
        if len(leaders) != 1:
            raise SimulationFault("mst requires exactly one leader")
        for node, occ in enumerate(world.occupants):
            if len(occ) != 1:
                raise SimulationFault("mst requires a dispersed world")
        self.walker = leaders[0].id
        # the arrival port left over from a previous program is meaningless
        leaders[0].arrival_port = None
        leaders[0].shared["tree"] = self._fresh_tree(1, None)
        if world.graph.n == 1:
            leaders[0].shared["tree"]["done"] = True
            self.finished = True

    @staticmethod
    def _fresh_tree(rank, parent_port):
        tried = set() if parent_port is None else {parent_port}
        return {
            "rank": rank, "comp": rank,
            "t_parent": parent_port, "t_children": [], "t_tried": tried,
            "parent_port": None, "mst_ports": set(), "done": False,
        }

    def done_all(self, world):
        return self.finished

    def act(self, agent, ctx):
        if agent.id != self.walker or self.finished:
            return None
        if self.state == "build":
            return self._build_step(agent, ctx)
        if self.state == "descend":
            self.state = "route"
            return self._route_step(agent, ctx)
        if self.state == "climb":
            return self._climb_step(agent, ctx)
        if self.state == "route":
            return self._route_step(agent, ctx)
        if self.state == "moe":
            return self._moe_step(agent, ctx)
        if self.state == "merge":
            return self._merge_step(agent, ctx)
        if self.state == "announce":
            move = self._tour_step(agent, ctx, self._mark_done)
            if move == "done":
                self._start_tour("gohome")
                self.state = "gohome"
                return self.act(agent, ctx)
            return move
        if self.state == "gohome":
            move = self._tour_step(agent, ctx, self._home_visit)
            if move is None:
                self.finished = True
                ctx.emit("mst_done", phase=self.phase)
                return None
            if move == "done":
                raise SimulationFault("walker failed to find its home node")
            return move
        raise SimulationFault(f"unknown mst state {self.state}")

    def memory_bits(self, agent, acct):
        tree = agent.shared.get("tree")
        if tree is None:
            return 0
        bits = 2 * acct.id_bits
        bits += acct.port_bits * (2 + len(tree["t_children"])
                                  + len(tree["t_tried"])
                                  + len(tree["mst_ports"])
                                  + len(tree.get("e_tried", ())))
        if agent.id == self.walker:
            bits += 4 * acct.id_bits + 6 * acct.port_bits + 16
        return bits

    def finalize(self, world, report):
        edges, total = mst_edges_from_world(world)
        report.output["mst_edges"] = edges
        report.output["mst_weight"] = total
        report.output["phases"] = self.phase

    # -- helpers ------------------------------------------------------

    def _here(self, agent, ctx):
        """The tree record stored at the walker's current node."""
        occ = ctx.others(agent)
        return (occ[0] if occ else agent).shared["tree"]

    # -- build: DFS routing tree + rank assignment --------------------

    def _build_step(self, agent, ctx):
        occ = ctx.others(agent)
        owner = occ[0] if occ else agent
        tree = owner.shared.get("tree")
        if self.descending:
            self.descending = False
            if tree is not None:
                self.bounced = True
                return agent.arrival_port
            tree = self._fresh_tree(self.next_rank, agent.arrival_port)
            self.next_rank += 1
            owner.shared["tree"] = tree
        elif self.bounced:
            self.bounced = False
        elif agent.arrival_port is not None:
            # returned from a fully explored child subtree
            tree["t_children"].append(agent.arrival_port)
        for port in range(1, ctx.degree(agent) + 1):
            if port not in tree["t_tried"]:
                tree["t_tried"].add(port)
                self.descending = True
                return port
        if tree["t_parent"] is not None:
            return tree["t_parent"]
        self.state = "route"
        self.phase = 1
        ctx.emit("phase", number=self.phase)
        return self._route_step(agent, ctx)

    # -- token routing along the ranked tree --------------------------

    def _route_step(self, agent, ctx):
        """Standing at the token holder: act as representative or move on."""
        tree = self._here(agent, ctx)
        if tree["rank"] != self.holder_rank:
            raise SimulationFault("token routing lost its place")
        if tree["comp"] == tree["rank"]:
            self.rep_rank = tree["rank"]
            ctx.trace(agent, "find_moe", f"comp={tree['comp']}")
            self._start_tour("scan")
            self.state = "moe"
            return self._moe_step(agent, ctx)
        return self._advance_token(agent, ctx, tree)

    def _advance_token(self, agent, ctx, tree):
        """Move toward the preorder successor of the current holder."""
        self.state = "route"
        if tree["t_children"]:
            self.holder_rank += 1
            ctx.trace(agent, "pass_token", f"to_rank={self.holder_rank}")
            self.state = "descend"
            return tree["t_children"][0]
        return self._climb_from(agent, ctx, tree)

    def _climb_from(self, agent, ctx, tree):
        if tree["t_parent"] is None:
            # wrapped past the last rank: a new phase starts at the leader
            self.phase += 1
            ctx.emit("phase", number=self.phase)
            self.holder_rank = 1
            return self._route_step(agent, ctx)
        self.state = "climb"
        return tree["t_parent"]

    def _climb_step(self, agent, ctx):
        tree = self._here(agent, ctx)
        kids = tree["t_children"]
        came_from = agent.arrival_port
        if came_from in kids and kids.index(came_from) + 1 < len(kids):
            self.holder_rank += 1
            ctx.trace(agent, "pass_token", f"to_rank={self.holder_rank}")
            self.state = "descend"
            return kids[kids.index(came_from) + 1]
        return self._climb_from(agent, ctx, tree)

    # -- component tours (nonce-tagged DFS over MST edges) ------------

    def _start_tour(self, kind):
        self.nonce = (self.phase, self.holder_rank, kind)
        self.tour = kind
        self.tour_started = False
        self.probing = None
        self.probe_queue = []
        if kind == "scan":
            self.best = None
            self.scan_comp = self.rep_rank

    def _tour_step(self, agent, ctx, visit):
        """Walk every component member once; `visit` runs at first arrival.

        Returns a port to move through, 'done' back at the start with the
        whole component covered, or None if `visit` asked to stop here."""
        if self.probing is not None:
            # standing across a probed edge: classify it and step back
            self.probing = None
            far = self._here(agent, ctx) if ctx.others(agent) else agent.shared["tree"]
            if far["comp"] != self.scan_comp:
                if self.best is None or self.probe_weight < self.best[0]:
                    self.best = (self.probe_weight, far["comp"])
            return agent.arrival_port
        tree = self._here(agent, ctx)
        if tree.get("e_nonce") != self.nonce:
            tree["e_nonce"] = self.nonce
            parent = agent.arrival_port if self.tour_started else None
            tree["e_parent"] = parent
            tree["e_tried"] = set() if parent is None else {parent}
            if visit(agent, ctx, tree):
                return None
        if self.probe_queue:
            self.probing = self.probe_queue.pop(0)
            self.probe_weight = ctx.port_weight(agent, self.probing)
            return self.probing
        for port in sorted(tree["mst_ports"]):
            if port not in tree["e_tried"]:
                tree["e_tried"].add(port)
                self.tour_started = True
                return port
        if tree["e_parent"] is None:
            return "done"
        return tree["e_parent"]

    # -- MOE search ---------------------------------------------------

    def _moe_step(self, agent, ctx):
        if self.tour == "scan":
            move = self._tour_step(agent, ctx, self._scan_visit)
            if move != "done":
                return move
            if self.best is None:
                # no outgoing edge anywhere: the component spans the graph
                ctx.trace(agent, "mst_complete", f"phase={self.phase}")
                self._start_tour("announce")
                self.state = "announce"
                return self._tour_step(agent, ctx, self._mark_done)
            self._start_tour("seek")
            return self._moe_step(agent, ctx)
        move = self._tour_step(agent, ctx, self._seek_visit)
        if move is None:
            self.state = "merge"
            self.merge_stage = "cross"
            return self._merge_step(agent, ctx)
        if move == "done":
            raise SimulationFault("minimum outgoing edge vanished mid-phase")
        return move

    def _scan_visit(self, agent, ctx, tree):
        self.probe_queue = [p for p in range(1, ctx.degree(agent) + 1)
                            if p not in tree["mst_ports"]]
        return False

    def _seek_visit(self, agent, ctx, tree):
        for port in range(1, ctx.degree(agent) + 1):
            if port not in tree["mst_ports"] \
                    and ctx.port_weight(agent, port) == self.best[0]:
                tree["mst_ports"].add(port)
                self.moe_port = port
                return True
        return False

    # -- merging ------------------------------------------------------

    def _merge_step(self, agent, ctx):
        if self.merge_stage == "cross":
            self.merge_stage = "absorb"
            return self.moe_port
        if self.merge_stage == "absorb":
            tree = self._here(agent, ctx)
            tree["mst_ports"].add(agent.arrival_port)
            far = tree["comp"]
            self.new_comp = min(far, self.rep_rank)
            ctx.emit("merge", low=self.new_comp, high=max(far, self.rep_rank),
                     weight=self.best[0], phase=self.phase)
            ctx.trace(agent, "merge", f"low={self.new_comp} "
                                      f"high={max(far, self.rep_rank)}")
            if far > self.rep_rank:
                # far side loses its root: reverse it starting right here
                self.climb_home = True
                self.merge_stage = "reverse"
            else:
                # my side loses its root; step back and reverse from there
                self.climb_home = False
                self.merge_stage = "cross_back"
                return agent.arrival_port
        if self.merge_stage == "cross_back":
            # back on my side via the MOE edge; its port is the new parent
            self.merge_stage = "reverse"
        if self.merge_stage == "reverse":
            tree = self._here(agent, ctx)
            old = tree["parent_port"]
            tree["parent_port"] = agent.arrival_port
            if old is not None:
                return old
            self._start_tour("broadcast")
            self.merge_stage = "broadcast"
            # fall through: broadcast the merged rank from the old root
        if self.merge_stage == "broadcast":
            move = self._tour_step(agent, ctx, self._broadcast_visit)
            if move != "done":
                return move
            if not self.climb_home:
                # reversal ran on my side, so it ended at my old root,
                # which is the representative itself
                self.merge_stage = None
                return self._advance_token(agent, ctx, self._here(agent, ctx))
            self.merge_stage = "home"
            # fall through: climb back to the representative
        if self.merge_stage == "home":
            tree = self._here(agent, ctx)
            if tree["parent_port"] is not None:
                return tree["parent_port"]
            self.merge_stage = None
            return self._advance_token(agent, ctx, tree)
        raise SimulationFault(f"unknown merge stage {self.merge_stage}")

    def _broadcast_visit(self, agent, ctx, tree):
        tree["comp"] = self.new_comp
        return False

    def _mark_done(self, agent, ctx, tree):
        tree["done"] = True
        return False

    def _home_visit(self, agent, ctx, tree):
        return not ctx.others(agent)


def mst_edges_from_world(world):
    """Collect marked MST edges with node labels; oracle-side view.

    Each agent's port marks describe its home node. Settled agents stand
    at home; if the leader is still away, its home is the one empty node."""
    g = world.graph
    home = {}
    leader = next((ag for ag in world.agents.values()
                   if ag.shared.get("status") == "leader"), None)
    for node, occ in enumerate(world.occupants):
        for aid in occ:
            if leader is not None and aid == leader.id:
                continue
            home[aid] = node
    if leader is not None:
        empty = set(range(g.n)) - set(home.values())
        home[leader.id] = empty.pop() if empty else leader.pos
    edges = set()
    for aid, node in home.items():
        tree = world.agents[aid].shared.get("tree")
        if not tree:
            continue
        for port in tree["mst_ports"]:
            nbr, _, w = g.neighbor(node, port)
            edges.add((min(node, nbr), max(node, nbr), w))
    total = sum(w for _, _, w in edges)
    return frozenset(edges), total


def run_mst(world, max_rounds=None):
    """Elect a leader if needed, then build the MST; returns the report."""
    statuses = {ag.shared["status"] for ag in world.agents.values()}
    if "leader" not in statuses:
        world.run(ElectionProgram())
    g = world.graph
    budget = 16 * g.m + 24 * (g.m + g.n) * (max(g.n, 2).bit_length() + 1)
    world.max_rounds = world.round + (max_rounds if max_rounds is not None else budget)
    return world.run(MSTProgram())
