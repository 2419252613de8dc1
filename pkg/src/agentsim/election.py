"""Leader election for mobile agents on anonymous port-labeled graphs.

Four cooperating per-agent programs:

* Singleton candidates (initially alone) repeatedly sweep their neighbors,
  compare degrees and ids, and fall back to a padded-id visit schedule when
  equal-degree neighbors keep missing each other in lockstep.
* Co-located groups disperse by DFS; the minimum-id member leads, and one
  agent settles at each confirmed-empty node.
* A confirm sweep distinguishes truly empty nodes from the vacated home
  node of a traveling local leader (identified by a note at a neighbor).
* Local leaders race a DFS over all edges; the lexicographically largest
  (promotion round, id) survives and declares itself leader at its home.

State an agent exposes to co-located agents lives in `agent.shared`; all
mutation of shared state goes through ctx.write so every agent observes
the previous round only.
"""

from __future__ import annotations

CAND = "cand"
NONCAND = "noncand"
LOCAL = "ll"
LEADER = "leader"

# A head-vs-head meeting at an empty node settles one member of the
# larger-id DFS by default; flip to settle from the smaller-id DFS.
MEETING_LARGER_SETTLES = True


class PaddedId:
    """Id bits followed by the pattern '10' repeated b^2 times."""

    __slots__ = ("b", "bits")

    def __init__(self, b, bits):
        self.b = b
        self.bits = bits

    def __len__(self):
        return len(self.bits)


def pad_id(id_bits):
    """Pad a minimal binary id to length b + 2*b^2."""
    if not id_bits:
        raise ValueError("empty id bit string")
    if id_bits[0] != "1":
        raise ValueError("id bits must start with 1 (minimal encoding)")
    b = len(id_bits)
    return PaddedId(b, id_bits + "10" * (b * b))


def exploration_schedule(p, delta):
    """Block timeline for the padded id: '1' -> sweep block, '0' -> stay.

    Each block spans 2*delta rounds; a sweep block visits ports 1..delta,
    returning home after each.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    return ["sweep" if c == "1" else "stay" for c in p.bits]


def schedule_rounds(p, delta):
    return 2 * delta * len(p.bits)


class Rec:
    """DFS record for one node within one traversal.

    p: parent port (None at the root); pk: how to find the parent node's
    record ('A' = in the agent stationed there, ('N', x) = carried, keyed
    by the id of the local leader whose home the parent is); tried: ports
    already taken from this node.
    """

    __slots__ = ("p", "pk", "tried")

    def __init__(self, p, pk, tried):
        self.p = p
        self.pk = pk
        self.tried = tried


def _pinned(sh):
    return not sh["away"]


def _classify(ag, ctx, own=None):
    """Snapshot of co-located agents, bucketed the way the programs need.

    `own`: head id whose followers should not count as a foreign group."""
    out = {
        "station": None,   # pinned settled/candidate agent (the node's occupant)
        "pinned_ll": None, # pinned local leader or leader at its home
        "waiter": None,    # pinned waiting-chain candidate parked here
        "leader_seen": False,
        "gheads": [],      # roaming global-election heads
        "mheads": [],      # roaming multiplicity heads
        "mtransient": False,  # any roaming multiplicity member
    }
    for a in ctx.others(ag):
        sh = a.shared
        st = sh["status"]
        if st == LEADER:
            out["leader_seen"] = True
        if _pinned(sh):
            if sh.get("waiting"):
                out["waiter"] = a
            elif st in (CAND, NONCAND):
                if out["station"] is None or a.id < out["station"].id:
                    out["station"] = a
            else:
                out["pinned_ll"] = a
        else:
            if sh.get("mhead"):
                out["mheads"].append(a)
                out["mtransient"] = True
            elif sh.get("follow") is not None and sh["follow"] != own:
                out["mtransient"] = True
            if sh.get("gkey") is not None and st == LOCAL:
                out["gheads"].append(a)
    return out


def _set(sh, **kv):
    def fn(sh=sh, kv=kv):
        sh.update(kv)
    return fn


REC_NEW = object()


class ConfirmSweep:
    """Visit every neighbor of the current node, 2 rounds per port,

    reading home notes, home signs of note-delivering local leaders, and
    parked waiters. The verdict is (key, strongest) where key is ('N', x)
    for the agent whose home the confirmed node is (None when truly empty)
    and strongest is the largest (stamp, id) seen in notes or signs."""

    __slots__ = ("deg", "port", "leg", "found", "strongest", "lingered")

    def __init__(self, deg):
        self.deg = deg
        self.port = 1
        self.leg = 0
        self.found = []
        self.strongest = None
        self.lingered = False

    def step(self, ag, ctx):
        """Returns ('move', port) while sweeping, or ('done', verdict)."""
        if self.leg == 1:
            back = ag.arrival_port
            if not self.lingered and self._unknown_present(ag, ctx):
                # a roaming local leader is here and has not posted its home
                # sign yet; one more round and it either has, or has moved on
                self.lingered = True
                return ("move", None)
            self.lingered = False
            for a in ctx.others(ag):
                sh = a.shared
                sign = sh.get("home_sign")
                if sign is not None and sign[0] == back:
                    self.found.append(("N", a.id))
                    self._stronger((sign[1], a.id))
                if not _pinned(sh):
                    continue
                for lid, nport, stamp in sh.get("home_notes", ()):
                    if nport == back:
                        self.found.append(("N", lid))
                        self._stronger((stamp, lid))
                if sh.get("waiting") and sh.get("waiting_port") == back:
                    self.found.append(("N", a.id))
            self.leg = 0
            self.port += 1
            return ("move", back)
        if self.port > self.deg:
            key = min(self.found) if self.found else None
            return ("done", (key, self.strongest))
        self.leg = 1
        return ("move", self.port)

    def _stronger(self, tup):
        if self.strongest is None or tup > self.strongest:
            self.strongest = tup

    @staticmethod
    def _unknown_present(ag, ctx):
        for a in ctx.others(ag):
            sh = a.shared
            if sh.get("gkey") and not _pinned(sh) and sh.get("home_sign") is None:
                return True
        return False


class SingletonMachine:
    """A candidate that started alone: sweep, compare, pad, decide."""

    def __init__(self, prog, ag, deg):
        self.prog = prog
        self.deg = deg
        ag.shared["home_deg"] = deg
        self.port = 1
        self.leg = 0
        self.doomed = False
        self.ok_all = True       # every port pinned by an acceptable singleton
        self.empty_equal = False  # some equal-degree neighbor slot was empty
        self.pad = None          # padded-bit string once padding starts
        self.block = 0
        self.idle = 0
        self.pad_done = False
        self.stamp = None
        self.inform_port = 0     # >0 while running the post-promotion sweep
        self.inform_leg = 0
        self.note_written = False

    def act(self, ag, ctx):
        sh = ag.shared
        if sh["status"] != CAND:
            return None
        if self.deg == 0:
            self._promote(ag, ctx)
            return None
        if self.leg == 1:
            self._observe(ag, ctx)
            self.leg = 0
            self.port += 1
            ctx.write(ag.id, _set(sh, away=False))
            return ag.arrival_port
        # at home
        if self.doomed or self._home_threat(ag, ctx):
            self._settle(ag, ctx)
            return None
        if self.idle:
            self.idle -= 1
            return None
        if self.port > self.deg:
            return self._evaluate(ag, ctx)
        return self._go_out(ag, ctx)

    def _go_out(self, ag, ctx):
        sh = ag.shared
        ctx.write(ag.id, _set(sh, away=True))
        ctx.trace(ag, "probe", f"port={self.port}")
        self.leg = 1
        return self.port

    def _start_sweep(self, ag, ctx):
        self.port = 1
        self.ok_all = True
        self.empty_equal = False
        return self._go_out(ag, ctx)

    def _observe(self, ag, ctx):
        nd = ctx.degree(ag)
        if nd < self.deg:
            # a smaller-degree neighbor node beats us whether or not its
            # occupant is in right now
            self.doomed = True
            return
        occupant = None
        for a in ctx.others(ag):
            sh = a.shared
            if sh["status"] in (LOCAL, LEADER) or not sh["init_alone"] or sh.get("gkey"):
                self.doomed = True
                return
            if _pinned(sh):
                occupant = a
        if occupant is None:
            self.ok_all = False
            if nd == self.deg:
                self.empty_equal = True
            return
        if nd == self.deg and occupant.id > ag.id:
            self.doomed = True
        # equal degree + smaller id, or larger degree: acceptable neighbor

    def _home_threat(self, ag, ctx):
        for a in ctx.others(ag):
            sh = a.shared
            if not sh["init_alone"] or sh["status"] in (LOCAL, LEADER) or sh.get("gkey"):
                return True
            # a visiting candidate of equal home degree and larger id wins
            # the pairwise duel even though we are the one being visited
            if sh["status"] == CAND and sh.get("home_deg") == self.deg and a.id > ag.id:
                return True
        return False

    def _settle(self, ag, ctx):
        ctx.trace(ag, "settle", "origin=singleton")
        ctx.write(ag.id, _set(ag.shared, status=NONCAND, stationed=True, away=False))

    def _evaluate(self, ag, ctx):
        in_pad = self.pad is not None and not self.pad_done
        if in_pad:
            self.block += 1
        if self.doomed:
            self._settle(ag, ctx)
            return None
        if self.ok_all:
            self._promote(ag, ctx)
            return None
        if self.pad is None and not self.pad_done and self.empty_equal:
            self.pad = pad_id(format(ag.id, "b")).bits
            self.block = 0
            return self._pad_advance(ag, ctx)
        if in_pad:
            return self._pad_advance(ag, ctx)
        if self.pad_done and self.empty_equal:
            self._settle(ag, ctx)
            return None
        return self._start_sweep(ag, ctx)

    def _pad_advance(self, ag, ctx):
        if self.block >= len(self.pad):
            self.pad_done = True
            return self._start_sweep(ag, ctx)
        bit = self.pad[self.block]
        ctx.trace(ag, "sweep", f"block={self.block} bit={bit}")
        if bit == "1":
            return self._start_sweep(ag, ctx)
        self.idle = 2 * self.deg - 1
        return None

    def _promote(self, ag, ctx):
        self.stamp = ctx.round
        ctx.trace(ag, "promote_local", f"stamp={self.stamp}")
        ctx.write(ag.id, _set(ag.shared, status=LOCAL, gkey=(self.stamp, ag.id)))
        if self.deg == 0:
            self._enter_global(ag)
        else:
            self.prog.machines[ag.id] = InformMachine(self.prog, ag, self)

    def _enter_global(self, ag):
        self.prog.machines[ag.id] = GlobalMachine(self.prog, ag, self.stamp)

    def bits(self, acct):
        pad_len = len(self.pad) if self.pad else 1
        return (
            2 * acct.port_bits          # sweep cursor + inform cursor
            + 2                         # legs
            + acct.counter(2 * acct.delta)  # idle countdown
            + acct.counter(pad_len)     # padding block index
            + 6                         # flags and aggregates
            + acct.round_bits           # promotion stamp
        )


class InformMachine:
    """Fresh singleton-origin local leader: visit each neighbor for two

    rounds (so lockstep sweepers are met) and leave the home note with the
    port-1 neighbor's occupant, then start the global election DFS."""

    def __init__(self, prog, ag, sm):
        self.prog = prog
        self.deg = sm.deg
        self.stamp = sm.stamp
        self.port = 1
        self.leg = 0
        self.note_written = False

    def act(self, ag, ctx):
        sh = ag.shared
        if self.leg == 0:
            if self.port > self.deg:
                self.prog.machines[ag.id] = GlobalMachine(self.prog, ag, self.stamp)
                return self.prog.machines[ag.id].act(ag, ctx)
            ctx.write(ag.id, _set(sh, away=True))
            self.leg = 1
            return self.port
        if self.port == 1 and not self.note_written:
            self._try_note(ag, ctx)
        if self.leg == 1:
            self.leg = 2
            return None
        self.leg = 0
        self.port += 1
        ctx.write(ag.id, _set(sh, away=False))
        return ag.arrival_port

    def _try_note(self, ag, ctx):
        for a in ctx.others(ag):
            osh = a.shared
            if _pinned(osh) and (osh["status"] in (CAND, NONCAND) or osh["stationed"]):
                note = (ag.id, ag.arrival_port, self.stamp)
                ctx.write(ag.id, lambda s=a.shared, n=note: s["home_notes"].append(n))
                ctx.trace(ag, "write_home_note", f"holder={a.id}")
                self.note_written = True
                return

    def bits(self, acct):
        return 2 * acct.port_bits + 3 + acct.round_bits


class HeadBase:
    """Shared mechanics for the two roaming DFS heads: record storage at

    stationed agents or carried for (would-be) home nodes, the claim
    protocol at apparently-empty nodes, and the confirm sweep."""

    def __init__(self, prog, ag):
        self.prog = prog
        self.aid = ag.id
        self.carried = {}
        self.from_key = None     # storage key of the node we last left forward
        self.exit_port = None    # port we left that node through
        self.back_key = None     # storage key awaited on backtrack/bounce
        self.mode = "fwd"
        self.entry_port = None   # arrival port at the current forward node;
                                 # kept because confirm sweeps overwrite arrival_port
        self.empty_seen = 0
        self.confirm = None
        self.verdict = None
        self.has_verdict = False

    # -- storage ------------------------------------------------------

    def _load(self, key, view):
        """Record of the current node under `key`, or None if not written.

        Returns REC_NEW when the storage holder is temporarily away."""
        if key == "A":
            st = view["station"]
            if st is None:
                return REC_NEW
            rec = st.shared["dfs"].get(self.key)
            if rec is None and ("N", st.id) in self.carried:
                return self.carried[("N", st.id)]
            return rec
        return self.carried.get(key)

    def _store(self, key, rec, view, ctx):
        if key == "A":
            st = view["station"]
            ctx.write(self.aid, lambda d=st.shared["dfs"], k=self.key, r=rec: d.__setitem__(k, r))
        else:
            self.carried[key] = rec

    def _mark_tried(self, key, rec, port, view, ctx):
        if key == "A" and rec not in self.carried.values():
            ctx.write(self.aid, lambda r=rec, p=port: r.tried.add(p))
        else:
            rec.tried.add(port)

    def _storage_key(self, view):
        """Storage key for the current node, or None (needs claim/confirm),

        or 'WAIT' when the occupant is briefly away, or 'TRANSIENT'."""
        if view["station"] is not None:
            return "A"
        if view["pinned_ll"] is not None:
            return ("N", view["pinned_ll"].id)
        if view["waiter"] is not None:
            return view["waiter"].shared["on_home_key"]
        if view["mtransient"]:
            return "TRANSIENT"
        return None

    # -- claim + confirm at an apparently empty node ------------------

    def _claim_step(self, ag, ctx, deg):
        """Returns None (keep staying), or ('verdict', key_or_None)."""
        if self.confirm is not None:
            kind, val = self.confirm.step(ag, ctx)
            if kind == "move":
                return ("move", val)
            self.confirm = None
            ctx.trace(ag, "confirm_empty", f"verdict={val}")
            return ("verdict", val)
        self.empty_seen += 1
        if self.empty_seen < 3:
            return ("stay", None)
        self.empty_seen = 0
        self.confirm = ConfirmSweep(deg)
        kind, val = self.confirm.step(ag, ctx)
        return ("move", val)

    def _reset_claim(self):
        self.empty_seen = 0
        self.confirm = None
        self.has_verdict = False
        self.verdict = None

    def _leave(self):
        self._reset_claim()
        self.entry_port = None


class GlobalMachine(HeadBase):
    """DFS over every edge run by a local leader; survives only while its

    (promotion round, id) stamp is the largest it has seen."""

    def __init__(self, prog, ag, stamp):
        super().__init__(prog, ag)
        self.stamp = stamp
        self.tup = (stamp, ag.id)
        self.key = ("G", stamp, ag.id)
        root = Rec(None, None, set())
        self.carried[("N", ag.id)] = root
        self.mode = "back"
        self.back_key = ("N", ag.id)
        self.retreating = False
        self.retreat_key = None
        self.done = False

    def act(self, ag, ctx):
        if self.done:
            return None
        if self.retreating:
            return self._retreat_step(ag, ctx)
        if self.confirm is not None and self.confirm.leg == 1:
            # mid-sweep we stand at a neighbor node; nothing else applies
            kind, val = self._claim_step(ag, ctx, 0)
            if kind == "move":
                return val
            self.verdict = val
            self.has_verdict = True
        view = _classify(ag, ctx)
        if view["leader_seen"]:
            return self._lose(ag, ctx, view)
        for other in view["gheads"]:
            if tuple(other.shared["gkey"]) > self.tup:
                return self._lose(ag, ctx, view)
        pll = view["pinned_ll"]
        if pll is not None and pll.shared.get("gkey") \
                and tuple(pll.shared["gkey"]) > self.tup:
            return self._lose(ag, ctx, view)
        if self.mode in ("back", "bounce"):
            key = self.back_key
            rec = self._load(key, view)
            if rec is REC_NEW:
                return None  # occupant briefly away; wait
            if self._mark_check(view):
                return self._lose(ag, ctx, view)
            ctx.trace(ag, "dfs_backtrack", "")
            return self._continue(ag, ctx, key, rec, view)
        # forward arrival
        if self.entry_port is None:
            self.entry_port = ag.arrival_port
        key = self._storage_key(view)
        if key == "TRANSIENT":
            # a traveling group holds the node; it moves on or settles within
            # a few rounds, and skipping would orphan everything behind it
            self._reset_claim()
            return None
        if key is not None:
            self._reset_claim()
            if self._mark_check(view):
                return self._lose(ag, ctx, view)
            return self._forward_at(ag, ctx, key, view)
        return self._empty_path(ag, ctx, view)

    def _mark_check(self, view):
        st = view["station"]
        if st is None:
            return False
        for k in st.shared["dfs"]:
            if k[0] == "G" and (k[1], k[2]) > self.tup:
                return True
        return False

    def _forward_at(self, ag, ctx, key, view):
        rec = self._load(key, view)
        if rec is REC_NEW:
            return None
        if rec is not None:
            self._mark_tried(key, rec, self.entry_port, view, ctx)
            self.mode = "bounce"
            self.back_key = self.from_key
            port = self.entry_port
            self._leave()
            return port
        rec = Rec(self.entry_port, self.from_key, {self.entry_port})
        self._store(key, rec, view, ctx)
        return self._continue(ag, ctx, key, rec, view)

    def _continue(self, ag, ctx, key, rec, view):
        deg = ctx.degree(ag)
        nxt = None
        for p in range(1, deg + 1):
            if p not in rec.tried:
                nxt = p
                break
        if not ag.shared["away"]:
            ctx.write(ag.id, _set(ag.shared, away=True))
        if nxt is not None:
            self._mark_tried(key, rec, nxt, view, ctx)
            self.mode = "fwd"
            self.from_key = key
            self.exit_port = nxt
            self._leave()
            ctx.trace(ag, "dfs_forward", f"port={nxt}")
            return nxt
        if rec.p is None:
            # all edges visited, back at the home node
            self.done = True
            ctx.trace(ag, "promote_global", "")
            ctx.write(ag.id, _set(ag.shared, status=LEADER, stationed=True, away=False,
                                  all_edges_visited=True))
            return None
        self.mode = "back"
        self.back_key = rec.pk
        self._leave()
        return rec.p

    def _empty_path(self, ag, ctx, view):
        if view["mheads"]:
            # a dispersing group head may settle someone here; let it
            self._reset_claim()
            return None
        if self.has_verdict:
            verdict, strongest = self.verdict
            self.has_verdict = False
            if strongest is not None and strongest > self.tup:
                return self._lose(ag, ctx, view)
            if verdict is None:
                # nobody's home yet: dispersal elsewhere has not reached this
                # node, so sit out a fresh claim until it resolves
                self._reset_claim()
                return None
            return self._forward_at(ag, ctx, verdict, view)
        kind, val = self._claim_step(ag, ctx, ctx.degree(ag))
        if kind == "move":
            return val
        if kind == "verdict":
            self.verdict = val
            self.has_verdict = True
        return None

    def _lose(self, ag, ctx, view):
        ctx.trace(ag, "demote", "")
        ctx.write(ag.id, _set(ag.shared, status=NONCAND, gkey=None))
        self.retreating = True
        # start the retreat from a node holding one of our records
        key = self.back_key if self.mode in ("back", "bounce") else None
        if key is None:
            rec = None
            k = self._storage_key(view)
            if k not in (None, "TRANSIENT"):
                rec = self._load(k, view)
                if rec is REC_NEW:
                    rec = None
            if rec is not None:
                self.retreat_key = k
                return None
            self.retreat_key = self.from_key
            return self.entry_port if self.entry_port is not None else ag.arrival_port
        self.retreat_key = key
        return None

    def _retreat_step(self, ag, ctx):
        view = _classify(ag, ctx)
        rec = self._load(self.retreat_key, view)
        if rec is REC_NEW or rec is None:
            return None
        if rec.p is None:
            self.done = True
            ctx.write(ag.id, _set(ag.shared, stationed=True, away=False))
            return None
        self.retreat_key = rec.pk
        return rec.p

    def bits(self, acct):
        rec_bits = self._rec_bits(acct)
        return (
            acct.round_bits + acct.id_bits     # stamp tuple
            + len(self.carried) * rec_bits
            + 2 * (acct.id_bits + 2)           # two storage-key cursors
            + acct.port_bits + 4               # exit port, mode, flags
            + acct.counter(2)                  # claim counter
            + (2 * acct.port_bits + 2)         # confirm sweep cursor
        )

    def _rec_bits(self, acct):
        return acct.port_bits + (acct.id_bits + 2) + acct.delta


class SettledMachine:
    """A stationed non-candidate: holds records and notes, never moves."""

    def act(self, ag, ctx):
        return None

    def bits(self, acct):
        return 0


class FollowerMachine:
    """Multiplicity group member: mirrors the head's announced move."""

    def __init__(self, head_id):
        self.head_id = head_id
        self.settled = False

    def act(self, ag, ctx):
        if self.settled:
            return None
        head = None
        for a in ctx.others(ag):
            if a.id == self.head_id:
                head = a
                break
        if head is None:
            return None
        ins = head.shared["next_move"]
        if ins[0] == "move":
            return ins[1]
        if ins[0] == "settle" and ins[1] == ag.id:
            self.settled = True
            ctx.trace(ag, "settle", "origin=multiplicity")
            ctx.write(ag.id, _set(ag.shared, status=NONCAND, stationed=True,
                                  away=False, follow=None))
        return None

    def bits(self, acct):
        return acct.id_bits + 1


class MultHeadMachine(HeadBase):
    """Minimum-id member of a co-located group: leads the dispersal DFS,

    settles followers at confirmed-empty nodes, and finally either becomes
    a local leader or parks in a waiting chain."""

    def __init__(self, prog, ag, group):
        super().__init__(prog, ag)
        self.attempt = 0
        self.key = ("M", ag.id, 0)
        self.group = group              # unsettled follower ids
        self.state = "root"
        self.deferring = False
        self.defer_needs_head = False
        self.endgame = None             # promotion / waiting-chain sub-state
        self.wait_port = None
        self.stamp = None

    def act(self, ag, ctx):
        sh = ag.shared
        ins = sh["next_move"]
        if ins[0] == "move":
            ctx.write(ag.id, _set(sh, next_move=("stay",)))
            return ins[1]
        if ins[0] == "settle":
            plan, move = self._after_settle(ag, ctx, ins[1])
            ctx.write(ag.id, _set(sh, next_move=plan))
            return move
        if self.state == "root":
            plan, move = self._root_init(ag, ctx)
        elif self.endgame is not None:
            plan, move = ("stay",), self._endgame_step(ag, ctx)
        else:
            plan, move = self._decide(ag, ctx)
        ctx.write(ag.id, _set(sh, next_move=plan))
        return move

    # -- startup ------------------------------------------------------

    def _root_init(self, ag, ctx):
        view = _classify(ag, ctx, own=self.aid)
        rec = Rec(None, None, set())
        self._store("A", rec, view, ctx)
        self.state = "run"
        deg = ctx.degree(ag)
        if deg == 0:
            return ("stay",), None
        rec.tried.add(1)
        self.mode = "fwd"
        self.from_key = "A"
        self.exit_port = 1
        ctx.trace(ag, "dfs_forward", "port=1")
        return ("move", 1), None

    # -- main decision at the current node ----------------------------

    def _decide(self, ag, ctx):
        if self.confirm is not None and self.confirm.leg == 1:
            kind, val = self._claim_step(ag, ctx, 0)
            if kind == "move":
                return ("stay",), val
            self.verdict = val
            self.has_verdict = True
        view = _classify(ag, ctx, own=self.aid)
        if self.mode in ("back", "bounce"):
            rec = self._load(self.back_key, view)
            if rec is REC_NEW:
                return ("stay",), None
            ctx.trace(ag, "dfs_backtrack", "")
            return self._continue(ag, ctx, self.back_key, rec, view)
        if self.entry_port is None:
            self.entry_port = ag.arrival_port
        key = self._storage_key(view)
        if key not in (None, "TRANSIENT"):
            self._reset_claim()
            self.deferring = False
            return self._forward_at(ag, ctx, key, view)
        if key == "TRANSIENT" or view["mheads"]:
            return self._meeting(ag, ctx, view)
        self.deferring = False
        return self._empty_path(ag, ctx, view)

    def _forward_at(self, ag, ctx, key, view):
        rec = self._load(key, view)
        if rec is REC_NEW:
            return ("stay",), None
        if rec is not None:
            self._mark_tried(key, rec, self.entry_port, view, ctx)
            self.mode = "bounce"
            self.back_key = self.from_key
            port = self.entry_port
            self._leave()
            return ("move", port), None
        rec = Rec(self.entry_port, self.from_key, {self.entry_port})
        self._store(key, rec, view, ctx)
        return self._continue(ag, ctx, key, rec, view)

    def _continue(self, ag, ctx, key, rec, view):
        deg = ctx.degree(ag)
        nxt = None
        for p in range(1, deg + 1):
            if p not in rec.tried:
                nxt = p
                break
        if nxt is not None:
            self._mark_tried(key, rec, nxt, view, ctx)
            self.mode = "fwd"
            self.from_key = key
            self.exit_port = nxt
            self._leave()
            ctx.trace(ag, "dfs_forward", f"port={nxt}")
            return ("move", nxt), None
        if rec.p is None:
            # traversal exhausted with agents still to place: run it again
            self.attempt += 1
            self.key = ("M", self.aid, self.attempt)
            self.carried.clear()
            self._leave()
            self.state = "root"
            return self._root_init(ag, ctx)
        self.mode = "back"
        self.back_key = rec.pk
        self._leave()
        return ("move", rec.p), None

    # -- empty node: claim, confirm, settle or endgame ----------------

    def _empty_path(self, ag, ctx, view):
        if self.has_verdict:
            verdict, _ = self.verdict
            self.has_verdict = False
            if verdict is not None:
                return self._forward_at(ag, ctx, verdict, view)
            return self._settle_here(ag, ctx, view)
        kind, val = self._claim_step(ag, ctx, ctx.degree(ag))
        if kind == "move":
            return ("stay",), val
        if kind == "verdict":
            self.verdict = val
            self.has_verdict = True
        return ("stay",), None

    def _meeting(self, ag, ctx, view):
        """Another group is at this unstationed node; one side settles."""
        defer = False
        for h in view["mheads"]:
            wins = h.id > self.aid if MEETING_LARGER_SETTLES else h.id < self.aid
            if wins:
                defer = True
        if not view["mheads"] and view["mtransient"]:
            defer = True  # their head is mid-confirm; let it finish
        if defer:
            self.deferring = True
            self._reset_claim()
            return ("stay",), None
        self.deferring = False
        return self._empty_path(ag, ctx, view)

    def _settle_here(self, ag, ctx, view):
        if self.group:
            settler = max(self.group)
            self.group.remove(settler)
            return ("settle", settler), None
        # alone at a confirmed-empty node: promotion or waiting chain
        if self.from_key == "A":
            self.endgame = "promote"
            self.stamp = ctx.round
            ctx.trace(ag, "promote_local", f"stamp={self.stamp}")
            ctx.write(ag.id, _set(ag.shared, status=LOCAL, mhead=False, away=False,
                                  gkey=(self.stamp, ag.id)))
            return ("stay",), None
        self.endgame = "waiting"
        self.wait_port = None
        return ("stay",), self.entry_port

    def _after_settle(self, ag, ctx, sid):
        view = _classify(ag, ctx, own=self.aid)
        rec = Rec(self.entry_port, self.from_key, {self.entry_port})
        # the settler stations itself this same round; address it by id
        settler = next(a for a in ctx.others(ag) if a.id == sid)
        ctx.write(self.aid, lambda d=settler.shared["dfs"], k=self.key, r=rec: d.__setitem__(k, r))
        return self._continue(ag, ctx, "A", rec, view)

    # -- promotion trip and waiting chain -----------------------------

    def _endgame_step(self, ag, ctx):
        sh = ag.shared
        stage = self.endgame
        if stage == "promote":
            # home note goes to the DFS parent's stationed occupant
            self.endgame = "note"
            ctx.write(ag.id, _set(sh, away=True))
            return self.entry_port
        if stage == "note":
            if sh.get("home_sign") is None:
                # advertise which neighbor is home while the note is pending
                ctx.write(ag.id, _set(sh, home_sign=(ag.arrival_port, self.stamp)))
            holder = self._note_holder(ag, ctx)
            if holder is None:
                return None
            note = (self.aid, self.exit_port, self.stamp)
            ctx.write(ag.id, lambda s=holder.shared, n=note: s["home_notes"].append(n))
            ctx.trace(ag, "write_home_note", f"holder={holder.id}")
            self.endgame = "note_back"
            return None
        if stage == "note_back":
            self.endgame = "global"
            ctx.write(ag.id, _set(sh, away=False, home_sign=None))
            return ag.arrival_port
        if stage == "global":
            self.prog.machines[ag.id] = GlobalMachine(self.prog, ag, self.stamp)
            return self.prog.machines[ag.id].act(ag, ctx)
        if stage == "waiting":
            if self.wait_port is None:
                # parked at the absent local leader's home until it comes back
                self.wait_port = ag.arrival_port
                ctx.write(ag.id, _set(sh, waiting=True, waiting_port=ag.arrival_port,
                                      on_home_key=self.from_key, away=False, mhead=False))
                return None
            for a in ctx.others(ag):
                osh = a.shared
                if _pinned(osh) and osh["status"] in (NONCAND, LEADER):
                    self.endgame = "chain_home"
                    ctx.write(ag.id, _set(sh, waiting=False, away=True))
                    return self.wait_port
            return None
        if stage == "chain_home":
            # a local leader is guaranteed to exist for this chain to have
            # formed, so the freed home is simply occupied, never contested
            ctx.trace(ag, "settle", "origin=waiting_chain")
            ctx.write(ag.id, _set(sh, status=NONCAND, stationed=True, away=False))
            self.endgame = "dead"
            return None
        return None

    def _note_holder(self, ag, ctx):
        for a in ctx.others(ag):
            osh = a.shared
            if _pinned(osh) and (osh["status"] in (CAND, NONCAND) or osh["stationed"]):
                return a
        return None

    def bits(self, acct):
        rec_bits = acct.port_bits + (acct.id_bits + 2) + acct.delta
        return (
            acct.id_bits + acct.counter(8)          # dfs key (owner, attempt)
            + len(self.carried) * rec_bits
            + len(self.group) * acct.id_bits
            + 2 * (acct.id_bits + 2)                # storage-key cursors
            + 2 * acct.port_bits + 6                # ports, mode, flags
            + acct.counter(2)
            + (2 * acct.port_bits + 2)              # confirm sweep cursor
            + acct.round_bits                       # promotion stamp
        )


class ElectionProgram:
    """Full leader election from any initial configuration."""

    def __init__(self):
        self.machines = {}

    def setup(self, world):
        self.machines = {}
        for node, occ in enumerate(world.occupants):
            if not occ:
                continue
            if len(occ) == 1:
                ag = world.agents[occ[0]]
                self.machines[ag.id] = SingletonMachine(self, ag, world.graph.degree(node))
                continue
            head = occ[0]
            settler = occ[-1]
            group = [a for a in occ if a not in (head, settler)]
            for aid in occ:
                ag = world.agents[aid]
                ag.shared["away"] = True
                if aid == head:
                    ag.shared["mhead"] = True
                    ag.shared["next_move"] = ("stay",)
                    self.machines[aid] = MultHeadMachine(self, ag, group)
                elif aid == settler:
                    ag.shared["status"] = NONCAND
                    ag.shared["stationed"] = True
                    ag.shared["away"] = False
                    self.machines[aid] = SettledMachine()
                else:
                    ag.shared["follow"] = head
                    self.machines[aid] = FollowerMachine(head)

    def act(self, agent, ctx):
        return self.machines[agent.id].act(agent, ctx)

    def done_all(self, world):
        for ag in world.agents.values():
            sh = ag.shared
            if sh["status"] not in (NONCAND, LEADER) or not sh["stationed"]:
                return False
        return True

    def memory_bits(self, agent, acct):
        sh = agent.shared
        rec_bits = acct.port_bits + (acct.id_bits + 2) + acct.delta
        base = acct.id_bits + 2 + 2 + acct.port_bits
        stored = len(sh["dfs"]) * (rec_bits + acct.round_bits + acct.id_bits + 2)
        notes = len(sh["home_notes"]) * (acct.id_bits + acct.port_bits + acct.round_bits)
        return base + stored + notes + self.machines[agent.id].bits(acct)

    def finalize(self, world, report):
        leaders = [a for a, s in report.statuses.items() if s == LEADER]
        report.output["leader"] = leaders[0] if len(leaders) == 1 else None
        report.output["term"] = "completed" if report.terminated else "max_rounds_exceeded"


def elect_leader(world):
    """Run leader election to completion on a fresh world."""
    return world.run(ElectionProgram())
