"""Deterministic simulator for synchronous mobile agents on anonymous

port-labeled graphs: leader election, minimum spanning tree, gathering,
independent/dominating sets, and message-passing simulation."""

from .graph import (
    GraphError,
    PortGraph,
    generate_graph,
    graph_stats,
    load_graph,
    parse_graph,
    serialize_graph,
)
from .runtime import (
    Accounting,
    Agent,
    RunReport,
    SimulationFault,
    TraceSink,
    World,
    make_ids,
    make_placement,
)
from .election import ElectionProgram, elect_leader, exploration_schedule, pad_id
from .mst import MSTProgram, run_mst, mst_edges_from_world
from .apps import GatherProgram, SpreadProgram, gather, compute_mis, compute_mds
from .mpsim import (
    MpSimProgram,
    direct_mp,
    meeting_schedule,
    simulate_mp,
    simulate_mp_from_any_config,
)

__all__ = [
    "GatherProgram",
    "MSTProgram",
    "MpSimProgram",
    "SpreadProgram",
    "compute_mds",
    "compute_mis",
    "direct_mp",
    "gather",
    "meeting_schedule",
    "mst_edges_from_world",
    "run_mst",
    "simulate_mp",
    "simulate_mp_from_any_config",
    "Accounting",
    "Agent",
    "ElectionProgram",
    "GraphError",
    "PortGraph",
    "RunReport",
    "SimulationFault",
    "TraceSink",
    "World",
    "elect_leader",
    "exploration_schedule",
    "generate_graph",
    "graph_stats",
    "load_graph",
    "make_ids",
    "make_placement",
    "pad_id",
    "parse_graph",
    "serialize_graph",
]
