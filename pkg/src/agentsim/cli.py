"""Experiment runner: build worlds, run an algorithm over a seed sweep,
validate the results, and emit one JSON metrics record per run.

Also hosts `fit_bound`, which reads metrics files back and reports the
worst observed ratio of a measured column to a size function, used to
check that round and memory costs scale the way they should.
"""

import argparse
import concurrent.futures
import json
import math
import sys

from .graph import GraphError, generate_graph, load_graph, bfs_distances
from .runtime import SimulationFault, World, TraceSink, make_ids, make_placement
from .election import ElectionProgram
from .mst import run_mst
from .apps import gather, compute_mis, compute_mds
from .mpsim import simulate_mp_from_any_config, direct_mp, PAYLOADS
from . import oracles

ALGOS = ("leader", "mst", "gather", "mis", "mds")

X_FUNCS = {
    "m": lambda n, m: m,
    "m_plus_nlogn": lambda n, m: m + n * math.log2(max(n, 2)),
    "nlogn": lambda n, m: n * math.log2(max(n, 2)),
    "nlogn_sq": lambda n, m: n * math.log2(max(n, 2)),
    "logn_sq": lambda n, m: math.log2(max(n, 2)) ** 2,
}


def _parse_seeds(spec):
    if ".." in spec:
        a, b = spec.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(s) for s in spec.split(",")]


def _parse_generate(spec):
    parts = spec.split(":")
    kind = parts[0]
    n = int(parts[1])
    extra = int(parts[2]) if len(parts) > 2 else 0
    gseed = int(parts[3]) if len(parts) > 3 else 0
    return kind, n, extra, gseed


def _build_graph(args, seed):
    if args.graph:
        return load_graph(args.graph)
    kind, n, extra, gseed = _parse_generate(args.generate)
    # a fixed :SEED pins one graph; otherwise each sweep seed gets its own
    return generate_graph(kind, n, seed=gseed if gseed else seed, extra=extra)


def _max_rounds(policy, m):
    if policy is None:
        return None
    if policy.startswith("x"):
        return int(policy[1:]) * max(m, 1)
    return int(policy)


def _diameter(g):
    return max(max(bfs_distances(g, s)) for s in range(g.n))


def _run_one(args, seed):
    g = _build_graph(args, seed)
    world = World(
        g,
        make_placement(g, args.placement, seed),
        make_ids(g.n, args.ids, seed),
    )
    cap = _max_rounds(args.max_rounds, g.m)
    if cap is not None:
        world.max_rounds = cap
    trace_lines = []
    if args.trace is not None:
        class _ListFile:
            @staticmethod
            def write(line):
                trace_lines.append(line)
        world.trace = TraceSink(_ListFile, level=args.trace_level)

    record = {
        "algo": args.algo,
        "graph": args.graph or args.generate,
        "n": g.n,
        "m": g.m,
        "placement": args.placement,
        "seed": seed,
    }
    failures = []
    try:
        report = _dispatch(args, world, g, cap, record, failures)
    except SimulationFault as exc:
        record["rounds"] = world.round
        record["terminated"] = False
        record["peak_bits_max"] = max(world.peak_bits.values(), default=0)
        record["ok"] = False
        record["failures"] = [f"fault: {exc}"]
        return record, trace_lines

    record["rounds"] = report.rounds
    record["terminated"] = report.terminated
    record["peak_bits_max"] = report.peak_bits_max
    if report.leader is not None:
        record["leader"] = report.leader
    if not report.terminated:
        failures.append("max_rounds_exceeded")

    if args.validate:
        failures.extend(_validate(args.algo, g, world, report, record))
    record["ok"] = not failures
    if failures:
        record["failures"] = sorted(failures)
    return record, trace_lines


def _dispatch(args, world, g, cap, record, failures):
    if args.algo == "leader":
        report = world.run(ElectionProgram())
    elif args.algo == "mst":
        report = run_mst(world, cap)
    elif args.algo == "gather":
        report = gather(world, cap)
    elif args.algo == "mis":
        report = compute_mis(world, cap)
    elif args.algo == "mds":
        report = compute_mds(world, cap)
    elif args.algo.startswith("simulate-mp:"):
        payload_name = args.algo.split(":", 1)[1]
        if payload_name not in PAYLOADS:
            raise ValueError(f"unknown mp payload {payload_name!r}")
        T = _diameter(g) + 2
        source = min(world.agents)
        cls = PAYLOADS[payload_name]
        alg = cls() if payload_name == "max_id_leader" else cls(source)
        report = simulate_mp_from_any_config(world, alg, T, max_rounds=cap)
        record["mp_payload"] = payload_name
        record["mp_T"] = T
        if args.validate:
            ids_by_node = {node: world.agents[occ[0]].id
                           for node, occ in enumerate(world.occupants)}
            want = direct_mp(g, alg, ids_by_node, T)
            if report.output["mp_states"] != want:
                failures.append("mp_states_mismatch")
    else:
        raise ValueError(f"unknown algorithm {args.algo!r}")
    return report


def _validate(algo, g, world, report, record):
    failures = []

    def check(rep):
        if not rep:
            failures.append(f"{rep.check}:{rep.detail}")

    if algo in ("leader", "mst"):
        check(oracles.validate_leader(world))
        check(oracles.validate_dispersion(world))
    if algo == "mst":
        check(oracles.validate_tree_pointers(world))
        want, total = oracles.kruskal_mst(g)
        record["mst_weight"] = str(report.output["mst_weight"])
        record["kruskal_weight"] = str(total)
        record["phases"] = report.output["phases"]
        if report.output["mst_edges"] != want:
            failures.append("mst:edges differ from kruskal")
        if report.output["phases"] > math.ceil(math.log2(max(g.n, 2))) + 1:
            failures.append("mst:too many phases")
    if algo == "gather":
        occ = report.output["occupancy"]
        record["gather_occupancy"] = occ[0]
        if occ[0] != g.n:
            failures.append("gather:not all agents in one place")
    if algo in ("mis", "mds"):
        nodes = report.output[f"{algo}_nodes"]
        record[f"{algo}_size"] = len(nodes)
        validator = oracles.validate_mis if algo == "mis" else oracles.validate_mds
        check(validator(g, nodes))
        if g.n <= 16:
            brute = (oracles.brute_force_mis_check if algo == "mis"
                     else oracles.brute_force_mds_check)
            check(brute(g, nodes))
    return failures


def run_experiment(args):
    """Run the sweep; returns (records, trace text, exit code)."""
    seeds = _parse_seeds(args.seeds)
    results = {}
    if args.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(args.jobs) as pool:
            futures = {pool.submit(_run_one, args, s): s for s in seeds}
            for fut, seed in futures.items():
                results[seed] = fut.result()
    else:
        for seed in seeds:
            results[seed] = _run_one(args, seed)
    records = [results[s][0] for s in seeds]
    trace = "".join("".join(results[s][1]) for s in seeds)
    code = 0 if all(r["ok"] for r in records) else 1
    return records, trace, code


def fit_bound(paths, x_name, y_name):
    """Worst y/x ratio over all records, plus the per-n worst ratios."""
    if x_name not in X_FUNCS:
        raise ValueError(f"unknown x function {x_name!r}")
    xf = X_FUNCS[x_name]
    records = []
    for path in paths:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    if not records:
        raise ValueError("no metrics records to fit")
    by_n = {}
    worst = 0.0
    for rec in records:
        y = rec["peak_bits_max"] if y_name == "memory_bits" else rec[y_name]
        x = xf(rec["n"], rec["m"])
        ratio = y / x if x else float(y)
        worst = max(worst, ratio)
        by_n[rec["n"]] = max(by_n.get(rec["n"], 0.0), ratio)
    if len(by_n) < 3:
        raise ValueError("need at least 3 distinct sizes to judge a trend")
    return worst, dict(sorted(by_n.items()))


def build_parser():
    p = argparse.ArgumentParser(
        prog="agentsim",
        description="Run mobile-agent algorithms over generated or loaded graphs.",
    )
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph", help="graph file to load")
    src.add_argument("--generate", help="KIND:N[:EXTRA][:SEED] generator spec")
    p.add_argument("--placement", default="dispersed",
                   help="dispersed | rooted:NODE | general:SEED")
    p.add_argument("--ids", default="perm", choices=("perm", "sequential"))
    p.add_argument("--algo", default="leader",
                   help="leader | mst | gather | mis | mds | simulate-mp:PAYLOAD")
    p.add_argument("--seeds", default="1..1", help="A..B range or comma list")
    p.add_argument("--max-rounds", default=None,
                   help="absolute N or xM multiplier of edge count")
    p.add_argument("--trace", default=None, help="trace output path")
    p.add_argument("--trace-level", type=int, default=0, choices=(0, 1, 2))
    p.add_argument("--metrics", default=None, help="metrics JSONL output path")
    p.add_argument("--output", default=None, help="MST edge list output path")
    p.add_argument("--validate", default="on", choices=("on", "off"))
    p.add_argument("--jobs", type=int, default=1, help="parallel seed workers")
    p.add_argument("--fit", default=None, metavar="X:Y",
                   help="fit Y against X over metrics FILES instead of running")
    p.add_argument("files", nargs="*", help="metrics files for --fit")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.fit:
        x_name, y_name = args.fit.split(":", 1)
        try:
            worst, by_n = fit_bound(args.files, x_name, y_name)
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for n, ratio in by_n.items():
            print(f"n={n} max_ratio={ratio:.6f}")
        print(f"fit {y_name}/{x_name}: max_ratio={worst:.6f}")
        return 0

    if not args.graph and not args.generate:
        print("error: one of --graph or --generate is required", file=sys.stderr)
        return 2
    args.validate = args.validate == "on"
    try:
        records, trace, code = run_experiment(args)
    except (GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if args.metrics:
        with open(args.metrics, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace)
    if args.output and records and args.algo == "mst":
        _write_mst_file(args, records)
    return code


def _write_mst_file(args, records):
    """Edge list `u v w` per line plus a total, for the last seed's graph."""
    seeds = _parse_seeds(args.seeds)
    g = _build_graph(args, seeds[-1])
    world = World(g, make_placement(g, args.placement, seeds[-1]),
                  make_ids(g.n, args.ids, seeds[-1]))
    report = run_mst(world, _max_rounds(args.max_rounds, g.m))
    with open(args.output, "w") as fh:
        for u, v, w in sorted(report.output["mst_edges"]):
            fh.write(f"{u} {v} {w}\n")
        fh.write(f"total {report.output['mst_weight']}\n")


if __name__ == "__main__":
    sys.exit(main())
