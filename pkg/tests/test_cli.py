import json
from fractions import Fraction

import pytest

from agentsim.cli import fit_bound, main
from agentsim.graph import generate_graph, serialize_graph
from agentsim.oracles import kruskal_mst


def _run(tmp_path, *argv):
    metrics = tmp_path / "metrics.jsonl"
    code = main(list(argv) + ["--metrics", str(metrics)])
    records = []
    if metrics.exists():
        records = [json.loads(l) for l in metrics.read_text().splitlines() if l]
    return code, records


def test_leader_records(tmp_path):
    code, recs = _run(tmp_path, "--generate", "ring:6:0:3",
                      "--algo", "leader", "--seeds", "1..3")
    assert code == 0
    assert len(recs) == 3
    for rec in recs:
        assert rec["ok"] and rec["algo"] == "leader"
        assert rec["n"] == 6 and rec["m"] == 6
        assert rec["leader"] is not None
        assert rec["rounds"] <= 64 * rec["m"]


def test_mst_record_matches_kruskal(tmp_path):
    code, recs = _run(tmp_path, "--generate", "complete:5:0:2",
                      "--algo", "mst", "--seeds", "4")
    assert code == 0 and len(recs) == 1
    g = generate_graph("complete", 5, seed=2)
    _, total = kruskal_mst(g)
    assert Fraction(recs[0]["mst_weight"]) == total


def test_mst_output_file(tmp_path):
    out = tmp_path / "tree.txt"
    code = main(["--generate", "path:4:0:1", "--algo", "mst",
                 "--seeds", "2", "--metrics", str(tmp_path / "m.jsonl"),
                 "--output", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4 and lines[-1].startswith("total ")
    g = generate_graph("path", 4, seed=1)
    _, total = kruskal_mst(g)
    assert Fraction(lines[-1].split()[1]) == total


def test_graph_file_input(tmp_path):
    g = generate_graph("star", 5, seed=0)
    path = tmp_path / "g.graph"
    path.write_text(serialize_graph(g))
    code, recs = _run(tmp_path, "--graph", str(path), "--algo", "mis",
                      "--seeds", "1..2")
    assert code == 0
    assert all(rec["ok"] for rec in recs)


@pytest.mark.parametrize("algo", ["gather", "mds", "simulate-mp:flood"])
def test_other_algos_validate(tmp_path, algo):
    code, recs = _run(tmp_path, "--generate", "random_connected:7:3:5",
                      "--algo", algo, "--seeds", "1..2",
                      "--placement", "general:2")
    assert code == 0
    assert all(rec["ok"] for rec in recs)


def test_metrics_byte_determinism(tmp_path):
    argv = ["--generate", "random_tree:8:0:0", "--algo", "leader",
            "--seeds", "1..4", "--trace-level", "1"]
    texts, traces = [], []
    for i in range(3):
        metrics = tmp_path / f"m{i}.jsonl"
        trace = tmp_path / f"t{i}.log"
        extra = ["--jobs", "4"] if i == 2 else []
        assert main(argv + ["--metrics", str(metrics),
                            "--trace", str(trace)] + extra) == 0
        texts.append(metrics.read_bytes())
        traces.append(trace.read_bytes())
    assert texts[0] == texts[1] == texts[2]
    assert traces[0] == traces[1] == traces[2]


def test_usage_errors(tmp_path):
    assert main([]) == 2
    assert main(["--generate", "nonesuch:5"]) == 2
    assert main(["--generate", "ring:2:0:1"]) == 2  # ring needs n >= 3
    assert main(["--fit", "m:rounds", str(tmp_path / "missing.jsonl")]) == 2


def test_max_rounds_overrun_fails(tmp_path):
    code, recs = _run(tmp_path, "--generate", "complete:8:0:1",
                      "--algo", "mst", "--seeds", "1", "--max-rounds", "5")
    assert code == 1
    assert not recs[0]["ok"]


def test_fit_bound(tmp_path, capsys):
    path = tmp_path / "m.jsonl"
    rows = [
        {"n": 4, "m": 4, "rounds": 40, "peak_bits_max": 10},
        {"n": 8, "m": 8, "rounds": 80, "peak_bits_max": 20},
        {"n": 16, "m": 16, "rounds": 160, "peak_bits_max": 30},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    worst, by_n = fit_bound([str(path)], "m", "rounds")
    assert worst == 10.0 and by_n == {4: 10.0, 8: 10.0, 16: 10.0}
    assert main(["--fit", "m:rounds", str(path)]) == 0
    out = capsys.readouterr().out
    assert "max_ratio=10.000000" in out

    short = tmp_path / "short.jsonl"
    short.write_text(json.dumps(rows[0]) + "\n")
    with pytest.raises(ValueError, match="3 distinct sizes"):
        fit_bound([str(short)], "m", "rounds")
    with pytest.raises(ValueError, match="unknown x function"):
        fit_bound([str(path)], "bogus", "rounds")


def test_trace_line_format(tmp_path):
    trace = tmp_path / "t.log"
    assert main(["--generate", "path:3:0:1", "--algo", "leader",
                 "--seeds", "1", "--metrics", str(tmp_path / "m.jsonl"),
                 "--trace", str(trace), "--trace-level", "0"]) == 0
    lines = trace.read_text().splitlines()
    assert lines
    assert all(l.startswith("round=") and " action=move " in l for l in lines)
