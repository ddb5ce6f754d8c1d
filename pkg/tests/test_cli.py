import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from skim.cli import main
from skim.exact import exact_influence
from skim.graph import (
    BaseGraph,
    MultiInstanceGraph,
    assign_weighted_cascade,
    load_edge_list,
    read_instances,
    sample_instances,
)
from skim.ranks import build_rank_assignment
from skim.sketches import build_sketches, read_sketches


def write_graph(path, n, m, seed):
    rng = np.random.default_rng(seed)
    t = rng.integers(0, n, m)
    h = rng.integers(0, n, m)
    path.write_text("# test graph\n" + "".join(f"{a} {b}\n" for a, b in zip(t, h) if a != b))
    return path


@pytest.fixture
def graph_file(tmp_path):
    return write_graph(tmp_path / "g.txt", 200, 1000, 0)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sample_full_probability_reproduces_base(tmp_path, graph_file, capsys):
    out = tmp_path / "a.migr"
    code, _, _ = run(capsys, "sample", "--input", graph_file, "--scheme", "un:1.0", "--ell", 3, "--output", out)
    assert code == 0
    base = load_edge_list(graph_file)
    assert read_instances(out) == MultiInstanceGraph.replicate(base, 3)


def test_sample_deterministic(tmp_path, graph_file, capsys):
    a, b = tmp_path / "a.migr", tmp_path / "b.migr"
    for p in (a, b):
        run(capsys, "sample", "--input", graph_file, "--scheme", "wc", "--ell", 64, "--seed", 1, "--output", p)
    assert a.read_bytes() == b.read_bytes()


def test_sample_binomial_edge_count(tmp_path, capsys):
    g = write_graph(tmp_path / "big.txt", 3000, 10_400, 5)
    m = load_edge_list(g).m
    out = tmp_path / "s.migr"
    ell = 32
    run(capsys, "sample", "--input", g, "--scheme", "un:0.1", "--ell", ell, "--output", out)
    counts = read_instances(out).arc_counts()
    sd = math.sqrt(m * 0.1 * 0.9)
    assert abs(counts.mean() - 0.1 * m) <= 3 * sd / math.sqrt(ell)


def test_skim_all_is_permutation(graph_file, capsys):
    code, out, _ = run(capsys, "skim", "--input", graph_file, "--ell", 8, "--k", 16, "--s", "all")
    assert code == 0
    r = rows(out)
    assert len(r) == 200
    assert sorted(int(x["node"]) for x in r) == list(range(200))
    assert float(r[-1]["cumulative"]) == 200.0


def test_skim_matches_library(graph_file, capsys):
    from skim.maximizer import skim_run
    _, out, _ = run(capsys, "skim", "--input", graph_file, "--ell", 8, "--k", 16, "--s", 20, "--seed", 4)
    g = sample_instances(assign_weighted_cascade(load_edge_list(graph_file)), 8, 4)
    seq, _ = skim_run(g, 16, 20, seed=4)
    assert [int(x["node"]) for x in rows(out)] == seq.nodes
    assert [int(x["marginal_num"]) for x in rows(out)] == seq.gains


def write_skewed_graph(path, n, m, seed):
    """Out-degrees follow a power law, as in social networks."""
    rng = np.random.default_rng(seed)
    w = 1 / np.arange(1, n + 1) ** 0.8
    t = rng.choice(n, m, p=w / w.sum())
    h = rng.integers(0, n, m)
    path.write_text("".join(f"{a} {b}\n" for a, b in zip(t, h) if a != b))
    return path


def test_skim_heldout(tmp_path, capsys):
    # selection on 64 instances overfits on uniform random graphs; the
    # comparison is made on a heavy-tailed, social-network-like graph
    g = write_skewed_graph(tmp_path / "h.txt", 5000, 40_000, 0)
    code, out, _ = run(capsys, "skim", "--input", g, "--ell", 64, "--k", 64, "--s", 50,
                       "--eval", "--eval-ell", 256, "--seed", 2)
    assert code == 0
    r = rows(out)
    nodes = [int(x["node"]) for x in r]
    held = float(r[-1]["influence_heldout"])
    model = assign_weighted_cascade(load_edge_list(g))
    ev = sample_instances(model, 256, 2, domain="eval")
    assert held == exact_influence(ev, nodes).value
    # two-sample comparison of per-instance influence, training vs held-out
    tr = sample_instances(model, 64, 2)
    per = [[exact_influence(MultiInstanceGraph(src.n, [src.arcs(i)]), nodes).value
            for i in range(src.ell)] for src in (tr, ev)]
    a, b = np.array(per[0]), np.array(per[1])
    assert a.mean() == float(r[-1]["cumulative"])
    se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    assert abs(a.mean() - b.mean()) <= 3 * se


def test_skim_json_and_ledger(tmp_path, graph_file, capsys):
    led = tmp_path / "ledger.json"
    code, out, _ = run(capsys, "skim", "--input", graph_file, "--ell", 8, "--k", 16, "--s", 5,
                       "--format", "json", "--ledger", led)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["k"] == 16 and "timings" not in doc
    assert len(doc["seeds"]) == 5
    ledger = json.loads(led.read_text())
    assert len(ledger["iterations"]) == 5
    assert doc["ledger"] == ledger


def test_greedy_naive_equals_lazy(graph_file, capsys):
    _, a, _ = run(capsys, "greedy", "--input", graph_file, "--ell", 8, "--s", 15)
    _, b, _ = run(capsys, "greedy", "--input", graph_file, "--ell", 8, "--s", 15, "--naive-greedy")
    assert a == b


def test_degree(graph_file, capsys):
    code, out, _ = run(capsys, "degree", "--input", graph_file, "--ell", 4, "--s", 3)
    assert code == 0 and len(rows(out)) == 3


def test_query_single_seed_equals_cardinality(tmp_path, graph_file, capsys):
    sk = tmp_path / "s.cske"
    run(capsys, "sketch", "--input", graph_file, "--ell", 8, "--k", 16, "--seed", 3, "--output", sk)
    ss = read_sketches(sk)
    for u in (0, 17, 150):
        code, out, err = run(capsys, "query", "--sketches", sk, "--nodes", u)
        assert code == 0 and "query time" in err
        assert float(rows(out)[0]["estimate"]) == pytest.approx(ss.cardinality(u) / 8, rel=1e-12)


def test_query_on_the_fly_matches_file(tmp_path, graph_file, capsys):
    sk = tmp_path / "s.cske"
    run(capsys, "sketch", "--input", graph_file, "--ell", 8, "--k", 16, "--seed", 3, "--output", sk)
    _, a, _ = run(capsys, "query", "--sketches", sk, "--nodes", "1,2,3")
    _, b, _ = run(capsys, "query", "--input", graph_file, "--ell", 8, "--k", 16, "--seed", 3, "--nodes", "1,2,3")
    assert a == b


def test_query_accuracy_single_seeds(tmp_path, capsys):
    g_path = write_graph(tmp_path / "q.txt", 2000, 10_000, 7)
    g = sample_instances(assign_weighted_cascade(load_edge_list(g_path)), 64, 7)
    ss = build_sketches(g, build_rank_assignment(g.n, 64, 64, seed=7), 64)
    rng = np.random.default_rng(0)
    errs = []
    for u in rng.choice(g.n, 100, replace=False).tolist():
        ex = exact_influence(g, [u]).value
        errs.append(abs(ss.query([u]) - ex) / ex)
    assert np.mean(errs) <= 0.12


def test_query_time_scaling(tmp_path, capsys):
    import time
    g_path = write_graph(tmp_path / "t.txt", 3000, 15_000, 8)
    g = sample_instances(assign_weighted_cascade(load_edge_list(g_path)), 64, 8)
    ss = build_sketches(g, build_rank_assignment(g.n, 64, 64, seed=8), 64)
    rng = np.random.default_rng(1)

    def timed(s, reps=200):
        sets = [rng.choice(g.n, s, replace=False).tolist() for _ in range(reps)]
        t0 = time.perf_counter()
        for S in sets:
            ss.query(S)
        return (time.perf_counter() - t0) / reps

    t1 = min(timed(1) for _ in range(3))
    t50 = min(timed(50) for _ in range(3))
    assert t50 <= 10 * t1 * 50 * math.log(50)


def test_eval(graph_file, capsys):
    _, out, _ = run(capsys, "eval", "--input", graph_file, "--ell", 8, "--nodes", "5,9,5,11")
    g = sample_instances(assign_weighted_cascade(load_edge_list(graph_file)), 8, 0)
    r = rows(out)
    assert [int(x["node"]) for x in r] == [5, 9, 11]
    assert float(r[-1]["cumulative"]) == exact_influence(g, [5, 9, 11]).value


def test_optimum(tmp_path, capsys):
    p = tmp_path / "small.txt"
    p.write_text("0 1\n0 2\n3 4\n5 6\n6 7\n7 5\n")
    code, out, _ = run(capsys, "optimum", "--input", p, "--scheme", "un:1.0", "--ell", 2, "--s", 2)
    assert code == 0
    r = rows(out)[0]
    assert r["nodes"] == "0 5" and float(r["influence"]) == 6.0


def test_instance_file_input(tmp_path, graph_file, capsys):
    mi = tmp_path / "i.migr"
    run(capsys, "sample", "--input", graph_file, "--ell", 8, "--seed", 2, "--output", mi)
    _, a, _ = run(capsys, "greedy", "--input", mi, "--s", 5)
    _, b, _ = run(capsys, "greedy", "--input", graph_file, "--ell", 8, "--seed", 2, "--s", 5)
    assert a == b


@pytest.mark.parametrize("argv", [
    [],
    ["skim", "--s", "3"],
    ["bogus"],
    ["skim", "--input", "x", "--scheme", "foo"],
    ["skim", "--input", "x", "--s", "-2"],
    ["query", "--input", "x"],
    ["sample", "--input", "x"],
])
def test_usage_errors(argv, graph_file, capsys):
    argv = [str(graph_file) if a == "x" else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "usage" in err


def test_data_errors(tmp_path, graph_file, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 x\n")
    code, _, err = run(capsys, "skim", "--input", bad, "--s", 1)
    assert code == 2 and "line 2" in err
    code, _, err = run(capsys, "skim", "--input", tmp_path / "missing.txt", "--s", 1)
    assert code == 2
    code, _, err = run(capsys, "query", "--input", graph_file, "--ell", 2, "--nodes", "1,500,900")
    assert code == 2 and "[500, 900]" in err
    code, _, err = run(capsys, "optimum", "--input", graph_file, "--ell", 1, "--s", 5)
    assert code == 2 and "guard" in err
    code, _, _ = run(capsys, "skim", "--input", graph_file, "--s", 10**6)
    assert code == 2


def test_console_script_entry_point(graph_file):
    res = subprocess.run([sys.executable, "-m", "skim.cli", "degree", "--input", str(graph_file),
                          "--ell", "2", "--s", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("position,node")
