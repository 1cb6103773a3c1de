"""Dataset loading/generation, the batched harness, and report emission."""

import math

import numpy as np
import pytest

from graphtango import Config, ParseError, TangoStore
from graphtango.bench.cli import main
from graphtango.bench.data import EdgeList, gen_synthetic, load_snap, shuffle
from graphtango.bench.harness import (
    WorkerSet,
    emit_report,
    emit_sweep_report,
    geomean,
    parse_report,
    route_batch,
    run_experiment,
    run_th1_sweep,
)
from graphtango.core import partition_of


def write(tmp_path, text, name="g.snap"):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- load_snap ---------------------------------------------------------------


def test_load_snap_dense_remap_first_seen(tmp_path):
    p = write(tmp_path, "# comment\n10 20 5\n20 30 7\n\n10 30 2\n30 999999 1\n10 20 9\n")
    el = load_snap(p, weighted=True)
    assert el.num_vertices == 4
    assert el.num_edges == 5  # duplicate (10,20) kept
    assert list(el.remap) == [10, 20, 30, 999999]
    assert list(el.srcs) == [0, 1, 0, 2, 0]
    assert list(el.dsts) == [1, 2, 2, 3, 1]
    assert list(el.weights) == [5, 7, 2, 1, 9]


def test_load_snap_unweighted_drops_third_column(tmp_path):
    p = write(tmp_path, "1 2 3\n2 3 4\n")
    el = load_snap(p)
    assert el.weights is None
    assert el.num_edges == 2


@pytest.mark.parametrize("text,lineno,frag", [
    ("1 2 3\n4 x 1\n", 2, "non-integer vertex id"),
    ("1 2 -3\n", 1, "negative weight"),
    ("1 2\n", 1, "no weight"),
    ("1 2 3 4\n", 1, "fields"),
    ("1\n", 1, "fields"),
    (f"1 {2**64} 1\n", 1, "out of range"),
    ("# fine\n\n5 6 1\n1 2 bad\n", 4, "non-integer weight"),
])
def test_load_snap_errors_carry_line_numbers(tmp_path, text, lineno, frag):
    p = write(tmp_path, text)
    with pytest.raises(ParseError) as exc:
        load_snap(p, weighted=True)
    assert exc.value.lineno == lineno
    assert frag in str(exc.value)


def test_load_snap_directed_flag_propagates(tmp_path):
    p = write(tmp_path, "1 2\n")
    assert load_snap(p, directed=True).directed
    assert not load_snap(p).directed


# -- shuffle -----------------------------------------------------------------


def test_shuffle_deterministic_permutation():
    el = gen_synthetic("short", 50, 400, seed=3, weighted=True)
    a = shuffle(el, 11)
    b = shuffle(el, 11)
    c = shuffle(el, 12)
    assert np.array_equal(a.srcs, b.srcs) and np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.srcs, c.srcs)
    # a permutation: the multiset of (src, dst, w) triples is unchanged
    trip = lambda e: sorted(zip(e.srcs.tolist(), e.dsts.tolist(), e.weights.tolist()))
    assert trip(a) == trip(el) == trip(c)


# -- gen_synthetic -----------------------------------------------------------


def test_synthetic_deterministic_and_in_range():
    a = gen_synthetic("heavy_tailed", 100, 1000, seed=9, weighted=True)
    b = gen_synthetic("heavy", 100, 1000, seed=9, weighted=True)  # alias
    assert np.array_equal(a.srcs, b.srcs) and np.array_equal(a.dsts, b.dsts)
    assert np.array_equal(a.weights, b.weights)
    assert a.srcs.min() >= 0 and a.srcs.max() < 100
    assert a.dsts.min() >= 0 and a.dsts.max() < 100
    assert a.weights.min() >= 1 and a.weights.max() <= 16
    c = gen_synthetic("heavy", 100, 1000, seed=10, weighted=True)
    assert not np.array_equal(a.dsts, c.dsts)


def test_synthetic_degree_shapes():
    short = gen_synthetic("short", 2000, 40000, seed=1)
    heavy = gen_synthetic("heavy", 2000, 40000, seed=1)
    s_max = np.bincount(short.dsts, minlength=2000).max()
    h_max = np.bincount(heavy.dsts, minlength=2000).max()
    # uniform: max near E/V; power law: one vertex soaks up a large share
    assert s_max < 100
    assert h_max > 10000


def test_synthetic_validation():
    with pytest.raises(ValueError):
        gen_synthetic("bimodal", 10, 100, seed=0)
    with pytest.raises(ValueError):
        gen_synthetic("short", 100, 99, seed=0)  # E < V
    with pytest.raises(ValueError):
        gen_synthetic("short", 0, 0, seed=0)


# -- geomean -----------------------------------------------------------------


def test_geomean_examples():
    assert geomean([7.5]) == 7.5
    assert geomean([1.0, 4.0]) == pytest.approx(2.0, abs=1e-12)
    assert geomean([]) == 0.0
    assert geomean([0.0, 3.0]) == 3.0  # non-positive entries are excluded
    assert geomean([2.0, 2.0, 2.0]) == pytest.approx(2.0)


# -- routing -----------------------------------------------------------------


def test_route_batch_owner_and_order():
    rng = np.random.default_rng(0)
    srcs = rng.integers(0, 4000, 500, dtype=np.int64)
    dsts = rng.integers(0, 4000, 500, dtype=np.int64)
    routed = route_batch(srcs, dsts, None, directed=True, num_threads=3,
                         partition_size=512)
    total = 0
    for w, (v, nbr, p, side) in enumerate(routed):
        total += len(v)
        assert p is None
        for x in v.tolist():
            assert partition_of(x, 3, 512) == w
    assert total == 1000  # every op lands in exactly one slice: out + in halves


def test_route_batch_undirected_self_loop_mirror_skipped():
    srcs = np.array([5, 7, 5], dtype=np.int64)
    dsts = np.array([5, 8, 9], dtype=np.int64)
    routed = route_batch(srcs, dsts, None, directed=False, num_threads=1,
                         partition_size=512)
    v, nbr, p, side = routed[0]
    # 3 directs + 2 mirrors; the (5,5) loop contributes one half only
    assert len(v) == 5
    assert list(side) == [0] * 5
    pairs = list(zip(v.tolist(), nbr.tolist()))
    assert pairs.count((5, 5)) == 1


def test_route_batch_directed_sides():
    srcs = np.array([1, 2], dtype=np.int64)
    dsts = np.array([2, 1], dtype=np.int64)
    routed = route_batch(srcs, dsts, None, directed=True, num_threads=1,
                         partition_size=512)
    v, nbr, p, side = routed[0]
    out_pairs = {(a, b) for a, b, s in zip(v.tolist(), nbr.tolist(), side.tolist()) if s == 0}
    in_pairs = {(a, b) for a, b, s in zip(v.tolist(), nbr.tolist(), side.tolist()) if s == 1}
    assert out_pairs == {(1, 2), (2, 1)}
    assert in_pairs == {(2, 1), (1, 2)}


def test_routed_apply_keeps_mirror_props_consistent():
    # Both orientations of one undirected edge in a single weighted batch:
    # the later op must win on BOTH endpoints' halves.
    cfg = Config(weighted=True)
    store = TangoStore(cfg, 10, num_threads=2)
    srcs = np.array([3, 7], dtype=np.int64)
    dsts = np.array([7, 3], dtype=np.int64)
    props = np.array([111, 222], dtype=np.int64)
    ws = WorkerSet(store, 2)
    try:
        ws.apply(True, route_batch(srcs, dsts, props, directed=False,
                                   num_threads=2, partition_size=cfg.partition_size))
    finally:
        ws.close()
    assert store.get_edge_prop(3, 7) == 222
    assert store.get_edge_prop(7, 3) == 222
    assert store.live_edges() == 1


def test_worker_errors_surface():
    store = TangoStore(Config(), 4, num_threads=1)
    ws = WorkerSet(store, 1)
    try:
        bad = [(np.array([99], dtype=np.int64), np.array([0], dtype=np.int64),
                None, np.array([0], dtype=np.uint8))]
        with pytest.raises(IndexError):
            ws.apply(True, bad)
        # the worker survives a failed batch
        good = route_batch(np.array([1]), np.array([2]), None, directed=False,
                           num_threads=1, partition_size=512)
        ws.apply(True, good)
    finally:
        ws.close()
    assert store.has_edge(1, 2)


# -- run_experiment ----------------------------------------------------------


def reference_store(el, config):
    """Single-threaded ground truth built with the two-sided edge ops."""
    ref = TangoStore(config, el.num_vertices)
    for i in range(el.num_edges):
        ref.insert_edge(int(el.srcs[i]), int(el.dsts[i]),
                        int(el.weights[i]) if el.weighted else None)
    return ref


def arcs(store):
    out = {}
    for v in range(store.num_vertices):
        ns = store.neighbors(v).tolist()
        ps = store.neighbor_props(v)
        out[v] = sorted(zip(ns, ps.tolist())) if ps is not None else sorted(ns)
    return out


def test_experiment_phases_and_drain():
    el = shuffle(gen_synthetic("short", 300, 2400, seed=5), 5)
    reports, summary = run_experiment(el, "tango", algorithms=("bfs",),
                                      batch_size=500, num_threads=2)
    assert len(reports) == 2 * math.ceil(2400 / 500)
    phases = [r.phase for r in reports]
    assert phases == ["insert"] * 5 + ["delete"] * 5
    lives = [r.live_edges for r in reports]
    assert lives[:5] == sorted(lives[:5])          # grows while inserting
    assert lives[4] == max(lives)
    assert lives[-1] == 0                          # drained
    assert all(r.edges == 500 for r in reports[:4])
    assert reports[4].edges == 400                 # remainder batch
    assert summary.insert_geomean_eps > 0
    assert summary.delete_geomean_eps > 0
    assert summary.mean_bytes_per_edge > 0
    assert summary.num_edges == 2400


def test_experiment_matches_single_thread_reference():
    cfg = Config(weighted=True, th1=8)
    el = shuffle(gen_synthetic("heavy", 200, 3000, seed=13, weighted=True), 13)
    # stop after the insert phase by rebuilding the final state separately
    store = TangoStore(cfg, el.num_vertices, num_threads=3)
    ws = WorkerSet(store, 3)
    try:
        for lo in range(0, el.num_edges, 700):
            s, d, w = el.slice(lo, lo + 700)
            ws.apply(True, route_batch(s, d, w, directed=False, num_threads=3,
                                       partition_size=cfg.partition_size))
    finally:
        ws.close()
    ref = reference_store(el, cfg)
    assert arcs(store) == arcs(ref)
    assert store.live_edges() == ref.live_edges()


def test_experiment_cross_format_analytics_agree():
    el = shuffle(gen_synthetic("short", 400, 2000, seed=21, weighted=True), 21)
    algos = ("bfs", "pr", "sssp", "cc")
    out = {}
    for fmt in ("tango", "adlist-shared", "adlist-chunked"):
        _, _, vals = run_experiment(el, fmt, algorithms=algos, batch_size=400,
                                    num_threads=2, collect_values=True)
        out[fmt] = vals
    a, b, c = out["tango"], out["adlist-shared"], out["adlist-chunked"]
    assert len(a) == len(b) == len(c) == 10
    for x, y in ((b, a), (c, a)):
        for vx, va in zip(x, y):
            for k in ("bfs", "sssp", "cc"):
                assert np.array_equal(vx[k], va[k])
            assert np.allclose(vx["pr"], va["pr"], atol=1e-9)


def test_experiment_deterministic_across_runs():
    el = shuffle(gen_synthetic("heavy", 300, 2500, seed=2, weighted=True), 2)
    runs = []
    for _ in range(2):
        reports, summary, vals = run_experiment(
            el, "tango", algorithms=("bfs", "pr"), batch_size=600,
            num_threads=3, collect_values=True)
        runs.append((reports, vals))
    ra, va = runs[0]
    rb, vb = runs[1]
    assert [r.live_edges for r in ra] == [r.live_edges for r in rb]
    assert [r.memory_bytes for r in ra] == [r.memory_bytes for r in rb]
    assert [r.probe_insert for r in ra] == [r.probe_insert for r in rb]
    for x, y in zip(va, vb):
        for k in x:
            assert np.array_equal(x[k], y[k])


def test_experiment_directed_with_cc():
    el = shuffle(gen_synthetic("short", 150, 900, seed=4, directed=True), 4)
    reports, summary = run_experiment(el, "tango", algorithms=("bfs", "cc"),
                                      batch_size=300, num_threads=2)
    assert reports[-1].live_edges == 0
    assert {"bfs", "cc"} == set(reports[0].algo_seconds)


def test_experiment_probe_hist_only_for_hybrid():
    el = shuffle(gen_synthetic("heavy", 100, 2000, seed=6), 6)
    rt, _ = run_experiment(el, "tango", algorithms=(), batch_size=1000)
    rb, _ = run_experiment(el, "adlist-chunked", algorithms=(), batch_size=1000)
    assert any(r.probe_insert for r in rt)  # hub crosses th1, hash gets used
    assert all(not r.probe_insert and not r.probe_find for r in rb)
    # analytics skipped entirely when no algorithms are requested
    assert all(r.analytics_seconds == 0 for r in rt)


def test_experiment_empty_edge_list():
    el = EdgeList(srcs=np.empty(0, np.int64), dsts=np.empty(0, np.int64),
                  weights=None, num_vertices=3, directed=False)
    reports, summary = run_experiment(el, "tango", algorithms=("bfs",))
    assert reports == []
    assert summary.insert_geomean_eps == 0.0
    assert summary.delete_geomean_eps == 0.0
    assert summary.mean_bytes_per_edge == 0.0


def test_experiment_validation_errors():
    el = gen_synthetic("short", 10, 50, seed=0)
    with pytest.raises(ValueError):
        run_experiment(el, "btree")
    with pytest.raises(ValueError):
        run_experiment(el, "tango", algorithms=("dfs",))
    with pytest.raises(ValueError):
        run_experiment(el, "tango", algorithms=("sssp",))  # unweighted list
    with pytest.raises(ValueError):
        run_experiment(el, "tango", config=Config(weighted=True))
    with pytest.raises(ValueError):
        run_experiment(el, "tango", batch_size=0)


# -- reports -----------------------------------------------------------------


def run_small(tmp_path, report_format):
    el = shuffle(gen_synthetic("short", 60, 300, seed=8, weighted=True), 8)
    reports, summary = run_experiment(el, "tango", algorithms=("bfs", "sssp"),
                                      batch_size=100)
    path = tmp_path / f"r.{report_format}"
    emit_report(reports, summary, path, report_format=report_format,
                extra_meta={"dataset": el.source_name})
    return reports, summary, path


@pytest.mark.parametrize("report_format", ["csv", "tsv"])
def test_report_roundtrips_exactly(tmp_path, report_format):
    reports, summary, path = run_small(tmp_path, report_format)
    comments, header, rows = parse_report(path)
    assert len(rows) == len(reports) + 1
    assert rows[-1]["batch"] == "summary"
    assert any("pagerank" in c for c in comments)
    assert any("dataset:" in c for c in comments)
    for r, row in zip(reports, rows):
        assert row["batch"] == r.index
        assert row["phase"] == r.phase
        assert row["edges"] == r.edges
        assert row["seconds"] == r.seconds          # exact: repr round-trip
        assert row["edges_per_s"] == r.edges_per_s
        assert row["memory_bytes"] == r.memory_bytes
        assert row["bfs_s"] == r.algo_seconds["bfs"]
        assert row["pr_s"] is None                  # not requested
        assert row["analytics_s"] == r.analytics_seconds
    s = rows[-1]
    assert s["insert_geomean_eps"] == summary.insert_geomean_eps
    assert s["delete_geomean_eps"] == summary.delete_geomean_eps
    assert s["mean_bytes_per_edge"] == summary.mean_bytes_per_edge
    assert s["total_seconds"] == summary.total_seconds


def test_report_deterministic_bytes(tmp_path):
    el = shuffle(gen_synthetic("short", 40, 200, seed=1), 1)
    reports, summary = run_experiment(el, "tango", algorithms=(), batch_size=50)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_report(reports, summary, p1)
    emit_report(reports, summary, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_probe_hist_column_encoding(tmp_path):
    el = shuffle(gen_synthetic("heavy", 80, 1600, seed=3), 3)
    reports, summary = run_experiment(el, "tango", algorithms=(), batch_size=800)
    path = tmp_path / "h.csv"
    emit_report(reports, summary, path)
    _, _, rows = parse_report(path)
    cell = next(r["probe_insert_hist"] for r in rows
                if isinstance(r.get("probe_insert_hist"), str))
    parsed = {int(k): int(v) for k, v in (kv.split(":") for kv in cell.split(";"))}
    assert parsed and all(d >= 1 for d in parsed)


# -- th1 sweep ---------------------------------------------------------------


def test_th1_sweep_rows(tmp_path):
    el = shuffle(gen_synthetic("short", 120, 960, seed=17), 17)
    rows = run_th1_sweep(el, algorithms=(), batch_size=240,
                         th1_values=(8, 16, 32))
    assert [r["th1"] for r in rows] == [8, 16, 32]
    for r in rows:
        assert r["insert_geomean_eps"] > 0
        assert r["insert_mean_bytes_per_edge"] > 0
        assert r["peak_memory_bytes"] > 0
    path = tmp_path / "sweep.csv"
    emit_sweep_report(rows, path, extra_meta={"dataset": "x"})
    _, header, parsed = parse_report(path)
    assert header[0] == "th1"
    assert [r["th1"] for r in parsed] == [8, 16, 32]
    assert parsed[0]["peak_memory_bytes"] == rows[0]["peak_memory_bytes"]


# -- CLI ---------------------------------------------------------------------


def test_cli_synthetic_run_writes_report(tmp_path, capsys):
    path = tmp_path / "out.csv"
    rc = main(["--synthetic", "short", "--vertices", "80", "--edges", "400",
               "--batch-size", "100", "--threads", "2",
               "--report", str(path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "insert geomean" in out
    _, _, rows = parse_report(path)
    assert rows[-1]["batch"] == "summary"
    assert len(rows) == 9  # 4 insert + 4 delete + summary


def test_cli_file_input_weighted_sssp(tmp_path, capsys):
    snap = write(tmp_path, "0 1 4\n1 2 1\n2 3 2\n0 3 9\n3 4 1\n")
    rc = main(["--input", str(snap), "--weighted", "--algorithms", "sssp,bfs",
               "--batch-size", "2"])
    assert rc == 0
    assert "analytics geomean" in capsys.readouterr().out


def test_cli_sweep(tmp_path, capsys):
    path = tmp_path / "sweep.tsv"
    rc = main(["--synthetic", "heavy", "--vertices", "60", "--edges", "360",
               "--sweep-th1", "--algorithms", "", "--batch-size", "120",
               "--report", str(path), "--report-format", "tsv"])
    assert rc == 0
    assert "th1=8" in capsys.readouterr().out
    _, header, rows = parse_report(path)
    assert [r["th1"] for r in rows] == [8, 16, 32, 64, 128, 256, 512]


def test_cli_config_file_and_flag_precedence(tmp_path, capsys):
    cfgf = tmp_path / "cfg.txt"
    cfgf.write_text("th1 = 64\nweighted = yes\n")
    rc = main(["--synthetic", "short", "--vertices", "30", "--edges", "90",
               "--config", str(cfgf), "--th1", "16", "--algorithms", ""])
    assert rc == 0
    assert "th1=16" in capsys.readouterr().out  # flag beats file


@pytest.mark.parametrize("argv", [
    ["--input", "/nonexistent/file.snap"],
    ["--synthetic", "short", "--edges", "100"],
    ["--synthetic", "short", "--vertices", "10", "--edges", "100",
     "--algorithms", "sssp"],
    ["--synthetic", "short", "--vertices", "10", "--edges", "100",
     "--th1", "7"],
    ["--synthetic", "short", "--vertices", "10", "--edges", "100",
     "--format", "adlist-shared", "--sweep-th1"],
])
def test_cli_errors_exit_nonzero(argv, capsys):
    rc = main(argv)
    assert rc == 2
    assert "error" in capsys.readouterr().err
