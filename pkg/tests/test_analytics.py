import random

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse import csgraph

from graphtango.analytics import (
    UNREACHABLE,
    build_snapshot,
    run_bfs,
    run_cc,
    run_pr,
    run_sssp,
)
from graphtango.baseline import AdListChunked
from graphtango.core import Config, VertexRangeError
from graphtango.store import TangoStore


def random_graph(V, E, seed, weighted=False, directed=False):
    rng = random.Random(seed)
    edges = {}
    while len(edges) < E:
        u, v = rng.randrange(V), rng.randrange(V)
        if u == v:
            continue
        if not directed and (v, u) in edges:
            continue
        edges[(u, v)] = rng.randrange(1, 20) if weighted else None
    return list(edges.items())


def load(cls, V, edges, weighted, directed):
    store = cls(Config(weighted=weighted, directed=directed), V)
    for (u, v), w in edges:
        store.insert_edge(u, v, w)
    return store


def to_scipy(snap):
    data = snap.weights if snap.weights is not None else np.ones(snap.num_edges)
    return sp.csr_matrix((data, snap.indices, snap.indptr),
                         shape=(snap.num_vertices, snap.num_vertices))


def pr_oracle(V, arcs, d=0.85, tol=1e-7, iters=100):
    """Straight-line transcription of the rank recurrence, no numpy."""
    out = [0] * V
    for u, v in arcs:
        out[u] += 1
    rank = [1.0 / V] * V
    for _ in range(iters):
        new = [(1.0 - d) / V] * V
        for u, v in arcs:
            new[v] += d * rank[u] / out[u]
        delta = sum(abs(a - b) for a, b in zip(new, rank))
        rank = new
        if delta < tol:
            break
    return rank


def stored_arcs(store):
    arcs = []
    for v in range(store.num_vertices):
        for w in store.neighbors(v).tolist():
            arcs.append((v, int(w)))
    return arcs


def canon(labels):
    _, inv = np.unique(labels, return_inverse=True)
    return inv.tolist()


@pytest.mark.parametrize("directed", [False, True])
def test_bfs_against_scipy(directed):
    V, E = 300, 900
    edges = random_graph(V, E, seed=5, directed=directed)
    store = load(TangoStore, V, edges, False, directed)
    snap = build_snapshot(store)
    got = run_bfs(snap, 0)
    want = csgraph.shortest_path(to_scipy(snap), unweighted=True,
                                 directed=directed, indices=0)
    assert np.array_equal(got.values, want)
    assert got.mode == "full"


@pytest.mark.parametrize("directed", [False, True])
def test_sssp_against_scipy(directed):
    V, E = 300, 900
    edges = random_graph(V, E, seed=6, weighted=True, directed=directed)
    store = load(TangoStore, V, edges, True, directed)
    snap = build_snapshot(store)
    got = run_sssp(snap, 3)
    want = csgraph.shortest_path(to_scipy(snap), directed=directed, indices=3)
    assert np.array_equal(got.values, want)  # integer weights are exact in f64


@pytest.mark.parametrize("directed", [False, True])
def test_cc_against_scipy(directed):
    V = 400
    edges = random_graph(V, 500, seed=7, directed=directed)
    store = load(TangoStore, V, edges, False, directed)
    snap = build_snapshot(store, need_in=directed)
    got = run_cc(snap)
    n_want, labels_want = csgraph.connected_components(
        to_scipy(snap), directed=directed, connection="weak")
    assert canon(got.values) == canon(labels_want)
    assert len(np.unique(got.values)) == n_want
    # labels are the minimum vertex id of each component
    for comp in np.unique(got.values):
        members = np.nonzero(got.values == comp)[0]
        assert comp == members.min()


@pytest.mark.parametrize("directed", [False, True])
def test_pr_against_loop_oracle(directed):
    V, E = 120, 400
    edges = random_graph(V, E, seed=8, directed=directed)
    store = load(TangoStore, V, edges, False, directed)
    snap = build_snapshot(store)
    got = run_pr(snap)
    want = pr_oracle(V, stored_arcs(store))
    assert np.allclose(got.values, want, atol=1e-9)


def test_pr_single_vertex_and_empty():
    store = TangoStore(Config(), 1)
    snap = build_snapshot(store)
    r = run_pr(snap)
    assert r.values[0] == pytest.approx(0.15)  # (1 - d) with no edges
    store5 = TangoStore(Config(), 5)
    r5 = run_pr(build_snapshot(store5))
    assert np.allclose(r5.values, (1 - 0.85) / 5)


def test_pr_sink_mass_not_redistributed():
    # 0 -> 1 -> 2 where 2 is a sink: total rank stays below 1
    store = TangoStore(Config(directed=True), 3)
    store.insert_edge(0, 1)
    store.insert_edge(1, 2)
    r = run_pr(build_snapshot(store))
    assert r.values.sum() < 1.0
    want = pr_oracle(3, [(0, 1), (1, 2)])
    assert np.allclose(r.values, want, atol=1e-9)


def test_bfs_unreachable_and_sources():
    store = TangoStore(Config(), 6)
    store.insert_edge(0, 1)
    store.insert_edge(1, 2)
    snap = build_snapshot(store)
    r = run_bfs(snap, 0)
    assert r.values.tolist() == [0, 1, 2, UNREACHABLE, UNREACHABLE, UNREACHABLE]
    with pytest.raises(VertexRangeError):
        run_bfs(snap, 6)
    with pytest.raises(VertexRangeError):
        run_sssp(build_snapshot(load(TangoStore, 4, [((0, 1), 2)], True, False)), -1)


def test_snapshot_shapes_and_formats_agree():
    V, E = 200, 700
    edges = random_graph(V, E, seed=9, weighted=True, directed=True)
    a = load(TangoStore, V, edges, True, True)
    b = load(AdListChunked, V, edges, True, True)
    sa = build_snapshot(a, need_in=True)
    sb = build_snapshot(b, need_in=True)
    assert sa.num_edges == sb.num_edges == E
    assert np.array_equal(sa.indptr, sb.indptr)
    # per-row content matches as sets (storage order may differ)
    for v in range(V):
        ra = sorted(zip(sa.indices[sa.indptr[v]:sa.indptr[v + 1]].tolist(),
                        sa.weights[sa.indptr[v]:sa.indptr[v + 1]].tolist()))
        rb = sorted(zip(sb.indices[sb.indptr[v]:sb.indptr[v + 1]].tolist(),
                        sb.weights[sb.indptr[v]:sb.indptr[v + 1]].tolist()))
        assert ra == rb
    # and identical analytics either way
    ga, gb = run_sssp(sa, 0), run_sssp(sb, 0)
    assert np.array_equal(ga.values, gb.values)
    ca, cb = run_cc(sa), run_cc(sb)
    assert np.array_equal(ca.values, cb.values)


@pytest.mark.parametrize("directed", [False, True])
def test_incremental_bfs_matches_full(directed):
    V = 250
    all_edges = random_graph(V, 1000, seed=10, directed=directed)
    first, second = all_edges[:600], all_edges[600:]
    store = load(TangoStore, V, first, False, directed)
    prev = run_bfs(build_snapshot(store), 0).values
    srcs = np.array([e[0][0] for e in second])
    dsts = np.array([e[0][1] for e in second])
    for (u, v), _ in second:
        store.insert_edge(u, v)
    snap = build_snapshot(store)
    inc = run_bfs(snap, 0, prev=prev, new_edges=(srcs, dsts))
    full = run_bfs(snap, 0)
    assert inc.mode == "incremental"
    assert np.array_equal(inc.values, full.values)


@pytest.mark.parametrize("directed", [False, True])
def test_incremental_sssp_matches_full(directed):
    V = 250
    all_edges = random_graph(V, 1000, seed=11, weighted=True, directed=directed)
    first, second = all_edges[:600], all_edges[600:]
    store = load(TangoStore, V, first, True, directed)
    prev = run_sssp(build_snapshot(store), 5).values
    srcs = np.array([e[0][0] for e in second])
    dsts = np.array([e[0][1] for e in second])
    ws = np.array([e[1] for e in second], dtype=np.float64)
    for (u, v), w in second:
        store.insert_edge(u, v, w)
    snap = build_snapshot(store)
    inc = run_sssp(snap, 5, prev=prev, new_edges=(srcs, dsts, ws))
    full = run_sssp(snap, 5)
    assert np.array_equal(inc.values, full.values)


@pytest.mark.parametrize("directed", [False, True])
def test_incremental_cc_matches_full(directed):
    V = 300
    all_edges = random_graph(V, 500, seed=12, directed=directed)
    first, second = all_edges[:300], all_edges[300:]
    store = load(TangoStore, V, first, False, directed)
    prev = run_cc(build_snapshot(store, need_in=directed)).values
    srcs = np.array([e[0][0] for e in second])
    dsts = np.array([e[0][1] for e in second])
    for (u, v), _ in second:
        store.insert_edge(u, v)
    snap = build_snapshot(store, need_in=directed)
    inc = run_cc(snap, prev=prev, new_edges=(srcs, dsts))
    full = run_cc(snap)
    assert np.array_equal(inc.values, full.values)


def test_pr_warm_start_converges_same():
    V = 150
    all_edges = random_graph(V, 600, seed=13, directed=True)
    first, second = all_edges[:400], all_edges[400:]
    store = load(TangoStore, V, first, False, True)
    prev = run_pr(build_snapshot(store)).values
    for (u, v), _ in second:
        store.insert_edge(u, v)
    snap = build_snapshot(store)
    warm = run_pr(snap, prev=prev)
    cold = run_pr(snap)
    assert warm.mode == "incremental"
    assert np.allclose(warm.values, cold.values, atol=1e-5)


def test_snapshot_never_touches_hash_tables():
    V = 500
    store = load(TangoStore, V, random_graph(V, 3000, seed=14), False, False)
    # drive a few vertices into hash-backed territory
    for k in range(80):
        store.insert_edge(0, 100 + k)
    before = store.probe_stats()
    snap = build_snapshot(store)
    run_bfs(snap, 0)
    run_pr(snap)
    run_cc(snap)
    assert store.probe_stats() == before


def test_deterministic_results():
    V = 200
    edges = random_graph(V, 800, seed=15, weighted=True)
    store = load(TangoStore, V, edges, True, False)
    snap = build_snapshot(store)
    a1, a2 = run_sssp(snap, 0), run_sssp(snap, 0)
    assert np.array_equal(a1.values, a2.values)
    p1, p2 = run_pr(snap), run_pr(snap)
    assert np.array_equal(p1.values, p2.values)  # bitwise equal must hold
