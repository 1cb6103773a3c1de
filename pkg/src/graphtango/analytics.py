"""Batch analytics over a CSR snapshot of any of the edge stores.

After each update batch the harness freezes the store into a compressed
sparse row snapshot (one pass over the per-vertex edge cursors, no hash
probes) and runs the requested kernels on plain numpy arrays.

BFS, SSSP, and connected components share one engine: iterative
minimum-relaxation over a frontier. Each round gathers every out-edge of
the frontier, forms candidate values (parent value + edge cost: the weight
for SSSP, 1 for BFS, 0 for component labels), scatter-mins them into the
value array, and the improved vertices become the next frontier. With
non-negative costs the fixed point is exact regardless of evaluation
order, so results are deterministic and independent of thread count.

The same monotonicity gives incremental recomputation after insert-only
batches: previous values are a valid upper bound, so relaxation seeded
from just the inserted edges' endpoints converges to exactly the
from-scratch answer. Any batch containing a delete falls back to a full
run. PageRank always iterates to tolerance; after the first batch it warm
starts from the previous ranks, which converge to the same fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import VertexRangeError

UNREACHABLE = np.inf

_PR_DAMPING = 0.85
_PR_TOL = 1e-7
_PR_MAX_ITERS = 100


@dataclass
class Snapshot:
    """CSR image of a store: out-edges always, in-edges when requested."""

    num_vertices: int
    directed: bool
    indptr: np.ndarray            # int64, len V+1
    indices: np.ndarray           # int64, len E
    weights: np.ndarray | None    # float64, len E, None when unweighted
    in_indptr: np.ndarray | None = None
    in_indices: np.ndarray | None = None

    @property
    def num_edges(self) -> int:
        return len(self.indices)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)


def _side_csr(store, side: int, with_weights: bool):
    V = store.num_vertices
    degs = store.degree_array(side).astype(np.int64)
    indptr = np.zeros(V + 1, dtype=np.int64)
    np.cumsum(degs, out=indptr[1:])
    total = int(indptr[-1])
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return indptr, empty, (np.empty(0, dtype=np.float64) if with_weights else None)
    chunks = [store.neighbors(v, side) for v in range(V) if degs[v]]
    indices = np.concatenate(chunks).astype(np.int64)
    weights = None
    if with_weights:
        wchunks = [store.neighbor_props(v, side) for v in range(V) if degs[v]]
        weights = np.concatenate(wchunks).astype(np.float64)
    return indptr, indices, weights


def build_snapshot(store, need_in: bool = False) -> Snapshot:
    """Freeze a store into CSR form by walking its edge cursors.

    need_in additionally materializes the in-edge CSR of a directed store
    (components need both directions); undirected stores already hold each
    edge under both endpoints.
    """
    indptr, indices, weights = _side_csr(store, 0, store.weighted)
    snap = Snapshot(store.num_vertices, store.directed, indptr, indices, weights)
    if need_in and store.directed:
        snap.in_indptr, snap.in_indices, _ = _side_csr(store, 1, False)
    return snap


# -- shared relaxation engine ---------------------------------------------------


def _gather(indptr, indices, frontier):
    """Flat edge targets of the frontier rows plus a per-edge source map."""
    starts = indptr[frontier]
    cnts = indptr[frontier + 1] - starts
    total = int(cnts.sum())
    if total == 0:
        return None, None
    offs = np.cumsum(cnts) - cnts
    flat = np.arange(total, dtype=np.int64) - np.repeat(offs, cnts) + np.repeat(starts, cnts)
    return flat, np.repeat(frontier, cnts)


def _scatter_min(values, cand_dst, cand_val):
    """Min-reduce candidates per destination; return the improved vertices."""
    order = np.argsort(cand_dst, kind="stable")
    sd = cand_dst[order]
    sv = cand_val[order]
    group_starts = np.r_[0, np.nonzero(np.diff(sd))[0] + 1]
    mins = np.minimum.reduceat(sv, group_starts)
    dsts = sd[group_starts]
    better = mins < values[dsts]
    improved = dsts[better]
    values[improved] = mins[better]
    return improved


def _min_relax(csrs, values, frontier) -> int:
    """Relax to the fixed point; csrs is a list of (indptr, indices, cost)
    where cost is an edge-aligned array or a scalar. Returns rounds run."""
    rounds = 0
    limit = len(values) + 1
    frontier = np.unique(np.asarray(frontier, dtype=np.int64))
    while frontier.size:
        rounds += 1
        if rounds > limit:
            raise RuntimeError("relaxation failed to converge; negative cost?")
        parts_dst = []
        parts_val = []
        for indptr, indices, cost in csrs:
            flat, src = _gather(indptr, indices, frontier)
            if flat is None:
                continue
            parts_dst.append(indices[flat])
            add = cost[flat] if isinstance(cost, np.ndarray) else cost
            parts_val.append(values[src] + add)
        if not parts_dst:
            break
        cand_dst = parts_dst[0] if len(parts_dst) == 1 else np.concatenate(parts_dst)
        cand_val = parts_val[0] if len(parts_val) == 1 else np.concatenate(parts_val)
        frontier = _scatter_min(values, cand_dst, cand_val)
    return rounds


def _seed_from_edges(values, srcs, dsts, costs, symmetric: bool):
    """Directly relax a set of edges; the improved heads seed the frontier.

    symmetric relaxes each edge in both directions, for snapshots that store
    an undirected graph (or label propagation, which ignores direction).
    """
    srcs = np.asarray(srcs, dtype=np.int64)
    dsts = np.asarray(dsts, dtype=np.int64)
    if srcs.size == 0:
        return np.empty(0, dtype=np.int64)
    if symmetric:
        srcs, dsts = np.concatenate([srcs, dsts]), np.concatenate([dsts, srcs])
        if isinstance(costs, np.ndarray):
            costs = np.concatenate([costs, costs])
    cand = values[srcs] + costs
    finite = cand < np.inf
    if not finite.all():
        cand, dsts = cand[finite], dsts[finite]
    if dsts.size == 0:
        return np.empty(0, dtype=np.int64)
    return _scatter_min(values, dsts, cand)


# -- kernels ---------------------------------------------------------------------


@dataclass
class KernelResult:
    name: str
    values: np.ndarray
    rounds: int
    mode: str  # "full" or "incremental"


def _check_source(snap: Snapshot, source: int) -> None:
    if source < 0 or source >= snap.num_vertices:
        raise VertexRangeError(f"source {source} outside [0, {snap.num_vertices})")


def run_bfs(snap: Snapshot, source: int, prev: np.ndarray | None = None,
            new_edges=None) -> KernelResult:
    """Hop distances from source; unreachable vertices hold inf.

    prev plus new_edges (srcs, dsts arrays of the batch's inserted edges,
    both orientations for undirected graphs) runs the incremental form.
    Valid only for edges being added: deletions need a full run (prev=None).
    """
    _check_source(snap, source)
    csr = (snap.indptr, snap.indices, 1.0)
    if prev is not None and new_edges is not None:
        values = prev.copy()
        frontier = _seed_from_edges(values, new_edges[0], new_edges[1], 1.0,
                                    symmetric=not snap.directed)
        rounds = _min_relax([csr], values, frontier)
        return KernelResult("bfs", values, rounds, "incremental")
    values = np.full(snap.num_vertices, np.inf)
    values[source] = 0.0
    rounds = _min_relax([csr], values, np.array([source]))
    return KernelResult("bfs", values, rounds, "full")


def run_sssp(snap: Snapshot, source: int, prev: np.ndarray | None = None,
             new_edges=None) -> KernelResult:
    """Shortest-path distances by edge weight (non-negative integers).

    The incremental path (prev + new_edges) is valid only when new_edges are
    genuinely new: min-relaxation seeded from prev can never raise a distance,
    so weight updates to existing edges and deletions both require a full run.
    """
    _check_source(snap, source)
    if snap.weights is None:
        raise ValueError("sssp needs a weighted snapshot")
    csr = (snap.indptr, snap.indices, snap.weights)
    if prev is not None and new_edges is not None:
        values = prev.copy()
        srcs, dsts, w = new_edges
        frontier = _seed_from_edges(values, srcs, dsts,
                                    np.asarray(w, dtype=np.float64),
                                    symmetric=not snap.directed)
        rounds = _min_relax([csr], values, frontier)
        return KernelResult("sssp", values, rounds, "incremental")
    values = np.full(snap.num_vertices, np.inf)
    values[source] = 0.0
    rounds = _min_relax([csr], values, np.array([source]))
    return KernelResult("sssp", values, rounds, "full")


def run_cc(snap: Snapshot, prev: np.ndarray | None = None,
           new_edges=None) -> KernelResult:
    """Connected components as min-vertex-id labels (weak components when
    directed: edges propagate labels both ways).

    Incremental form (prev + new_edges) merges labels across added edges;
    deletions can split components, so they need a full run.
    """
    csrs = [(snap.indptr, snap.indices, 0.0)]
    if snap.directed:
        if snap.in_indptr is None:
            raise ValueError("cc on a directed snapshot needs need_in=True")
        csrs.append((snap.in_indptr, snap.in_indices, 0.0))
    if prev is not None and new_edges is not None:
        values = prev.astype(np.float64, copy=True)
        frontier = _seed_from_edges(values, new_edges[0], new_edges[1], 0.0,
                                    symmetric=True)
        rounds = _min_relax(csrs, values, frontier)
        return KernelResult("cc", values.astype(np.int64), rounds, "incremental")
    values = np.arange(snap.num_vertices, dtype=np.float64)
    frontier = np.arange(snap.num_vertices, dtype=np.int64)
    rounds = _min_relax(csrs, values, frontier)
    return KernelResult("cc", values.astype(np.int64), rounds, "full")


def run_pr(snap: Snapshot, damping: float = _PR_DAMPING, tol: float = _PR_TOL,
           max_iters: int = _PR_MAX_ITERS, prev: np.ndarray | None = None) -> KernelResult:
    """PageRank: rank(v) = (1-d)/V + d * sum over in-edges of rank(u)/outdeg(u).

    Power iteration to an L1 step bound of tol. No special treatment of
    sink vertices: their rank simply is not redistributed, so ranks sum to
    less than one when sinks exist. A vertex with no edges at all scores
    (1-d)/V. Warm starting from prev converges to the same fixed point.
    """
    V = snap.num_vertices
    if V == 0:
        return KernelResult("pr", np.empty(0), 0, "full")
    outdeg = snap.out_degrees()
    mode = "full" if prev is None else "incremental"
    rank = np.full(V, 1.0 / V) if prev is None else prev.copy()
    base = (1.0 - damping) / V
    contrib = np.zeros(V)
    has_out = outdeg > 0
    for it in range(1, max_iters + 1):
        np.divide(rank, outdeg, out=contrib, where=has_out)
        acc = np.bincount(snap.indices, weights=np.repeat(contrib, outdeg), minlength=V)
        new = base + damping * acc
        delta = float(np.abs(new - rank).sum())
        rank = new
        if delta < tol:
            break
    return KernelResult("pr", rank, it, mode)


KERNELS = ("bfs", "pr", "sssp", "cc")
