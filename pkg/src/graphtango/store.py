"""Degree-adaptive adjacency storage with three per-vertex layouts.

Every vertex owns one 64-byte metadata record (one cache line) in a flat,
page-aligned array. The record's first word is the degree; the rest depends
on how many edges the vertex currently has:

* Type1 (deg <= TH0): edges live inline in the record itself. TH0 is
  whatever fits next to the degree word: 7 unweighted or 3 weighted edges
  for 64-byte lines. Lookups scan the line already in hand; no allocation.
* Type2 (TH0 < deg <= TH1): the record holds a capacity and a handle to a
  pool chunk with a contiguous edge array. Lookups scan the array.
* Type3 (deg > TH1): same edge array plus a line-confined hash table
  mapping dst -> array index, sized at 2 x capacity slots so load never
  passes 0.5. Lookups are O(1) probes instead of an O(deg) scan.

Transitions are exact threshold crossings with geometric capacity changes:
an append into a full array doubles it, a delete that leaves deg == cap/4
halves it, crossing TH1 builds or drops the hash table, and crossing TH0
moves edges between the inline record and a pool chunk. The edge array is
kept packed by moving the last edge into any deleted slot.

Edge arrays and hash chunks come from per-worker-thread memory pools;
vertex v's chunks always come from pool partition_of(v), so every free goes
back to the pool that allocated it.
"""

from __future__ import annotations

import numpy as np

from .cfhash import CfhTable, ProbeStats
from .core import SCAN_LIMIT, Config, VertexRangeError, next_pow2, partition_of
from .mempool import MemoryPool, alloc_aligned

TYPE1 = 1
TYPE2 = 2
TYPE3 = 3

OUT = 0
IN = 1

# Meta record word offsets (Type2/Type3 layout; Type1 keeps edges at 1..).
_DEG = 0
_CAP = 1
_EDGES = 2
_HASH = 3
_HASHCAP = 4

class _Side:
    """Adjacency state for one direction: metadata, edge views, hash tables.

    mv aliases the meta buffer word for word; scalar reads and writes go
    through it because a memoryview touch costs about half a numpy one, and
    the hot paths are dominated by exactly those touches.
    """

    __slots__ = ("meta", "mv", "views", "tables")

    def __init__(self, num_vertices: int, line_words: int):
        buf = alloc_aligned(num_vertices * line_words * 8)
        self.meta = buf.view(np.uint64)
        self.mv = memoryview(buf).cast("Q")
        self.views: list = [None] * num_vertices
        self.tables: list = [None] * num_vertices


class TangoStore:
    """Hybrid Type1/Type2/Type3 edge store for a fixed vertex set.

    Undirected graphs store each logical edge in both endpoints' out tables;
    directed graphs additionally maintain a mirrored in-edge side. insert_half
    and delete_half operate on a single (vertex, direction) table and exist so
    a multi-worker harness can route each vertex's updates to its owner
    thread; insert_edge and delete_edge apply both halves.
    """

    def __init__(self, config: Config, num_vertices: int, num_threads: int = 1,
                 debug: bool = False):
        if num_threads < 1:
            raise ValueError("num_threads must be >= 1")
        self.config = config
        self.num_vertices = num_vertices
        self.num_threads = num_threads
        self.th0 = config.th0
        self.th1 = config.th1
        self.weighted = config.weighted
        self.directed = config.directed
        self._ew = 2 if config.weighted else 1  # words per edge
        self._line_words = config.cache_line_bytes // 8
        self._min_cap = next_pow2(self.th0)
        self._psize = config.partition_size
        self.pools = [MemoryPool(config.block_bytes, debug=debug)
                      for _ in range(num_threads)]
        self._sides = [_Side(num_vertices, self._line_words)]
        if config.directed:
            self._sides.append(_Side(num_vertices, self._line_words))
        self.vprop = np.zeros(num_vertices, dtype=np.uint64)
        self.stats = ProbeStats()
        self.resize_copies = 0  # edges copied by grows, shrinks, type switches
        self.tracker = None

    # -- helpers -------------------------------------------------------------

    def _pool_of(self, v: int) -> MemoryPool:
        return self.pools[partition_of(v, self.num_threads, self._psize)]

    def _check_vertex(self, v: int) -> None:
        if v < 0 or v >= self.num_vertices:
            raise VertexRangeError(f"vertex {v} outside [0, {self.num_vertices})")

    def _new_array(self, v: int, cap: int) -> tuple[int, np.ndarray]:
        pool = self.pools[(v // self._psize) % self.num_threads]
        chunk = pool.allocate(cap * self._ew * 8)
        return chunk, pool.u64_view(chunk, cap * self._ew)

    def _resize_array(self, side: _Side, v: int, base: int, deg: int,
                      cap: int, new_cap: int) -> np.ndarray:
        """Move the edge array to a new_cap chunk, copying deg live edges."""
        mv = side.mv
        ew = self._ew
        pool = self.pools[(v // self._psize) % self.num_threads]
        new_chunk = pool.allocate(new_cap * ew * 8)
        new_view = pool.u64_view(new_chunk, new_cap * ew)
        nw = deg * ew
        new_view[:nw] = side.views[v][:nw]
        pool.deallocate(mv[base + _EDGES], cap * ew * 8)
        mv[base + _CAP] = new_cap
        mv[base + _EDGES] = new_chunk
        side.views[v] = new_view
        self.resize_copies += deg
        return new_view

    def _build_table(self, side: _Side, v: int, base: int, deg: int) -> CfhTable:
        """Attach a dst -> index hash at 2 x cap slots covering deg edges."""
        mf = side.meta
        cap = mf.item(base + _CAP)
        tbl = CfhTable(2 * cap, pool=self._pool_of(v),
                       slots_per_line=self.config.cache_line_bytes // 8,
                       multiplier=self.config.hash_constant, stats=self.stats)
        tbl.tracker = self.tracker
        view = side.views[v]
        step = self._ew
        tbl.bulk_load((view.item(j * step), j) for j in range(deg))
        side.tables[v] = tbl
        mf[base + _HASH] = tbl._chunk
        mf[base + _HASHCAP] = tbl.capacity_slots
        return tbl

    # -- single-direction operations ------------------------------------------

    def insert_half(self, v: int, nbr: int, prop: int = 0, side: int = OUT) -> bool:
        """Insert nbr into v's table for one direction.

        Returns True if a new edge was appended, False if an existing edge
        had its property overwritten.
        """
        if v < 0 or v >= self.num_vertices or nbr < 0 or nbr >= self.num_vertices:
            raise VertexRangeError(f"edge ({v}, {nbr}) outside [0, {self.num_vertices})")
        st = self._sides[side]
        mv = st.mv
        base = v * self._line_words
        deg = mv[base]
        th0 = self.th0
        ew = self._ew
        tr = self.tracker
        if tr is not None:
            tr.clear()
            tr.add(("meta", side, v))
        if deg <= th0:
            # Type1: edges inline in the meta record
            if ew == 1:
                if deg and nbr in mv[base + 1:base + 1 + deg]:
                    return False
                if deg < th0:
                    mv[base + 1 + deg] = nbr
                    mv[base] = deg + 1
                    return True
            else:
                if deg:
                    inline = mv[base + 1:base + 1 + 2 * deg:2].tolist()
                    if nbr in inline:
                        mv[base + 2 + 2 * inline.index(nbr)] = prop
                        return False
                if deg < th0:
                    mv[base + 1 + 2 * deg] = nbr
                    mv[base + 2 + 2 * deg] = prop
                    mv[base] = deg + 1
                    return True
            # Type1 -> Type2: move the inline edges out, then append.
            mf = st.meta
            cap = self._min_cap
            chunk, view = self._new_array(v, cap)
            view[:th0 * ew] = mf[base + 1:base + 1 + th0 * ew]
            mv[base + _CAP] = cap
            mv[base + _EDGES] = chunk
            mv[base + _HASH] = 0
            mv[base + _HASHCAP] = 0
            st.views[v] = view
            self.resize_copies += th0
            if ew == 1:
                view[th0] = nbr
            else:
                view[2 * th0] = nbr
                view[2 * th0 + 1] = prop
            mv[base] = th0 + 1
            if tr is not None:
                tr.add(("earr", side, v, (th0 * ew * 8) >> 6))
            return True
        view = st.views[v]
        if deg <= self.th1:
            # Type2: linear scan of the pool-resident array
            if tr is not None:
                self._track_scan(tr, side, v, deg)
            if ew == 1:
                if deg <= SCAN_LIMIT:
                    if nbr in view[:deg].tolist():
                        return False
                elif nbr in view[:deg]:
                    return False
            else:
                if deg <= SCAN_LIMIT:
                    dsts = view[:2 * deg:2].tolist()
                    if nbr in dsts:
                        view[2 * dsts.index(nbr) + 1] = prop
                        return False
                else:
                    hit = np.nonzero(view[:2 * deg:2] == nbr)[0]
                    if hit.size:
                        view[2 * int(hit[0]) + 1] = prop
                        return False
            if deg == mv[base + _CAP]:
                view = self._resize_array(st, v, base, deg, deg, deg * 2)
            if ew == 1:
                view[deg] = nbr
            else:
                view[2 * deg] = nbr
                view[2 * deg + 1] = prop
            mv[base] = deg + 1
            if tr is not None:
                tr.add(("earr", side, v, (deg * ew * 8) >> 6))
            if deg + 1 > self.th1:
                # Crossed TH1: attach the hash table (array already sized).
                self._build_table(st, v, base, deg + 1)
            return True
        # Type3: hash lookup, array append
        tbl = st.tables[v]
        idx = tbl.find(nbr)
        if idx is not None:
            if ew == 2:
                view[2 * idx + 1] = prop
            return False
        cap = mv[base + _CAP]
        if deg == cap:
            view = self._resize_array(st, v, base, deg, cap, cap * 2)
            tbl.rebuild(4 * cap)
            mv[base + _HASH] = tbl._chunk
            mv[base + _HASHCAP] = tbl.capacity_slots
        if ew == 1:
            view[deg] = nbr
        else:
            view[2 * deg] = nbr
            view[2 * deg + 1] = prop
        mv[base] = deg + 1
        if tr is not None:
            tr.add(("earr", side, v, (deg * ew * 8) >> 6))
        tbl.insert(nbr, deg)
        return True

    def _track_scan(self, tr: set, side: int, v: int, deg: int) -> None:
        for line in range((deg * self._ew * 8 + 63) >> 6):
            tr.add(("earr", side, v, line))

    def delete_half(self, v: int, nbr: int, side: int = OUT) -> bool:
        """Delete nbr from v's table for one direction; True if it was there.

        The last edge moves into the vacated slot so the array stays packed;
        for Type3 the moved edge's hash entry is updated before nbr's entry
        is removed.
        """
        if v < 0 or v >= self.num_vertices or nbr < 0 or nbr >= self.num_vertices:
            raise VertexRangeError(f"edge ({v}, {nbr}) outside [0, {self.num_vertices})")
        st = self._sides[side]
        mv = st.mv
        base = v * self._line_words
        deg = mv[base]
        if deg == 0:
            return False
        th0 = self.th0
        ew = self._ew
        tr = self.tracker
        if tr is not None:
            tr.clear()
            tr.add(("meta", side, v))
        if deg <= th0:
            # Type1: compact within the meta record
            off = base + 1
            inline = mv[off:off + deg * ew:ew].tolist()
            if nbr not in inline:
                return False
            j = inline.index(nbr)
            last = deg - 1
            if j != last:
                mv[off + j * ew] = inline[last]
                if ew == 2:
                    mv[off + j * ew + 1] = mv[off + last * ew + 1]
            mv[base] = last
            return True
        view = st.views[v]
        if deg <= self.th1:
            # Type2
            if tr is not None:
                self._track_scan(tr, side, v, deg)
            if deg <= SCAN_LIMIT:
                dsts = view[:deg * ew:ew].tolist()
                if nbr not in dsts:
                    return False
                j = dsts.index(nbr)
            else:
                hit = np.nonzero(view[:deg * ew:ew] == nbr)[0]
                if not hit.size:
                    return False
                j = int(hit[0])
            last = deg - 1
            if j != last:
                view[j * ew] = view.item(last * ew)
                if ew == 2:
                    view[j * ew + 1] = view.item(last * ew + 1)
            mv[base] = last
            if last == th0:
                # Type2 -> Type1: edges come back inline, chunk is freed.
                # Grab the handle first: the copy overwrites meta words 1..7.
                cap = mv[base + _CAP]
                chunk = mv[base + _EDGES]
                st.meta[base + 1:base + 1 + th0 * ew] = view[:th0 * ew]
                self._pool_of(v).deallocate(chunk, cap * ew * 8)
                st.views[v] = None
                self.resize_copies += th0
            else:
                cap = mv[base + _CAP]
                if last == cap >> 2:
                    self._resize_array(st, v, base, last, cap, cap >> 1)
            return True
        # Type3
        tbl = st.tables[v]
        f = tbl.find(nbr)
        if f is None:
            return False
        last = deg - 1
        if f != last:
            moved = view.item(last * ew)
            view[f * ew] = moved
            if ew == 2:
                view[f * ew + 1] = view.item(last * ew + 1)
            tbl.insert(moved, f)
            if tr is not None:
                tr.add(("earr", side, v, (f * ew * 8) >> 6))
                tr.add(("earr", side, v, (last * ew * 8) >> 6))
        tbl.remove(nbr)
        mv[base] = last
        cap = mv[base + _CAP]
        if last == self.th1:
            # Type3 -> Type2: halve the array, drop the hash table.
            self._resize_array(st, v, base, last, cap, cap >> 1)
            tbl.release()
            st.tables[v] = None
            mv[base + _HASH] = 0
            mv[base + _HASHCAP] = 0
        elif last == cap >> 2:
            self._resize_array(st, v, base, last, cap, cap >> 1)
            tbl.rebuild(cap)  # 2 x the halved capacity
            mv[base + _HASH] = tbl._chunk
            mv[base + _HASHCAP] = tbl.capacity_slots
        return True

    # -- logical-edge operations ----------------------------------------------

    def insert_edge(self, src: int, dst: int, prop: int | None = None) -> bool:
        """Insert or update edge (src, dst); True means a new edge.

        Undirected stores the mirror (dst, src) alongside; directed maintains
        the in-edge side. prop is required to be None on unweighted stores.
        """
        if prop is None:
            prop = 0
        elif not self.weighted:
            raise ValueError("edge property given to an unweighted store")
        inserted = self.insert_half(src, dst, prop, OUT)
        if self.directed:
            self.insert_half(dst, src, prop, IN)
        elif src != dst:
            self.insert_half(dst, src, prop, OUT)
        return inserted

    def delete_edge(self, src: int, dst: int) -> bool:
        """Delete edge (src, dst) and its mirror; True if it existed."""
        deleted = self.delete_half(src, dst, OUT)
        if self.directed:
            self.delete_half(dst, src, IN)
        elif src != dst:
            self.delete_half(dst, src, OUT)
        return deleted

    # -- cursors and introspection ----------------------------------------------

    def degree(self, v: int, side: int = OUT) -> int:
        self._check_vertex(v)
        return self._sides[side].meta.item(v * self._line_words)

    def degree_array(self, side: int = OUT) -> np.ndarray:
        """Degrees of all vertices as one array (a copy)."""
        return self._sides[side].meta.reshape(-1, self._line_words)[:, 0].copy()

    def vertex_kind(self, v: int, side: int = OUT) -> int:
        deg = self.degree(v, side)
        if deg <= self.th0:
            return TYPE1
        return TYPE2 if deg <= self.th1 else TYPE3

    def neighbors(self, v: int, side: int = OUT) -> np.ndarray:
        """Read-only view of v's live neighbor ids, in storage (index) order.

        Never touches the hash table, so traversal is safe to run while no
        update batch is in flight.
        """
        self._check_vertex(v)
        st = self._sides[side]
        mf = st.meta
        base = v * self._line_words
        deg = mf.item(base)
        ew = self._ew
        if deg <= self.th0:
            out = mf[base + 1:base + 1 + deg * ew:ew]
        else:
            out = st.views[v][:deg * ew:ew]
        out = out[:]
        out.flags.writeable = False
        return out

    def in_neighbors(self, v: int) -> np.ndarray:
        """In-edge cursor; the out cursor when the graph is undirected."""
        return self.neighbors(v, IN if self.directed else OUT)

    def neighbor_props(self, v: int, side: int = OUT) -> np.ndarray | None:
        """Read-only view of edge properties aligned with neighbors(v)."""
        if not self.weighted:
            return None
        self._check_vertex(v)
        st = self._sides[side]
        base = v * self._line_words
        deg = st.meta.item(base)
        if deg <= self.th0:
            out = st.meta[base + 2:base + 2 + deg * 2:2]
        else:
            out = st.views[v][1:deg * 2:2]
        out = out[:]
        out.flags.writeable = False
        return out

    def get_edge_prop(self, src: int, dst: int) -> int | None:
        """Property of edge (src, dst), or None if absent (weighted stores)."""
        nbrs = self.neighbors(src)
        hit = np.nonzero(nbrs == dst)[0]
        if not hit.size:
            return None
        if not self.weighted:
            return 0
        return int(self.neighbor_props(src)[int(hit[0])])

    def has_edge(self, src: int, dst: int) -> bool:
        self._check_vertex(src)
        st = self._sides[OUT]
        deg = st.meta.item(src * self._line_words)
        if deg > self.th1:
            return st.tables[src].find(dst) is not None
        return bool(np.any(self.neighbors(src) == dst))

    def stored_edges(self, side: int = OUT) -> int:
        """Total stored (directed) edge slots on one side: sum of degrees."""
        return int(self._sides[side].meta.reshape(-1, self._line_words)[:, 0].sum())

    def live_edges(self) -> float:
        """Logical live edge count: out-degree sum, halved when undirected."""
        total = self.stored_edges(OUT)
        return total / 2 if not self.directed else float(total)

    def memory_bytes(self) -> int:
        """Bytes the native layout occupies: meta lines + vprop + pool chunks."""
        b = self.num_vertices * self.config.cache_line_bytes * len(self._sides)
        b += self.vprop.nbytes
        b += sum(p.bytes_in_use for p in self.pools)
        return b

    def probe_stats(self) -> dict:
        return self.stats.snapshot()

    def enable_line_tracking(self) -> set:
        """Turn on per-operation cache-line touch tracking (test builds).

        Each insert_half/delete_half clears and refills the returned set with
        ("meta"|"earr"|"hash", ...) logical line ids it touched.
        """
        self.tracker = set()
        for st in self._sides:
            for tbl in st.tables:
                if tbl is not None:
                    tbl.tracker = self.tracker
        return self.tracker

    # -- invariant checking (tests) ----------------------------------------------

    def check_invariants(self, v: int, side: int = OUT, deep: bool = False) -> None:
        """Assert the layout invariants for one vertex; deep adds the
        hash/array coherence scan."""
        st = self._sides[side]
        mf = st.meta
        base = v * self._line_words
        deg = mf.item(base)
        ew = self._ew
        view, tbl = st.views[v], st.tables[v]
        assert 0 <= deg <= self.num_vertices, f"v{v}: absurd degree {deg}"
        if deg <= self.th0:
            assert view is None and tbl is None, f"v{v}: Type1 with external storage"
            return
        cap = mf.item(base + _CAP)
        assert view is not None, f"v{v}: missing edge array"
        assert cap >= self._min_cap and cap & (cap - 1) == 0, f"v{v}: bad cap {cap}"
        assert deg <= cap, f"v{v}: deg {deg} > cap {cap}"
        assert len(view) == cap * ew, f"v{v}: view length {len(view)} != cap {cap}"
        if deep:
            nbrs = view[:deg * ew:ew].tolist()
            assert len(set(nbrs)) == deg, f"v{v}: duplicate stored edges"
        if deg <= self.th1:
            assert tbl is None, f"v{v}: Type2 with hash table"
            return
        assert tbl is not None, f"v{v}: Type3 missing hash table"
        assert tbl.capacity_slots == 2 * cap, \
            f"v{v}: hash capacity {tbl.capacity_slots} != 2*cap {2 * cap}"
        assert tbl.live_count == deg, f"v{v}: hash live {tbl.live_count} != deg {deg}"
        assert mf.item(base + _HASH) == tbl._chunk
        assert mf.item(base + _HASHCAP) == tbl.capacity_slots
        if deep:
            for j in range(deg):
                key = view.item(j * ew)
                assert tbl.find(key) == j, f"v{v}: hash points {key} -> {tbl.find(key)} != {j}"
