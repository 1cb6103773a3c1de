"""Reference adjacency-list formats the hybrid store is measured against.

Both keep one growable edge array per vertex (doubling from 4 slots, never
shrinking, which is the textbook dynamic-array adjacency list) and differ
only in how concurrent updates are coordinated:

* AdListShared: one structure shared by every worker; a per-vertex lock
  serializes updates that target the same vertex.
* AdListChunked: no locks at all; the harness routes each update to the
  worker that owns the vertex's partition, same as the hybrid store, so two
  workers never touch one vertex.

Lookups are linear scans whatever the degree; that, plus the never-shrinking
capacity, is exactly what the hybrid layout is trying to beat.
"""

from __future__ import annotations

import threading

import numpy as np

from .core import SCAN_LIMIT, Config, VertexRangeError

OUT = 0
IN = 1

_INITIAL_CAP = 4

_EMPTY = np.empty(0, dtype=np.uint64)
_EMPTY.flags.writeable = False


class _AdjSide:
    __slots__ = ("arrs", "degs")

    def __init__(self, num_vertices: int):
        self.arrs: list = [None] * num_vertices
        self.degs: list = [0] * num_vertices


class AdListBase:
    """Per-vertex dynamic edge arrays; subclasses add their locking story."""

    def __init__(self, config: Config, num_vertices: int, num_threads: int = 1):
        self.config = config
        self.num_vertices = num_vertices
        self.num_threads = num_threads
        self.weighted = config.weighted
        self.directed = config.directed
        self._ew = 2 if config.weighted else 1
        self._sides = [_AdjSide(num_vertices)]
        if config.directed:
            self._sides.append(_AdjSide(num_vertices))
        self.vprop = np.zeros(num_vertices, dtype=np.uint64)

    # -- single-direction operations ---------------------------------------

    def insert_half(self, v: int, nbr: int, prop: int = 0, side: int = OUT) -> bool:
        if v < 0 or v >= self.num_vertices or nbr < 0 or nbr >= self.num_vertices:
            raise VertexRangeError(f"edge ({v}, {nbr}) outside [0, {self.num_vertices})")
        st = self._sides[side]
        deg = st.degs[v]
        arr = st.arrs[v]
        ew = self._ew
        if deg:
            if ew == 1:
                if deg <= SCAN_LIMIT:
                    if nbr in arr[:deg].tolist():
                        return False
                elif nbr in arr[:deg]:
                    return False
            else:
                if deg <= SCAN_LIMIT:
                    dsts = arr[:2 * deg:2].tolist()
                    if nbr in dsts:
                        arr[2 * dsts.index(nbr) + 1] = prop
                        return False
                else:
                    hit = np.nonzero(arr[:2 * deg:2] == nbr)[0]
                    if hit.size:
                        arr[2 * int(hit[0]) + 1] = prop
                        return False
        if arr is None:
            arr = np.empty(_INITIAL_CAP * ew, dtype=np.uint64)
            st.arrs[v] = arr
        elif deg * ew == len(arr):
            grown = np.empty(len(arr) * 2, dtype=np.uint64)
            grown[:deg * ew] = arr
            st.arrs[v] = arr = grown
        if ew == 1:
            arr[deg] = nbr
        else:
            arr[2 * deg] = nbr
            arr[2 * deg + 1] = prop
        st.degs[v] = deg + 1
        return True

    def delete_half(self, v: int, nbr: int, side: int = OUT) -> bool:
        if v < 0 or v >= self.num_vertices or nbr < 0 or nbr >= self.num_vertices:
            raise VertexRangeError(f"edge ({v}, {nbr}) outside [0, {self.num_vertices})")
        st = self._sides[side]
        deg = st.degs[v]
        if deg == 0:
            return False
        arr = st.arrs[v]
        ew = self._ew
        if deg <= SCAN_LIMIT:
            dsts = arr[:deg * ew:ew].tolist()
            if nbr not in dsts:
                return False
            j = dsts.index(nbr)
        else:
            hit = np.nonzero(arr[:deg * ew:ew] == nbr)[0]
            if not hit.size:
                return False
            j = int(hit[0])
        last = deg - 1
        if j != last:
            arr[j * ew] = arr.item(last * ew)
            if ew == 2:
                arr[j * ew + 1] = arr.item(last * ew + 1)
        st.degs[v] = last
        return True

    # -- logical-edge operations ---------------------------------------------

    def insert_edge(self, src: int, dst: int, prop: int | None = None) -> bool:
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
        deleted = self.delete_half(src, dst, OUT)
        if self.directed:
            self.delete_half(dst, src, IN)
        elif src != dst:
            self.delete_half(dst, src, OUT)
        return deleted

    # -- cursors and accounting ------------------------------------------------

    def degree(self, v: int, side: int = OUT) -> int:
        return self._sides[side].degs[v]

    def degree_array(self, side: int = OUT) -> np.ndarray:
        return np.asarray(self._sides[side].degs, dtype=np.uint64)

    def neighbors(self, v: int, side: int = OUT) -> np.ndarray:
        if v < 0 or v >= self.num_vertices:
            raise VertexRangeError(f"vertex {v} outside [0, {self.num_vertices})")
        st = self._sides[side]
        deg = st.degs[v]
        if deg == 0:
            return _EMPTY
        out = st.arrs[v][:deg * self._ew:self._ew]
        out.flags.writeable = False
        return out

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.neighbors(v, IN if self.directed else OUT)

    def neighbor_props(self, v: int, side: int = OUT) -> np.ndarray | None:
        if not self.weighted:
            return None
        st = self._sides[side]
        deg = st.degs[v]
        if deg == 0:
            return _EMPTY
        out = st.arrs[v][1:deg * 2:2]
        out.flags.writeable = False
        return out

    def has_edge(self, src: int, dst: int) -> bool:
        return bool(np.any(self.neighbors(src) == dst))

    def get_edge_prop(self, src: int, dst: int) -> int | None:
        nbrs = self.neighbors(src)
        hit = np.nonzero(nbrs == dst)[0]
        if not hit.size:
            return None
        return int(self.neighbor_props(src)[int(hit[0])]) if self.weighted else 0

    def stored_edges(self, side: int = OUT) -> int:
        return sum(self._sides[side].degs)

    def live_edges(self) -> float:
        total = self.stored_edges(OUT)
        return total / 2 if not self.directed else float(total)

    def _per_vertex_overhead(self) -> int:
        # array pointer + degree counter per side, modeled at 8 B each
        return 16 * len(self._sides)

    def memory_bytes(self) -> int:
        """Modeled native footprint: per-vertex fixed words + edge capacity.

        Capacity is summed over the live arrays at call time, so the figure
        is exact even with workers mutating in between.
        """
        cap_words = sum(len(a) for st in self._sides for a in st.arrs
                        if a is not None)
        return (self.num_vertices * self._per_vertex_overhead()
                + self.vprop.nbytes
                + cap_words * 8)

    def check_invariants(self, v: int, side: int = OUT, deep: bool = False) -> None:
        st = self._sides[side]
        deg = st.degs[v]
        arr = st.arrs[v]
        if arr is None:
            assert deg == 0, f"v{v}: degree {deg} with no array"
            return
        assert deg * self._ew <= len(arr), f"v{v}: deg {deg} over capacity"
        if deep:
            nbrs = arr[:deg * self._ew:self._ew].tolist()
            assert len(set(nbrs)) == deg, f"v{v}: duplicate stored edges"


class AdListChunked(AdListBase):
    """Lock-free variant relying on owner-thread routing for isolation."""


class AdListShared(AdListBase):
    """Shared variant: every update takes the target vertex's lock."""

    def __init__(self, config: Config, num_vertices: int, num_threads: int = 1):
        super().__init__(config, num_vertices, num_threads)
        self._locks = [threading.Lock() for _ in range(num_vertices)]

    def insert_half(self, v: int, nbr: int, prop: int = 0, side: int = OUT) -> bool:
        if v < 0 or v >= self.num_vertices:
            raise VertexRangeError(f"vertex {v} outside [0, {self.num_vertices})")
        with self._locks[v]:
            return super().insert_half(v, nbr, prop, side)

    def delete_half(self, v: int, nbr: int, side: int = OUT) -> bool:
        if v < 0 or v >= self.num_vertices:
            raise VertexRangeError(f"vertex {v} outside [0, {self.num_vertices})")
        with self._locks[v]:
            return super().delete_half(v, nbr, side)

    def _per_vertex_overhead(self) -> int:
        return super()._per_vertex_overhead() + 8  # one lock word per vertex
