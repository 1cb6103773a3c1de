"""Open-addressing hash table whose probe sequence is confined to cache lines.

Slots are grouped into lines of N (8 for 64-byte lines); the probe sequence
visits all N slots of a line before moving to another line, so a lookup that
terminates within N probes touches exactly one line of the key array. Probe
i for a key lands at

    slot(key, i) = h1(key, i // N) * N + h2(key, i mod N)
    h1(key, x)   = (h3(key) + x * h4(key)) mod M      line selector
    h2(key, x)   = (key + x) mod N                    offset inside the line
    h3(key)      = (key * A mod 2^w) >> (w - m)       Fibonacci hash, m = log2(M)
    h4(key)      = ((key * A mod 2^w) >> (w - 2m)) | 1

h4 is forced odd, so for a power-of-two line count M the line walk is a full
cycle and the whole sequence is a permutation of all M*N slots. Everything
is shifts, masks, and two multiplies; no division anywhere.

Keys and values live in two parallel uint64 arrays packed into one pool
chunk (a 64-byte line holds 8 keys; the matching values line is its twin in
the second half of the chunk). Key 2^64-1 marks an empty slot, 2^64-2 a
tombstone. The caller keeps load (live keys / slots) at or below 0.5; the
table itself rebuilds in place when live + tombstone slots pass that bound.
"""

from __future__ import annotations

import numpy as np

from .core import HASH_CONSTANT_64, CapacityError
from .mempool import MemoryPool

EMPTY_KEY = 2**64 - 1
TOMBSTONE_KEY = 2**64 - 2


def _check_pow2(name: str, value: int) -> int:
    if value < 1 or value & (value - 1):
        raise ValueError(f"{name} must be a power of two, got {value}")
    return value.bit_length() - 1


def hash_probe(key: int, i: int, m_lines: int, n_slots: int,
               multiplier: int = HASH_CONSTANT_64, key_bits: int = 64) -> int:
    """Slot index of probe i for key, in a table of m_lines lines of n_slots.

    Pure function of its arguments; the table's probe loop computes the same
    values incrementally. Requires 2 * log2(m_lines) <= key_bits.
    """
    log_m = _check_pow2("m_lines", m_lines)
    log_n = _check_pow2("n_slots", n_slots)
    if 2 * log_m > key_bits:
        raise ValueError(f"2*log2(m_lines) = {2 * log_m} exceeds key width {key_bits}")
    y = (key * multiplier) & ((1 << key_bits) - 1)
    h3 = y >> (key_bits - log_m)
    h4 = (y >> (key_bits - (log_m << 1))) | 1
    h1 = (h3 + (i >> log_n) * h4) & (m_lines - 1)
    h2 = (key + i) & (n_slots - 1)
    return (h1 << log_n) | h2


def probe_sequence(key: int, m_lines: int, n_slots: int,
                   multiplier: int = HASH_CONSTANT_64, key_bits: int = 64) -> np.ndarray:
    """All m_lines * n_slots probe slots for key, as one uint64 array.

    Same math as hash_probe; h3/h4 are computed once in exact integer
    arithmetic, the i-dependent part is vectorized.
    """
    log_m = _check_pow2("m_lines", m_lines)
    log_n = _check_pow2("n_slots", n_slots)
    if 2 * log_m > key_bits:
        raise ValueError(f"2*log2(m_lines) = {2 * log_m} exceeds key width {key_bits}")
    y = (key * multiplier) & ((1 << key_bits) - 1)
    h3 = y >> (key_bits - log_m)
    h4 = (y >> (key_bits - (log_m << 1))) | 1
    i = np.arange(m_lines * n_slots, dtype=np.uint64)
    h1 = (np.uint64(h3) + (i >> np.uint64(log_n)) * np.uint64(h4)) & np.uint64(m_lines - 1)
    h2 = (np.uint64(key & (2**64 - 1)) + i) & np.uint64(n_slots - 1)
    return (h1 << np.uint64(log_n)) | h2


class ProbeStats:
    """Histograms of probe distances (1-based slot counts) per operation kind."""

    __slots__ = ("insert", "find")

    def __init__(self):
        self.insert: dict[int, int] = {}
        self.find: dict[int, int] = {}

    def snapshot(self) -> dict:
        return {"insert": dict(self.insert), "find": dict(self.find)}

    def reset(self) -> None:
        self.insert.clear()
        self.find.clear()

    @staticmethod
    def _mean(hist: dict) -> float:
        total = sum(hist.values())
        return sum(d * c for d, c in hist.items()) / total if total else float("nan")

    def mean_insert_distance(self) -> float:
        return self._mean(self.insert)

    def mean_find_distance(self) -> float:
        return self._mean(self.find)

    def fraction_within(self, kind: str, dist: int) -> float:
        hist = getattr(self, kind)
        total = sum(hist.values())
        if not total:
            return float("nan")
        return sum(c for d, c in hist.items() if d <= dist) / total


class CfhTable:
    """Line-confined double-hashing table mapping uint64 keys to uint64 values.

    The slot arrays live in a single pool chunk: keys in the first half,
    values in the second, so key probing never drags value lines through the
    cache. capacity_slots must be a power of two and a multiple of
    slots_per_line; the caller's load contract is live_count <= capacity/2.
    """

    __slots__ = ("pool", "capacity_slots", "m_lines", "n_slots", "multiplier",
                 "key_bits", "live_count", "tombstone_count", "stats", "tracker",
                 "last_probe_distance", "_own_pool", "_log_n", "_kmask", "_chunk",
                 "_keys", "_vals", "_shift3", "_shift4")

    def __init__(self, capacity_slots: int, *, pool: MemoryPool | None = None,
                 slots_per_line: int = 8, multiplier: int = HASH_CONSTANT_64,
                 key_bits: int = 64, stats: ProbeStats | None = None):
        _check_pow2("capacity_slots", capacity_slots)
        self._log_n = _check_pow2("slots_per_line", slots_per_line)
        if capacity_slots < slots_per_line:
            raise ValueError("capacity_slots must hold at least one line")
        self._own_pool = pool is None
        self.pool = MemoryPool() if pool is None else pool
        self.n_slots = slots_per_line
        self.multiplier = multiplier
        self.key_bits = key_bits
        self.stats = ProbeStats() if stats is None else stats
        self.tracker = None
        self.last_probe_distance = 0
        self._kmask = (1 << key_bits) - 1
        self.live_count = 0
        self.tombstone_count = 0
        self._set_capacity(capacity_slots)

    def _set_capacity(self, capacity_slots: int) -> None:
        m_lines = capacity_slots >> self._log_n
        log_m = _check_pow2("line count", m_lines)
        if 2 * log_m > self.key_bits:
            raise ValueError(f"capacity {capacity_slots} needs 2*log2(M) <= {self.key_bits}")
        self.capacity_slots = capacity_slots
        self.m_lines = m_lines
        self._shift3 = self.key_bits - log_m
        self._shift4 = self.key_bits - (log_m << 1)
        self._chunk = self.pool.allocate(capacity_slots * 16)
        view = self.pool.u64_view(self._chunk, capacity_slots * 2)
        self._keys = view[:capacity_slots]
        self._vals = view[capacity_slots:]
        self._keys.fill(EMPTY_KEY)

    def _h34(self, key: int) -> tuple[int, int]:
        y = (key * self.multiplier) & self._kmask
        return y >> self._shift3, (y >> self._shift4) | 1

    # -- operations ---------------------------------------------------------

    def find(self, key: int) -> int | None:
        """Value stored for key, or None. Skips tombstones, stops at empty."""
        h3, h4 = self._h34(key)
        keys_item = self._keys.item
        n = self.n_slots
        mask_n = n - 1
        mask_m = self.m_lines - 1
        log_n = self._log_n
        tr = self.tracker
        dist = 0
        for line in range(self.m_lines):
            base = ((h3 + line * h4) & mask_m) << log_n
            if tr is not None:
                tr.add(("hash", base >> log_n))
            for x in range(n):
                slot = base | ((key + x) & mask_n)
                dist += 1
                k = keys_item(slot)
                if k == key:
                    self.last_probe_distance = dist
                    st = self.stats.find
                    st[dist] = st.get(dist, 0) + 1
                    return self._vals.item(slot)
                if k == EMPTY_KEY:
                    self.last_probe_distance = dist
                    st = self.stats.find
                    st[dist] = st.get(dist, 0) + 1
                    return None
        self.last_probe_distance = dist
        st = self.stats.find
        st[dist] = st.get(dist, 0) + 1
        return None

    def insert(self, key: int, value: int) -> bool:
        """Insert key -> value (True) or overwrite an existing key (False).

        A new key lands in the first tombstone seen on its probe path if the
        path ends at an empty slot, per standard open-addressing reuse.
        Raises CapacityError if a new key would push live count past
        capacity/2.
        """
        h3, h4 = self._h34(key)
        keys_item = self._keys.item
        n = self.n_slots
        mask_n = n - 1
        mask_m = self.m_lines - 1
        log_n = self._log_n
        tr = self.tracker
        first_tomb = -1
        dist = 0
        for line in range(self.m_lines):
            base = ((h3 + line * h4) & mask_m) << log_n
            if tr is not None:
                tr.add(("hash", base >> log_n))
            for x in range(n):
                slot = base | ((key + x) & mask_n)
                dist += 1
                k = keys_item(slot)
                if k == key:
                    self._vals[slot] = value
                    self._record_insert(dist)
                    return False
                if k == TOMBSTONE_KEY:
                    if first_tomb < 0:
                        first_tomb = slot
                elif k == EMPTY_KEY:
                    self._place_new(key, value, first_tomb if first_tomb >= 0 else slot,
                                    reused_tomb=first_tomb >= 0)
                    self._record_insert(dist)
                    return True
        # Probed every slot: the permutation saw only live keys and tombstones.
        if first_tomb >= 0:
            self._place_new(key, value, first_tomb, reused_tomb=True)
            self._record_insert(dist)
            return True
        raise CapacityError("hash table has no free slot")

    def _place_new(self, key: int, value: int, slot: int, reused_tomb: bool) -> None:
        if self.live_count + 1 > self.capacity_slots >> 1:
            raise CapacityError(
                f"insert would push live count past capacity/2 "
                f"({self.live_count + 1} > {self.capacity_slots >> 1})"
            )
        self._keys[slot] = key
        self._vals[slot] = value
        self.live_count += 1
        if reused_tomb:
            self.tombstone_count -= 1
        elif self.live_count + self.tombstone_count > self.capacity_slots >> 1:
            # Tombstone pressure: every probe path must keep an empty slot
            # reachable, so purge in place once half the slots are non-empty.
            self.rebuild(self.capacity_slots)

    def _record_insert(self, dist: int) -> None:
        self.last_probe_distance = dist
        st = self.stats.insert
        st[dist] = st.get(dist, 0) + 1

    def remove(self, key: int) -> bool:
        """Mark key's slot as a tombstone. Probe distance logs under 'find'."""
        h3, h4 = self._h34(key)
        keys_item = self._keys.item
        n = self.n_slots
        mask_n = n - 1
        mask_m = self.m_lines - 1
        log_n = self._log_n
        tr = self.tracker
        dist = 0
        for line in range(self.m_lines):
            base = ((h3 + line * h4) & mask_m) << log_n
            if tr is not None:
                tr.add(("hash", base >> log_n))
            for x in range(n):
                slot = base | ((key + x) & mask_n)
                dist += 1
                k = keys_item(slot)
                if k == key:
                    self._keys[slot] = TOMBSTONE_KEY
                    self.live_count -= 1
                    self.tombstone_count += 1
                    self.last_probe_distance = dist
                    st = self.stats.find
                    st[dist] = st.get(dist, 0) + 1
                    return True
                if k == EMPTY_KEY:
                    self.last_probe_distance = dist
                    st = self.stats.find
                    st[dist] = st.get(dist, 0) + 1
                    return False
        self.last_probe_distance = dist
        return False

    def rebuild(self, new_capacity_slots: int | None = None) -> None:
        """Re-place all live pairs, dropping tombstones.

        With the current capacity (the default) the slot chunk is reused in
        place, so the chunk handle stays valid; a different capacity
        allocates a new chunk and frees the old one. new_capacity_slots must
        be a power of two >= 2 * live_count and at least one line.
        """
        if new_capacity_slots is None:
            new_capacity_slots = self.capacity_slots
        if new_capacity_slots < 2 * self.live_count:
            raise CapacityError(
                f"rebuild to {new_capacity_slots} slots would exceed load 0.5 "
                f"with {self.live_count} live keys"
            )
        mask = (self._keys != np.uint64(EMPTY_KEY)) & (self._keys != np.uint64(TOMBSTONE_KEY))
        live_keys = self._keys[mask].tolist()
        live_vals = self._vals[mask].tolist()
        if new_capacity_slots == self.capacity_slots:
            self._keys.fill(EMPTY_KEY)
        else:
            old_chunk, old_cap = self._chunk, self.capacity_slots
            self._set_capacity(new_capacity_slots)
            self.pool.deallocate(old_chunk, old_cap * 16)
        self.tombstone_count = 0
        for key, value in zip(live_keys, live_vals):
            self._place_raw(key, value)

    def _place_raw(self, key: int, value: int) -> None:
        """Drop key -> value into its first empty probe slot, no bookkeeping.

        Assumes key is absent; skips over occupied slots (and any tombstones)
        and records nothing in the probe statistics.
        """
        keys_arr, vals_arr = self._keys, self._vals
        n = self.n_slots
        mask_n = n - 1
        mask_m = self.m_lines - 1
        log_n = self._log_n
        keys_item = keys_arr.item
        h3, h4 = self._h34(key)
        for line in range(self.m_lines):
            base = ((h3 + line * h4) & mask_m) << log_n
            for x in range(n):
                slot = base | ((key + x) & mask_n)
                if keys_item(slot) == EMPTY_KEY:
                    keys_arr[slot] = key
                    vals_arr[slot] = value
                    return
        raise CapacityError("no empty slot on the probe path")

    def bulk_load(self, pairs) -> None:
        """Load distinct, absent (key, value) pairs without probe statistics.

        Meant for building a table from a known-deduplicated edge array;
        enforces the load bound but skips per-key duplicate search.
        """
        half = self.capacity_slots >> 1
        for key, value in pairs:
            if self.live_count + 1 > half:
                raise CapacityError(
                    f"bulk load would push live count past capacity/2 "
                    f"({self.live_count + 1} > {half})"
                )
            self._place_raw(key, value)
            self.live_count += 1

    def release(self) -> None:
        """Free the slot chunk. The table is unusable afterwards."""
        if self._chunk:
            self.pool.deallocate(self._chunk, self.capacity_slots * 16)
            self._chunk = 0
            self._keys = self._vals = None
            if self._own_pool:
                self.pool.close()

    # -- introspection ------------------------------------------------------

    def items(self) -> list[tuple[int, int]]:
        """Live (key, value) pairs in slot order."""
        mask = (self._keys != np.uint64(EMPTY_KEY)) & (self._keys != np.uint64(TOMBSTONE_KEY))
        return list(zip(self._keys[mask].tolist(), self._vals[mask].tolist()))

    @property
    def chunk_bytes(self) -> int:
        return self.capacity_slots * 16

    def key_array_pointer(self) -> int:
        """Machine address of the key array, for alignment checks."""
        return self.pool.real_pointer(self._chunk)

    def probe_stats(self) -> dict:
        """Plain-number snapshot of the probe-distance histograms."""
        return self.stats.snapshot()
