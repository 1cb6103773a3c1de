"""Watch a vertex move through the three storage kinds as its degree grows.

A fresh vertex keeps its first few neighbors inline in the same cache line
as its metadata (Type1). Past the inline capacity the neighbors move to a
pooled array (Type2) that doubles as it fills. Past th1 the vertex gains a
hash index over that array (Type3) so membership checks stop scanning.
Deleting edges walks the same ladder back down.
"""

from graphtango import TYPE1, TYPE2, TYPE3, Config, TangoStore

KIND_NAMES = {TYPE1: "Type1/inline", TYPE2: "Type2/array", TYPE3: "Type3/array+hash"}


def main():
    cfg = Config()  # unweighted, undirected, th1=32
    store = TangoStore(cfg, num_vertices=64)
    v = 0

    print(f"th0 (inline capacity) = {cfg.th0}, th1 (hash threshold) = {cfg.th1}")
    print()

    last_kind = store.vertex_kind(v)
    print(f"degree  0: {KIND_NAMES[last_kind]}")
    for nbr in range(1, 51):
        store.insert_edge(v, nbr)
        kind = store.vertex_kind(v)
        if kind != last_kind:
            print(f"degree {store.degree(v):2d}: {KIND_NAMES[last_kind]} -> "
                  f"{KIND_NAMES[kind]}")
            last_kind = kind

    print()
    print(f"final degree {store.degree(v)}, "
          f"copies paid so far: {store.resize_copies} edge slots")
    print(f"neighbors start: {store.neighbors(v)[:8]} ...")
    print(f"store memory: {store.memory_bytes()} bytes")

    # now drain it and watch the downgrades fire
    print()
    for nbr in range(50, 0, -1):
        store.delete_edge(v, nbr)
        kind = store.vertex_kind(v)
        if kind != last_kind:
            print(f"degree {store.degree(v):2d}: {KIND_NAMES[last_kind]} -> "
                  f"{KIND_NAMES[kind]}")
            last_kind = kind
    print(f"degree {store.degree(v)}, back to {KIND_NAMES[store.vertex_kind(v)]}")

    store.check_invariants(v, deep=True)
    print("invariants hold")


if __name__ == "__main__":
    main()
