"""Warm-started kernels after a batch of new edges.

After each insert batch the kernels can start from the previous answer:
bfs/cc reseed min-relaxation from the endpoints of the new edges, pagerank
resumes iterating from the old ranks. The values come out identical to a
cold run; only the round/iteration count shrinks. Deletions invalidate the
warm start for bfs/cc (a removed edge can lengthen paths or split
components), so those go back to a full run.
"""

import numpy as np

from graphtango import Config, TangoStore, build_snapshot, run_bfs, run_cc, run_pr
from graphtango.bench.data import gen_synthetic, shuffle


def main():
    el = shuffle(gen_synthetic("short", 2_000, 16_000, 3), 3)
    # keep first occurrence of each undirected pair: warm starts expect
    # genuinely new edges, not repeats
    key = (np.minimum(el.srcs, el.dsts) * el.num_vertices
           + np.maximum(el.srcs, el.dsts))
    keep = np.sort(np.unique(key, return_index=True)[1])
    srcs, dsts = el.srcs[keep], el.dsts[keep]
    half = len(keep) // 2

    store = TangoStore(Config(), el.num_vertices)
    for s, d in zip(srcs[:half].tolist(), dsts[:half].tolist()):
        store.insert_edge(s, d)
    snap = build_snapshot(store)
    bfs0 = run_bfs(snap, 0)
    cc0 = run_cc(snap)
    pr0 = run_pr(snap)
    print(f"batch 1: {half} edges, cold runs: bfs {bfs0.rounds} rounds, "
          f"cc {cc0.rounds} rounds, pagerank {pr0.rounds} iterations")

    for s, d in zip(srcs[half:].tolist(), dsts[half:].tolist()):
        store.insert_edge(s, d)
    snap = build_snapshot(store)
    hint = (srcs[half:], dsts[half:])

    for name, warm, cold in (
        ("bfs", run_bfs(snap, 0, prev=bfs0.values, new_edges=hint), run_bfs(snap, 0)),
        ("cc", run_cc(snap, prev=cc0.values, new_edges=hint), run_cc(snap)),
        ("pagerank", run_pr(snap, prev=pr0.values), run_pr(snap)),
    ):
        if name == "pagerank":
            diff = float(np.max(np.abs(warm.values - cold.values)))
            same = f"max diff {diff:.1e}"
        else:
            same = "identical" if np.array_equal(warm.values, cold.values) else "DIFFER"
        print(f"batch 2 {name:8s}: warm {warm.rounds:3d} rounds vs "
              f"cold {cold.rounds:3d}, values {same}")


if __name__ == "__main__":
    main()
