"""Run the batch benchmark on a small synthetic graph and read the report.

Same pipeline as the graphtango-bench CLI: generate, shuffle, insert batch
by batch with analytics after every batch, then delete batch by batch.
Equivalent command line:

    graphtango-bench --synthetic short --vertices 2000 --edges 20000 \
        --format tango --algorithms bfs,pr --batch-size 5000 --threads 2 \
        --report /tmp/tango.csv
"""

import tempfile

from graphtango.bench.data import gen_synthetic, shuffle
from graphtango.bench.harness import emit_report, parse_report, run_experiment


def main():
    results = {}
    # the hybrid layout pays off where hubs are large enough that a scan of
    # the adjacency array costs more than a hash probe, so the heavy-tailed
    # run needs enough vertices to grow real hubs
    for kind, v, e, batch in (("short", 2_000, 20_000, 5_000),
                              ("heavy", 20_000, 200_000, 20_000)):
        el = shuffle(gen_synthetic(kind, v, e, 42), 42)
        print(f"{kind}: {v:,} vertices, {e:,} edges, "
              f"batches of {batch:,}")
        print(f"  {'format':<16} {'insert e/s':>12} {'delete e/s':>12} "
              f"{'analytics e/s':>14} {'bytes/edge':>11}")
        for fmt in ("tango", "adlist-shared", "adlist-chunked"):
            reports, summary = run_experiment(
                el, fmt, algorithms=("bfs", "pr"), batch_size=batch,
                num_threads=2)
            results[(kind, fmt)] = (reports, summary)
            print(f"  {fmt:<16} {summary.insert_geomean_eps:>12,.0f} "
                  f"{summary.delete_geomean_eps:>12,.0f} "
                  f"{summary.analytics_geomean_eps:>14,.0f} "
                  f"{summary.mean_bytes_per_edge:>11.2f}")
        print()

    # per-batch rows round-trip through the csv report
    reports, summary = results[("heavy", "tango")]
    with tempfile.NamedTemporaryFile(suffix=".csv", delete=False) as f:
        path = f.name
    emit_report(reports, summary, path)
    comments, header, rows = parse_report(path)
    print(f"\nreport at {path}: {len(rows)} rows, "
          f"{len(comments)} header comments")
    r = rows[0]
    print(f"first row: batch={r['batch']} phase={r['phase']} "
          f"edges={r['edges']} edges_per_s={r['edges_per_s']:.0f} "
          f"bytes_per_edge={r['bytes_per_edge']:.2f}")


if __name__ == "__main__":
    main()
