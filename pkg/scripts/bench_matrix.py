#!/usr/bin/env python3
"""Throughput sweep over method, sampling counts, wind speed and resolution.

Prints the FPS table and checks the expected orderings (hybrid beats a
full-domain wave-particle-only run; fewer samples, higher wind, and lower
patch resolution are all faster).
"""
import argparse
import sys

from hybridsea.config import SimConfig
from hybridsea.harness import bench_table, benchmark, trend_matrix


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--warmup", type=int, default=60)
    ap.add_argument("--measure", type=int, default=40)
    ap.add_argument("--out", default=None, help="also write the CSV here")
    args = ap.parse_args()

    base = SimConfig(dt=0.1, write_frames=False)
    rows = benchmark(trend_matrix(base), warmup=args.warmup,
                     measure=args.measure,
                     progress=lambda r: print(
                         f"  {r.label:14s} {r.fps:8.2f} fps  "
                         f"({r.median_frame_ms:8.1f} ms, {r.particles:7d} particles)",
                         flush=True))
    print()
    print(bench_table(rows))

    fps = {r.label: r.fps for r in rows}
    orderings = [
        ("hybrid-16x16", ">", "wp-only"),
        ("hybrid-8x8", ">", "hybrid-12x12"),
        ("hybrid-12x12", ">", "hybrid-16x16"),
        ("u10-15", ">", "u10-10"),
        ("u10-10", ">", "u10-3"),
        ("res-256", ">=", "hybrid-16x16"),
        ("hybrid-16x16", ">=", "res-1024"),
    ]
    bad = 0
    for a, op, b in orderings:
        ok = fps[a] > fps[b] if op == ">" else fps[a] >= fps[b]
        print(f"{a} {op} {b}: {'ok' if ok else 'VIOLATED'}")
        bad += not ok
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(bench_table(rows))
        print(f"wrote {args.out}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
