"""Command-line entry points: run, bench, serve."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import SimConfig, load_config
from .errors import ConfigError


def _apply_overrides(cfg: SimConfig, args) -> SimConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.frames is not None:
        updates["frames"] = args.frames
    if args.output_dir is not None:
        updates["output_dir"] = args.output_dir
    if args.mode is not None:
        updates["mode"] = args.mode
    return replace(cfg, **updates).validate() if updates else cfg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override sim.seed")
    p.add_argument("--frames", type=int, default=None, help="override sim.frames")
    p.add_argument("--output-dir", default=None, help="override output.dir")
    p.add_argument("--mode", choices=("hybrid", "fft-only", "wp-only"),
                   default=None, help="override sim.mode")


def cmd_run(args) -> int:
    from .harness import run

    cfg = _apply_overrides(load_config(args.config), args)
    done = {"n": 0}

    def progress(s):
        done["n"] += 1
        if done["n"] % 50 == 0:
            print(f"frame {s.frame}: {int(s.particle_counts.sum())} particles, "
                  f"{s.total_ms:.1f} ms", flush=True)

    stats = run(cfg, progress=progress)
    print(f"wrote {len(stats)} frames of stats to {cfg.output_dir}/stats.csv")
    return 0


def cmd_bench(args) -> int:
    from .harness import bench_table, benchmark, trend_matrix

    base = load_config(args.base) if args.base else SimConfig(
        dt=0.1, write_frames=False)
    base = _apply_overrides(base, args)

    if args.matrix:
        cells = []
        with open(args.matrix, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                label, _, rest = line.partition(":")
                if not rest.strip():
                    raise ConfigError(
                        f"{args.matrix}:{lineno}: expected 'label: key=value ...'")
                from .config import parse_config
                overrides = "\n".join(part for part in rest.strip().split())
                cells.append((label.strip(), parse_config(overrides, base)))
    else:
        cells = trend_matrix(base)

    rows = benchmark(cells, warmup=args.warmup, measure=args.measure,
                     progress=lambda r: print(
                         f"{r.label}: {r.fps:.2f} fps "
                         f"({r.median_frame_ms:.1f} ms, {r.particles} particles)",
                         flush=True))
    table = bench_table(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(table)
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    return 0


def cmd_serve(args) -> int:
    from .stream import serve

    cfg = _apply_overrides(load_config(args.config), args)
    serve(cfg, port=args.port,
          max_frames=cfg.frames if cfg.frames > 0 else None)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hybridsea",
        description="Hybrid spectral-FFT / wave-particle ocean simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a headless scenario")
    p_run.add_argument("config", help="path to a key=value config file")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_bench = sub.add_parser("bench", help="throughput sweep")
    p_bench.add_argument("matrix", nargs="?", default=None,
                         help="matrix file: one 'label: key=value ...' per line "
                              "(default: the built-in trend matrix)")
    p_bench.add_argument("--base", default=None, help="base config file")
    p_bench.add_argument("--warmup", type=int, default=None)
    p_bench.add_argument("--measure", type=int, default=None)
    p_bench.add_argument("--out", default=None, help="write the CSV here")
    _add_common(p_bench)
    p_bench.set_defaults(fn=cmd_bench)

    p_serve = sub.add_parser("serve", help="run with the viewer stream attached")
    p_serve.add_argument("config", help="path to a key=value config file")
    p_serve.add_argument("--port", type=int, default=None, help="override stream.port")
    _add_common(p_serve)
    p_serve.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
