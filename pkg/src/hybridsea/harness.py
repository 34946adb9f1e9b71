"""Frame pipeline, scenario execution, stats output and benchmarking.

Per-frame order: background synthesis, boundary injection, advection, body
interaction (buoyancy against the previous frame's surface, then emission),
patch synthesis, blending. Both branches read the one shared spectrum, and a
headless run is a pure function of (config, seed).

Outputs: raw little-endian float32 height grids (`frame_%06d.raw`) with a
one-line `.meta` sidecar, a deterministic `stats.csv`, and `timings.csv` for
the wall-clock stage times (kept out of stats.csv so that byte-identical
reruns hold).
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig
from .coupling import PatchSurface, SurfaceSampler, validate_patches
from .fft_background import FftState, HeightField, evolve_and_synthesize, init_fft
from .interaction import FloatingBody, box_body, buoyancy_step, emit_from_motion
from .particles import InjectionLedger, ParticleSet, PatchRegion, advect, inject
from .patch_synthesis import finish_field, plan_layers, synthesize
from .spectrum import BucketTable, DirectionalSpectrum, build_buckets, derive_params

STAGES = ("fft", "inject", "advect", "interact", "synth", "blend", "output")


@dataclass
class FrameStats:
    frame: int
    t: float
    stage_ms: dict[str, float]
    particle_counts: np.ndarray       # per bucket
    injected_energy: np.ndarray       # cumulative J per bucket
    despawned_energy: np.ndarray      # cumulative J per bucket
    patch_variance: float             # interior (full-weight region) variance
    fft_band_variance: float
    body_states: list[tuple[float, float, float, float]]   # x, y, z, yaw

    @property
    def total_ms(self) -> float:
        return sum(self.stage_ms.values())


@dataclass
class PatchState:
    region: PatchRegion
    resolution: int
    choppiness: float
    track_body: int
    pool: ParticleSet = field(default_factory=lambda: ParticleSet(1 << 12))
    ledger: InjectionLedger | None = None
    plan: object | None = None
    surface: PatchSurface | None = None

    @property
    def texel(self) -> float:
        return self.region.l1 / (self.resolution - 1)


def _snap(value: float, step: float) -> float:
    return round(value / step) * step


class Simulation:
    """Owns all per-run state; step() advances one frame."""

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.params = derive_params(config.u10, config.fetch, config.g)
        self.spectrum = DirectionalSpectrum(self.params, config.mean_direction)
        self.table: BucketTable = build_buckets(self.params, config.n_omega,
                                                config.n_theta)
        self.rng = np.random.default_rng(config.seed)
        self.frame = 0
        self.t = 0.0

        patch_cfgs = () if config.mode == "fft-only" else config.patches
        self.patches: list[PatchState] = []
        for pc in patch_cfgs:
            region = PatchRegion(pc.origin, pc.size[0], pc.size[1], pc.margin)
            ps = PatchState(region=region, resolution=pc.res,
                            choppiness=pc.choppiness, track_body=pc.track_body)
            ps.ledger = InjectionLedger(config.n_omega, rho=config.rho)
            ps.plan = plan_layers(self.table, ps.texel, pc.res,
                                  convention=config.amplitude_convention,
                                  trough_fraction=config.trough_fraction)
            self.patches.append(ps)
        validate_patches([p.region for p in self.patches])

        self.fft_state: FftState | None = None
        if config.mode != "wp-only":
            self.fft_state = init_fft(self.spectrum, config.fft_n,
                                      config.fft_domain, config.seed,
                                      choppiness=config.fft_choppiness)

        self.bodies: list[FloatingBody] = []
        for j, bc in enumerate(config.bodies):
            self.bodies.append(box_body(bc.position, bc.size, density=bc.density,
                                        body_id=j, yaw=bc.yaw,
                                        max_thrust=bc.max_thrust,
                                        max_yaw_torque=bc.max_yaw_torque))

        self.background: HeightField | None = None
        self.sampler = SurfaceSampler(None, [], config.normal_mode)
        self._stats: list[FrameStats] = []

    # -- pipeline stages ---------------------------------------------------

    def _retrack_patches(self) -> None:
        for ps in self.patches:
            if ps.track_body < 0 or ps.track_body >= len(self.bodies):
                continue
            body = self.bodies[ps.track_body]
            cx = _snap(body.position[0] - ps.region.l1 / 2.0, ps.texel)
            cy = _snap(body.position[1] - ps.region.l2 / 2.0, ps.texel)
            ps.region = PatchRegion((cx, cy), ps.region.l1, ps.region.l2,
                                    ps.region.margin)

    def owning_patch(self, body: FloatingBody) -> PatchState | None:
        for ps in self.patches:
            if ps.region.contains(body.position[:2]):
                return ps
        return None

    def step(self) -> FrameStats:
        cfg = self.config
        times: dict[str, float] = {}
        self.t = self.frame * cfg.dt

        tic = time.perf_counter()
        if self.fft_state is not None:
            self.background = evolve_and_synthesize(self.fft_state, self.t)
        times["fft"] = (time.perf_counter() - tic) * 1e3

        tic = time.perf_counter()
        for ps in self.patches:
            new = inject(ps.region, self.table, self.spectrum, ps.ledger,
                         cfg.dt, self.rng, t=self.t,
                         trough_fraction=cfg.trough_fraction)
            ps.pool.extend(new)
        times["inject"] = (time.perf_counter() - tic) * 1e3

        tic = time.perf_counter()
        for ps in self.patches:
            advect(ps.pool, self.table, cfg.dt, ps.region, ps.ledger, g=cfg.g)
        times["advect"] = (time.perf_counter() - tic) * 1e3

        tic = time.perf_counter()
        for body in self.bodies:
            buoyancy_step(body, self.sampler.sample, cfg.dt, cfg.rho, cfg.g)
            ps = self.owning_patch(body)
            if ps is not None:
                events, emitted = emit_from_motion(
                    body, ps.region, self.table, cfg.dt, cfg.rho, cfg.g,
                    trough_fraction=cfg.trough_fraction)
                ps.pool.extend(emitted)
                # book emissions like boundary injection so the per-bucket
                # energy ledger balances against despawns
                for ev in events:
                    ps.ledger.injected_energy[ev.bucket] += ev.energy
        self._retrack_patches()
        times["interact"] = (time.perf_counter() - tic) * 1e3

        tic = time.perf_counter()
        patch_var = 0.0
        for ps in self.patches:
            heights, _ = synthesize(ps.pool, ps.region, ps.resolution, ps.plan)
            fieldv = finish_field(heights, ps.region, choppiness=ps.choppiness)
            ps.surface = PatchSurface(ps.region, fieldv)
            inset = max(1, int(round(ps.region.margin / ps.texel)))
            inner = heights[inset:-inset, inset:-inset]
            patch_var += float(np.mean(inner**2)) if inner.size else 0.0
        if self.patches:
            patch_var /= len(self.patches)
        times["synth"] = (time.perf_counter() - tic) * 1e3

        tic = time.perf_counter()
        self.sampler = SurfaceSampler(self.background,
                                      [ps.surface for ps in self.patches],
                                      cfg.normal_mode)
        times["blend"] = (time.perf_counter() - tic) * 1e3
        times["output"] = 0.0

        fft_var = float(np.mean(self.background.height**2)) \
            if self.background is not None else 0.0
        counts = np.zeros(cfg.n_omega, dtype=np.int64)
        inj = np.zeros(cfg.n_omega)
        des = np.zeros(cfg.n_omega)
        for ps in self.patches:
            counts += ps.pool.counts_per_bucket(cfg.n_omega)
            inj += ps.ledger.injected_energy
            des += ps.ledger.despawned_energy

        stats = FrameStats(
            frame=self.frame, t=self.t, stage_ms=times,
            particle_counts=counts, injected_energy=inj, despawned_energy=des,
            patch_variance=patch_var, fft_band_variance=fft_var,
            body_states=[(float(b.position[0]), float(b.position[1]),
                          float(b.position[2]), float(b.yaw)) for b in self.bodies],
        )
        self._stats.append(stats)
        self.frame += 1
        return stats

    # -- global field sampling ----------------------------------------------

    def global_grid_points(self) -> np.ndarray:
        n = self.config.fft_n
        spacing = self.config.fft_domain / n
        xs = np.arange(n) * spacing
        return np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)

    def stitched_heights(self) -> np.ndarray:
        """Global height grid: background with patch regions composited in."""
        n = self.config.fft_n
        spacing = self.config.fft_domain / n
        if self.background is not None:
            grid = self.background.height.copy()
        else:
            grid = np.zeros((n, n))
        for ps in self.patches:
            if ps.surface is None:
                continue
            lo = np.floor(ps.region.min_corner / spacing).astype(int)
            hi = np.ceil(ps.region.max_corner / spacing).astype(int) + 1
            lo = np.clip(lo, 0, n)
            hi = np.clip(hi, 0, n)
            xs = np.arange(lo[0], hi[0]) * spacing
            ys = np.arange(lo[1], hi[1]) * spacing
            if len(xs) == 0 or len(ys) == 0:
                continue
            pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
            h, _ = self.sampler.sample(pts.reshape(-1, 2))
            grid[lo[0]:hi[0], lo[1]:hi[1]] = h.reshape(len(xs), len(ys))
        return grid


# ---------------------------------------------------------------------------
# headless run with file outputs
# ---------------------------------------------------------------------------

def _format_float(x: float) -> str:
    return repr(float(x))


def stats_header(cfg: SimConfig) -> str:
    cols = ["frame", "t", "particles_total"]
    cols += [f"particles_b{i:02d}" for i in range(cfg.n_omega)]
    cols += [f"injected_J_b{i:02d}" for i in range(cfg.n_omega)]
    cols += [f"despawned_J_b{i:02d}" for i in range(cfg.n_omega)]
    cols += ["patch_variance", "fft_band_variance"]
    for j in range(len(cfg.bodies)):
        cols += [f"body{j}_x", f"body{j}_y", f"body{j}_z", f"body{j}_yaw"]
    return ",".join(cols)


def stats_row(cfg: SimConfig, s: FrameStats) -> str:
    parts = [str(s.frame), _format_float(s.t), str(int(s.particle_counts.sum()))]
    parts += [str(int(c)) for c in s.particle_counts]
    parts += [_format_float(x) for x in s.injected_energy]
    parts += [_format_float(x) for x in s.despawned_energy]
    parts += [_format_float(s.patch_variance), _format_float(s.fft_band_variance)]
    for b in s.body_states:
        parts += [_format_float(v) for v in b]
    return ",".join(parts)


def run(config: SimConfig, output_dir: str | None = None,
        progress=None) -> list[FrameStats]:
    """Execute a headless scenario, writing frames and stats to output_dir."""
    from .config import dump_config

    cfg = config.validate()
    out_dir = output_dir if output_dir is not None else cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.echo"), "w", encoding="utf-8") as fh:
        fh.write(dump_config(cfg))

    sim = Simulation(cfg)
    stats_path = os.path.join(out_dir, "stats.csv")
    timings_path = os.path.join(out_dir, "timings.csv")
    with open(stats_path, "w", encoding="utf-8") as sfh, \
            open(timings_path, "w", encoding="utf-8") as tfh:
        sfh.write(stats_header(cfg) + "\n")
        tfh.write("frame," + ",".join(f"{st}_ms" for st in STAGES) + ",total_ms\n")
        for k in range(cfg.frames):
            s = sim.step()
            if cfg.write_frames and k % cfg.output_stride == 0:
                tic = time.perf_counter()
                grid = sim.stitched_heights()
                path = os.path.join(out_dir, f"frame_{k:06d}.raw")
                grid.astype("<f4").tofile(path)
                n = cfg.fft_n
                spacing = cfg.fft_domain / n
                with open(path[:-4] + ".meta", "w", encoding="utf-8") as mfh:
                    mfh.write(f"res={n}x{n} spacing={spacing!r} origin=0.0,0.0 "
                              f"t={s.t!r}\n")
                s.stage_ms["output"] = (time.perf_counter() - tic) * 1e3
            sfh.write(stats_row(cfg, s) + "\n")
            tfh.write(",".join([str(s.frame)]
                               + [f"{s.stage_ms.get(st, 0.0):.3f}" for st in STAGES]
                               + [f"{s.total_ms:.3f}"]) + "\n")
            if progress is not None:
                progress(s)
    return sim._stats


# ---------------------------------------------------------------------------
# benchmark mode
# ---------------------------------------------------------------------------

@dataclass
class BenchRow:
    label: str
    n_omega: int
    n_theta: int
    u10: float
    res: int
    mode: str
    fps: float
    median_frame_ms: float
    particles: int        # resident particles at end of measurement
    particle_rate: float  # particles advected per second of wall time


def wp_only_config(base: SimConfig) -> SimConfig:
    """Single patch covering the whole domain at the same texel density."""
    from dataclasses import replace
    from .config import PatchConfig
    density_res = base.patches[0].res if base.patches else 512
    patch_size = base.patches[0].size[0] if base.patches else 100.0
    scale = base.fft_domain / patch_size
    big = PatchConfig(origin=(0.0, 0.0), size=(base.fft_domain, base.fft_domain),
                      res=int(round((density_res - 1) * scale)) + 1,
                      margin=base.patches[0].margin if base.patches else 10.0)
    return replace(base, mode="wp-only", patches=(big,), bodies=())


def benchmark_cell(cfg: SimConfig, warmup: int | None = None,
                   measure: int | None = None, label: str = "") -> BenchRow:
    """Steady-state throughput of one configuration cell."""
    warmup = cfg.bench_warmup if warmup is None else warmup
    measure = cfg.bench_measure if measure is None else measure
    sim = Simulation(cfg)
    for _ in range(warmup):
        sim.step()
    frame_ms = []
    t0 = time.perf_counter()
    for _ in range(measure):
        tic = time.perf_counter()
        sim.step()
        frame_ms.append((time.perf_counter() - tic) * 1e3)
    wall = time.perf_counter() - t0
    med = float(np.median(frame_ms))
    particles = int(sum(len(ps.pool) for ps in sim.patches))
    return BenchRow(
        label=label or cfg.mode, n_omega=cfg.n_omega, n_theta=cfg.n_theta,
        u10=cfg.u10, res=cfg.patches[0].res if cfg.patches else 0,
        mode=cfg.mode, fps=1e3 / med if med > 0 else float("inf"),
        median_frame_ms=med,
        particles=particles,
        particle_rate=particles * measure / wall if wall > 0 else 0.0,
    )


def trend_matrix(base: SimConfig) -> list[tuple[str, SimConfig]]:
    """The performance-sweep cells: method, sampling counts, wind, resolution."""
    from dataclasses import replace
    from .config import PatchConfig

    def with_counts(n):
        return replace(base, n_omega=n, n_theta=n)

    def with_res(r):
        return replace(base, patches=tuple(
            PatchConfig(p.origin, p.size, r, p.margin, p.choppiness, p.track_body)
            for p in base.patches))

    return [
        ("fft-only", replace(base, mode="fft-only")),
        ("wp-only", wp_only_config(base)),
        ("hybrid-16x16", with_counts(16)),
        ("hybrid-12x12", with_counts(12)),
        ("hybrid-8x8", with_counts(8)),
        ("res-256", with_res(256)),
        ("res-1024", with_res(1024)),
        ("u10-3", replace(base, u10=3.0)),
        ("u10-10", replace(base, u10=10.0)),
        ("u10-15", replace(base, u10=15.0)),
    ]


def benchmark(cells: list[tuple[str, SimConfig]], warmup: int | None = None,
              measure: int | None = None, progress=None) -> list[BenchRow]:
    rows = []
    for label, cfg in cells:
        # the full-domain wp-only cell is far heavier per frame; keep its
        # sampled frame count small, the ordering gap is orders of magnitude
        w, m = warmup, measure
        if cfg.mode == "wp-only":
            w = min(w if w is not None else cfg.bench_warmup, 4)
            m = min(m if m is not None else cfg.bench_measure, 3)
        row = benchmark_cell(cfg, w, m, label)
        rows.append(row)
        if progress is not None:
            progress(row)
    return rows


def bench_table(rows: list[BenchRow]) -> str:
    header = "label,mode,n_omega,n_theta,u10,res,fps,median_frame_ms,particles,particle_rate"
    lines = [header]
    for r in rows:
        lines.append(f"{r.label},{r.mode},{r.n_omega},{r.n_theta},{r.u10},{r.res},"
                     f"{r.fps:.3f},{r.median_frame_ms:.3f},{r.particles},"
                     f"{r.particle_rate:.1f}")
    return "\n".join(lines) + "\n"
