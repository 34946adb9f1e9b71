"""Wave-particle population of a patch: boundary injection, advection, lifecycle.

Injection follows the energy-flux argument: over a time step dt, the expected
number of particle groups of frequency w entering a rectangular patch through
the pair of opposite sides of length L is

    N = 4 L dt w^3 / (pi^3 g)

(8 L dt w^3 / (pi^3 g) in total for a square), one group being n_theta
particles fanned over all directions with amplitudes

    A_j = sqrt(2 S(w, th_j) dw dth)

so that a group carries exactly the spectral energy swept across the boundary.
Counts are fractional; each (bucket, side) keeps an accumulator and emits one
full group per unit of accumulated quota, which preserves the long-run rate
without stochastic variance.

A group emitted at a side places its inflow-directed members on that side and
the outflow-directed ones on the opposite side, mirroring the cancellation
argument that produced the factor 2. Every crest is paired with a trailing
trough of opposite sign, so a pair approximates one wavelength of a traveling
wave and the population has (near) zero mean elevation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectrum import BucketTable, DirectionalSpectrum, FrequencyBucket, evaluate_1d

# Trough amplitude as a fraction of the crest amplitude. With equal-radius
# bumps only 1.0 gives a zero-mean pair; see README notes on this constant.
DEFAULT_TROUGH_FRACTION = 1.0

# side ids: 0 west (x = x0), 1 east (x = x0 + l1), 2 south (y = y0), 3 north
SIDE_INWARD = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
N_SIDES = 4


@dataclass(frozen=True)
class PatchRegion:
    """Axis-aligned rectangular wave-particle region."""

    origin: tuple[float, float]   # world min corner (m)
    l1: float                     # extent along x (m)
    l2: float                     # extent along y (m)
    margin: float                 # blend band width (m)

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise ValueError(f"patch side lengths must be positive, got {self.l1}, {self.l2}")
        if not (0.0 < self.margin < 0.5 * min(self.l1, self.l2)):
            raise ValueError(
                f"margin must lie in (0, min(l1, l2)/2), got {self.margin}")

    @property
    def min_corner(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=float)

    @property
    def max_corner(self) -> np.ndarray:
        return self.min_corner + np.array([self.l1, self.l2])

    def side_length(self, side: int) -> float:
        """Length of one boundary side (west/east run along y)."""
        return self.l2 if side < 2 else self.l1

    def contains(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        lo, hi = self.min_corner, self.max_corner
        return np.all((p >= lo) & (p <= hi), axis=-1)


@dataclass
class WaveParticle:
    """Single-particle view; bulk storage lives in ParticleSet."""

    position: np.ndarray       # world (2,)
    direction: np.ndarray      # unit (2,)
    amplitude: float           # signed; negative for the trough of a pair
    bucket: int
    birth_time: float = 0.0


class ParticleSet:
    """Growable struct-of-arrays particle pool (owned by one patch)."""

    __slots__ = ("pos", "dir", "amp", "bucket", "birth", "_n")

    def __init__(self, capacity: int = 1024):
        self.pos = np.empty((capacity, 2))
        self.dir = np.empty((capacity, 2))
        self.amp = np.empty(capacity)
        self.bucket = np.empty(capacity, dtype=np.int32)
        self.birth = np.empty(capacity)
        self._n = 0

    def __len__(self) -> int:
        return self._n

    def __iter__(self):
        for i in range(self._n):
            yield WaveParticle(self.pos[i].copy(), self.dir[i].copy(),
                               float(self.amp[i]), int(self.bucket[i]),
                               float(self.birth[i]))

    # live views (no copies)
    @property
    def positions(self) -> np.ndarray:
        return self.pos[:self._n]

    @property
    def directions(self) -> np.ndarray:
        return self.dir[:self._n]

    @property
    def amplitudes(self) -> np.ndarray:
        return self.amp[:self._n]

    @property
    def buckets(self) -> np.ndarray:
        return self.bucket[:self._n]

    @property
    def birth_times(self) -> np.ndarray:
        return self.birth[:self._n]

    def _ensure(self, extra: int) -> None:
        need = self._n + extra
        cap = len(self.amp)
        if need <= cap:
            return
        while cap < need:
            cap *= 2
        for name in ("pos", "dir", "amp", "bucket", "birth"):
            old = getattr(self, name)
            shape = (cap,) + old.shape[1:]
            new = np.empty(shape, dtype=old.dtype)
            new[:self._n] = old[:self._n]
            setattr(self, name, new)

    def append_arrays(self, pos, direction, amp, bucket, birth) -> None:
        m = len(amp)
        if m == 0:
            return
        self._ensure(m)
        n = self._n
        self.pos[n:n + m] = pos
        self.dir[n:n + m] = direction
        self.amp[n:n + m] = amp
        self.bucket[n:n + m] = bucket
        self.birth[n:n + m] = birth
        self._n += m

    def append(self, p: WaveParticle) -> None:
        self.append_arrays(p.position[None, :], p.direction[None, :],
                           np.array([p.amplitude]), np.array([p.bucket]),
                           np.array([p.birth_time]))

    def extend(self, other: "ParticleSet") -> None:
        self.append_arrays(other.positions, other.directions, other.amplitudes,
                           other.buckets, other.birth_times)

    def compact(self, keep: np.ndarray) -> "ParticleSet":
        """Drop particles where keep is False; returns the dropped ones."""
        dropped = ParticleSet(max(int((~keep).sum()), 1))
        dropped.append_arrays(self.positions[~keep], self.directions[~keep],
                              self.amplitudes[~keep], self.buckets[~keep],
                              self.birth_times[~keep])
        n_keep = int(keep.sum())
        for name in ("pos", "dir", "amp", "bucket", "birth"):
            arr = getattr(self, name)
            arr[:n_keep] = arr[:self._n][keep]
        self._n = n_keep
        return dropped

    def clear(self) -> None:
        self._n = 0

    def counts_per_bucket(self, n_buckets: int) -> np.ndarray:
        return np.bincount(self.buckets, minlength=n_buckets)


@dataclass
class InjectionLedger:
    """Fractional group quotas plus per-bucket injection/despawn accounting."""

    n_buckets: int
    rho: float = 1000.0   # water density for the energy bookkeeping (kg/m^3)
    accumulators: np.ndarray = field(init=False)      # (n_buckets, 4) in [0, 1)
    injected_groups: np.ndarray = field(init=False)   # full groups emitted
    injected_energy: np.ndarray = field(init=False)   # J, crest members only
    despawned_energy: np.ndarray = field(init=False)  # J

    def __post_init__(self):
        self.accumulators = np.zeros((self.n_buckets, N_SIDES))
        self.injected_groups = np.zeros(self.n_buckets, dtype=np.int64)
        self.injected_energy = np.zeros(self.n_buckets)
        self.despawned_energy = np.zeros(self.n_buckets)


def particle_energy(rho: float, g: float, amplitude, radius):
    """Energy of a deep-water particle: rho g A^2 pi r^2 / 8 (J)."""
    return 0.125 * rho * g * np.asarray(amplitude) ** 2 * math.pi * np.asarray(radius) ** 2


def groups_per_step(bucket: FrequencyBucket, side_length: float, dt: float,
                    g: float) -> float:
    """Expected particle groups per step through one pair of opposite sides
    of the given length; dimensionless. Linear in dt (zero dt, zero groups)."""
    if side_length <= 0 or dt < 0:
        raise ValueError("side_length must be positive and dt nonnegative")
    return 4.0 * side_length * dt * bucket.omega**3 / (math.pi**3 * g)


def inject(patch: PatchRegion, table: BucketTable, spectrum: DirectionalSpectrum,
           ledger: InjectionLedger, dt: float, rng: np.random.Generator,
           t: float = 0.0,
           trough_fraction: float = DEFAULT_TROUGH_FRACTION) -> ParticleSet:
    """Advance the boundary accumulators by one step and emit due groups.

    Returns the newly spawned particles (crests and troughs). Mutates the
    ledger. Deterministic for a fixed generator state: random draws happen in
    a fixed (bucket, side) order.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    p = spectrum.params
    g = p.g
    n_b = table.n_omega
    n_th = table.n_theta
    d_theta = 2.0 * math.pi / n_th

    omegas = table.omegas
    half_rate = np.empty((n_b, N_SIDES))
    for side in range(N_SIDES):
        pair = 4.0 * patch.side_length(side) * dt * omegas**3 / (math.pi**3 * g)
        half_rate[:, side] = 0.5 * pair

    ledger.accumulators += half_rate
    n_emit = np.floor(ledger.accumulators).astype(np.int64)
    ledger.accumulators -= n_emit
    g_tot = int(n_emit.sum())
    out = ParticleSet(max(2 * g_tot * n_th, 4))
    if g_tot == 0:
        return out

    flat = n_emit.ravel()
    gb = np.repeat(np.arange(n_b * N_SIDES) // N_SIDES, flat)   # bucket per group
    gs = np.repeat(np.arange(n_b * N_SIDES) % N_SIDES, flat)    # trigger side
    ledger.injected_groups += np.bincount(gb, minlength=n_b)

    # directions: midpoint fan over the full circle, jittered per group
    theta_base = -math.pi + (np.arange(n_th) + 0.5) * d_theta
    jitter = rng.uniform(-0.5 * d_theta, 0.5 * d_theta, size=g_tot)
    th_rel = theta_base[None, :] + jitter[:, None]               # (g_tot, n_th)

    s_arr, norm_arr = table.spread_params
    s1d = evaluate_1d(p, omegas)
    dir_val = norm_arr[gb][:, None] * np.abs(np.cos(0.5 * th_rel)) ** (2.0 * s_arr[gb][:, None])
    amp = np.sqrt(2.0 * s1d[gb][:, None] * dir_val * table.widths[gb][:, None] * d_theta)

    th_world = th_rel + spectrum.mean_direction
    d = np.stack([np.cos(th_world), np.sin(th_world)], axis=2)   # (g_tot, n_th, 2)

    # inflow members stay on the trigger side, outflow members take the
    # opposite side (side pairs are 0<->1 and 2<->3)
    dot = np.einsum("gmk,gk->gm", d, SIDE_INWARD[gs])
    m_side = np.where(dot > 0.0, gs[:, None], gs[:, None] ^ 1).ravel()

    u = rng.uniform(0.0, 1.0, size=(g_tot, n_th)).ravel()
    x0, y0 = patch.origin
    px = np.empty(g_tot * n_th)
    py = np.empty(g_tot * n_th)
    west, east = m_side == 0, m_side == 1
    south, north = m_side == 2, m_side == 3
    px[west], py[west] = x0, y0 + u[west] * patch.l2
    px[east], py[east] = x0 + patch.l1, y0 + u[east] * patch.l2
    px[south], py[south] = x0 + u[south] * patch.l1, y0
    px[north], py[north] = x0 + u[north] * patch.l1, y0 + patch.l2

    pos = np.stack([px, py], axis=1)
    d2 = d.reshape(-1, 2)
    a2 = amp.ravel()
    b2 = np.repeat(gb, n_th).astype(np.int32)
    radii = table.radii[b2]

    ledger.injected_energy += np.bincount(
        b2, weights=particle_energy(ledger.rho, g, a2, radii), minlength=n_b)

    live = a2 > 0.0
    birth = np.full(int(live.sum()), t)
    out.append_arrays(pos[live], d2[live], a2[live], b2[live], birth)
    if trough_fraction != 0.0:
        out.append_arrays(pos[live] - radii[live, None] * d2[live], d2[live],
                          -trough_fraction * a2[live], b2[live], birth)
    return out


def advect(particles: ParticleSet, table: BucketTable, dt: float,
           patch: PatchRegion, ledger: InjectionLedger | None = None,
           g: float = 9.81) -> ParticleSet:
    """Move particles at their bucket phase speed; despawn those whose kernel
    support no longer intersects the patch. Returns the despawned set."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if len(particles) == 0:
        return ParticleSet(1)
    speeds = table.speeds[particles.buckets]
    particles.positions[:] += particles.directions * (speeds * dt)[:, None]

    rad = table.radii[particles.buckets]
    lo, hi = patch.min_corner, patch.max_corner
    p = particles.positions
    dx = np.maximum(np.maximum(lo[0] - p[:, 0], p[:, 0] - hi[0]), 0.0)
    dy = np.maximum(np.maximum(lo[1] - p[:, 1], p[:, 1] - hi[1]), 0.0)
    keep = dx * dx + dy * dy <= rad * rad
    dropped = particles.compact(keep)
    if ledger is not None and len(dropped):
        e = particle_energy(ledger.rho, g, np.abs(dropped.amplitudes), table.radii[dropped.buckets])
        # pairs share one energy booking on the crest, mirror that on despawn
        crest = dropped.amplitudes > 0.0
        ledger.despawned_energy += np.bincount(
            dropped.buckets[crest], weights=e[crest], minlength=table.n_omega)
    return dropped
