"""Two-way coupling between floating bodies and the wave-particle patch.

Water -> body: buoyancy is evaluated at probe points against the blended
surface; each probe carries a share of the hull's displaced volume and pushes
along the locally sampled normal, so wave slopes produce drift and yaw.

Body -> water: the change in submerged volume over a step sets an energy
budget rho g |dV| h_c (the potential energy of the displaced column, h_c the
mean submersion depth). Vertical motion spends its share on an outward ring
of particles at the hull radius, horizontal motion on a wake fan confined to
the Kelvin half-angle behind the body. Emitted particles are assigned to the
existing frequency bucket with the nearest radius, so no new synthesis layers
are ever created, and their amplitudes are back-solved from the per-particle
energy so the budget is met exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .particles import ParticleSet, PatchRegion, particle_energy
from .spectrum import BucketTable

KELVIN_HALF_ANGLE = math.radians(19.47)


@dataclass
class ProbePoint:
    offset: np.ndarray    # body-frame (3,), z up
    volume: float         # displaced-volume share at full submersion (m^3)


@dataclass
class FloatingBody:
    """Probe-point rigid floater: heave, 2-D drift, yaw."""

    position: np.ndarray            # world (3,)
    yaw: float
    velocity: np.ndarray            # (3,)
    yaw_rate: float
    mass: float
    probes: list[ProbePoint]
    hull_extent: float              # characteristic radius (m)
    draft_height: float             # vertical span over which volume accrues (m)
    drag_linear: float = 200.0      # N s/m at full submersion
    drag_yaw: float = 50.0          # N m s
    max_thrust: float = 0.0         # N, scaled by the thrust input
    max_yaw_torque: float = 0.0     # N m, scaled by the rudder input
    thrust: float = 0.0             # command in [-1, 1]
    rudder: float = 0.0             # command in [-1, 1]
    body_id: int = 0
    submerged_volume: float = 0.0
    prev_submerged_volume: float = 0.0
    mean_submersion: float = 0.0    # h_c of the last buoyancy step (m)

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("body mass must be positive")
        total = sum(p.volume for p in self.probes)
        if total <= 0:
            raise ValueError("probe volumes must sum to a positive displaced volume")

    @property
    def displaced_volume(self) -> float:
        return sum(p.volume for p in self.probes)

    def probe_world_positions(self) -> np.ndarray:
        off = np.array([p.offset for p in self.probes])
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        world = np.empty_like(off)
        world[:, 0] = self.position[0] + c * off[:, 0] - s * off[:, 1]
        world[:, 1] = self.position[1] + s * off[:, 0] + c * off[:, 1]
        world[:, 2] = self.position[2] + off[:, 2]
        return world


def box_body(position, size, density=500.0, body_id=0, yaw=0.0,
             max_thrust=0.0, max_yaw_torque=0.0,
             drag_linear=None, drag_yaw=None) -> FloatingBody:
    """Rectangular hull with four corner probes at the bottom face."""
    sx, sy, sz = size
    volume = sx * sy * sz
    mass = density * volume
    half = np.array([sx, sy]) / 2.0
    probes = [
        ProbePoint(np.array([dx * half[0], dy * half[1], -sz / 2.0]), volume / 4.0)
        for dx in (-1.0, 1.0) for dy in (-1.0, 1.0)
    ]
    extent = 0.5 * math.hypot(sx, sy)
    if drag_linear is None:
        drag_linear = 2.0 * mass   # settles in a few heave periods
    if drag_yaw is None:
        drag_yaw = 0.2 * mass * extent**2
    return FloatingBody(
        position=np.asarray(position, dtype=float), yaw=yaw,
        velocity=np.zeros(3), yaw_rate=0.0, mass=mass, probes=probes,
        hull_extent=extent, draft_height=sz, drag_linear=drag_linear,
        drag_yaw=drag_yaw, max_thrust=max_thrust,
        max_yaw_torque=max_yaw_torque, body_id=body_id,
    )


def buoyancy_step(body: FloatingBody, query_surface, dt: float,
                  rho: float = 1000.0, g: float = 9.81) -> FloatingBody:
    """Advance the body one step against the sampled surface (mutates body).

    `query_surface(points) -> (heights, normals)` is any callable matching the
    sampler interface; during a frame it reads the previous frame's fields.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    world = body.probe_world_positions()
    heights, normals = query_surface(world[:, :2])
    heights = np.atleast_1d(np.asarray(heights, dtype=float))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))

    depth = heights - world[:, 2]
    frac = np.clip(depth / body.draft_height, 0.0, 1.0)
    volumes = np.array([p.volume for p in body.probes])
    submerged = float(np.sum(volumes * frac))

    force = np.zeros(3)
    torque_z = 0.0
    for i_p in range(len(body.probes)):
        f = rho * g * volumes[i_p] * frac[i_p] * normals[i_p]
        force += f
        r = world[i_p] - body.position
        torque_z += r[0] * f[1] - r[1] * f[0]

    wet = submerged / body.displaced_volume if body.displaced_volume > 0 else 0.0
    force -= body.drag_linear * wet * body.velocity
    heading = np.array([math.cos(body.yaw), math.sin(body.yaw), 0.0])
    force += body.thrust * body.max_thrust * heading
    torque_z += body.rudder * body.max_yaw_torque - body.drag_yaw * wet * body.yaw_rate

    inertia = 0.5 * body.mass * body.hull_extent**2
    body.velocity += (force / body.mass + np.array([0.0, 0.0, -g])) * dt
    body.position += body.velocity * dt
    body.yaw_rate += torque_z / inertia * dt
    body.yaw += body.yaw_rate * dt

    body.prev_submerged_volume = body.submerged_volume
    body.submerged_volume = submerged
    wet_depths = depth[depth > 0.0]
    body.mean_submersion = float(np.mean(np.minimum(wet_depths, body.draft_height))) \
        if wet_depths.size else 0.0
    return body


@dataclass
class EmissionEvent:
    origin: np.ndarray              # world 2-D (m)
    mode: str                       # "ring" | "wake"
    energy: float                   # J, >= 0
    bucket: int
    direction: np.ndarray | None = None   # unit 2-D, wake only


def nearest_bucket(table: BucketTable, radius: float) -> int:
    """Index of the bucket whose particle radius is closest to `radius`."""
    return int(np.argmin(np.abs(table.radii - radius)))


def _fan(center_angle: float, half_angle: float, count: int) -> np.ndarray:
    """`count` unit directions spread evenly across +-half_angle."""
    if count == 1:
        angles = np.array([center_angle])
    else:
        angles = center_angle + np.linspace(-half_angle, half_angle, count)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def emit_from_motion(body: FloatingBody, patch: PatchRegion, table: BucketTable,
                     dt: float, rho: float = 1000.0, g: float = 9.81,
                     energy_scale: float = 1.0,
                     trough_fraction: float = 1.0) -> tuple[list[EmissionEvent], ParticleSet]:
    """Convert the body's displaced-volume change into wave-particle emissions.

    Returns the emission events and the spawned particles (crests paired with
    trailing troughs; the energy budget is booked on crests only).
    """
    out = ParticleSet(4)
    d_v = body.submerged_volume - body.prev_submerged_volume
    h_c = body.mean_submersion
    budget = energy_scale * rho * g * abs(d_v) * h_c
    if budget <= 0.0:
        return [], out

    v_z = abs(float(body.velocity[2]))
    v_h = float(np.hypot(body.velocity[0], body.velocity[1]))
    if v_z + v_h == 0.0:
        ring_weight = 1.0   # volume changed under a static body: radiate rings
    else:
        ring_weight = v_z / (v_z + v_h)

    events: list[EmissionEvent] = []
    n_th = table.n_theta
    center = body.position[:2]
    sign = 1.0 if d_v >= 0.0 else -1.0   # suction radiates negative rings

    def spawn(energy, bucket_idx, dirs, mode, direction=None):
        r_b = table.buckets[bucket_idx].radius
        per = energy / len(dirs)
        amp = math.sqrt(8.0 * per / (rho * g * math.pi * r_b**2))
        pos = center[None, :] + body.hull_extent * dirs
        amps = np.full(len(dirs), sign * amp)
        b = np.full(len(dirs), bucket_idx, dtype=np.int32)
        out.append_arrays(pos, dirs, amps, b, np.zeros(len(dirs)))
        if trough_fraction != 0.0:
            out.append_arrays(pos - r_b * dirs, dirs, -trough_fraction * amps,
                              b, np.zeros(len(dirs)))
        events.append(EmissionEvent(origin=center.copy(), mode=mode,
                                    energy=energy, bucket=bucket_idx,
                                    direction=direction))

    e_ring = ring_weight * budget
    if e_ring > 0.0:
        bucket_idx = nearest_bucket(table, body.hull_extent)
        dirs = _fan(0.0, math.pi * (1.0 - 1.0 / n_th), n_th)
        spawn(e_ring, bucket_idx, dirs, "ring")

    e_wake = (1.0 - ring_weight) * budget
    if e_wake > 0.0 and v_h > 0.0:
        bucket_idx = nearest_bucket(table, body.hull_extent / 2.0)
        back = math.atan2(-body.velocity[1], -body.velocity[0])
        dirs = _fan(back, KELVIN_HALF_ANGLE, max(n_th // 2, 3))
        spawn(e_wake, bucket_idx, dirs, "wake",
              direction=np.array([math.cos(back), math.sin(back)]))
    return events, out


def batch_energy(particles: ParticleSet, table: BucketTable,
                 rho: float = 1000.0, g: float = 9.81) -> float:
    """Summed rho g A^2 pi r^2 / 8 over every member of a batch (crests and
    troughs alike); with trough fraction beta this is (1 + beta^2) times the
    booked primary energy."""
    r = table.radii[particles.buckets]
    return float(np.sum(particle_energy(rho, g, particles.amplitudes, r)))
