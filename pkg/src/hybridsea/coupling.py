"""Blending of patch fields into the FFT background and surface queries.

The background is replaced inside a patch: a smooth weight w ramps from 0 on
the patch boundary to 1 at `margin` inward depth, the surface being
w * patch + (1 - w) * background. Outside every patch the background passes
through untouched, so far-field texels are bit-identical to the FFT output
and the crossfade band is the only place both fields contribute (weights sum
to one, no energy double-counted).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fft_background import FftState, HeightField, evolve_and_synthesize, sample_periodic
from .particles import PatchRegion


def smoothstep(t: np.ndarray) -> np.ndarray:
    """Cubic 3t^2 - 2t^3 on clamped t."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def boundary_depth(patch: PatchRegion, points: np.ndarray) -> np.ndarray:
    """Inward distance from the patch boundary; negative outside."""
    p = np.asarray(points, dtype=float)
    lo, hi = patch.min_corner, patch.max_corner
    return np.minimum.reduce([
        p[..., 0] - lo[0], hi[0] - p[..., 0],
        p[..., 1] - lo[1], hi[1] - p[..., 1],
    ])


def blend_weight(patch: PatchRegion, points: np.ndarray) -> np.ndarray:
    """Patch weight w(x): 0 at and outside the boundary, 1 past the margin."""
    d = boundary_depth(patch, points)
    return np.where(d > 0.0, smoothstep(d / patch.margin), 0.0)


@dataclass(eq=False)
class BlendMask:
    """Per-texel patch weights on the patch grid."""

    weights: np.ndarray   # (res_x, res_y) in [0, 1]
    margin: float


def build_mask(patch: PatchRegion, resolution: int) -> BlendMask:
    """Tabulate the blend weight on the node-centered patch grid."""
    if patch.margin <= 0:
        raise ConfigError("patch margin must be positive")
    texel = patch.l1 / (resolution - 1)
    ny = int(round(patch.l2 / texel)) + 1
    xs = patch.min_corner[0] + np.arange(resolution) * texel
    ys = patch.min_corner[1] + np.arange(ny) * texel
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    return BlendMask(weights=blend_weight(patch, pts), margin=patch.margin)


def sample_clamped(field: HeightField, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear height and normal on a non-periodic grid, clamped at borders."""
    pts = np.asarray(points, dtype=float)
    nx, ny = field.height.shape
    u = np.clip((pts[..., 0] - field.origin[0]) / field.spacing, 0.0, nx - 1.0)
    v = np.clip((pts[..., 1] - field.origin[1]) / field.spacing, 0.0, ny - 1.0)
    i0 = np.minimum(u.astype(int), nx - 2)
    j0 = np.minimum(v.astype(int), ny - 2)
    fu = u - i0
    fv = v - j0
    h = field.height
    hv = (h[i0, j0] * (1 - fu) * (1 - fv) + h[i0 + 1, j0] * fu * (1 - fv)
          + h[i0, j0 + 1] * (1 - fu) * fv + h[i0 + 1, j0 + 1] * fu * fv)
    nm = field.normal
    nv = (nm[i0, j0] * ((1 - fu) * (1 - fv))[..., None]
          + nm[i0 + 1, j0] * (fu * (1 - fv))[..., None]
          + nm[i0, j0 + 1] * ((1 - fu) * fv)[..., None]
          + nm[i0 + 1, j0 + 1] * (fu * fv)[..., None])
    nv /= np.linalg.norm(nv, axis=-1, keepdims=True)
    return hv, nv


def validate_patches(patches: list[PatchRegion]) -> None:
    """Patches must not overlap (open-interval test; shared edges allowed)."""
    for i in range(len(patches)):
        for j in range(i + 1, len(patches)):
            a, b = patches[i], patches[j]
            if (a.min_corner[0] < b.max_corner[0] and b.min_corner[0] < a.max_corner[0]
                    and a.min_corner[1] < b.max_corner[1] and b.min_corner[1] < a.max_corner[1]):
                raise ConfigError(f"patches {i} and {j} overlap")


@dataclass(eq=False)
class PatchSurface:
    """One patch's synthesized field, ready for sampling."""

    patch: PatchRegion
    field: HeightField


class SurfaceSampler:
    """World-space surface queries against one frame's synthesized fields.

    Pure reads; safe to share across concurrent callers. `normal_mode`
    selects between blending the two fields' normals (renormalized) and
    recomputing normals from finite differences of the blended height.
    """

    def __init__(self, background: HeightField | None,
                 patches: list[PatchSurface], normal_mode: str = "blend"):
        if normal_mode not in ("blend", "recompute"):
            raise ConfigError(f"unknown normal mode {normal_mode!r}")
        validate_patches([p.patch for p in patches])
        self.background = background
        self.patches = patches
        self.normal_mode = normal_mode

    def _raw(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pts = np.asarray(points, dtype=float)
        if self.background is not None:
            height, normal = sample_periodic(self.background, pts)
        else:
            height = np.zeros(pts.shape[:-1])
            normal = np.zeros(pts.shape[:-1] + (3,))
            normal[..., 2] = 1.0
        height = np.array(height, ndmin=1) if height.ndim == 0 else height
        for ps in self.patches:
            w = blend_weight(ps.patch, pts)
            inside = w > 0.0
            if not np.any(inside):
                continue
            ph, pn = sample_clamped(ps.field, pts[inside])
            wi = w[inside]
            height[inside] = wi * ph + (1.0 - wi) * height[inside]
            nb = normal[inside]
            mixed = wi[..., None] * pn + (1.0 - wi)[..., None] * nb
            mixed /= np.linalg.norm(mixed, axis=-1, keepdims=True)
            normal[inside] = mixed
        return height, normal

    def sample(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        if scalar:
            pts = pts[None, :]
        height, normal = self._raw(pts)
        if self.normal_mode == "recompute":
            eps = 1e-2
            hx1, _ = self._raw(pts + [eps, 0.0])
            hx0, _ = self._raw(pts - [eps, 0.0])
            hy1, _ = self._raw(pts + [0.0, eps])
            hy0, _ = self._raw(pts - [0.0, eps])
            gx = (hx1 - hx0) / (2 * eps)
            gy = (hy1 - hy0) / (2 * eps)
            normal = np.stack([-gx, -gy, np.ones_like(gx)], axis=-1)
            normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
        if scalar:
            return float(height[0]), normal[0]
        return height, normal


def query_surface(world_pos, t: float, fft_state: FftState | None,
                  patches: list[PatchSurface],
                  normal_mode: str = "blend") -> tuple[np.ndarray, np.ndarray]:
    """Blended (height, normal) at world positions and time t.

    Convenience wrapper that synthesizes the background on the fly; the frame
    loop builds one SurfaceSampler per frame instead.
    """
    background = evolve_and_synthesize(fft_state, t) if fft_state is not None else None
    return SurfaceSampler(background, patches, normal_mode).sample(world_pos)
