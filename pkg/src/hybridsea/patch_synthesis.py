"""Patch height-field synthesis: layered splatting, separable smoothing, normals.

Particles splat their signed amplitudes into one accumulation layer per
frequency bucket; each layer is smoothed by two separable raised-cosine passes
whose support matches the bucket's particle radius, then layers are scaled and
summed into the patch height grid.

Layers carry a padding band as wide as their kernel so that particles in the
despawn grace zone (support still touching the patch) keep splatting at their
true positions and their bumps slide off the patch edge instead of piling up
on border texels. Smoothing is zero-padded; only positions beyond the padding
are clamped (and counted).

Per-bucket output gain is a calibration constant because the particle
waveform's amplitude convention is not pinned down by the energy model:

* "energy" (default): a crest+trough pair's integrated squared elevation
  equals the crest's booked energy rho g A^2 pi r^2 / 8 divided by rho g,
  which keeps the synthesized variance consistent with the injection ledger.
* "peak": an isolated crest of amplitude A peaks at elevation A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fft_background import HeightField, grid_normals
from .particles import DEFAULT_TROUGH_FRACTION, ParticleSet, PatchRegion
from .spectrum import BucketTable

AMPLITUDE_CONVENTIONS = ("energy", "peak")


@dataclass(frozen=True)
class SmoothingKernel:
    """Normalized symmetric 1-D taps plus the per-bucket output gain."""

    taps: np.ndarray      # odd length 2R+1, sums to 1
    half_width: int       # R, texels
    gain: float           # scale applied after both passes

    def __post_init__(self):
        if len(self.taps) != 2 * self.half_width + 1:
            raise ValueError("taps length must be 2*half_width + 1")


def raised_cosine_taps(half_width: int) -> np.ndarray:
    """1 + cos profile over [-R, R], strictly positive, normalized to sum 1."""
    m = np.arange(-half_width, half_width + 1)
    taps = 1.0 + np.cos(math.pi * m / (half_width + 1))
    return taps / taps.sum()


def _pair_square_sum(taps: np.ndarray, shift: int, trough_fraction: float) -> float:
    """Sum of squares of an isolated crest+trough pair of unit amplitude,
    in texel units (the trough displaced `shift` texels behind the crest)."""
    bump = np.outer(taps, taps)
    w = bump.shape[0]
    canvas = np.zeros((w + shift, w))
    canvas[:w] += bump
    if trough_fraction != 0.0:
        canvas[shift:] -= trough_fraction * bump
    return float(np.sum(canvas**2))


def _kernel_for(radius: float, texel_size: float, convention: str,
                trough_fraction: float) -> SmoothingKernel:
    """Kernel whose support matches the particle radius at this texel size,
    with the gain set by the amplitude convention."""
    if convention not in AMPLITUDE_CONVENTIONS:
        raise ConfigError(f"unknown amplitude convention {convention!r}")
    half = max(1, int(round(radius / texel_size)))
    taps = raised_cosine_taps(half)
    if convention == "peak":
        gain = 1.0 / float(taps[half] ** 2)
    else:
        ss = _pair_square_sum(taps, half, trough_fraction) * texel_size**2
        gain = math.sqrt((math.pi * radius**2 / 8.0) / ss)
    return SmoothingKernel(taps=taps, half_width=half, gain=gain)


def build_kernels(table: BucketTable, texel_size: float,
                  convention: str = "energy",
                  trough_fraction: float = DEFAULT_TROUGH_FRACTION) -> list[SmoothingKernel]:
    """One smoothing kernel per bucket at the full grid resolution."""
    return [_kernel_for(b.radius, texel_size, convention, trough_fraction)
            for b in table.buckets]


def _window_sum(x: np.ndarray, r: int) -> np.ndarray:
    """Sliding sum over [i-r, i+r] along the last axis, zero outside."""
    n = x.shape[-1]
    cs = np.cumsum(x, axis=-1)
    out = np.empty_like(x)
    # upper = cs[min(i+r, n-1)], lower = cs[i-r-1] (0 for i <= r)
    out[..., :n - r] = cs[..., r:]
    out[..., n - r:] = cs[..., -1:]
    out[..., r + 1:] -= cs[..., :n - r - 1]
    return out


def convolve1d_zero(arr: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """Same-size 1-D convolution with zero-padded borders along an axis.

    Raised-cosine taps decompose as c (1 + cos(w0 m)), so the convolution
    reduces to three sliding window sums (plain, cosine- and sine-demodulated),
    O(n) per sample independent of the kernel width.
    """
    n = arr.shape[axis]
    r = (len(taps) - 1) // 2
    if len(taps) > n:
        raise ConfigError(f"kernel of {len(taps)} taps wider than grid axis of {n}")
    # work on contiguous rows: cumsum along a strided axis thrashes the cache
    a = np.ascontiguousarray(np.moveaxis(arr, axis, -1))
    c = float(taps[r] / 2.0)          # taps[m] = c (1 + cos(w0 m)), taps[r] = 2c
    w0 = math.pi / (r + 1)

    # sum_j x[j] cos(w0 (i - j)) = cos(w0 i) W_c[i] + sin(w0 i) W_s[i]
    phase = w0 * np.arange(n)
    cos_j = np.cos(phase)
    sin_j = np.sin(phase)
    box = _window_sum(a, r)
    wc = _window_sum(a * cos_j, r)
    ws = _window_sum(a * sin_j, r)
    out = c * (box + cos_j * wc + sin_j * ws)
    return np.moveaxis(out, -1, axis) if axis == -1 or axis == arr.ndim - 1 \
        else np.ascontiguousarray(np.moveaxis(out, -1, axis))


class LayerStack:
    """Per-bucket accumulation grids over a patch.

    The logical grid is node-centered: texel (0, 0) sits on the patch min
    corner and texel (res-1, ny-1) on the max corner. Each layer is stored
    with its kernel-sized padding band; `layer_view` exposes the logical crop.
    """

    def __init__(self, patch: PatchRegion, resolution: int,
                 kernels: list[SmoothingKernel]):
        if resolution < 2:
            raise ConfigError(f"patch resolution must be >= 2, got {resolution}")
        self.patch = patch
        self.resolution = resolution
        self.texel_size = patch.l1 / (resolution - 1)
        self.ny = int(round(patch.l2 / self.texel_size)) + 1
        self.kernels = kernels
        self.pads = [k.half_width + 1 for k in kernels]
        self.layers = [np.zeros((resolution + 2 * p, self.ny + 2 * p))
                       for p in self.pads]
        self.clamped_splats = 0

    def layer_view(self, i: int) -> np.ndarray:
        p = self.pads[i]
        return self.layers[i][p:p + self.resolution, p:p + self.ny]

    def clear(self) -> None:
        for layer in self.layers:
            layer.fill(0.0)
        self.clamped_splats = 0


def _splat(layer: np.ndarray, pad: int, gx: np.ndarray, gy: np.ndarray,
           amp: np.ndarray) -> int:
    """Bilinear scatter-add at fractional grid coords; returns clamp count."""
    nx, ny = layer.shape
    u = gx + pad
    v = gy + pad
    clamped = int(np.sum((u < 0) | (u > nx - 1) | (v < 0) | (v > ny - 1)))
    u = np.clip(u, 0.0, nx - 1 - 1e-9)
    v = np.clip(v, 0.0, ny - 1 - 1e-9)
    i0 = u.astype(np.int64)
    j0 = v.astype(np.int64)
    fu = u - i0
    fv = v - j0
    flat = np.concatenate([
        i0 * ny + j0, (i0 + 1) * ny + j0, i0 * ny + j0 + 1, (i0 + 1) * ny + j0 + 1,
    ])
    w = np.concatenate([
        amp * (1 - fu) * (1 - fv), amp * fu * (1 - fv),
        amp * (1 - fu) * fv, amp * fu * fv,
    ])
    layer.ravel()[:] += np.bincount(flat, weights=w, minlength=nx * ny)
    return clamped


def accumulate(particles: ParticleSet, patch: PatchRegion,
               stack: LayerStack) -> LayerStack:
    """Splat every particle's signed amplitude into its bucket's layer."""
    if len(particles) == 0:
        return stack
    gx = (particles.positions[:, 0] - patch.min_corner[0]) / stack.texel_size
    gy = (particles.positions[:, 1] - patch.min_corner[1]) / stack.texel_size
    buckets = particles.buckets
    for i in range(len(stack.layers)):
        sel = buckets == i
        if not np.any(sel):
            continue
        stack.clamped_splats += _splat(stack.layers[i], stack.pads[i],
                                       gx[sel], gy[sel], particles.amplitudes[sel])
    return stack


def smooth_layer(layer: np.ndarray, kernel: SmoothingKernel) -> np.ndarray:
    """Two separable zero-padded passes along x then y."""
    return convolve1d_zero(convolve1d_zero(layer, kernel.taps, axis=0),
                           kernel.taps, axis=1)


def smooth_and_sum(stack: LayerStack,
                   kernels: list[SmoothingKernel] | None = None) -> np.ndarray:
    """Smooth each layer with its kernel, apply the bucket gain, sum to the
    patch height grid (logical resolution, padding cropped)."""
    kernels = kernels if kernels is not None else stack.kernels
    if len(kernels) != len(stack.layers):
        raise ConfigError("need exactly one kernel per layer")
    heights = np.zeros((stack.resolution, stack.ny))
    for i, kernel in enumerate(kernels):
        p = stack.pads[i]
        sm = smooth_layer(stack.layers[i], kernel)
        heights += kernel.gain * sm[p:p + stack.resolution, p:p + stack.ny]
    return heights


@dataclass(frozen=True)
class LayerPlan:
    """Per-bucket synthesis grids: decimation factor + matching kernel.

    Long-radius buckets carry waves that a grid at ~4 texels per radius
    already resolves, so their layers accumulate and smooth at a coarser
    spacing and are bilinearly upsampled into the sum. This keeps the
    smoothing cost proportional to the patch resolution instead of the
    kernel width.
    """

    kernels: tuple[SmoothingKernel, ...]   # built at each layer's own texel
    factors: tuple[int, ...]               # coarse texel = factor * fine texel


def plan_layers(table: BucketTable, texel_size: float, resolution: int,
                convention: str = "energy",
                trough_fraction: float = DEFAULT_TROUGH_FRACTION,
                min_taps: int = 4, adaptive: bool = True) -> LayerPlan:
    """Choose per-bucket decimation factors and build the matching kernels."""
    factors = []
    for b in table.buckets:
        if not adaptive:
            factors.append(1)
            continue
        half_fine = b.radius / texel_size
        f = max(1, int(half_fine / min_taps))
        f = min(f, max(1, (resolution - 1) // (4 * min_taps)))
        factors.append(f)
    kernels = [_kernel_for(b.radius, texel_size * f, convention, trough_fraction)
               for b, f in zip(table.buckets, factors)]
    return LayerPlan(kernels=tuple(kernels), factors=tuple(factors))


def _upsample_bilinear(coarse: np.ndarray, factor: int, nx: int, ny: int) -> np.ndarray:
    """Bilinear interpolation of a coarse node grid onto the fine grid.

    Fine nodes subdivide each coarse cell `factor` times, so the lerp weights
    repeat per cell and the whole axis expands with one broadcast + reshape
    (no gather indexing)."""
    if factor == 1:
        return coarse[:nx, :ny]
    w = (np.arange(factor) / factor)[None, :, None]
    a = coarse[:-1, None, :] * (1.0 - w) + coarse[1:, None, :] * w
    up_x = np.concatenate([a.reshape(-1, coarse.shape[1]), coarse[-1:, :]])[:nx]
    w = w.reshape(1, 1, factor)
    b = up_x[:, :-1, None] * (1.0 - w) + up_x[:, 1:, None] * w
    return np.concatenate([b.reshape(nx, -1), up_x[:, -1:]], axis=1)[:, :ny]


def synthesize(particles: ParticleSet, patch: PatchRegion, resolution: int,
               plan: LayerPlan | list[SmoothingKernel]) -> tuple[np.ndarray, int]:
    """Streaming accumulate+smooth+sum, one scratch layer at a time.

    With a plain kernel list this is texel-exact, equivalent to accumulate()
    followed by smooth_and_sum() while holding a single padded layer in
    memory. With a LayerPlan, long-radius layers run at their decimated grid
    and are upsampled. Returns (heights, clamped splat count).
    """
    if resolution < 2:
        raise ConfigError(f"patch resolution must be >= 2, got {resolution}")
    if isinstance(plan, LayerPlan):
        kernels, factors = plan.kernels, plan.factors
    else:
        kernels, factors = plan, (1,) * len(plan)
    texel = patch.l1 / (resolution - 1)
    ny = int(round(patch.l2 / texel)) + 1
    heights = np.zeros((resolution, ny))
    clamped = 0
    if len(particles) == 0:
        return heights, clamped
    gx = (particles.positions[:, 0] - patch.min_corner[0]) / texel
    gy = (particles.positions[:, 1] - patch.min_corner[1]) / texel
    buckets = particles.buckets
    for i, (kernel, f) in enumerate(zip(kernels, factors)):
        sel = buckets == i
        if not np.any(sel):
            continue
        pad = kernel.half_width + 1
        n_cx = -((resolution - 1) // -f) + 1
        n_cy = -((ny - 1) // -f) + 1
        layer = np.zeros((n_cx + 2 * pad, n_cy + 2 * pad))
        clamped += _splat(layer, pad, gx[sel] / f, gy[sel] / f,
                          particles.amplitudes[sel])
        sm = smooth_layer(layer, kernel)
        crop = sm[pad:pad + n_cx, pad:pad + n_cy]
        heights += kernel.gain * _upsample_bilinear(crop, f, resolution, ny)
    return heights, clamped


def mean_radius(table: BucketTable) -> float:
    """Energy-weighted mean particle radius, the displacement length scale."""
    e = table.energies
    return float(np.sum(e * table.radii) / np.sum(e))


def finish_field(heights: np.ndarray, patch: PatchRegion,
                 choppiness: float = 0.0,
                 displacement_scale: float = 1.0) -> HeightField:
    """Wrap a patch height grid with finite-difference normals (clamped
    borders) and the optional choppy displacement -chi grad(h) rbar."""
    if not np.all(np.isfinite(heights)):
        raise ValueError("patch heights contain non-finite values")
    resolution = heights.shape[0]
    spacing = patch.l1 / (resolution - 1)
    normal = grid_normals(heights, spacing, periodic=False)
    if choppiness != 0.0:
        gx, gy = np.gradient(heights, spacing)
        disp = -choppiness * displacement_scale * np.stack([gx, gy], axis=-1)
    else:
        disp = np.zeros(heights.shape + (2,))
    return HeightField(resolution=resolution, origin=patch.min_corner.copy(),
                       spacing=spacing, height=heights, displacement=disp,
                       normal=normal, periodic=False)
