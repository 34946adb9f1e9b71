"""Global periodic height field synthesized from the shared spectrum.

Initial complex amplitudes are drawn once per seed on the wavevector grid,
variance-matched to the directional spectrum over the resolved band; each
frame the bins are rotated by their dispersion phase and inverse-transformed
into heights, choppy horizontal displacement, and finite-difference normals.

Variance mapping: a bin at wavevector k receives one-sided variance

    sigma^2(k) = S(omega(k), theta(k)) * (g / (2 omega)) / |k| * dk^2 / 2

so that the summed two-sided bin variance reproduces the band integral
iint S domega dtheta. Bins outside [0.5 wp, 2.5 wp] (mapped through deep-water
dispersion) or beyond the inscribed Nyquist circle are left empty, keeping the
background band-limited to the same range the particle side samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .spectrum import DirectionalSpectrum, evaluate_1d, wrap_angle

_lgamma = np.frompyfunc(math.lgamma, 1, 1)


@dataclass(frozen=True, eq=False)
class FftState:
    """Immutable spectral state of the background field."""

    n: int                     # grid size per side (power of two)
    domain_size: float         # tile side length (m)
    g: float
    rng_seed: int
    choppiness: float
    h0: np.ndarray             # complex initial amplitudes, shape (n, n)
    h0_mirror_conj: np.ndarray  # conj(h0(-k)), precomputed gather
    omega: np.ndarray          # dispersion omega(k) per bin
    kx: np.ndarray
    ky: np.ndarray

    @property
    def spacing(self) -> float:
        return self.domain_size / self.n


@dataclass(eq=False)
class HeightField:
    """Grid of elevation, horizontal displacement and unit normals.

    Shared output type of the FFT background, patch synthesis and blending.
    Index [i, j] sits at world position origin + (i, j) * spacing; periodic
    fields wrap, patch fields clamp.
    """

    resolution: int
    origin: np.ndarray         # world position of texel (0, 0)
    spacing: float
    height: np.ndarray         # (res, res)
    displacement: np.ndarray   # (res, res, 2)
    normal: np.ndarray         # (res, res, 3), unit length
    periodic: bool = False

    def validate(self) -> None:
        if not (np.all(np.isfinite(self.height))
                and np.all(np.isfinite(self.displacement))
                and np.all(np.isfinite(self.normal))):
            raise ValueError("height field contains non-finite values")
        norms = np.linalg.norm(self.normal, axis=-1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise ValueError("normals are not unit length")


def _directional_density(spectrum: DirectionalSpectrum, omega: np.ndarray,
                         theta: np.ndarray) -> np.ndarray:
    """Vectorized S(omega, theta) over matching-shape arrays (omega > 0)."""
    p = spectrum.params
    s1 = evaluate_1d(p, omega)
    mu = np.where(omega <= p.omega_p, 5.0, -2.5)
    s = 16.0 * (omega / p.omega_p) ** mu
    norm = np.exp((_lgamma(s + 1.0) - _lgamma(s + 0.5)).astype(float)) \
        / (2.0 * math.sqrt(math.pi))
    th = wrap_angle(theta)
    return s1 * norm * np.abs(np.cos(0.5 * th)) ** (2.0 * s)


def resolved_band(spectrum: DirectionalSpectrum, n: int, domain_size: float) -> tuple[float, float]:
    """Frequency range actually representable on the grid: the sampled band
    clipped to the inscribed Nyquist circle and to the fundamental mode."""
    g = spectrum.params.g
    lo, hi = spectrum.params.band
    dk = 2.0 * math.pi / domain_size
    k_nyq = math.pi * n / domain_size
    w_min = math.sqrt(g * dk)        # fundamental
    w_max = math.sqrt(g * k_nyq)
    return max(lo, w_min), min(hi, w_max)


def init_fft(spectrum: DirectionalSpectrum, n: int, domain_size: float,
             seed: int, choppiness: float = 1.0) -> FftState:
    """Draw the initial spectral amplitudes for a periodic tile.

    Deterministic for a fixed seed: Gaussian draws cover the full grid in a
    fixed order regardless of the band mask.
    """
    if n < 2 or (n & (n - 1)) != 0:
        raise ConfigError(f"fft grid size must be a power of two >= 2, got {n}")
    if domain_size <= 0:
        raise ConfigError(f"fft domain_size must be positive, got {domain_size}")

    p = spectrum.params
    g = p.g
    kf = 2.0 * math.pi * np.fft.fftfreq(n, d=domain_size / n)
    kx, ky = np.meshgrid(kf, kf, indexing="ij")
    k = np.hypot(kx, ky)
    dk = 2.0 * math.pi / domain_size

    w_lo, w_hi = resolved_band(spectrum, n, domain_size)
    k_lo, k_hi = w_lo**2 / g, w_hi**2 / g
    mask = (k >= k_lo * (1.0 - 1e-12)) & (k <= k_hi * (1.0 + 1e-12))
    mask[0, 0] = False

    k_safe = np.where(mask, k, 1.0)
    omega = np.sqrt(g * k_safe)
    theta = np.arctan2(ky, kx) - spectrum.mean_direction

    psi = np.zeros((n, n))
    psi[mask] = (_directional_density(spectrum, omega[mask], theta[mask])
                 * (g / (2.0 * omega[mask])) / k_safe[mask])
    sigma2 = psi * dk * dk / 2.0

    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((n, n, 2))
    h0 = np.sqrt(sigma2 / 2.0) * (xi[..., 0] + 1j * xi[..., 1])
    h0[~mask] = 0.0

    mi = (-np.arange(n)) % n
    h0_mc = np.conj(h0[np.ix_(mi, mi)])
    omega_full = np.sqrt(g * k)

    return FftState(n=n, domain_size=domain_size, g=g, rng_seed=seed,
                    choppiness=choppiness, h0=h0, h0_mirror_conj=h0_mc,
                    omega=omega_full, kx=kx, ky=ky)


def zeroed(state: FftState) -> FftState:
    """Copy of the state with all spectral amplitudes cleared (flat surface)."""
    z = np.zeros_like(state.h0)
    return replace(state, h0=z, h0_mirror_conj=z.copy())


def spectral_at(state: FftState, t: float) -> np.ndarray:
    """Evolved Hermitian spectral field at time t."""
    phase = state.omega * t
    rot = np.cos(phase) - 1j * np.sin(phase)
    return state.h0 * rot + state.h0_mirror_conj * np.conj(rot)


def grid_normals(height: np.ndarray, spacing: float, periodic: bool) -> np.ndarray:
    """Unit normals by central differences (wrap-around or clamped borders)."""
    if periodic:
        hx = (np.roll(height, -1, axis=0) - np.roll(height, 1, axis=0)) / (2.0 * spacing)
        hy = (np.roll(height, -1, axis=1) - np.roll(height, 1, axis=1)) / (2.0 * spacing)
    else:
        hx = np.empty_like(height)
        hy = np.empty_like(height)
        hx[1:-1, :] = (height[2:, :] - height[:-2, :]) / (2.0 * spacing)
        hx[0, :] = (height[1, :] - height[0, :]) / spacing
        hx[-1, :] = (height[-1, :] - height[-2, :]) / spacing
        hy[:, 1:-1] = (height[:, 2:] - height[:, :-2]) / (2.0 * spacing)
        hy[:, 0] = (height[:, 1] - height[:, 0]) / spacing
        hy[:, -1] = (height[:, -1] - height[:, -2]) / spacing
    normal = np.stack([-hx, -hy, np.ones_like(height)], axis=-1)
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    return normal


def evolve_and_synthesize(state: FftState, t: float) -> HeightField:
    """Height field of the background tile at time t.

    Pure function of (state, t); each bin is rotated by exp(-i omega t) with
    its mirrored conjugate counter-rotated, keeping the spectral field
    Hermitian and the output real.
    """
    n = state.n
    hh = spectral_at(state, t)
    scale = float(n * n)
    height = np.fft.ifft2(hh).real * scale

    if state.choppiness != 0.0:
        k_safe = np.hypot(state.kx, state.ky)
        k_safe[0, 0] = 1.0
        dx_spec = -1j * (state.kx / k_safe) * hh
        dy_spec = -1j * (state.ky / k_safe) * hh
        disp = np.stack([
            np.fft.ifft2(dx_spec).real * scale,
            np.fft.ifft2(dy_spec).real * scale,
        ], axis=-1) * state.choppiness
    else:
        disp = np.zeros((n, n, 2))

    normal = grid_normals(height, state.spacing, periodic=True)
    return HeightField(resolution=n, origin=np.zeros(2), spacing=state.spacing,
                       height=height, displacement=disp, normal=normal,
                       periodic=True)


def max_imag_residue(state: FftState, t: float) -> float:
    """Largest imaginary part of the synthesized surface relative to its peak
    amplitude; Hermitian symmetry should keep this at rounding level."""
    hh = spectral_at(state, t)
    full = np.fft.ifft2(hh) * float(state.n**2)
    peak = np.max(np.abs(full.real))
    if peak == 0.0:
        return 0.0
    return float(np.max(np.abs(full.imag)) / peak)


def sample_periodic(field: HeightField, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear height and normal at world points, wrapping around the tile.

    points has shape (..., 2); returns (heights (...,), normals (..., 3)).
    """
    pts = np.asarray(points, dtype=float)
    n = field.resolution
    u = (pts[..., 0] - field.origin[0]) / field.spacing
    v = (pts[..., 1] - field.origin[1]) / field.spacing
    i0 = np.floor(u).astype(int)
    j0 = np.floor(v).astype(int)
    fu = u - i0
    fv = v - j0
    i0 %= n
    j0 %= n
    i1 = (i0 + 1) % n
    j1 = (j0 + 1) % n

    h = field.height
    hv = (h[i0, j0] * (1 - fu) * (1 - fv) + h[i1, j0] * fu * (1 - fv)
          + h[i0, j1] * (1 - fu) * fv + h[i1, j1] * fu * fv)
    nm = field.normal
    nv = (nm[i0, j0] * ((1 - fu) * (1 - fv))[..., None]
          + nm[i1, j0] * (fu * (1 - fv))[..., None]
          + nm[i0, j1] * ((1 - fu) * fv)[..., None]
          + nm[i1, j1] * (fu * fv)[..., None])
    nv /= np.linalg.norm(nv, axis=-1, keepdims=True)
    return hv, nv
