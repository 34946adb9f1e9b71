"""JONSWAP directional spectrum and its equal-energy frequency partition.

This is the single source of wave statistics for the whole simulation: the
FFT background field and the wave-particle patches both sample the same
spectrum object, which is what keeps the two representations statistically
consistent.

The one-dimensional spectrum is the fetch-limited JONSWAP form

    S(w) = a g^2 w^-5 exp[-5/4 (wp/w)^4] gamma^r,
    r    = exp[-(w - wp)^2 / (2 sigma^2 wp^2)],

with the standard wind/fetch parameterizations

    a     = 0.076 (U10^2 / (F g))^0.22
    wp    = 22 (g^2 / (U10 F))^(1/3)
    gamma = 7.0 (g F / U10^2)^(-0.142)

and a normalized cos-2s directional spreading

    Dir(w, th) = C(s) cos(th/2)^(2s),   s(w) = 16 (w/wp)^mu,

where mu = 5 below the peak and -2.5 above it, and C(s) is the Gamma-function
normalization that makes Dir integrate to one over th in [-pi, pi].

Frequencies are sampled on [0.5 wp, 2.5 wp]; the band is split into buckets
of equal integrated energy so that every bucket carries the same share of the
sea state regardless of how sharply peaked the spectrum is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericError

# Frequency sampling band, as multiples of the peak frequency.
BAND_LO = 0.5
BAND_HI = 2.5

# Quadrature defaults: fixed-grid trapezoid, doubled until converged.
QUAD_BASE_SAMPLES = 4096
QUAD_RTOL = 1e-8


@dataclass(frozen=True)
class SpectrumParams:
    """Wind-sea inputs plus the derived JONSWAP shape parameters.

    The sigma values are not pinned by the usual parameterizations; the
    conventional 0.07 / 0.09 pair is used and kept overridable.
    """

    u10: float            # wind speed at 10 m (m/s)
    fetch: float          # fetch length (m)
    g: float              # gravitational acceleration (m/s^2)
    alpha: float          # spectral scale, derived
    omega_p: float        # peak angular frequency (rad/s), derived
    gamma: float          # peak-enhancement factor, derived
    sigma_low: float = 0.07   # peak width for omega <= omega_p
    sigma_high: float = 0.09  # peak width for omega > omega_p

    def __post_init__(self):
        if not (self.u10 > 0 and self.fetch > 0 and self.g > 0):
            raise ValueError(
                f"u10, fetch, g must be positive, got "
                f"u10={self.u10}, fetch={self.fetch}, g={self.g}"
            )
        if not (0.0 < self.sigma_low < 1.0 and 0.0 < self.sigma_high < 1.0):
            raise ValueError("sigma_low and sigma_high must lie in (0, 1)")

    @property
    def band(self) -> tuple[float, float]:
        """Sampled frequency range (rad/s)."""
        return (BAND_LO * self.omega_p, BAND_HI * self.omega_p)


@dataclass(frozen=True)
class DirectionalSpectrum:
    """A SpectrumParams together with the mean wave direction (world frame)."""

    params: SpectrumParams
    mean_direction: float = 0.0  # radians


def derive_params(u10: float, fetch: float, g: float = 9.81, *,
                  sigma_low: float = 0.07, sigma_high: float = 0.09) -> SpectrumParams:
    """Compute alpha, omega_p and gamma from wind speed, fetch and gravity.

    Raises ValueError if any of the physical inputs is non-positive.
    """
    if u10 <= 0 or fetch <= 0 or g <= 0:
        raise ValueError(
            f"u10, fetch, g must be positive, got u10={u10}, fetch={fetch}, g={g}"
        )
    alpha = 0.076 * (u10**2 / (fetch * g)) ** 0.22
    omega_p = 22.0 * (g**2 / (u10 * fetch)) ** (1.0 / 3.0)
    gamma = 7.0 * (g * fetch / u10**2) ** (-0.142)
    return SpectrumParams(
        u10=u10, fetch=fetch, g=g,
        alpha=alpha, omega_p=omega_p, gamma=gamma,
        sigma_low=sigma_low, sigma_high=sigma_high,
    )


def evaluate_1d(params: SpectrumParams, omega):
    """One-dimensional spectral density S(omega) in m^2 s/rad.

    Accepts a scalar or an ndarray of positive frequencies.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("omega must be positive")
    wp = params.omega_p
    sigma = np.where(w <= wp, params.sigma_low, params.sigma_high)
    r = np.exp(-((w - wp) ** 2) / (2.0 * sigma**2 * wp**2))
    s = (params.alpha * params.g**2 * w**-5.0
         * np.exp(-1.25 * (wp / w) ** 4) * params.gamma**r)
    return s if s.ndim else float(s)


def spreading_exponent(params: SpectrumParams, omega: float) -> float:
    """s(omega) = 16 (omega/omega_p)^mu with mu = 5 below the peak, -2.5 above."""
    mu = 5.0 if omega <= params.omega_p else -2.5
    return 16.0 * (omega / params.omega_p) ** mu


def spreading_norm(s: float) -> float:
    """Normalization constant of the cos-2s model, via log-Gamma for stability."""
    return math.exp(math.lgamma(s + 1.0) - math.lgamma(s + 0.5)) / (2.0 * math.sqrt(math.pi))


def wrap_angle(theta):
    """Wrap angles to [-pi, pi] (exactly even: wrap(-t) == -wrap(t))."""
    t = np.asarray(theta, dtype=float)
    return np.arctan2(np.sin(t), np.cos(t))


def evaluate_dir(params: SpectrumParams, omega: float, theta):
    """Directional spreading Dir(omega, theta) in 1/rad.

    theta is measured relative to the mean wave direction and may be a scalar
    or an array; it is wrapped to [-pi, pi]. Integrates to 1 over a full
    circle for any fixed omega.
    """
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    s = spreading_exponent(params, omega)
    c = spreading_norm(s)
    th = wrap_angle(theta)
    val = c * np.abs(np.cos(0.5 * th)) ** (2.0 * s)
    return val if np.ndim(th) else float(val)


def evaluate_2d(params: SpectrumParams, omega: float, theta):
    """Directional spectral density S(omega, theta) = S(omega) Dir(omega, theta)."""
    return evaluate_1d(params, omega) * evaluate_dir(params, omega, theta)


def trapezoid_energy(params: SpectrumParams, w_lo: float, w_hi: float,
                     base: int = QUAD_BASE_SAMPLES, rtol: float = QUAD_RTOL) -> float:
    """Integral of S(omega) over [w_lo, w_hi] by grid-doubling trapezoid.

    Deterministic: always starts from `base` intervals and doubles until the
    estimate changes by less than rtol (relative), so identical inputs give
    bit-identical results.
    """
    if w_hi <= w_lo:
        return 0.0
    n = base
    prev = None
    for _ in range(8):
        w = np.linspace(w_lo, w_hi, n + 1)
        vals = evaluate_1d(params, w)
        if not np.all(np.isfinite(vals)):
            raise NumericError(f"non-finite spectrum values on [{w_lo}, {w_hi}]")
        est = float(np.trapezoid(vals, w))
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), 1e-300):
            return est
        prev = est
        n *= 2
    return prev


def band_energy(params: SpectrumParams) -> float:
    """Total 1-D energy over the sampled band [0.5 wp, 2.5 wp] (m^2)."""
    lo, hi = params.band
    return trapezoid_energy(params, lo, hi)


# ---------------------------------------------------------------------------
# Equal-energy frequency buckets
# ---------------------------------------------------------------------------

PARTITION_GRID = 8192  # intervals of the cumulative-energy grid


@dataclass(frozen=True)
class FrequencyBucket:
    """One frequency bucket: all particles in it share speed, radius, kernel."""

    index: int
    omega: float          # representative frequency (rad/s)
    delta_omega: float    # bucket width (rad/s)
    omega_lo: float       # interval lower edge
    omega_hi: float       # interval upper edge
    radius: float         # particle radius pi g / omega^2 (m)
    speed: float          # phase speed g / omega (m/s)
    energy_density: float  # integrated 1-D energy of the interval (m^2)
    # cached spreading shape at this bucket's omega, for vectorized sampling
    spread_s: float = field(default=0.0)
    spread_norm: float = field(default=0.0)

    def wavelength(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True)
class BucketTable:
    """Ordered equal-energy buckets plus the angular sampling count."""

    buckets: tuple[FrequencyBucket, ...]
    n_omega: int
    n_theta: int
    total_energy: float   # integrated 1-D energy over the sampled band (m^2)

    def __len__(self) -> int:
        return self.n_omega

    # Array views used by the vectorized particle code.
    @property
    def omegas(self) -> np.ndarray:
        return np.array([b.omega for b in self.buckets])

    @property
    def widths(self) -> np.ndarray:
        return np.array([b.delta_omega for b in self.buckets])

    @property
    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.buckets])

    @property
    def speeds(self) -> np.ndarray:
        return np.array([b.speed for b in self.buckets])

    @property
    def energies(self) -> np.ndarray:
        return np.array([b.energy_density for b in self.buckets])

    @property
    def spread_params(self) -> tuple[np.ndarray, np.ndarray]:
        """(s, norm) arrays for the cos-2s spreading at each bucket omega."""
        return (np.array([b.spread_s for b in self.buckets]),
                np.array([b.spread_norm for b in self.buckets]))


def build_buckets(params: SpectrumParams, n_omega: int, n_theta: int,
                  representative: str = "centroid") -> BucketTable:
    """Partition the sampled band into n_omega buckets of equal energy.

    The cumulative energy is tabulated on a fine grid and inverted at the
    quantiles k/n_omega by monotone (linear) interpolation; each bucket's
    representative frequency is either the energy centroid of its interval
    (default) or the interval midpoint.
    """
    if n_omega < 2:
        raise ValueError(f"n_omega must be >= 2, got {n_omega}")
    if n_theta < 2:
        raise ValueError(f"n_theta must be >= 2, got {n_theta}")
    if representative not in ("centroid", "midpoint"):
        raise ValueError(f"unknown representative rule {representative!r}")

    lo, hi = params.band
    w = np.linspace(lo, hi, PARTITION_GRID + 1)
    s = evaluate_1d(params, w)
    if not np.all(np.isfinite(s)):
        raise NumericError("non-finite spectrum values over the sampled band")
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (s[1:] + s[:-1]) * np.diff(w))])
    total = float(cum[-1])
    quantiles = np.linspace(0.0, total, n_omega + 1)
    edges = np.interp(quantiles, cum, w)
    edges[0], edges[-1] = lo, hi  # exact band ends

    buckets = []
    for i in range(n_omega):
        a, b = float(edges[i]), float(edges[i + 1])
        if representative == "centroid":
            wi = np.linspace(a, b, 2049)
            si = evaluate_1d(params, wi)
            num = float(np.trapezoid(wi * si, wi))
            den = float(np.trapezoid(si, wi))
            rep = num / den if den > 0 else 0.5 * (a + b)
        else:
            rep = 0.5 * (a + b)
        energy = trapezoid_energy(params, a, b, base=2048)
        sp = spreading_exponent(params, rep)
        buckets.append(FrequencyBucket(
            index=i, omega=rep, delta_omega=b - a, omega_lo=a, omega_hi=b,
            radius=math.pi * params.g / rep**2, speed=params.g / rep,
            energy_density=energy,
            spread_s=sp, spread_norm=spreading_norm(sp),
        ))
    return BucketTable(buckets=tuple(buckets), n_omega=n_omega,
                       n_theta=n_theta, total_energy=total)


def with_sigma(params: SpectrumParams, sigma_low: float, sigma_high: float) -> SpectrumParams:
    """Copy of params with overridden peak-width values (test hook)."""
    return replace(params, sigma_low=sigma_low, sigma_high=sigma_high)
