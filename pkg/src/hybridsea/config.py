"""Simulation configuration: flat key=value text with section prefixes.

The format is deliberately parser-free and bit-exact reproducible:

    # comment
    spectrum.u10 = 5
    fft.n = 512
    patch.0.origin = 200,200
    body.0.size = 2,1,0.5

Unknown keys are rejected with the offending key in the message, as are
malformed values, so a typo fails loudly at load time.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError

MODES = ("hybrid", "fft-only", "wp-only")


@dataclass(frozen=True)
class PatchConfig:
    origin: tuple[float, float] = (200.0, 200.0)
    size: tuple[float, float] = (100.0, 100.0)
    res: int = 512
    margin: float = 10.0
    choppiness: float = 0.0
    track_body: int = -1          # body id to follow, -1 for static


@dataclass(frozen=True)
class BodyConfig:
    position: tuple[float, float, float] = (250.0, 250.0, 0.0)
    size: tuple[float, float, float] = (2.0, 2.0, 1.0)
    density: float = 500.0
    yaw: float = 0.0
    max_thrust: float = 0.0
    max_yaw_torque: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    # spectrum
    u10: float = 5.0
    fetch: float = 10000.0
    g: float = 9.81
    mean_direction: float = 0.0
    n_omega: int = 16
    n_theta: int = 16
    # sim
    rho: float = 1000.0
    dt: float = 1.0 / 60.0
    frames: int = 600
    mode: str = "hybrid"
    seed: int = 1234
    trough_fraction: float = 1.0
    amplitude_convention: str = "energy"
    normal_mode: str = "blend"
    # fft tile
    fft_n: int = 512
    fft_domain: float = 500.0
    fft_choppiness: float = 1.0
    # patches / bodies
    patches: tuple[PatchConfig, ...] = (PatchConfig(),)
    bodies: tuple[BodyConfig, ...] = ()
    # output
    output_dir: str = "out"
    write_frames: bool = True
    output_stride: int = 1
    # streaming
    stream_port: int = 0
    stream_rate: float = 20.0
    stream_res: int = 128
    stream_window: float = 160.0
    # benchmark
    bench_warmup: int = 60
    bench_measure: int = 60

    def validate(self) -> "SimConfig":
        def positive(name, v):
            if not v > 0:
                raise ConfigError(f"{name} must be positive, got {v}")

        positive("spectrum.u10", self.u10)
        positive("spectrum.fetch", self.fetch)
        positive("spectrum.g", self.g)
        positive("sim.rho", self.rho)
        if not (0.0 < self.dt <= 0.1):
            raise ConfigError(f"sim.dt must lie in (0, 0.1], got {self.dt}")
        if self.frames < 0:
            raise ConfigError(f"sim.frames must be nonnegative, got {self.frames}")
        if self.mode not in MODES:
            raise ConfigError(f"sim.mode must be one of {MODES}, got {self.mode!r}")
        if self.n_omega < 2 or self.n_theta < 2:
            raise ConfigError("spectrum.n_omega and spectrum.n_theta must be >= 2")
        if self.fft_n < 2 or (self.fft_n & (self.fft_n - 1)) != 0:
            raise ConfigError(f"fft.n must be a power of two, got {self.fft_n}")
        positive("fft.domain_size", self.fft_domain)
        for i, p in enumerate(self.patches):
            if p.size[0] <= 0 or p.size[1] <= 0:
                raise ConfigError(f"patch.{i}.size must be positive")
            if not (0.0 < p.margin < 0.5 * min(p.size)):
                raise ConfigError(
                    f"patch.{i}.margin must lie in (0, min(size)/2), got {p.margin}")
            if p.res < 2:
                raise ConfigError(f"patch.{i}.res must be >= 2")
            if p.track_body >= len(self.bodies):
                raise ConfigError(f"patch.{i}.track_body references missing body")
        for j, b in enumerate(self.bodies):
            if min(b.size) <= 0:
                raise ConfigError(f"body.{j}.size must be positive")
            positive(f"body.{j}.density", b.density)
        if self.output_stride < 1:
            raise ConfigError("output.stride must be >= 1")
        return self


def _parse_scalar(key: str, raw: str, kind):
    try:
        if kind is bool:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None


def _parse_tuple(key: str, raw: str, n: int) -> tuple:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != n:
        raise ConfigError(f"{key}: expected {n} comma-separated values, got {raw!r}")
    return tuple(_parse_scalar(key, p, float) for p in parts)


# key -> (SimConfig attribute, parser)
_SCALAR_KEYS = {
    "spectrum.u10": ("u10", float),
    "spectrum.fetch": ("fetch", float),
    "spectrum.g": ("g", float),
    "spectrum.mean_direction": ("mean_direction", float),
    "spectrum.n_omega": ("n_omega", int),
    "spectrum.n_theta": ("n_theta", int),
    "sim.rho": ("rho", float),
    "sim.dt": ("dt", float),
    "sim.frames": ("frames", int),
    "sim.mode": ("mode", str),
    "sim.seed": ("seed", int),
    "sim.trough_fraction": ("trough_fraction", float),
    "sim.amplitude_convention": ("amplitude_convention", str),
    "sim.normal_mode": ("normal_mode", str),
    "fft.n": ("fft_n", int),
    "fft.domain_size": ("fft_domain", float),
    "fft.choppiness": ("fft_choppiness", float),
    "output.dir": ("output_dir", str),
    "output.write_frames": ("write_frames", bool),
    "output.stride": ("output_stride", int),
    "stream.port": ("stream_port", int),
    "stream.rate": ("stream_rate", float),
    "stream.res": ("stream_res", int),
    "stream.window": ("stream_window", float),
    "bench.warmup_frames": ("bench_warmup", int),
    "bench.measure_frames": ("bench_measure", int),
}

_PATCH_KEYS = {"origin", "size", "res", "margin", "choppiness", "track_body"}
_BODY_KEYS = {"position", "size", "density", "yaw", "max_thrust", "max_yaw_torque"}


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse key=value lines into a SimConfig (on top of `base` or defaults)."""
    cfg = base if base is not None else SimConfig()
    scalars: dict = {}
    patches: dict[int, dict] = {}
    bodies: dict[int, dict] = {}
    explicit_patches = False

    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()

        if key in _SCALAR_KEYS:
            attr, kind = _SCALAR_KEYS[key]
            scalars[attr] = _parse_scalar(key, raw, kind)
            continue

        parts = key.split(".")
        if len(parts) == 3 and parts[0] in ("patch", "body") and parts[1].isdigit():
            idx, fieldname = int(parts[1]), parts[2]
            if parts[0] == "patch":
                if fieldname not in _PATCH_KEYS:
                    raise ConfigError(f"line {lineno}: unknown patch key {key!r}")
                explicit_patches = True
                d = patches.setdefault(idx, {})
                if fieldname in ("origin", "size"):
                    d[fieldname] = _parse_tuple(key, raw, 2)
                elif fieldname in ("res", "track_body"):
                    d[fieldname] = _parse_scalar(key, raw, int)
                else:
                    d[fieldname] = _parse_scalar(key, raw, float)
            else:
                if fieldname not in _BODY_KEYS:
                    raise ConfigError(f"line {lineno}: unknown body key {key!r}")
                d = bodies.setdefault(idx, {})
                if fieldname in ("position", "size"):
                    d[fieldname] = _parse_tuple(key, raw, 3)
                else:
                    d[fieldname] = _parse_scalar(key, raw, float)
            continue

        if key == "patch.count" and raw == "0":
            explicit_patches = True
            continue

        raise ConfigError(f"line {lineno}: unknown key {key!r}")

    if explicit_patches:
        patch_list = tuple(PatchConfig(**patches[i]) for i in sorted(patches))
    else:
        patch_list = cfg.patches
    body_list = tuple(BodyConfig(**bodies[i]) for i in sorted(bodies)) \
        if bodies else cfg.bodies

    return replace(cfg, patches=patch_list, bodies=body_list, **scalars).validate()


def load_config(path: str, base: SimConfig | None = None) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


def dump_config(cfg: SimConfig) -> str:
    """Serialize back to the flat format (the run's reproducibility echo)."""
    lines = []
    for key, (attr, kind) in _SCALAR_KEYS.items():
        v = getattr(cfg, attr)
        lines.append(f"{key} = {str(v).lower() if kind is bool else v}")
    if cfg.patches:
        for i, p in enumerate(cfg.patches):
            lines.append(f"patch.{i}.origin = {p.origin[0]},{p.origin[1]}")
            lines.append(f"patch.{i}.size = {p.size[0]},{p.size[1]}")
            lines.append(f"patch.{i}.res = {p.res}")
            lines.append(f"patch.{i}.margin = {p.margin}")
            lines.append(f"patch.{i}.choppiness = {p.choppiness}")
            lines.append(f"patch.{i}.track_body = {p.track_body}")
    else:
        lines.append("patch.count = 0")
    for j, b in enumerate(cfg.bodies):
        lines.append(f"body.{j}.position = {b.position[0]},{b.position[1]},{b.position[2]}")
        lines.append(f"body.{j}.size = {b.size[0]},{b.size[1]},{b.size[2]}")
        lines.append(f"body.{j}.density = {b.density}")
        lines.append(f"body.{j}.yaw = {b.yaw}")
        lines.append(f"body.{j}.max_thrust = {b.max_thrust}")
        lines.append(f"body.{j}.max_yaw_torque = {b.max_yaw_torque}")
    return "\n".join(lines) + "\n"
