"""hybridsea: a hybrid ocean-surface simulator.

A global FFT height field and local wave-particle patches are driven by one
shared JONSWAP directional spectrum; particles are injected at patch
boundaries at the spectrum's energy-flux rate, synthesized through
frequency-bucketed layers, and blended back into the background field.
"""
from .config import BodyConfig, PatchConfig, SimConfig, load_config, parse_config
from .coupling import BlendMask, PatchSurface, SurfaceSampler, build_mask, query_surface
from .fft_background import FftState, HeightField, evolve_and_synthesize, init_fft
from .harness import FrameStats, Simulation, benchmark, run, trend_matrix
from .interaction import EmissionEvent, FloatingBody, box_body, buoyancy_step, emit_from_motion
from .particles import (
    InjectionLedger,
    ParticleSet,
    PatchRegion,
    WaveParticle,
    advect,
    groups_per_step,
    inject,
)
from .patch_synthesis import (
    LayerStack,
    SmoothingKernel,
    accumulate,
    build_kernels,
    finish_field,
    plan_layers,
    smooth_and_sum,
    synthesize,
)
from .spectrum import (
    BucketTable,
    DirectionalSpectrum,
    FrequencyBucket,
    SpectrumParams,
    band_energy,
    build_buckets,
    derive_params,
    evaluate_1d,
    evaluate_2d,
    evaluate_dir,
)

__all__ = [
    "BlendMask", "BodyConfig", "BucketTable", "DirectionalSpectrum",
    "EmissionEvent", "FftState", "FloatingBody", "FrameStats",
    "FrequencyBucket", "HeightField", "InjectionLedger", "LayerStack",
    "ParticleSet", "PatchConfig", "PatchRegion", "PatchSurface",
    "SimConfig", "Simulation", "SmoothingKernel", "SpectrumParams",
    "SurfaceSampler", "WaveParticle",
    "accumulate", "advect", "band_energy", "benchmark", "box_body",
    "build_buckets", "build_kernels", "build_mask", "buoyancy_step",
    "derive_params", "emit_from_motion", "evaluate_1d", "evaluate_2d",
    "evaluate_dir", "evolve_and_synthesize", "finish_field",
    "groups_per_step", "init_fft", "inject", "load_config", "parse_config",
    "plan_layers", "query_surface", "run", "smooth_and_sum", "synthesize",
    "trend_matrix",
]

__version__ = "0.1.0"
