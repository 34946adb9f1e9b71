"""Layered synthesis tests: splatting, separable smoothing, calibration, normals."""
import math

import numpy as np
import pytest

import oracles
from hybridsea.errors import ConfigError
from hybridsea.particles import ParticleSet, PatchRegion, WaveParticle
from hybridsea.patch_synthesis import (
    LayerStack,
    SmoothingKernel,
    accumulate,
    build_kernels,
    convolve1d_zero,
    finish_field,
    mean_radius,
    plan_layers,
    raised_cosine_taps,
    smooth_and_sum,
    smooth_layer,
    synthesize,
)
from hybridsea.spectrum import build_buckets, derive_params

G = 9.81


@pytest.fixture(scope="module")
def table():
    return build_buckets(derive_params(5.0, 10000.0, G), 16, 16)


@pytest.fixture
def patch():
    return PatchRegion((0.0, 0.0), 100.0, 100.0, 10.0)


def put(pool, x, y, amp, bucket, direction=(1.0, 0.0)):
    pool.append(WaveParticle(np.array([x, y]), np.array(direction, dtype=float),
                             amp, bucket))


class TestKernels:
    def test_taps_normalized_symmetric_odd(self, table):
        for k in build_kernels(table, 100.0 / 511):
            assert len(k.taps) % 2 == 1
            assert k.taps.sum() == pytest.approx(1.0, abs=1e-9)
            np.testing.assert_allclose(k.taps, k.taps[::-1], rtol=1e-14)
            assert np.all(k.taps > 0.0)

    def test_support_matches_radius(self, table):
        texel = 100.0 / 511
        kernels = build_kernels(table, texel)
        for b, k in zip(table.buckets, kernels):
            assert k.half_width == max(1, round(b.radius / texel))

    def test_unknown_convention_rejected(self, table):
        with pytest.raises(ConfigError):
            build_kernels(table, 0.2, convention="volume")


class TestConvolution:
    def test_separability_oracle(self):
        # two 1-D passes must equal brute-force 2-D convolution, 32x32 grid
        rng = np.random.default_rng(0)
        grid = rng.standard_normal((32, 32))
        taps = raised_cosine_taps(4)
        two_pass = convolve1d_zero(convolve1d_zero(grid, taps, 0), taps, 1)
        direct = oracles.direct_conv2_zero_pad(grid, np.outer(taps, taps))
        np.testing.assert_allclose(two_pass, direct, atol=1e-12)

    def test_zero_padding_at_borders(self):
        grid = np.zeros((16, 16))
        grid[0, 8] = 1.0
        taps = raised_cosine_taps(3)
        out = convolve1d_zero(grid, taps, 0)
        # mass leaks off the zero-padded border
        assert out.sum() < 1.0
        np.testing.assert_allclose(out[:4, 8], taps[3:], rtol=1e-12, atol=1e-14)

    def test_kernel_wider_than_grid_rejected(self):
        with pytest.raises(ConfigError):
            convolve1d_zero(np.zeros((8, 8)), raised_cosine_taps(5), 0)

    def test_mass_preserved_in_interior(self):
        grid = np.zeros((64, 64))
        grid[30:34, 29:35] = 2.5
        taps = raised_cosine_taps(6)
        out = convolve1d_zero(convolve1d_zero(grid, taps, 0), taps, 1)
        assert out.sum() == pytest.approx(grid.sum(), rel=1e-12)


class TestAccumulate:
    def test_empty_particles_zero_layers(self, table, patch):
        stack = LayerStack(patch, 64, build_kernels(table, 100.0 / 63))
        accumulate(ParticleSet(1), patch, stack)
        for i in range(16):
            assert np.all(stack.layer_view(i) == 0.0)

    def test_single_particle_on_texel_center(self, table, patch):
        stack = LayerStack(patch, 101, build_kernels(table, 1.0))
        pool = ParticleSet(1)
        put(pool, 25.0, 75.0, 0.37, 5)  # texel (25, 75) exactly
        accumulate(pool, patch, stack)
        view = stack.layer_view(5)
        assert view[25, 75] == pytest.approx(0.37)
        view[25, 75] = 0.0
        assert np.all(view == 0.0)

    def test_coincident_opposite_amplitudes_cancel(self, table, patch):
        stack = LayerStack(patch, 101, build_kernels(table, 1.0))
        pool = ParticleSet(2)
        put(pool, 40.3, 60.7, 0.5, 3)
        put(pool, 40.3, 60.7, -0.5, 3)
        accumulate(pool, patch, stack)
        np.testing.assert_allclose(stack.layer_view(3), 0.0, atol=1e-15)

    def test_out_of_pad_particle_clamped_and_counted(self, table, patch):
        stack = LayerStack(patch, 64, build_kernels(table, 100.0 / 63))
        pool = ParticleSet(1)
        put(pool, -500.0, 50.0, 0.2, 0)
        accumulate(pool, patch, stack)
        assert stack.clamped_splats == 1
        assert stack.layers[0].sum() == pytest.approx(0.2)  # mass kept at edge

    def test_grace_band_splats_at_true_position(self, table, patch):
        # a particle slightly outside the patch lands in the pad, not clamped
        stack = LayerStack(patch, 101, build_kernels(table, 1.0))
        pool = ParticleSet(1)
        put(pool, -2.0, 50.0, 0.4, 0)
        accumulate(pool, patch, stack)
        assert stack.clamped_splats == 0
        pad = stack.pads[0]
        assert stack.layers[0][pad - 2, pad + 50] == pytest.approx(0.4)


class TestSmoothAndSum:
    def test_single_splat_bump_shape(self, table, patch):
        stack = LayerStack(patch, 101, build_kernels(table, 1.0, convention="peak"))
        pool = ParticleSet(1)
        put(pool, 50.0, 50.0, 1.0, 8)
        accumulate(pool, patch, stack)
        h = smooth_and_sum(stack)
        r = stack.kernels[8].half_width
        assert h[50, 50] == pytest.approx(h.max())
        assert h[50, 50] == pytest.approx(1.0, rel=1e-12)  # peak convention
        # support extends +-R texels and is symmetric (product form)
        assert h[50 + r, 50] > 0.0 and h[50 + r + 1, 50] == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(h[50 - r:50 + r + 1, 50], h[50 + r:50 - r - 1:-1, 50],
                                   rtol=1e-12)
        np.testing.assert_allclose(h[50, 40:61], h[40:61, 50], rtol=1e-12)

    def test_linearity(self, table, patch):
        kernels = build_kernels(table, 1.0)
        rng = np.random.default_rng(1)

        def field_of(pool):
            stack = LayerStack(patch, 101, kernels)
            accumulate(pool, patch, stack)
            return smooth_and_sum(stack)

        p1, p2, both = ParticleSet(8), ParticleSet(8), ParticleSet(16)
        for _ in range(6):
            x, y = rng.uniform(10, 90, 2)
            a = rng.normal()
            b = int(rng.integers(0, 16))
            put(p1, x, y, a, b)
            put(both, x, y, a, b)
        for _ in range(6):
            x, y = rng.uniform(10, 90, 2)
            a = rng.normal()
            b = int(rng.integers(0, 16))
            put(p2, x, y, a, b)
            put(both, x, y, a, b)
        np.testing.assert_allclose(field_of(both), field_of(p1) + field_of(p2),
                                   atol=1e-12)

    def test_sum_of_two_layers(self, table, patch):
        kernels = build_kernels(table, 1.0)
        stack = LayerStack(patch, 101, kernels)
        pool = ParticleSet(2)
        put(pool, 30.0, 30.0, 0.5, 2)
        put(pool, 70.0, 70.0, 0.25, 9)
        accumulate(pool, patch, stack)
        combined = smooth_and_sum(stack)

        solo = []
        for x, y, a, b in [(30.0, 30.0, 0.5, 2), (70.0, 70.0, 0.25, 9)]:
            s = LayerStack(patch, 101, kernels)
            q = ParticleSet(1)
            put(q, x, y, a, b)
            accumulate(q, patch, s)
            solo.append(smooth_and_sum(s))
        np.testing.assert_allclose(combined, solo[0] + solo[1], atol=1e-13)

    def test_energy_convention_pair_square_sum(self):
        # a crest+trough pair realizes exactly the booked energy / (rho g)
        # when the trough offset is texel-aligned
        params = derive_params(5.0, 10000.0, G)
        table = build_buckets(params, 16, 16)
        b = table.buckets[4]
        texel = b.radius / 8.0  # radius and trough shift are exactly 8 texels
        side = 64 * texel
        patch = PatchRegion((0.0, 0.0), side, side, texel)
        kernels = build_kernels(table, texel, convention="energy")
        pool = ParticleSet(2)
        amp = 0.3
        cx = 32 * texel
        put(pool, cx, cx, amp, 4)
        put(pool, cx - b.radius, cx, -amp, 4)
        stack = LayerStack(patch, 65, kernels)
        accumulate(pool, patch, stack)
        h = smooth_and_sum(stack)
        measured = float(np.sum(h**2) * texel**2)
        expected = math.pi * b.radius**2 * amp**2 / 8.0
        assert measured == pytest.approx(expected, rel=1e-9)

    def test_streaming_synthesize_matches_stack_path(self, table, patch):
        kernels = build_kernels(table, 100.0 / 100)
        pool = ParticleSet(32)
        rng = np.random.default_rng(3)
        for _ in range(25):
            put(pool, rng.uniform(0, 100), rng.uniform(0, 100), rng.normal(),
                int(rng.integers(0, 16)))
        stack = LayerStack(patch, 101, kernels)
        accumulate(pool, patch, stack)
        ref = smooth_and_sum(stack)
        fast, clamped = synthesize(pool, patch, 101, kernels)
        np.testing.assert_allclose(fast, ref, atol=1e-12)
        assert clamped == stack.clamped_splats == 0

    def test_layer_plan_decimates_long_radii(self, table, patch):
        texel = 100.0 / 512
        plan = plan_layers(table, texel, 513)
        # factors shrink monotonically with frequency (radius ~ 1/omega^2)
        assert all(a >= b for a, b in zip(plan.factors, plan.factors[1:]))
        assert plan.factors[-1] == 1
        assert plan.factors[0] > 4
        # coarse kernels keep at least min_taps of support
        for k, f in zip(plan.kernels, plan.factors):
            if f > 1:
                assert k.half_width >= 4

    def test_multires_close_to_exact(self, table, patch):
        rng = np.random.default_rng(9)
        pool = ParticleSet(1 << 12)
        for _ in range(3000):
            put(pool, rng.uniform(0, 100), rng.uniform(0, 100),
                rng.normal() * 0.01, int(rng.integers(0, 16)))
        res = 257
        texel = patch.l1 / (res - 1)
        exact, _ = synthesize(pool, patch, res, build_kernels(table, texel))
        plan = plan_layers(table, texel, res)
        fast, _ = synthesize(pool, patch, res, plan)
        rel = np.sqrt(np.mean((fast - exact) ** 2)) / np.sqrt(np.mean(exact**2))
        assert rel < 0.2
        assert 0.85 <= float(np.mean(fast**2) / np.mean(exact**2)) <= 1.15


class TestFinishField:
    def test_flat_normals(self, patch):
        f = finish_field(np.zeros((64, 64)), patch)
        np.testing.assert_allclose(f.normal[..., 2], 1.0)
        assert np.all(f.displacement == 0.0)

    def test_planar_ramp_normals(self, patch):
        res = 64
        spacing = patch.l1 / (res - 1)
        a = 0.05
        x = np.arange(res) * spacing
        heights = np.tile(a * x[:, None], (1, res))
        f = finish_field(heights, patch)
        tilt = math.atan(a)
        expect = np.array([-math.sin(tilt), 0.0, math.cos(tilt)])
        inner = f.normal[1:-1, 1:-1]
        np.testing.assert_allclose(inner, np.broadcast_to(expect, inner.shape),
                                   atol=1e-9)

    def test_sinusoid_gradient_check(self, patch):
        # 8 texels per wavelength; FD normal within 1% (abs) of analytic
        res = 129
        spacing = patch.l1 / (res - 1)
        lam = 8 * spacing
        amp = 0.01 * lam
        k = 2 * math.pi / lam
        x = np.arange(res) * spacing
        heights = np.tile(amp * np.sin(k * x)[:, None], (1, res))
        f = finish_field(heights, patch)
        slope = amp * k * np.cos(k * x)
        n_true = np.stack([-slope, np.zeros(res), np.ones(res)], axis=-1)
        n_true /= np.linalg.norm(n_true, axis=-1, keepdims=True)
        err = np.abs(f.normal[1:-1, 64] - n_true[1:-1])
        assert err.max() < 0.01

    def test_choppy_displacement(self, patch):
        res = 32
        rng = np.random.default_rng(0)
        heights = rng.standard_normal((res, res)) * 0.01
        f = finish_field(heights, patch, choppiness=0.7, displacement_scale=2.0)
        spacing = patch.l1 / (res - 1)
        gx, gy = np.gradient(heights, spacing)
        np.testing.assert_allclose(f.displacement[..., 0], -1.4 * gx, rtol=1e-12)
        np.testing.assert_allclose(f.displacement[..., 1], -1.4 * gy, rtol=1e-12)

    def test_rejects_nonfinite(self, patch):
        h = np.zeros((16, 16))
        h[3, 3] = np.nan
        with pytest.raises(ValueError):
            finish_field(h, patch)

    def test_mean_radius_weighting(self, table):
        r = mean_radius(table)
        assert table.radii.min() < r < table.radii.max()
