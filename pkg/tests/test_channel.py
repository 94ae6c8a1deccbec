import math

import numpy as np
import pytest

from afdmsim.channel import (
    PathTap,
    PhysicalPath,
    add_awgn,
    apply_channel,
    apply_channel_linear,
    quantize_path,
)
from afdmsim.params import classic_params, preset, proposed_params
from afdmsim.waveform import add_cpp, modulate, remove_cpp


class TestQuantizePath:
    def test_reference_delay_tap(self):
        # tau = 1302 ns round trip -> R = tau*c/2; B = 7.68 MHz -> l = 10
        tau = 1302e-9
        p = PhysicalPath(range_m=tau * 299_792_458.0 / 2, radial_velocity_mps=0.0)
        tap = quantize_path(p, 7.68e6, 512 / 7.68e6, 79e9)
        assert tap.delay_tap == 10

    def test_reference_doppler_tap(self):
        # nu = 45 kHz -> v = nu*c/(2 fc); T = 512/7.68 MHz -> k = 3
        nu = 45e3
        v = nu * 299_792_458.0 / (2 * 79e9)
        tap = quantize_path(
            PhysicalPath(range_m=0.0, radial_velocity_mps=v), 7.68e6, 512 / 7.68e6, 79e9
        )
        assert tap.doppler_tap == 3

    def test_static_origin(self):
        tap = quantize_path(PhysicalPath(0.0, 0.0), 7.68e6, 1e-4, 79e9)
        assert (tap.delay_tap, tap.doppler_tap) == (0, 0)

    def test_negative_velocity_gives_negative_tap(self):
        tap = quantize_path(
            PhysicalPath(10.0, -100.0), 7.68e6, 512 / 7.68e6, 79e9
        )
        assert tap.doppler_tap < 0


class TestApplyChannel:
    def setup_method(self):
        self.cfg = proposed_params(8, 4)
        rng = np.random.default_rng(0)
        self.s = modulate(self.cfg, rng.standard_normal(32) + 1j * rng.standard_normal(32))

    def test_identity_path(self):
        r = apply_channel(self.cfg, self.s, [PathTap(1.0, 0, 0)])
        assert np.abs(r.samples - self.s.samples).max() < 1e-15

    def test_pure_cyclic_shift(self):
        r = apply_channel(self.cfg, self.s, [PathTap(1.0, 2, 0)])
        assert np.abs(r.samples - np.roll(self.s.samples, 2)).max() < 1e-15

    def test_two_path_linearity(self):
        p1, p2 = PathTap(0.7 + 0.1j, 1, 1), PathTap(0.2 - 0.4j, 3, -1)
        both = apply_channel(self.cfg, self.s, [p1, p2]).samples
        split = (
            apply_channel(self.cfg, self.s, [p1]).samples
            + apply_channel(self.cfg, self.s, [p2]).samples
        )
        assert np.abs(both - split).max() < 1e-14

    def test_linear_in_gain(self):
        a = apply_channel(self.cfg, self.s, [PathTap(2.0 + 1.0j, 1, 1)]).samples
        b = apply_channel(self.cfg, self.s, [PathTap(1.0, 1, 1)]).samples
        assert np.abs(a - (2.0 + 1.0j) * b).max() < 1e-13

    def test_doppler_phase_convention(self):
        # positive tap k applies exp(-j*2*pi*k*n/n_c)
        r = apply_channel(self.cfg, self.s, [PathTap(1.0, 0, 1)])
        n = np.arange(32)
        expected = self.s.samples * np.exp(-2j * np.pi * n / 32)
        assert np.abs(r.samples - expected).max() < 1e-13


class TestCppEquivalence:
    @pytest.mark.parametrize(
        "cfg",
        [
            proposed_params(8, 4, l_cpp=3),
            classic_params(32, 1, k_chirps=4, l_cpp=3),
            preset("ofdm", 32, k_chirps=4, l_cpp=3),
            preset("ocdm", 32, k_chirps=4, l_cpp=3),
        ],
        ids=lambda c: str(c.c1),
    )
    def test_linear_channel_plus_cpp_equals_cyclic(self, cfg):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        s = modulate(cfg, x)
        paths = [PathTap(0.8 + 0.2j, 0, 1), PathTap(0.5 - 0.1j, 2, -1), PathTap(0.3j, 3, 0)]
        direct = apply_channel(cfg, s, paths)
        physical = remove_cpp(cfg, apply_channel_linear(cfg, add_cpp(cfg, s), paths))
        assert np.abs(direct.samples - physical.samples).max() < 1e-10

    def test_requires_cpp_signal(self):
        cfg = proposed_params(8, 4, l_cpp=2)
        s = modulate(cfg, np.ones(32, dtype=complex))
        with pytest.raises(ValueError, match="CPP"):
            apply_channel_linear(cfg, s, [PathTap(1.0, 1, 0)])


class TestAwgn:
    def test_infinite_snr_identity(self):
        cfg = proposed_params(8, 4)
        s = modulate(cfg, np.ones(32, dtype=complex))
        out = add_awgn(s, math.inf, np.random.default_rng(0))
        assert out.samples is s.samples

    def test_empirical_noise_power(self):
        cfg = proposed_params(64, 8)
        rng = np.random.default_rng(42)
        zero = modulate(cfg, np.zeros(512))
        total = 0.0
        for _ in range(100):
            noisy = add_awgn(zero, 0.0, rng)
            total += np.mean(np.abs(noisy.samples) ** 2)
        assert abs(total / 100 - 1.0) < 0.1

    def test_zero_signal_uses_unit_reference(self):
        cfg = proposed_params(64, 8)
        rng = np.random.default_rng(1)
        zero = modulate(cfg, np.zeros(512))
        noisy = add_awgn(zero, 10.0, rng)
        assert abs(np.mean(np.abs(noisy.samples) ** 2) - 0.1) < 0.05
