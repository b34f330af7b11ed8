import cmath
import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.exceptions import DimensionMismatchError
from app.linalg import hermitian_product
from app.models import ChannelRealization, ReflectionVector, ScenarioConfig
from app.services.channel_service import SeededRng
from app.services.signal_service import (
    effective_snr_db,
    lift_channel,
    lift_reflection,
    optimal_reflection,
    reader_received,
    reference_snr_db,
    reflection_from_estimate,
    tag_received,
)


def channel(h_d, h_c):
    h_c = np.asarray(h_c, dtype=complex)
    return ChannelRealization(h_d=h_d, f=h_c, h_r=np.ones_like(h_c), h_c=h_c)


def random_reflection(rng, n):
    return np.exp(1j * rng.uniform_phase(n))


class TestReceivedSignals:
    def test_tag_examples(self):
        assert tag_received([1], channel(1.0, [0])) == pytest.approx(1.0)
        assert tag_received([1], channel(0.0, [1j])) == pytest.approx(1j)

    def test_tag_random(self, make_channel, rng):
        ch = make_channel(3)
        v = random_reflection(rng, 3)
        assert tag_received(v, ch) == pytest.approx(ch.h_d + hermitian_product(v, ch.h_c))

    def test_reader_examples(self):
        assert reader_received([1], channel(1.0, [0])) == pytest.approx(1.0)
        assert reader_received([1], channel(1.0, [1])) == pytest.approx(4.0)

    def test_reader_reflection_and_noise(self):
        assert reader_received([1], channel(1.0, [1]), noise=0.5, alpha=0.5) == pytest.approx(2.5)

    def test_mismatched_reflection(self, make_channel):
        with pytest.raises(DimensionMismatchError):
            tag_received([1, 1], make_channel(3))

    def test_reflection_must_be_unit_modulus(self):
        with pytest.raises(ValueError):
            ReflectionVector(v=[1.0, 0.5])


class TestLiftedModel:
    def test_lift_examples(self):
        assert_allclose(lift_reflection([1]).a, [1, 1, 1])
        assert_allclose(lift_channel(2.0, [0]).g, [4, 0, 0])

    def test_identity_random(self):
        rng = SeededRng(2024)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.generator.integers(1, 17))
            f, h_r = rng.complex_normal(n), rng.complex_normal(n)
            ch = ChannelRealization(h_d=rng.complex_normal(), f=f, h_r=h_r, h_c=h_r * f)
            v = random_reflection(rng, n)
            lifted = hermitian_product(lift_reflection(v).a, lift_channel(ch.h_d, ch.h_c).g)
            worst = max(worst, abs(reader_received(v, ch) - lifted) / abs(lifted))
        assert worst <= 1e-10

    def test_identity_with_noise(self, make_channel, rng):
        ch = make_channel(4)
        v = random_reflection(rng, 4)
        lifted = hermitian_product(lift_reflection(v).a, lift_channel(ch.h_d, ch.h_c).g)
        assert reader_received(v, ch, noise=0.25j) == pytest.approx(lifted + 0.25j, rel=1e-12)

    def test_head_is_g_bar(self, make_channel):
        ch = make_channel(3)
        assert_allclose(lift_channel(ch.h_d, ch.h_c).head, ch.g_bar)


class TestOptimalReflection:
    def test_examples(self):
        v = optimal_reflection(1.0, [1j])
        assert_allclose(v.v, [1j], atol=1e-15)
        assert tag_received(v, channel(1.0, [1j])) == pytest.approx(2.0)

        phase = cmath.exp(1j * math.pi / 3)
        v = optimal_reflection(phase, [phase])
        assert_allclose(v.v, [1.0], atol=1e-15)
        assert abs(tag_received(v, channel(phase, [phase]))) == pytest.approx(2.0)

    def test_triangle_equality(self, make_channel):
        for n in (1, 5, 10):
            ch = make_channel(n)
            v = optimal_reflection(ch.h_d, ch.h_c)
            expected = abs(ch.h_d) + np.sum(np.abs(ch.h_c))
            assert abs(tag_received(v, ch)) == pytest.approx(expected, rel=1e-12)

    def test_zero_direct_channel_fallback(self, caplog):
        with caplog.at_level(logging.WARNING):
            v = optimal_reflection(0.0, [1j, -1.0])
        assert v.fallback
        assert "Referencia nula" in caplog.text
        assert abs(tag_received(v, channel(0.0, [1j, -1.0]))) == pytest.approx(2.0)

    def test_from_true_estimate(self, make_channel):
        ch = make_channel(6)
        assert_allclose(reflection_from_estimate(ch.g_bar).v, optimal_reflection(ch.h_d, ch.h_c).v, atol=1e-12)

    def test_from_estimate_examples(self):
        assert_allclose(reflection_from_estimate([1, 1j]).v, [1j], atol=1e-15)
        g_hat = np.array([0.3 - 0.2j, 1 + 2j, -1j])
        assert_allclose(reflection_from_estimate(7.5 * g_hat).v, reflection_from_estimate(g_hat).v)

    def test_theta(self):
        assert_allclose(ReflectionVector(v=[1j]).theta, [-math.pi / 2])


class TestSnr:
    def test_reference_unit(self):
        config = ScenarioConfig()
        assert reference_snr_db(config, 1.0, noise_ratio=1.0) == pytest.approx(0.0)

    def test_reference_doubling(self):
        config = ScenarioConfig()
        gain = reference_snr_db(config, 2e-3, 1e-12) - reference_snr_db(config, 1e-3, 1e-12)
        assert gain == pytest.approx(40 * math.log10(2))

    def test_reference_tag_reflection(self):
        config = ScenarioConfig(tag_reflection=0.5)
        assert reference_snr_db(config, 1.0, noise_ratio=1.0) == pytest.approx(20 * math.log10(0.5))

    def test_no_irs_contribution(self):
        config = ScenarioConfig()
        ch = channel(1e-3, [0, 0])
        assert effective_snr_db(config, [1, -1j], ch, 1e-13) == pytest.approx(reference_snr_db(config, 1e-3, 1e-13))

    def test_zero_channel(self):
        assert reference_snr_db(ScenarioConfig(), 0.0, 1.0) == float("-inf")

    def test_invalid_noise_ratio(self):
        with pytest.raises(ValueError):
            reference_snr_db(ScenarioConfig(), 1.0, 0.0)

    def test_default_noise_ratio(self):
        config = ScenarioConfig()
        # σ² = −90 dBm, P_t = 30 dBm => σ²/P_t = −120 dB
        assert reference_snr_db(config, 1e-3) == pytest.approx(0.0, abs=1e-9)
