import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.exceptions import ComplexityCapError, ConfigError
from app.models import ScenarioConfig
from app.services.baseline_service import (
    baseline1_estimate,
    baseline2_select,
    baseline3_estimate,
    dft_codebook,
    enumerate_sign_candidates,
    sign_patterns,
    sqrt_candidates,
    testing_mse as candidate_testing_mse,
    testing_reflections as omega2_reflections,
)
from app.services.channel_service import SeededRng, realize_channels
from app.services.estimation_service import dft_training, optimal_phase, run_proposed
from app.services.signal_service import effective_snr_db, optimal_reflection, reader_received


class TestBaseline1:
    def test_forced_optimal_phase_matches_proposed(self, make_channel):
        ch = make_channel(4)
        proposed = run_proposed(ch, 1e-2, SeededRng(5))
        baseline = baseline1_estimate(ch, 1e-2, 5, 4, SeededRng(5), phi=optimal_phase())
        assert baseline.scheme == "baseline1"
        assert_allclose(baseline.g_hat, proposed.g_hat)

    def test_noiseless_exact_for_any_phase(self, make_channel, rng):
        ch = make_channel(3)
        for phi in (0.4, 1.9, 4.0):
            result = baseline1_estimate(ch, 0.0, 4, 3, rng, phi=phi)
            assert_allclose(result.g_hat, ch.g_bar, rtol=1e-9, atol=1e-12)

    def test_random_phase_mse_not_below_proposed(self, make_channel, rng):
        ch = make_channel(4)
        proposed = run_proposed(ch, 1e-3, rng).diagnostics["theoretical_mse"]
        baseline = [baseline1_estimate(ch, 1e-3, 5, 4, rng).diagnostics["theoretical_mse"] for _ in range(200)]
        assert np.mean(baseline) >= proposed

    def test_degenerate_draw_is_redrawn(self, make_channel, monkeypatch, caplog):
        rng = SeededRng(3)
        draws = iter([0.0, math.pi, 1.0])
        monkeypatch.setattr(rng, "uniform", lambda low, high, size=None: next(draws))
        with caplog.at_level(logging.WARNING):
            result = baseline1_estimate(make_channel(2), 1e-3, 3, 2, rng)
        assert result.diagnostics["phi"] == pytest.approx(1.0)
        assert caplog.text.count("degenerada") == 2

    def test_budget(self, make_channel, rng):
        assert baseline1_estimate(make_channel(3), 1e-3, 6, 3, rng).training_symbols == 12


class TestBaseline2:
    def test_single_candidate(self, make_channel, rng):
        result = baseline2_select(make_channel(3), 1e-3, 1, rng)
        assert result.training_symbols == 1
        assert_allclose(result.reflection.v, np.ones(3))
        assert result.g_hat is None

    def test_selects_optimal_when_available(self, make_channel, rng):
        ch = make_channel(4)
        v_opt = optimal_reflection(ch.h_d, ch.h_c).v
        candidates = np.vstack([np.exp(1j * rng.uniform_phase((5, 4))), v_opt])
        result = baseline2_select(ch, 0.0, 6, rng, candidates=candidates)
        assert result.diagnostics["selected_index"] == 5
        chosen = effective_snr_db(ScenarioConfig(), result.reflection, ch, 1.0)
        for candidate in candidates:
            assert chosen >= effective_snr_db(ScenarioConfig(), candidate, ch, 1.0) - 1e-9

    def test_brute_force_oracle(self, make_channel):
        ch = make_channel(2)
        candidates = dft_codebook(8, 2, SeededRng(3))
        assert candidates.shape == (8, 2)
        powers = [abs(reader_received(v, ch)) ** 2 for v in candidates]
        result = baseline2_select(ch, 0.0, 8, SeededRng(4), candidates=candidates)
        assert result.diagnostics["selected_index"] == int(np.argmax(powers))
        assert_allclose(result.diagnostics["powers"], powers)

    def test_codebook_is_unit_modulus(self, rng):
        codebook = dft_codebook(4, 6, rng)
        assert codebook.shape == (4, 6)
        assert_allclose(np.abs(codebook), 1.0)

    def test_invalid_codebook_size(self, rng):
        with pytest.raises(ConfigError):
            dft_codebook(0, 2, rng)


class TestSignEnumeration:
    @pytest.mark.parametrize(
        "y, expected",
        [
            (4, (2, -2)),
            (-1, (1j, -1j)),
            (2j, (1 + 1j, -1 - 1j)),
        ],
    )
    def test_sqrt_candidates(self, y, expected):
        assert sqrt_candidates(y) == pytest.approx(expected)

    def test_sign_patterns(self):
        patterns = sign_patterns(2)
        assert patterns.shape == (4, 2)
        assert_allclose(patterns[0], [1, 1])
        assert {tuple(row) for row in patterns} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}

    def test_matches_scripted_oracle(self, make_channel):
        ch = make_channel(2)
        omega1 = dft_training(3, 2).V
        y = np.array([reader_received(v, ch) for v in omega1])
        candidates = enumerate_sign_candidates(y, omega1)
        assert candidates.shape == (8, 3)

        rows = np.hstack([np.ones((3, 1)), omega1.conj()])
        roots = np.array([sqrt_candidates(value)[0] for value in y])
        oracle = []
        for s0 in (1, -1):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    rhs = np.array([s0, s1, s2]) * roots
                    oracle.append(np.linalg.lstsq(rows, rhs, rcond=None)[0])
        for expected in oracle:
            assert np.min(np.linalg.norm(candidates - expected, axis=1)) < 1e-10

    def test_global_sign_pairs(self, make_channel, rng):
        ch = make_channel(2)
        omega1 = dft_training(3, 2).V
        omega2 = np.exp(1j * rng.uniform_phase((3, 2)))
        y1 = np.array([reader_received(v, ch) for v in omega1])
        y2 = np.array([reader_received(v, ch) for v in omega2])
        candidates = enumerate_sign_candidates(y1, omega1)
        errors = candidate_testing_mse(candidates, omega2, y2)
        count = candidates.shape[0]
        for index in range(count):
            partner = count - 1 - index
            assert_allclose(candidates[partner], -candidates[index], atol=1e-12)
            assert errors[partner] == pytest.approx(errors[index], rel=1e-9, abs=1e-20)
            a = optimal_reflection(candidates[index, 0], candidates[index, 1:]).v
            b = optimal_reflection(candidates[partner, 0], candidates[partner, 1:]).v
            assert_allclose(a, b, atol=1e-12)


class TestBaseline3:
    def test_noiseless_selects_true_sign_class(self, make_channel, rng):
        ch = make_channel(2)
        result = baseline3_estimate(ch, 0.0, 2, 3, rng)
        assert result.diagnostics["candidate_count"] == 8
        assert result.diagnostics["testing_mse"] < 1e-20
        assert_allclose(result.g_hat, ch.g_bar, rtol=1e-9, atol=1e-12)
        assert_allclose(result.reflection.v, optimal_reflection(ch.h_d, ch.h_c).v, atol=1e-9)

    def test_single_subsurface_candidates(self, make_channel, rng):
        result = baseline3_estimate(make_channel(1), 0.0, 1, 1, rng)
        assert result.diagnostics["candidate_count"] == 4

    @pytest.mark.parametrize("omega2_size", [1, 3])
    def test_budget(self, make_channel, rng, omega2_size):
        result = baseline3_estimate(make_channel(4), 1e-3, 4, omega2_size, rng)
        assert result.training_symbols == 4 + 1 + omega2_size

    def test_empty_testing_set(self, make_channel, rng):
        with pytest.raises(ConfigError):
            baseline3_estimate(make_channel(2), 1e-3, 2, 0, rng)

    def test_complexity_cap(self, make_channel, rng):
        with pytest.raises(ComplexityCapError):
            baseline3_estimate(make_channel(2), 1e-3, 21, 1, rng)

    @pytest.mark.parametrize("n", [1, 2, 4, 10])
    def test_omega2_weights_every_root_equally(self, n):
        # Peso de cada raíz de Ω₁ en la predicción: [1, v^H]·R^{-1}, R = filas [1, v_k^H].
        rows = np.hstack([np.ones((n + 1, 1)), dft_training(n + 1, n).V.conj()])
        coprime_roots = sum(1 for r in range(1, n + 1) if math.gcd(r, n + 1) == 1)
        for v in omega2_reflections(coprime_roots, n, SeededRng(3)):
            weights = np.concatenate(([1.0], v.conj())) @ np.linalg.inv(rows)
            assert_allclose(np.abs(weights), 1 / math.sqrt(n + 1), rtol=1e-9)

    def test_omega2_unit_modulus_beyond_roots(self):
        reflections = omega2_reflections(6, 3, SeededRng(3))
        assert reflections.shape == (6, 3)
        assert_allclose(np.abs(reflections), 1.0)

    @pytest.mark.parametrize("omega2_size", [1, 11])
    def test_high_snr_close_to_proposed(self, omega2_size):
        scenario = ScenarioConfig()
        noise_ratio = 1e-16
        gaps = []
        for trial in range(20):
            ch = realize_channels(scenario, SeededRng.for_trial(11, trial, 0))
            proposed = run_proposed(ch, noise_ratio, SeededRng.for_trial(11, trial, 1))
            baseline = baseline3_estimate(ch, noise_ratio, 10, omega2_size, SeededRng.for_trial(11, trial, 2))
            gaps.append(
                effective_snr_db(scenario, proposed.reflection, ch, noise_ratio)
                - effective_snr_db(scenario, baseline.reflection, ch, noise_ratio)
            )
        assert np.mean(gaps) <= 0.7
