import cmath
import logging
import math
from typing import Optional, Tuple

import numpy as np

from app.exceptions import ComplexityCapError, ConfigError
from app.models import ChannelRealization, ReflectionVector, SchemeResult, rotation_coefficients
from app.services.channel_service import SeededRng
from app.services.estimation_service import dft_matrix, dft_training, run_proposed
from app.services.signal_service import optimal_reflection, reader_received

logger = logging.getLogger(__name__)

# Re-sorteo de φ en Baseline I cuando |t2| o |t3| quedan por debajo de este valor.
BASELINE1_PHASE_TOL = 1e-3
BASELINE3_MAX_N = 20
# Candidatos procesados por bloque en la búsqueda exhaustiva de signos.
SIGN_CHUNK = 1 << 15


def baseline1_estimate(ch: ChannelRealization, noise_ratio: float, K: int, N: int, rng: SeededRng,
                       phi: Optional[float] = None, alpha: float = 1.0) -> SchemeResult:
    """
    Propósito: Baseline I: el esquema propuesto con la fase de rotación φ sorteada
    uniformemente en (0, 2π). Se vuelve a sortear mientras |t2| o |t3| <= 1e-3.
    Parámetros de entrada:
        - ch, noise_ratio, rng: Canal, σ²/P_t y flujo aleatorio.
        - K, N (int): Sub-bloques y subsuperficies (K >= N+1).
        - phi (float): Fase forzada (opcional, para pruebas).
    Qué retorna: SchemeResult con la φ elegida en `diagnostics["phi"]`.
    """
    if phi is None:
        while True:
            phi = float(rng.uniform(0.0, 2.0 * math.pi))
            _, t2, t3 = rotation_coefficients(phi)
            if abs(t2) > BASELINE1_PHASE_TOL and abs(t3) > BASELINE1_PHASE_TOL:
                break
            logger.warning(f"Baseline I: φ={phi:.6f} degenerada, se vuelve a sortear.")
    if N != ch.n_subsurfaces:
        raise ConfigError(f"N={N} no coincide con el canal (N={ch.n_subsurfaces}).")
    return run_proposed(ch, noise_ratio, rng, K=K, phi=phi, alpha=alpha, scheme="baseline1")


def dft_codebook(Q: int, N: int, rng: SeededRng) -> np.ndarray:
    """
    Propósito: Q vectores de entrenamiento tomados de una matriz DFT Q×Q, cada columna
    restringida a N filas elegidas al azar (filas distintas si Q >= N, cíclicas si no).
    Qué retorna: Matriz Q×N (fila q = candidato q).
    """
    if Q < 1:
        raise ConfigError("Baseline II requiere Q >= 1.")
    rows = rng.permutation(Q)
    rows = rows[np.arange(N) % Q] if N else rows[:0]
    return dft_matrix(Q)[rows, :].T


def baseline2_select(ch: ChannelRealization, noise_ratio: float, Q: int, rng: SeededRng,
                     candidates: Optional[np.ndarray] = None, alpha: float = 1.0) -> SchemeResult:
    """
    Propósito: Baseline II: medir la potencia recibida |y_R|² con cada uno de los Q
    candidatos (con ruido) y quedarse con el de mayor potencia. No estima canal.
    Parámetros de entrada:
        - ch, noise_ratio, rng: Canal, σ²/P_t y flujo aleatorio.
        - Q (int): Tamaño del libro de códigos (símbolos de entrenamiento).
        - candidates (ndarray): Candidatos Q×N explícitos (opcional).
    Qué retorna: SchemeResult con la potencia medida por candidato.
    """
    if candidates is None:
        candidates = dft_codebook(Q, ch.n_subsurfaces, rng)
    candidates = np.asarray(candidates, dtype=np.complex128)
    noise = math.sqrt(noise_ratio) * rng.complex_normal(candidates.shape[0])
    powers = np.array([abs(reader_received(v, ch, z, alpha)) ** 2 for v, z in zip(candidates, noise)])
    best = int(np.argmax(powers))
    return SchemeResult(
        scheme="baseline2",
        reflection=ReflectionVector(v=candidates[best]),
        g_hat=None,
        training_symbols=int(candidates.shape[0]),
        diagnostics={"selected_index": best, "powers": powers.tolist()},
    )


def sqrt_candidates(y: complex) -> Tuple[complex, complex]:
    """Las dos raíces ±√y (rama principal primero)."""
    root = cmath.sqrt(complex(y))
    return root, -root


def sign_patterns(count: int) -> np.ndarray:
    """Las 2^count asignaciones de signo (fila 0 = todos +1)."""
    index = np.arange(1 << count)[:, None]
    bits = (index >> np.arange(count)[None, :]) & 1
    return 1.0 - 2.0 * bits


def _linear_rows(reflections: np.ndarray) -> np.ndarray:
    # b = h_d + v^H h_c  →  fila [1, v^H].
    reflections = np.asarray(reflections, dtype=np.complex128)
    return np.hstack([np.ones((reflections.shape[0], 1)), reflections.conj()])


def enumerate_sign_candidates(y_omega1: np.ndarray, omega1_reflections: np.ndarray) -> np.ndarray:
    """
    Propósito: Resolver el modelo lineal b_k = h_d + v_k^H h_c para cada una de las
    2^{N+1} asignaciones b_k = ±√y_k.
    Qué retorna: Matriz 2^{N+1}×(N+1) de candidatos [ĥ_d, ĥ_c].
    """
    rows = _linear_rows(omega1_reflections)
    roots = np.array([sqrt_candidates(y)[0] for y in y_omega1])
    signs = sign_patterns(rows.shape[0])
    # rows·x = s⊙r  para todas las s a la vez.
    return np.linalg.solve(rows, (signs * roots[None, :]).T).T


def testing_mse(candidates: np.ndarray, omega2_reflections: np.ndarray, y_omega2: np.ndarray,
                alpha: float = 1.0) -> np.ndarray:
    """MSE entre las señales predichas α·(ĥ_d + v_j^H ĥ_c)² y las observadas en Ω₂, por candidato."""
    rows = _linear_rows(omega2_reflections)
    errors = np.empty(candidates.shape[0])
    for start in range(0, candidates.shape[0], SIGN_CHUNK):
        block = candidates[start : start + SIGN_CHUNK]
        predicted = alpha * (block @ rows.T) ** 2
        errors[start : start + SIGN_CHUNK] = np.mean(np.abs(predicted - y_omega2[None, :]) ** 2, axis=1)
    return errors


def testing_reflections(omega2_size: int, N: int, rng: SeededRng) -> np.ndarray:
    """
    Propósito: Reflexiones de prueba de Ω₂. Cada fila es la cola v de una secuencia de
    Zadoff-Chu [1, v] de longitud N+1: con Ω₁ formado por filas DFT, la predicción
    ĥ_d + v^H ĥ_c pondera todas las raíces ±√y_k con el mismo módulo, de modo que
    cualquier cambio de signo se refleja en la señal predicha.
    Se usa una raíz coprima con N+1 por fila; si no quedan raíces, fases aleatorias.
    Qué retorna: Matriz omega2_size×N de módulo unitario.
    """
    length = N + 1
    roots = [r for r in range(1, length) if math.gcd(r, length) == 1] or [1]
    n = np.arange(length)
    rows = []
    for index in range(omega2_size):
        if index < len(roots):
            sequence = np.exp(-1j * np.pi * roots[index] * n * (n + length % 2) / length)
            rows.append(sequence[1:])
        else:
            rows.append(np.exp(1j * rng.uniform_phase(N)))
    return np.array(rows, dtype=np.complex128).reshape(omega2_size, N)


def baseline3_estimate(ch: ChannelRealization, noise_ratio: float, N: int, omega2_size: int, rng: SeededRng,
                       alpha: float = 1.0) -> SchemeResult:
    """
    Propósito: Baseline III: búsqueda exhaustiva de signos.
        (a) N+1 símbolos (Ω₁) con reflexiones DFT;
        (b) para cada una de las 2^{N+1} combinaciones b_k = ±√y_k, LS lineal de (ĥ_d, ĥ_c);
        (c) predicción de las señales de Ω₂ (reflexiones de `testing_reflections`) y MSE de prueba;
        (d) se elige el candidato de MSE mínimo y su beamforming co-fasado.
    Parámetros de entrada:
        - ch, noise_ratio, rng: Canal, σ²/P_t y flujo aleatorio.
        - N (int): Subsuperficies (<= 20).
        - omega2_size (int): |Ω₂| >= 1.
    Qué retorna: SchemeResult con N+1+|Ω₂| símbolos de entrenamiento.
    Errores: ConfigError si |Ω₂| = 0; ComplexityCapError si N > 20.
    """
    if omega2_size < 1:
        raise ConfigError("Baseline III requiere |Ω₂| >= 1.")
    if N > BASELINE3_MAX_N:
        raise ComplexityCapError(f"Baseline III enumera 2^(N+1) candidatos; N={N} supera el límite {BASELINE3_MAX_N}.")
    if N != ch.n_subsurfaces:
        raise ConfigError(f"N={N} no coincide con el canal (N={ch.n_subsurfaces}).")

    omega1 = dft_training(N + 1, N).V
    omega2 = testing_reflections(omega2_size, N, rng)
    noise = math.sqrt(noise_ratio) * rng.complex_normal(N + 1 + omega2_size)
    y1 = np.array([reader_received(v, ch, z, alpha) for v, z in zip(omega1, noise[: N + 1])])
    y2 = np.array([reader_received(v, ch, z, alpha) for v, z in zip(omega2, noise[N + 1 :])])

    candidates = enumerate_sign_candidates(y1 / alpha if alpha > 0 else y1, omega1)
    errors = testing_mse(candidates, omega2, y2, alpha)
    best = int(np.argmin(errors))
    h_d_hat, h_c_hat = complex(candidates[best, 0]), candidates[best, 1:]
    return SchemeResult(
        scheme="baseline3",
        reflection=optimal_reflection(h_d_hat, h_c_hat),
        g_hat=np.concatenate(([h_d_hat ** 2], 2.0 * h_d_hat * h_c_hat)),
        training_symbols=N + 1 + omega2_size,
        diagnostics={
            "testing_mse": float(errors[best]),
            "candidate_count": int(candidates.shape[0]),
            "selected_index": best,
            "omega2_size": omega2_size,
        },
    )
