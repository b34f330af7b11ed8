import logging
import math
from typing import Optional, Union

import numpy as np

from app.exceptions import DimensionMismatchError
from app.linalg import hermitian_product, kron
from app.models import (
    ChannelRealization,
    LiftedChannel,
    LiftedTraining,
    ReflectionVector,
    ScenarioConfig,
)

logger = logging.getLogger(__name__)

Reflection = Union[ReflectionVector, np.ndarray]


def _reflection_array(v: Reflection) -> np.ndarray:
    return v.v if isinstance(v, ReflectionVector) else np.asarray(v, dtype=np.complex128)


def _check_conformant(v: np.ndarray, ch: ChannelRealization):
    if v.shape != ch.h_c.shape:
        raise DimensionMismatchError(f"Reflexión de {v.shape[0]} entradas para un canal con N={ch.n_subsurfaces}.")


def tag_received(v: Reflection, ch: ChannelRealization) -> complex:
    """
    Propósito: Señal recibida en el tag (s = 1): h_d + v^H h_c.
    Parámetros de entrada:
        - v (ReflectionVector | ndarray): Reflexión de la IRS.
        - ch (ChannelRealization): Canales.
    Qué retorna: Escalar complejo.
    """
    v = _reflection_array(v)
    _check_conformant(v, ch)
    return ch.h_d + hermitian_product(v, ch.h_c)


def reader_received(v: Reflection, ch: ChannelRealization, noise: complex = 0.0, alpha: float = 1.0) -> complex:
    """
    Propósito: Señal recibida en el lector tras el doble trayecto: α·(h_d + v^H h_c)² + z.
    Parámetros de entrada:
        - v: Reflexión de la IRS.
        - ch (ChannelRealization): Canales (los mismos en ida y vuelta).
        - noise (complex): Muestra de ruido z ya normalizada por P_t.
        - alpha (float): Fracción reflejada por el tag.
    Qué retorna: Escalar complejo.
    """
    return alpha * tag_received(v, ch) ** 2 + noise


def lift_reflection(v: Reflection) -> LiftedTraining:
    """a = [1; v; v⊗v]."""
    v = ReflectionVector(v=_reflection_array(v)).v
    return LiftedTraining(v=v, a=np.concatenate(([1.0], v, kron(v, v))))


def lift_channel(h_d: complex, h_c) -> LiftedChannel:
    """g = [h_d²; 2h_d·h_c; h_c⊗h_c], con el mismo orden de Kronecker que `lift_reflection`."""
    h_c = np.asarray(h_c, dtype=np.complex128)
    g = np.concatenate(([h_d ** 2], 2.0 * h_d * h_c, kron(h_c, h_c)))
    return LiftedChannel(h_d=h_d, h_c=h_c, g=g)


def _co_phase(reference: complex, vector: np.ndarray) -> ReflectionVector:
    if reference != 0:
        return ReflectionVector(v=np.exp(1j * np.angle(np.conj(reference) * vector)))
    # Desempate: con referencia nula se alinea h_c con la fase de su primer elemento.
    logger.warning("Referencia nula en el co-faseo; se alinea con el primer elemento.")
    anchor = vector[0] if vector.size else 0.0
    return ReflectionVector(v=np.exp(1j * np.angle(np.conj(anchor) * vector)), fallback=True)


def optimal_reflection(h_d: complex, h_c) -> ReflectionVector:
    """
    Propósito: Beamforming pasivo óptimo con CSI perfecta, v* = e^{j·arg(h_d†·h_c)}.
    Con v*, v*^H h_c = e^{j·arg(h_d)}·Σ|h_c,n| y todos los términos quedan en fase con h_d.
    Qué retorna: ReflectionVector (fallback=True si h_d = 0).
    """
    return _co_phase(complex(h_d), np.asarray(h_c, dtype=np.complex128))


def reflection_from_estimate(g_hat) -> ReflectionVector:
    """
    Propósito: Beamforming a partir de ĝ̲ = [ĝ_1, ĝ_2..ĝ_{N+1}]: v̂ = e^{j·arg(ĝ_1†·[ĝ]_{2:N+1})}.
    Basta con las primeras N+1 entradas de g; la cola de Kronecker no se necesita.
    """
    g_hat = np.asarray(g_hat, dtype=np.complex128)
    if g_hat.ndim != 1 or g_hat.shape[0] < 1:
        raise DimensionMismatchError("ĝ̲ debe ser un vector de N+1 entradas.")
    return _co_phase(complex(g_hat[0]), g_hat[1:])


def _snr_db(signal_power: float, noise_ratio: float) -> float:
    if noise_ratio <= 0:
        raise ValueError("σ²/P_t debe ser > 0 para calcular una SNR.")
    if signal_power <= 0.0:
        return float("-inf")
    return 10.0 * math.log10(signal_power / noise_ratio)


def reference_snr_db(config: ScenarioConfig, h_d: complex, noise_ratio: Optional[float] = None) -> float:
    """
    Propósito: SNR de referencia (solo enlace directo): 10·log10(P_t·|α·h_d²|²/σ²).
    Parámetros de entrada:
        - config (ScenarioConfig): Aporta σ²/P_t y α.
        - h_d (complex): Canal directo.
        - noise_ratio (float): σ²/P_t lineal; reemplaza al del escenario en los barridos.
    Qué retorna: SNR en dB, o -inf si el canal es nulo.
    """
    ratio = config.noise_ratio if noise_ratio is None else noise_ratio
    return _snr_db(abs(config.tag_reflection * complex(h_d) ** 2) ** 2, ratio)


def effective_snr_db(config: ScenarioConfig, v: Reflection, ch: ChannelRealization, noise_ratio: Optional[float] = None) -> float:
    """SNR efectiva con la reflexión v aplicada: 10·log10(P_t·|α·(h_d + v^H h_c)²|²/σ²)."""
    ratio = config.noise_ratio if noise_ratio is None else noise_ratio
    return _snr_db(abs(reader_received(v, ch, alpha=config.tag_reflection)) ** 2, ratio)
