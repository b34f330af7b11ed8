"""
Esquema de estimación propuesto: pares de pilotos con rotación de fase común φ,
diferenciación para cancelar el término cuadrático, estimación LS de
ḡ = [h_d², 2h_d·h_c] y diseño óptimo del entrenamiento (columnas DFT + φ* = 2π/3).
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from app.exceptions import ConfigError, DegeneratePlanError, SimulationError, SingularSystemError
from app.linalg import complex_vector, ls_solve, trace_inverse_gram
from app.models import (
    DEGENERATE_PHASE_TOL,
    ChannelRealization,
    Estimate,
    OptimalityReport,
    SchemeResult,
    TrainingMatrix,
    TrainingPlan,
    rotation_coefficients,
)
from app.services.channel_service import SeededRng
from app.services.signal_service import reader_received, reflection_from_estimate

logger = logging.getLogger(__name__)


def optimal_phase() -> float:
    """Fase de rotación común óptima φ* = 2π/3 (|t2|² = |t3|² = 3)."""
    return 2.0 * math.pi / 3.0


def dft_matrix(size: int) -> np.ndarray:
    k = np.arange(size)
    return np.exp(-2j * np.pi * np.outer(k, k) / size)


def dft_training(K: int, N: int) -> TrainingPlan:
    """
    Propósito: Plan óptimo con N columnas (la 1..N) de la matriz DFT K×K:
               V_{k,n} = e^{−j2π(k−1)n/K}, y φ = φ*.
    Parámetros de entrada:
        - K (int): Número de sub-blocks (K >= N+1).
        - N (int): Número de subsuperficies.
    Qué retorna: TrainingPlan con columnas ortogonales de suma nula.
    """
    if K <= N:
        raise DegeneratePlanError(f"La construcción DFT requiere K >= N+1 (K={K}, N={N}).")
    V = dft_matrix(K)[:, 1 : N + 1]
    return TrainingPlan(K=K, N=N, phi=optimal_phase(), V=V)


def rotation_matrix_b() -> np.ndarray:
    """Matriz 2×3 que mezcla [h_d², 2h_d·v_k^H h_c, w_k] en un par de pilotos con φ = 2π/3."""
    return np.array([[1.0, 1.0, 1.0], [1.0, np.exp(2j * np.pi / 3), np.exp(4j * np.pi / 3)]])


def build_training_matrix(plan: TrainingPlan) -> TrainingMatrix:
    """
    Propósito: Matriz efectiva A̲ de filas [t2, t3·v_k^H].
    Errores: DegeneratePlanError si |t2| o |t3| es casi nulo o K < N+1.
    """
    plan.validate_for_estimation()
    A = np.empty((plan.K, plan.N + 1), dtype=np.complex128)
    A[:, 0] = plan.t2
    A[:, 1:] = plan.t3 * plan.V.conj()
    return TrainingMatrix(plan=plan, A=A)


def gram_closed_form(plan: TrainingPlan) -> np.ndarray:
    """
    Propósito: A̲^H A̲ construida entrada a entrada con la forma cerrada, sin formar A̲:
        [0,0] = K|t2|², [0,n] = t2†t3·Σ_k v†_{k,n}, [i,j] = |t3|²·Σ_k v_{k,i} v†_{k,j}.
    Qué retorna: Matriz (N+1)×(N+1) hermítica.
    """
    t2, t3, V = plan.t2, plan.t3, plan.V
    gram = np.empty((plan.N + 1, plan.N + 1), dtype=np.complex128)
    gram[0, 0] = plan.K * abs(t2) ** 2
    column_sums = V.sum(axis=0)
    gram[0, 1:] = np.conj(t2) * t3 * np.conj(column_sums)
    gram[1:, 0] = t2 * np.conj(t3) * column_sums
    gram[1:, 1:] = abs(t3) ** 2 * (V.T @ V.conj())
    return gram


def simulate_pilot_pair(plan: TrainingPlan, k: int, ch: ChannelRealization, noise_ratio: float,
                        rng: SeededRng, alpha: float = 1.0) -> Tuple[complex, complex]:
    """
    Propósito: Recibir los dos pilotos del sub-bloque k: reflexión v_k y su versión
    rotada (cuyo v^H aporta e^{jφ}), con ruido independiente de potencia σ²/P_t en cada uno.
        y1 = h_d² + 2h_d·v_k^H h_c + w_k + z
        y2 = h_d² + 2e^{jφ}h_d·v_k^H h_c + e^{2jφ}w_k + z'
    Qué retorna: (y1, y2).
    """
    if not 0 <= k < plan.K:
        raise IndexError(f"Sub-bloque {k} fuera de rango (K={plan.K}).")
    v_k = plan.V[k]
    noise = math.sqrt(noise_ratio) * rng.complex_normal(2)
    y1 = reader_received(v_k, ch, noise[0], alpha)
    y2 = reader_received(np.exp(-1j * plan.phi) * v_k, ch, noise[1], alpha)
    return y1, y2


def difference(y1: complex, y2: complex, phi: float) -> complex:
    """t1·y1 − y2 = t2·h_d² + 2t3·h_d·v_k^H h_c + z̲ (el término w_k se cancela)."""
    t1, _, _ = rotation_coefficients(phi)
    return t1 * y1 - y2


def collect_observations(plan: TrainingPlan, ch: ChannelRealization, noise_ratio: float,
                         rng: SeededRng, alpha: float = 1.0) -> np.ndarray:
    """Vector y̲ de K observaciones diferenciadas."""
    observations = [
        difference(*simulate_pilot_pair(plan, k, ch, noise_ratio, rng, alpha), plan.phi)
        for k in range(plan.K)
    ]
    return complex_vector(observations)


def theoretical_mse(matrix: TrainingMatrix, noise_ratio: float) -> float:
    """MSE teórico del LS: (2σ²/P_t)·Tr((A̲^H A̲)^{-1})."""
    return 2.0 * noise_ratio * trace_inverse_gram(matrix.A)


def estimate(matrix: TrainingMatrix, y, noise_ratio: Optional[float] = None) -> Estimate:
    """
    Propósito: Estimación LS ĝ̲ = argmin ‖A̲ g − y̲‖².
    Parámetros de entrada:
        - matrix (TrainingMatrix): A̲ con rango N+1.
        - y (ndarray): Observaciones diferenciadas y̲ (K entradas).
        - noise_ratio (float): σ²/P_t para adjuntar el MSE teórico (opcional).
    Qué retorna: Estimate.
    Errores: SingularSystemError si A̲ no tiene rango N+1.
    """
    y = complex_vector(y, length=matrix.plan.K)
    try:
        g_hat = ls_solve(matrix.A, y)
    except SingularSystemError as err:
        logger.error(f"Estimación LS imposible: rango {err.rank} de {err.expected}.")
        raise
    residual = float(np.linalg.norm(matrix.A @ g_hat - y))
    mse = theoretical_mse(matrix, noise_ratio) if noise_ratio is not None else None
    plan = matrix.plan
    return Estimate(g_hat=g_hat, residual_norm=residual, theoretical_mse=mse, K=plan.K, N=plan.N, phi=plan.phi)


def estimation_error(result: Estimate, truth: ChannelRealization) -> float:
    """‖ĝ̲ − ḡ‖²."""
    return float(np.sum(np.abs(result.g_hat - truth.g_bar) ** 2))


def verify_training_optimality(plan: TrainingPlan, tol: float = 1e-9) -> OptimalityReport:
    """
    Propósito: Comprobar las condiciones de optimalidad del entrenamiento:
        (a) Σ_k v†_{k,i} v_{k,j} = K·δ_ij (reflexiones ortogonales),
        (b) Σ_k v_{k,n} = 0 para toda subsuperficie n,
        (c) φ = 2π/3.
    Parámetros de entrada:
        - plan (TrainingPlan): Plan a verificar.
        - tol (float): Tolerancia (relativa a K para (a) y (b), absoluta en radianes para (c)).
    Qué retorna: OptimalityReport con la lista de condiciones violadas.
    """
    V = plan.V
    correlation = V.conj().T @ V
    orthogonality_error = float(np.max(np.abs(correlation - plan.K * np.eye(plan.N)), initial=0.0)) / plan.K
    column_sum_error = float(np.max(np.abs(V.sum(axis=0)), initial=0.0)) / plan.K
    phase_error = abs(math.remainder(plan.phi - optimal_phase(), 2.0 * math.pi))

    violations = []
    if orthogonality_error > tol:
        violations.append("orthogonality")
    if column_sum_error > tol:
        violations.append("zero_column_sum")
    if phase_error > tol:
        violations.append("rotation_phase")
    return OptimalityReport(
        optimal=not violations,
        violations=violations,
        orthogonality_error=orthogonality_error,
        column_sum_error=column_sum_error,
        phase_error=phase_error,
    )


def training_trace(V, phi: float) -> float:
    """Tr((A̲^H A̲)^{-1}) del plan (V, φ); +inf si el plan es degenerado o singular."""
    V = np.asarray(V, dtype=np.complex128)
    try:
        plan = TrainingPlan(K=V.shape[0], N=V.shape[1], phi=phi, V=V)
        return trace_inverse_gram(build_training_matrix(plan).A)
    except (DegeneratePlanError, SingularSystemError):
        return math.inf


def phase_grid_search(plan_V, grid_points: int, tol: float = DEGENERATE_PHASE_TOL) -> float:
    """
    Propósito: Buscar en una rejilla uniforme de φ ∈ (0, 2π) la fase que minimiza
    Tr((A̲^H A̲)^{-1}) para las reflexiones dadas.
    Parámetros de entrada:
        - plan_V (ndarray): Matriz K×N de reflexiones.
        - grid_points (int): Número de divisiones de [0, 2π); el punto 0 se excluye.
        - tol (float): Se descartan fases con |t2| o |t3| < tol.
    Qué retorna: φ de la rejilla con traza mínima (en empates, la menor).
    Errores: SimulationError si ningún punto de la rejilla es factible.
    """
    grid = 2.0 * math.pi * np.arange(1, grid_points) / grid_points
    best_phi, best_trace = None, math.inf
    for phi in grid:
        _, t2, t3 = rotation_coefficients(phi)
        if abs(t2) < tol or abs(t3) < tol:
            continue
        trace = training_trace(plan_V, phi)
        # La traza es simétrica en φ ↔ 2π − φ: se conserva el primer mínimo.
        if trace < best_trace * (1.0 - 1e-12):
            best_phi, best_trace = float(phi), trace
    if best_phi is None:
        raise SimulationError("Ningún punto de la rejilla de φ es factible.")
    return best_phi


def run_proposed(ch: ChannelRealization, noise_ratio: float, rng: SeededRng, K: Optional[int] = None,
                 phi: Optional[float] = None, alpha: float = 1.0, scheme: str = "proposed",
                 plan: Optional[TrainingPlan] = None) -> SchemeResult:
    """
    Propósito: Ejecutar el esquema completo: plan DFT → pilotos → diferenciación →
    LS → beamforming a partir de ĝ̲.
    Parámetros de entrada:
        - ch (ChannelRealization): Canales verdaderos.
        - noise_ratio (float): σ²/P_t lineal.
        - rng (SeededRng): Flujo para el ruido.
        - K (int): Sub-bloques (por defecto N+1).
        - phi (float): Fase de rotación (por defecto φ*).
        - plan (TrainingPlan): Plan explícito; sustituye al plan DFT (K se ignora).
    Qué retorna: SchemeResult con 2K símbolos de entrenamiento.
    Errores: ConfigError si el plan no corresponde al número de subsuperficies del canal.
    """
    n = ch.n_subsurfaces
    if plan is None:
        plan = dft_training(K or n + 1, n)
    elif plan.N != n:
        raise ConfigError(f"El plan es para N={plan.N} pero el canal tiene N={n}.")
    if phi is not None:
        plan = plan.with_phase(phi)
    matrix = build_training_matrix(plan)
    observations = collect_observations(plan, ch, noise_ratio, rng, alpha)
    result = estimate(matrix, observations, noise_ratio)
    return SchemeResult(
        scheme=scheme,
        reflection=reflection_from_estimate(result.g_hat),
        g_hat=result.g_hat,
        training_symbols=plan.training_symbols,
        diagnostics={"phi": plan.phi, "K": plan.K, "theoretical_mse": result.theoretical_mse},
    )
