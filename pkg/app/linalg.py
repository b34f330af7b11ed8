"""
Primitivas de álgebra lineal compleja densa para el modelo elevado (Kronecker)
y el estimador LS.

Los vectores y matrices son `numpy.ndarray` complejos de solo lectura: se
construyen con `complex_vector` / `complex_matrix`, que validan dimensiones y
que todas las entradas sean finitas.
"""
import logging

import numpy as np
from scipy import linalg as sla

from app.config import SETTINGS
from app.exceptions import ComplexityCapError, DimensionMismatchError, SingularSystemError

logger = logging.getLogger(__name__)

# Por encima de este número de condición la solución QR cede el paso a la SVD.
QR_CONDITION_LIMIT = 1e8


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def complex_vector(data, length: int = None) -> np.ndarray:
    """
    Propósito: Construir un vector complejo 1-D inmutable.
    Parámetros de entrada:
        - data: Secuencia o array convertible a complejo.
        - length (int): Longitud esperada (opcional).
    Qué retorna: `np.ndarray` complex128 de solo lectura.
    """
    vector = np.atleast_1d(np.array(data, dtype=np.complex128))
    if vector.ndim != 1:
        raise DimensionMismatchError(f"Se esperaba un vector 1-D, se recibió forma {vector.shape}.")
    if length is not None and vector.shape[0] != length:
        raise DimensionMismatchError(f"Longitud {vector.shape[0]} distinta de la esperada {length}.")
    if not np.all(np.isfinite(vector)):
        raise ValueError("El vector contiene entradas NaN/Inf.")
    return _freeze(vector)


def complex_matrix(data, shape: tuple = None) -> np.ndarray:
    """
    Propósito: Construir una matriz compleja 2-D inmutable.
    Parámetros de entrada:
        - data: Array 2-D convertible a complejo.
        - shape (tuple): Forma esperada (opcional).
    Qué retorna: `np.ndarray` complex128 de solo lectura.
    """
    matrix = np.array(data, dtype=np.complex128)
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"Se esperaba una matriz 2-D, se recibió forma {matrix.shape}.")
    if shape is not None and matrix.shape != tuple(shape):
        raise DimensionMismatchError(f"Forma {matrix.shape} distinta de la esperada {tuple(shape)}.")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("La matriz contiene entradas NaN/Inf.")
    return _freeze(matrix)


def kron(u, w) -> np.ndarray:
    """
    Propósito: Producto de Kronecker de dos vectores de igual longitud N.
    Qué retorna: Vector de N² entradas con u_i·w_j en la posición i·N + j
                 (apilamiento [u_1·w; …; u_N·w]).
    """
    u = np.asarray(u, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    if u.ndim != 1 or w.ndim != 1 or u.shape != w.shape:
        raise DimensionMismatchError(f"kron requiere vectores de igual longitud: {u.shape} vs {w.shape}.")
    if u.shape[0] > SETTINGS["kron_max_n"]:
        raise ComplexityCapError(
            f"kron con N={u.shape[0]} supera el límite configurado ({SETTINGS['kron_max_n']})."
        )
    return _freeze(np.kron(u, w))


def hermitian_product(a, b) -> complex:
    """Σ conj(a_i)·b_i."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionMismatchError(f"hermitian_product requiere igual longitud: {a.shape} vs {b.shape}.")
    return complex(np.vdot(a, b))


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise DimensionMismatchError(f"Se esperaba una matriz 2-D, se recibió forma {A.shape}.")
    return A


def default_rank_tolerance(A) -> float:
    """Tolerancia relativa max(K, M)·eps (se multiplica por σ_max)."""
    K, M = np.shape(A)
    return max(K, M) * np.finfo(np.float64).eps


def numerical_rank(A, tol: float = None) -> int:
    """
    Propósito: Rango numérico de A.
    Parámetros de entrada:
        - A: Matriz compleja K×M.
        - tol (float): Tolerancia relativa; cuenta σ_i > tol·σ_max.
                       Por defecto max(K, M)·eps.
    Qué retorna: Número de valores singulares por encima del umbral (int).
    """
    A = _as_matrix(A)
    if A.size == 0:
        return 0
    singular_values = sla.svd(A, compute_uv=False)
    sigma_max = singular_values[0]
    if sigma_max == 0.0:
        return 0
    if tol is None:
        tol = default_rank_tolerance(A)
    return int(np.count_nonzero(singular_values > tol * sigma_max))


def _require_full_column_rank(A: np.ndarray) -> np.ndarray:
    K, M = A.shape
    if K < M:
        raise SingularSystemError(rank=numerical_rank(A), expected=M)
    singular_values = sla.svd(A, compute_uv=False)
    rank = 0
    if singular_values.size and singular_values[0] > 0.0:
        rank = int(np.count_nonzero(singular_values > default_rank_tolerance(A) * singular_values[0]))
    if rank < M:
        logger.error(f"Matriz de entrenamiento {K}x{M} con rango deficiente ({rank}).")
        raise SingularSystemError(rank=rank, expected=M)
    return singular_values


def ls_solve(A, y) -> np.ndarray:
    """
    Propósito: Resolver argmin ‖A x − y‖² por factorización ortogonal (QR),
               con SVD como respaldo cuando A está mal condicionada.
    Parámetros de entrada:
        - A: Matriz compleja K×M con K >= M y rango completo de columnas.
        - y: Vector complejo de K entradas.
    Qué retorna: Vector x̂ de M entradas. Nunca forma (A^H A)^{-1} explícitamente.
    Errores: SingularSystemError con el rango estimado si A no tiene rango M.
    """
    A = _as_matrix(A)
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.shape[0] != A.shape[0]:
        raise DimensionMismatchError(f"ls_solve: A es {A.shape} pero y tiene forma {y.shape}.")
    singular_values = _require_full_column_rank(A)

    if singular_values[0] / singular_values[-1] > QR_CONDITION_LIMIT:
        logger.warning("Matriz mal condicionada; se resuelve por SVD.")
        solution, *_ = sla.lstsq(A, y, lapack_driver="gelsd")
        return _freeze(np.asarray(solution, dtype=np.complex128))

    Q, R = sla.qr(A, mode="economic")
    solution = sla.solve_triangular(R, Q.conj().T @ y, lower=False)
    return _freeze(np.asarray(solution, dtype=np.complex128))


def trace_inverse_gram(A) -> float:
    """
    Propósito: Tr((A^H A)^{-1}) calculado como Σ 1/σ_i²(A).
    Qué retorna: Escalar real estrictamente positivo.
    Errores: SingularSystemError si A no tiene rango completo de columnas.
    """
    A = _as_matrix(A)
    singular_values = _require_full_column_rank(A)
    return float(np.sum(1.0 / singular_values ** 2))
