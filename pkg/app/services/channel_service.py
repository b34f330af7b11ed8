import logging
from typing import Sequence, Union

import numpy as np

from app.exceptions import DimensionMismatchError, GeometryError
from app.linalg import complex_vector
from app.models import MIN_DISTANCE_M, ChannelRealization, ScenarioConfig

logger = logging.getLogger(__name__)


class SeededRng:
    """
    Propósito: Flujo determinista de números aleatorios a partir de una semilla de 64 bits.
    Misma semilla (y mismas claves) => misma secuencia, bit a bit.
    """

    def __init__(self, seed: Union[int, np.random.SeedSequence]):
        if isinstance(seed, np.random.SeedSequence):
            self.seed_sequence = seed
        else:
            self.seed_sequence = np.random.SeedSequence(int(seed))
        self.seed = self.seed_sequence.entropy
        self.generator = np.random.default_rng(self.seed_sequence)

    @classmethod
    def for_trial(cls, master_seed: int, *keys: int) -> "SeededRng":
        """
        Propósito: Sub-flujo independiente para una realización Monte Carlo.
        Parámetros de entrada:
            - master_seed (int): Semilla maestra del experimento.
            - keys (int): Índice de realización y claves adicionales (flujo, punto, esquema).
        Qué retorna: Un SeededRng derivado por `SeedSequence.spawn_key`, independiente
                     del orden de ejecución.
        """
        return cls(np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys)))

    def complex_normal(self, size=None) -> np.ndarray:
        """Gaussianas complejas estándar CN(0, 1)."""
        real = self.generator.standard_normal(size)
        imag = self.generator.standard_normal(size)
        return (real + 1j * imag) / np.sqrt(2.0)

    def uniform_phase(self, size=None) -> np.ndarray:
        return self.generator.uniform(0.0, 2.0 * np.pi, size)

    def uniform(self, low: float, high: float, size=None):
        return self.generator.uniform(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)


def path_loss_db(distance_m, exponent: float, ref_db: float):
    """
    Propósito: Pérdida de trayecto log-distancia con referencia a 1 m.
    Parámetros de entrada:
        - distance_m (float | ndarray): Distancia(s) en metros (>= 0.1 m).
        - exponent (float): Exponente de pérdidas.
        - ref_db (float): Pérdida a 1 m en dB.
    Qué retorna: ref_db + 10·exponent·log10(d) (mismo tipo que la entrada).
    """
    distance = np.asarray(distance_m, dtype=np.float64)
    if np.any(distance < MIN_DISTANCE_M):
        raise GeometryError(f"Distancia por debajo del mínimo de {MIN_DISTANCE_M} m: {np.min(distance):.4f} m.")
    loss = ref_db + 10.0 * exponent * np.log10(distance)
    return float(loss) if loss.ndim == 0 else loss


def element_positions(config: ScenarioConfig) -> np.ndarray:
    """
    Propósito: Centros de los elementos de la IRS (separación element_spacing·λ, centrados
    en irs_pos). En el despliegue "planar" las subsuperficies se apilan a lo largo de
    `irs_axis` y los elementos de cada una siguen la normal al plano lector–IRS–tag, de
    modo que los E elementos de una subsuperficie suman en fase con ambos extremos.
    En el despliegue "line" todos los elementos forman una línea sobre `irs_axis`.
    Qué retorna: Array (N·E, 3) en metros; la subsuperficie n son las filas n·E .. n·E+E−1.
    """
    return config.element_layout()


def link_distances(endpoint_a: Sequence[float], endpoint_b) -> np.ndarray:
    """Distancias euclídeas de un punto a uno o varios puntos (array (M,))."""
    a = np.asarray(endpoint_a, dtype=np.float64).reshape(1, 3)
    b = np.asarray(endpoint_b, dtype=np.float64).reshape(-1, 3)
    return np.linalg.norm(b - a, axis=1)


def los_phase_vector(config: ScenarioConfig, endpoint_a, endpoint_b) -> np.ndarray:
    """
    Propósito: Componente de línea de vista por elemento, e^{−j2π d/λ}, con las
    distancias exactas entre endpoint_a y cada punto de endpoint_b.
    Parámetros de entrada:
        - config (ScenarioConfig): Aporta la longitud de onda.
        - endpoint_a: Punto 3D (lector o tag).
        - endpoint_b: Punto 3D o array (M, 3) de centros de elemento.
    Qué retorna: Vector complejo de módulo unitario con M entradas.
    """
    distances = link_distances(endpoint_a, endpoint_b)
    return np.exp(-2j * np.pi * distances / config.wavelength_m)


def rician_sample(los, k_factor_linear: float, rng: SeededRng) -> np.ndarray:
    """
    Propósito: Desvanecimiento de Rice: √(κ/(1+κ))·los + √(1/(1+κ))·w, w ~ CN(0, I).
    Qué retorna: Vector complejo de la misma longitud que `los`.
    """
    if k_factor_linear < 0:
        raise ValueError(f"El factor de Rice debe ser >= 0 (κ={k_factor_linear}).")
    los = np.asarray(los, dtype=np.complex128)
    scattered = rng.complex_normal(los.shape)
    return np.sqrt(k_factor_linear / (1.0 + k_factor_linear)) * los + np.sqrt(1.0 / (1.0 + k_factor_linear)) * scattered


def cascade(h_r, f) -> np.ndarray:
    """Canal cascada diag(h_r)·f (producto elemento a elemento)."""
    h_r = np.asarray(h_r, dtype=np.complex128)
    f = np.asarray(f, dtype=np.complex128)
    if h_r.shape != f.shape or h_r.ndim != 1:
        raise DimensionMismatchError(f"cascade requiere vectores de igual longitud: {h_r.shape} vs {f.shape}.")
    return complex_vector(h_r * f)


def _link_los(config: ScenarioConfig, endpoint_a, endpoint_b, rng: SeededRng) -> np.ndarray:
    if config.los_model == "random":
        count = np.asarray(endpoint_b, dtype=np.float64).reshape(-1, 3).shape[0]
        return np.exp(1j * rng.uniform_phase(count))
    return los_phase_vector(config, endpoint_a, endpoint_b)


def _draw_link(config: ScenarioConfig, endpoint_a, endpoint_b, exponent: float, rng: SeededRng) -> np.ndarray:
    distances = link_distances(endpoint_a, endpoint_b)
    amplitude = np.sqrt(10.0 ** (-path_loss_db(distances, exponent, config.ref_pathloss_db) / 10.0))
    los = _link_los(config, endpoint_a, endpoint_b, rng)
    return amplitude * rician_sample(los, config.rician_k_linear, rng)


def realize_direct_channel(config: ScenarioConfig, rng: SeededRng) -> complex:
    """Canal directo lector↔tag (un solo elemento)."""
    h_d = _draw_link(config, config.reader_pos, config.tag_pos, config.pathloss_exp_reader_tag, rng)
    return complex(h_d[0])


def realize_channels(config: ScenarioConfig, rng: SeededRng) -> ChannelRealization:
    """
    Propósito: Generar una realización de canales (h_d, f, h_r, h_c) del escenario.
    Cada canal por elemento tiene amplitud √(10^{−PL/10}) y desvanecimiento de Rice;
    el canal de cada subsuperficie es la suma coherente de sus elementos. La misma
    realización se reutiliza en los enlaces directo e inverso (reciprocidad).
    Parámetros de entrada:
        - config (ScenarioConfig): Escenario.
        - rng (SeededRng): Flujo aleatorio (orden de consumo fijo: f, h_r, h_d).
    Qué retorna: ChannelRealization.
    """
    elements = element_positions(config)
    shape = (config.n_subsurfaces, config.elements_per_subsurface)

    f_elements = _draw_link(config, config.reader_pos, elements, config.pathloss_exp_reader_irs, rng)
    h_r_elements = _draw_link(config, config.tag_pos, elements, config.pathloss_exp_irs_tag, rng)
    h_d = realize_direct_channel(config, rng)

    f = f_elements.reshape(shape).sum(axis=1)
    h_r = h_r_elements.reshape(shape).sum(axis=1)
    return ChannelRealization(h_d=h_d, f=f, h_r=h_r, h_c=cascade(h_r, f))
