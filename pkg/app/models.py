import math
import cmath
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.exceptions import DegeneratePlanError, DimensionMismatchError
from app.linalg import complex_matrix, complex_vector, kron

SPEED_OF_LIGHT = 299_792_458.0
UNIT_MODULUS_TOL = 1e-9
# |t2| y |t3| por debajo de este valor hacen inutilizable un plan (φ ≈ 0 o φ ≈ π).
DEGENERATE_PHASE_TOL = 1e-6

Point3D = Tuple[float, float, float]
SchemeName = Literal["proposed", "baseline1", "baseline2", "baseline3", "perfect_csi"]

# Distancia mínima admitida por el modelo de pérdidas (singularidad de campo cercano).
MIN_DISTANCE_M = 0.1


def _perpendicular(vector: np.ndarray, hint: np.ndarray) -> np.ndarray:
    """Vector no nulo ortogonal a `vector`, preferentemente en el plano de `hint`."""
    for candidate in (hint, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])):
        result = np.cross(vector, candidate)
        if np.linalg.norm(result) > 1e-9 * max(np.linalg.norm(vector), 1.0):
            return result
    return np.array([0.0, 1.0, 0.0])


class NumericModel(BaseModel):
    """
    Propósito: Base de los contenedores numéricos (arrays numpy inmutables).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# --- Modelos de Configuración ---

class ScenarioConfig(BaseModel):
    """
    Propósito: Geometría, parámetros de radio y de desvanecimiento del despliegue.
    Todos los valores por defecto corresponden al escenario de referencia
    (915 MHz, lector en (2,0,0), tag en (2,13,0), IRS en (0,13,0.33)).
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    reader_pos: Point3D = (2.0, 0.0, 0.0)
    tag_pos: Point3D = (2.0, 13.0, 0.0)
    irs_pos: Point3D = (0.0, 13.0, 0.33)
    n_subsurfaces: int = Field(10, ge=1)
    elements_per_subsurface: int = Field(5, ge=1)
    carrier_freq_hz: float = Field(915e6, gt=0)
    ref_pathloss_db: float = 30.0
    pathloss_exp_reader_irs: float = Field(2.2, gt=0)
    pathloss_exp_irs_tag: float = Field(2.2, gt=0)
    pathloss_exp_reader_tag: float = Field(3.5, gt=0)
    rician_factor_db: float = 6.0
    noise_power_dbm: float = -90.0
    tx_power_dbm: float = 30.0
    tag_reflection: float = Field(1.0, ge=0.0, le=1.0)
    # Separación entre elementos en fracciones de longitud de onda.
    element_spacing: float = Field(0.5, gt=0)
    los_model: Literal["geometric", "random"] = "geometric"
    # "planar": subsuperficies apiladas a lo largo de irs_axis, elementos de cada una a lo
    # largo de element_axis. "line": todos los elementos en una línea sobre irs_axis.
    irs_layout: Literal["planar", "line"] = "planar"
    irs_axis: Point3D = (0.0, 1.0, 0.0)
    # None => normal al plano lector–IRS–tag (incidencia broadside en ambos enlaces).
    element_axis: Optional[Point3D] = None

    @model_validator(mode="after")
    def check_geometry(self):
        points = [self.reader_pos, self.tag_pos, self.irs_pos]
        for i in range(3):
            for j in range(i + 1, 3):
                if np.allclose(points[i], points[j]):
                    raise ValueError("Las posiciones de lector, tag e IRS deben ser distintas.")
        if np.linalg.norm(self.irs_axis) == 0.0:
            raise ValueError("irs_axis no puede ser el vector nulo.")
        if self.element_axis is not None and np.linalg.norm(self.element_axis) == 0.0:
            raise ValueError("element_axis no puede ser el vector nulo.")

        elements = self.element_layout()
        links = {
            "lector–tag": np.atleast_1d(np.linalg.norm(np.subtract(self.reader_pos, self.tag_pos))),
            "lector–IRS": np.linalg.norm(elements - np.asarray(self.reader_pos), axis=1),
            "IRS–tag": np.linalg.norm(elements - np.asarray(self.tag_pos), axis=1),
        }
        for name, distances in links.items():
            if np.min(distances) < MIN_DISTANCE_M:
                raise ValueError(
                    f"Enlace {name} a {np.min(distances):.4f} m: por debajo del mínimo de {MIN_DISTANCE_M} m."
                )
        return self

    def element_axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Propósito: Ejes unitarios del despliegue planar.
        Qué retorna: (eje de apilado de subsuperficies, eje de los elementos dentro de
                     cada subsuperficie), ortogonales entre sí.
        """
        irs = np.asarray(self.irs_pos, dtype=np.float64)
        to_reader = np.asarray(self.reader_pos, dtype=np.float64) - irs
        if self.element_axis is not None:
            inner = np.asarray(self.element_axis, dtype=np.float64)
        else:
            inner = np.cross(to_reader, np.asarray(self.tag_pos, dtype=np.float64) - irs)
            if np.linalg.norm(inner) < 1e-9 * np.linalg.norm(to_reader) ** 2:
                # Lector, IRS y tag alineados: cualquier perpendicular al enlace lector–IRS.
                inner = _perpendicular(to_reader, np.asarray(self.irs_axis, dtype=np.float64))
        inner = inner / np.linalg.norm(inner)

        stack = np.asarray(self.irs_axis, dtype=np.float64)
        stack = stack - np.dot(stack, inner) * inner
        if np.linalg.norm(stack) < 1e-9:
            stack = _perpendicular(inner, to_reader)
        return stack / np.linalg.norm(stack), inner

    def element_layout(self) -> np.ndarray:
        """
        Propósito: Centros de los elementos de la IRS con separación element_spacing·λ,
        centrados en irs_pos. Los elementos n·E .. n·E+E−1 forman la subsuperficie n.
        Qué retorna: Array (N·E, 3) en metros.
        """
        pitch = self.element_spacing * self.wavelength_m
        center = np.asarray(self.irs_pos, dtype=np.float64)
        if self.irs_layout == "line":
            axis = np.asarray(self.irs_axis, dtype=np.float64)
            axis = axis / np.linalg.norm(axis)
            count = self.total_elements
            offsets = (np.arange(count) - (count - 1) / 2.0) * pitch
            return center + offsets[:, None] * axis[None, :]

        stack, inner = self.element_axes()
        n, e = self.n_subsurfaces, self.elements_per_subsurface
        rows = np.repeat((np.arange(n) - (n - 1) / 2.0) * pitch, e)
        cols = np.tile((np.arange(e) - (e - 1) / 2.0) * pitch, n)
        return center + rows[:, None] * stack[None, :] + cols[:, None] * inner[None, :]

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def rician_k_linear(self) -> float:
        return 10.0 ** (self.rician_factor_db / 10.0)

    @property
    def noise_ratio(self) -> float:
        """σ²/P_t lineal."""
        return 10.0 ** ((self.noise_power_dbm - self.tx_power_dbm) / 10.0)

    @property
    def total_elements(self) -> int:
        return self.n_subsurfaces * self.elements_per_subsurface

    def with_subsurfaces(self, n: int) -> "ScenarioConfig":
        return ScenarioConfig(**{**self.model_dump(), "n_subsurfaces": n})


class TrainingPlanSpec(BaseModel):
    """
    Propósito: Forma serializable (JSON) de un TrainingPlan para ejecuciones reproducibles.
    V se guarda como lista de filas de pares [re, im].
    """
    K: int
    N: int
    phi: float
    V: List[List[Tuple[float, float]]]


class ExperimentConfig(BaseModel):
    """
    Propósito: Configuración completa de un experimento Monte Carlo
    (barrido de ruido normalizado o de número de subsuperficies).
    """
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    schemes: List[SchemeName] = ["perfect_csi", "proposed", "baseline1", "baseline2", "baseline3"]
    trials: int = Field(500, ge=1)
    seed: int = Field(2021, ge=0, lt=2 ** 64)
    noise_ratios_db: List[float] = [-120.0, -130.0, -140.0, -150.0, -160.0]
    n_values: List[int] = [5, 10, 15, 20]
    # Tamaños de Ω₂ para Baseline III: enteros o el token "n+1".
    omega2_sizes: List[Union[int, Literal["n+1"]]] = [1, "n+1"]
    # Sub-bloques K del esquema propuesto; None => N+1 (entrenamiento mínimo).
    training_k: Optional[int] = Field(None, ge=1)
    # Q de Baseline II; None => 2(N+1) (mismo presupuesto que el propuesto).
    baseline2_q: Optional[int] = Field(None, ge=1)
    baseline3_max_n: int = Field(14, ge=0, le=20)
    averaging: Literal["db", "linear"] = "db"
    validation_trials: int = Field(20, ge=1)
    output_dir: str = "results"
    write_svg: bool = True
    # Plan fijo para el esquema propuesto (barrido de SNR); None => plan DFT con φ*.
    training_plan: Optional[TrainingPlanSpec] = None

    @model_validator(mode="after")
    def check_experiment(self):
        if self.scenario.tag_reflection <= 0.0:
            raise ValueError("tag_reflection (α) debe ser > 0: sin reflexión del tag no hay señal que estimar.")
        for n in self.n_values:
            if n > 0 and n != self.scenario.n_subsurfaces:
                try:
                    self.scenario.with_subsurfaces(n)
                except ValueError as err:
                    raise ValueError(f"Geometría inválida para N={n} en n_values: {err}") from err
        if self.training_plan is not None:
            if self.training_plan.N != self.scenario.n_subsurfaces:
                raise ValueError(
                    f"training_plan tiene N={self.training_plan.N} pero el escenario N={self.scenario.n_subsurfaces}."
                )
            try:
                TrainingPlan.from_spec(self.training_plan).validate_for_estimation()
            except (DegeneratePlanError, DimensionMismatchError) as err:
                raise ValueError(f"training_plan inválido: {err}") from err
        return self

    @field_validator("schemes")
    @classmethod
    def unique_schemes(cls, value):
        return list(dict.fromkeys(value))

    @field_validator("noise_ratios_db", "n_values", "omega2_sizes")
    @classmethod
    def non_empty(cls, value):
        if not value:
            raise ValueError("La lista del barrido no puede estar vacía.")
        return value

    @field_validator("n_values")
    @classmethod
    def non_negative_n(cls, value):
        if any(n < 0 for n in value):
            raise ValueError("Los valores de N deben ser >= 0.")
        return value

    @field_validator("omega2_sizes")
    @classmethod
    def positive_omega(cls, value):
        if any(isinstance(size, int) and size < 1 for size in value):
            raise ValueError("Los tamaños de Ω₂ deben ser >= 1.")
        return value


# --- Modelos de Canal ---

class ChannelRealization(NumericModel):
    """
    Propósito: Una realización de desvanecimiento: canal directo h_d, canales por
    subsuperficie f (lector→IRS) y h_r (IRS→tag), y el cascada h_c = diag(h_r)·f.
    """
    h_d: complex
    f: np.ndarray
    h_r: np.ndarray
    h_c: np.ndarray

    @field_validator("h_d", mode="before")
    @classmethod
    def to_complex(cls, value):
        value = complex(value)
        if not cmath.isfinite(value):
            raise ValueError("h_d debe ser finito.")
        return value

    @field_validator("f", "h_r", "h_c", mode="before")
    @classmethod
    def to_vector(cls, value):
        return complex_vector(value)

    @model_validator(mode="after")
    def check_cascade(self):
        if not (self.f.shape == self.h_r.shape == self.h_c.shape):
            raise DimensionMismatchError("f, h_r y h_c deben tener la misma longitud N.")
        if not np.allclose(self.h_c, self.h_r * self.f, rtol=1e-12, atol=0.0):
            raise ValueError("h_c no coincide con diag(h_r)·f.")
        return self

    @property
    def n_subsurfaces(self) -> int:
        return int(self.h_c.shape[0])

    @property
    def g_bar(self) -> np.ndarray:
        """CSI requerida [h_d², 2·h_d·h_c]."""
        return complex_vector(np.concatenate(([self.h_d ** 2], 2.0 * self.h_d * self.h_c)))


class ReflectionVector(NumericModel):
    """
    Propósito: Vector de reflexión v de la IRS (|v_n| = 1).
    `fallback` marca el desempate documentado cuando h_d (o ĝ_1) es cero.
    """
    v: np.ndarray
    fallback: bool = False

    @field_validator("v", mode="before")
    @classmethod
    def unit_modulus(cls, value):
        vector = complex_vector(value)
        if vector.size and np.max(np.abs(np.abs(vector) - 1.0)) > UNIT_MODULUS_TOL:
            raise ValueError("Todas las entradas del vector de reflexión deben tener módulo 1.")
        return vector

    @property
    def n_subsurfaces(self) -> int:
        return int(self.v.shape[0])

    @property
    def theta(self) -> np.ndarray:
        """Desfases θ_n = −arg(v_n)."""
        return -np.angle(self.v)


class LiftedTraining(NumericModel):
    """a = [1; v; v⊗v]."""
    v: np.ndarray
    a: np.ndarray

    @field_validator("v", "a", mode="before")
    @classmethod
    def to_vector(cls, value):
        return complex_vector(value)

    @model_validator(mode="after")
    def check_layout(self):
        n = self.v.shape[0]
        if self.a.shape[0] != n * n + n + 1:
            raise DimensionMismatchError("a debe tener N²+N+1 entradas.")
        expected = np.concatenate(([1.0], self.v, kron(self.v, self.v)))
        if not np.allclose(self.a, expected, rtol=1e-12, atol=1e-15):
            raise ValueError("a no respeta la estructura [1; v; v⊗v].")
        return self


class LiftedChannel(NumericModel):
    """g = [h_d²; 2·h_d·h_c; h_c⊗h_c]."""
    h_d: complex
    h_c: np.ndarray
    g: np.ndarray

    @field_validator("h_d", mode="before")
    @classmethod
    def to_complex(cls, value):
        return complex(value)

    @field_validator("h_c", "g", mode="before")
    @classmethod
    def to_vector(cls, value):
        return complex_vector(value)

    @model_validator(mode="after")
    def check_layout(self):
        n = self.h_c.shape[0]
        if self.g.shape[0] != n * n + n + 1:
            raise DimensionMismatchError("g debe tener N²+N+1 entradas.")
        expected = np.concatenate(([self.h_d ** 2], 2.0 * self.h_d * self.h_c, kron(self.h_c, self.h_c)))
        if not np.allclose(self.g, expected, rtol=1e-12, atol=0.0):
            raise ValueError("g no respeta la estructura [h_d²; 2h_d·h_c; h_c⊗h_c].")
        return self

    @property
    def head(self) -> np.ndarray:
        """Primeras N+1 entradas (ḡ)."""
        return self.g[: self.h_c.shape[0] + 1]


# --- Modelos de Estimación ---

def rotation_coefficients(phi: float) -> Tuple[complex, complex, complex]:
    """(t1, t2, t3) = (e^{2jφ}, e^{2jφ} − 1, e^{2jφ} − e^{jφ})."""
    t1 = cmath.exp(2j * phi)
    return t1, t1 - 1.0, t1 - cmath.exp(1j * phi)


class TrainingPlan(NumericModel):
    """
    Propósito: Plan de entrenamiento: K sub-bloques, fase de rotación φ y matriz
    K×N de reflexiones de módulo unitario (la fila k es v_k).
    La construcción valida forma y módulo; `validate_for_estimation` exige además
    K >= N+1 y |t2|, |t3| por encima de la tolerancia.
    """
    K: int = Field(ge=1)
    N: int = Field(ge=0)
    phi: float
    V: np.ndarray

    @field_validator("phi")
    @classmethod
    def wrap_phase(cls, value):
        if not math.isfinite(value):
            raise ValueError("φ debe ser finito.")
        return value % (2.0 * math.pi)

    @field_validator("V", mode="before")
    @classmethod
    def to_matrix(cls, value):
        return complex_matrix(value)

    @model_validator(mode="after")
    def check_shape(self):
        if self.V.shape != (self.K, self.N):
            raise DimensionMismatchError(f"V tiene forma {self.V.shape}, se esperaba ({self.K}, {self.N}).")
        if self.V.size and np.max(np.abs(np.abs(self.V) - 1.0)) > UNIT_MODULUS_TOL:
            raise DegeneratePlanError("Todas las reflexiones de entrenamiento deben tener módulo 1.")
        return self

    @property
    def t1(self) -> complex:
        return rotation_coefficients(self.phi)[0]

    @property
    def t2(self) -> complex:
        return rotation_coefficients(self.phi)[1]

    @property
    def t3(self) -> complex:
        return rotation_coefficients(self.phi)[2]

    @property
    def training_symbols(self) -> int:
        return 2 * self.K

    def validate_for_estimation(self, tol: float = DEGENERATE_PHASE_TOL) -> "TrainingPlan":
        if self.K < self.N + 1:
            raise DegeneratePlanError(f"Se requieren K >= N+1 sub-bloques (K={self.K}, N={self.N}).")
        if abs(self.t2) <= tol or abs(self.t3) <= tol:
            raise DegeneratePlanError(
                f"Fase φ={self.phi:.6f} degenerada: |t2|={abs(self.t2):.2e}, |t3|={abs(self.t3):.2e}."
            )
        return self

    def with_phase(self, phi: float) -> "TrainingPlan":
        return TrainingPlan(K=self.K, N=self.N, phi=phi, V=self.V)

    def to_spec(self) -> TrainingPlanSpec:
        rows = [[(float(x.real), float(x.imag)) for x in row] for row in self.V]
        return TrainingPlanSpec(K=self.K, N=self.N, phi=self.phi, V=rows)

    @classmethod
    def from_spec(cls, spec: TrainingPlanSpec) -> "TrainingPlan":
        V = np.array([[complex(re, im) for re, im in row] for row in spec.V], dtype=np.complex128)
        return cls(K=spec.K, N=spec.N, phi=spec.phi, V=V.reshape(spec.K, spec.N))


class TrainingMatrix(NumericModel):
    """Matriz efectiva K×(N+1) con filas [t2, t3·v_k^H]."""
    plan: TrainingPlan
    A: np.ndarray

    @field_validator("A", mode="before")
    @classmethod
    def to_matrix(cls, value):
        return complex_matrix(value)

    @model_validator(mode="after")
    def check_layout(self):
        if self.A.shape != (self.plan.K, self.plan.N + 1):
            raise DimensionMismatchError("A debe ser K×(N+1).")
        if not np.allclose(self.A[:, 0], self.plan.t2, rtol=1e-12, atol=1e-15):
            raise ValueError("La primera columna de A debe ser constante e igual a t2.")
        return self

    @property
    def gram(self) -> np.ndarray:
        return self.A.conj().T @ self.A


class Estimate(NumericModel):
    """
    Propósito: Estimación LS ĝ̲ = [ĥ_d², 2ĥ_d·ĥ_c] con sus diagnósticos.
    """
    g_hat: np.ndarray
    residual_norm: float = Field(ge=0.0)
    theoretical_mse: Optional[float] = Field(None, ge=0.0)
    K: int
    N: int
    phi: float

    @field_validator("g_hat", mode="before")
    @classmethod
    def to_vector(cls, value):
        return complex_vector(value)


class OptimalityReport(BaseModel):
    """Resultado de la verificación de optimalidad de un plan."""
    optimal: bool
    violations: List[str] = []
    orthogonality_error: float
    column_sum_error: float
    phase_error: float

    def __bool__(self) -> bool:
        return self.optimal


class SchemeResult(NumericModel):
    """
    Propósito: Resultado de un esquema (propuesto, baselines o CSI perfecta):
    reflexión elegida, ĝ̲ cuando el esquema lo estima, símbolos de entrenamiento
    consumidos y diagnósticos propios del esquema.
    """
    scheme: str
    reflection: ReflectionVector
    g_hat: Optional[np.ndarray] = None
    training_symbols: int = Field(ge=0)
    diagnostics: Dict[str, Any] = {}

    @field_validator("g_hat", mode="before")
    @classmethod
    def to_vector(cls, value):
        return None if value is None else complex_vector(value)


# Alias con el nombre del dominio de las baselines.
BaselineResult = SchemeResult


# --- Modelos de Resultados ---

class SweepRow(BaseModel):
    axis: float
    scheme: str
    eff_snr_db_mean: float
    eff_snr_db_stderr: float
    mse_mean: Optional[float] = None
    trials: int
    budget: int
    ref_snr_db_mean: float
    # SNR efectiva por realización (no se serializa).
    samples: List[float] = Field(default_factory=list, exclude=True, repr=False)


class SweepResult(BaseModel):
    kind: Literal["snr-sweep", "n-sweep"]
    axis_name: str
    rows: List[SweepRow]
    config: ExperimentConfig
    metadata: Dict[str, Any] = {}

    def schemes(self) -> List[str]:
        return list(dict.fromkeys(row.scheme for row in self.rows))

    def series(self, scheme: str) -> List[SweepRow]:
        return [row for row in self.rows if row.scheme == scheme]

    def row(self, axis: float, scheme: str) -> SweepRow:
        for candidate in self.rows:
            if candidate.scheme == scheme and candidate.axis == axis:
                return candidate
        raise KeyError(f"No hay fila para axis={axis}, scheme={scheme}.")


class ValidationCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    value: Optional[float] = None
    scheme: Optional[str] = None


class ValidationReport(BaseModel):
    checks: List[ValidationCheck] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def scheme_checks(self) -> List[ValidationCheck]:
        return [check for check in self.checks if check.scheme is not None]

    def check(self, name: str) -> ValidationCheck:
        for candidate in self.checks:
            if candidate.name == name:
                return candidate
        raise KeyError(name)
