"""
Excepciones del simulador. Las capas numéricas lanzan estas excepciones;
los servicios las registran con `logger.error` y la CLI / API las traducen
a códigos de salida o respuestas HTTP.
"""


class SimulationError(Exception):
    """Error base de todo el paquete."""


class DimensionMismatchError(SimulationError, ValueError):
    """Vectores o matrices con dimensiones no conformes."""


class SingularSystemError(SimulationError):
    """
    Propósito: Señalar un sistema LS sin rango completo de columnas.
    Atributos:
        - rank (int): rango numérico estimado.
        - expected (int): rango requerido (número de columnas).
    """

    def __init__(self, rank: int, expected: int):
        self.rank = rank
        self.expected = expected
        super().__init__(f"Sistema singular: rango {rank} < {expected} columnas.")


class DegeneratePlanError(SimulationError):
    """Plan de entrenamiento inutilizable (|t2| o |t3| ~ 0, K <= N, módulo no unitario)."""


class GeometryError(SimulationError, ValueError):
    """Geometría inválida (distancia bajo el límite de campo cercano, posiciones repetidas)."""


class ConfigError(SimulationError):
    """Archivo o valores de configuración inválidos."""


class ComplexityCapError(SimulationError):
    """Búsqueda exhaustiva por encima del límite permitido."""
