import os
import logging
from dotenv import load_dotenv

# Carga variables de entorno para ejecución LOCAL. Docker usa las variables del contenedor.
load_dotenv()


def _env_bool(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


# Configuración del simulador desde las variables de entorno
SETTINGS = {
    "output_dir": os.getenv("SIM_OUTPUT_DIR", "results"),
    "log_level": os.getenv("SIM_LOG_LEVEL", "INFO").upper(),
    "default_seed": int(os.getenv("SIM_DEFAULT_SEED", "2021")),
    "default_trials": int(os.getenv("SIM_DEFAULT_TRIALS", "500")),
    "redis_url": os.getenv("REDIS_URL", "redis://redis:6379/0"),
    "celery_always_eager": _env_bool("CELERY_ALWAYS_EAGER"),
    # Límite de N para productos de Kronecker (salida de N² entradas).
    "kron_max_n": int(os.getenv("SIM_KRON_MAX_N", "64")),
}


def configure_logging(level: str = None):
    """
    Propósito: Configurar el logging raíz (solo desde los puntos de entrada: CLI, API, worker).
    Parámetros de entrada:
        - level (str): Nivel opcional; por defecto el de SETTINGS.
    """
    logging.basicConfig(
        level=getattr(logging, (level or SETTINGS["log_level"]).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
