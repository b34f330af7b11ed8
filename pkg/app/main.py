import logging
import redis # Usado para comprobar el broker de Celery.
from fastapi import FastAPI, status
# Importaciones desde módulos locales:
from app.config import SETTINGS, configure_logging # Variables de entorno y logging.
from app.routes import simulation_routes # Router de simulaciones y validación.

# ---------------------------------------------------------
# ⚙️ CONFIGURACIÓN BASE DE LA APLICACIÓN
# ---------------------------------------------------------
app = FastAPI(
    title="IRS Backscatter Simulator API",
    description="Estimación de canal en backscatter monoestático asistido por IRS: barridos Monte Carlo con Celery",
    version="1.0.0"
)

# 📝 Logs
configure_logging()
logger = logging.getLogger(__name__)


# ---------------------------------------------------------
# 🚀 EVENTOS DE INICIO
# ---------------------------------------------------------
@app.on_event("startup")
def on_startup():
    logger.info(f"🔄 Iniciando simulador... resultados en '{SETTINGS['output_dir']}'.")


# ---------------------------------------------------------
# 🧠 ENDPOINT DE SALUD (HEALTH CHECK)
# ---------------------------------------------------------
@app.get("/health", status_code=status.HTTP_200_OK)
def health_check():
    """
    Endpoint de salud: verifica la conexión con Redis (broker y backend de resultados).
    """
    redis_ok = False
    try:
        r = redis.from_url(SETTINGS["redis_url"])
        if r.ping():
            redis_ok = True
    except redis.RedisError as err:
        logger.error(f"❌ Redis no disponible: {err}")

    status_text = "healthy" if redis_ok else "unhealthy"
    return {"status": status_text, "redis": redis_ok}


# ---------------------------------------------------------
# 📡 RUTAS DE SIMULACIÓN
# ---------------------------------------------------------
app.include_router(simulation_routes.router, prefix="/api", tags=["Simulaciones"])

# ---------------------------------------------------------
# 🏁 EJECUCIÓN DEL SERVIDOR
# ---------------------------------------------------------
# uvicorn app.main:app --reload
# y en otra terminal: celery -A app.celery_worker.celery worker --loglevel=info
