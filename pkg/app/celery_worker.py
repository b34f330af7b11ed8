from celery import Celery

from app.config import SETTINGS

REDIS_URL = SETTINGS["redis_url"]

celery = Celery(
    "simulations",
    broker=REDIS_URL,
    backend=REDIS_URL,
    include=["app.task"],
)

celery.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    # En pruebas y ejecución local sin Redis las tareas corren en el mismo proceso.
    task_always_eager=SETTINGS["celery_always_eager"],
    task_eager_propagates=False,
)
