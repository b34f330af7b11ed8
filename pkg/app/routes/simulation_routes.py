import logging
from typing import Literal

from celery.result import AsyncResult
from fastapi import APIRouter, HTTPException
from pydantic import ValidationError

from app.celery_worker import celery
from app.exceptions import ConfigError, SimulationError
from app.models import ExperimentConfig, ValidationReport
from app.services.validation_service import run_validation_suite
from app.task import run_sweep_task

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/simulations/{kind}")
async def start_simulation(kind: Literal["snr-sweep", "n-sweep"], config: ExperimentConfig):
    """
    Encola un barrido. El cuerpo es un ExperimentConfig; FastAPI responde 422 si no es válido.
    """
    task = run_sweep_task.delay(kind, config.model_dump(mode="json"))
    logger.info(f"Barrido {kind} encolado: {task.id}")
    return {"task_id": task.id, "status": "processing"}


@router.get("/simulations/{task_id}")
async def simulation_status(task_id: str):
    task = AsyncResult(task_id, app=celery)
    if task.state == "PENDING":
        return {"state": "PENDING"}
    if task.state == "PROGRESS":
        return {"state": "PROGRESS", **(task.info or {})}
    if task.state == "SUCCESS":
        return {"state": "COMPLETED", "result": task.result}
    if task.state == "FAILURE":
        return {"state": "FAILED", "error": str(task.result)}
    return {"state": task.state}


@router.post("/validate", response_model=ValidationReport)
def validate(config: ExperimentConfig, sabotage: bool = False):
    """
    Ejecuta la suite de validación de forma síncrona y devuelve el informe por comprobación.
    """
    try:
        return run_validation_suite(config, sabotage=sabotage)
    except (ConfigError, ValidationError) as err:
        raise HTTPException(status_code=422, detail=f"Configuración inválida: {err}")
    except SimulationError as err:
        logger.error(f"Error en la validación: {err}")
        raise HTTPException(status_code=500, detail=f"Error de simulación: {err}")
