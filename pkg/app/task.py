import logging

from app.celery_worker import celery
from app.models import ExperimentConfig
from app.services.experiment_service import run_n_sweep, run_snr_sweep
from app.services.output_service import emit_outputs

logger = logging.getLogger(__name__)

SWEEPS = {
    "snr-sweep": run_snr_sweep,
    "n-sweep": run_n_sweep,
}


@celery.task(bind=True)
def run_sweep_task(self, kind, config):
    """
    Propósito: Ejecutar un barrido Monte Carlo en segundo plano y escribir sus resultados.
    Parámetros de entrada:
        - kind (str): "snr-sweep" o "n-sweep".
        - config (dict): ExperimentConfig serializado (JSON).
    Qué retorna: {"status": "completed", "rows", "outputs"} o {"status": "failed", "error"}.
    """
    try:
        if kind not in SWEEPS:
            raise ValueError(f"Tipo de barrido desconocido: {kind}")
        experiment = ExperimentConfig.model_validate(config)

        def report_progress(current, total):
            percent = int(current / total * 100)
            self.update_state(state="PROGRESS", meta={"current": current, "total": total, "percent": percent})

        result = SWEEPS[kind](experiment, progress=report_progress)
        outputs = emit_outputs(result, svg=experiment.write_svg)
        return {"status": "completed", "rows": len(result.rows), "outputs": outputs}
    except Exception as e:
        logger.error(f"❌ Barrido {kind} fallido: {e}")
        return {"status": "failed", "error": str(e)}
