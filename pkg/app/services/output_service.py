import json
import logging
import os
import platform
from pathlib import Path
from typing import Dict, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import scipy  # noqa: E402

from app.models import SweepResult  # noqa: E402

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["axis", "scheme", "eff_snr_db_mean", "eff_snr_db_stderr", "mse_mean", "trials", "budget"]
PACKAGE_VERSION = "1.0.0"

FIGURE_LABELS = {
    "snr-sweep": ("Reference SNR (dB)", "Effective SNR versus reference SNR"),
    "n-sweep": ("Number of IRS subsurfaces N", "Effective SNR versus number of IRS subsurfaces"),
}


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """Tabla de resultados con las columnas del CSV, en el orden de las filas."""
    records = [row.model_dump(include=set(CSV_COLUMNS)) for row in result.rows]
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)


def _x_values(result: SweepResult, scheme: str):
    rows = result.series(scheme)
    if result.kind == "snr-sweep":
        # Eje x de la figura: SNR de referencia media de cada punto.
        return [row.ref_snr_db_mean for row in rows], [row.eff_snr_db_mean for row in rows]
    return [row.axis for row in rows], [row.eff_snr_db_mean for row in rows]


def write_csv(result: SweepResult, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        sweep_frame(result).to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    except OSError as err:
        raise OSError(f"No se pudo escribir el CSV en '{path}': {err}") from err
    return path


def write_svg(result: SweepResult, path: Path) -> Path:
    """
    Propósito: Figura SVG con una serie por esquema. matplotlib escribe cada serie como
    un <path> más sus marcadores dentro de un grupo <g id="series-<esquema>">;
    no se emiten <polyline>.
    El SVG es determinista: sin fecha y con hashsalt fijo.
    """
    x_label, title = FIGURE_LABELS[result.kind]
    with plt.rc_context({"svg.hashsalt": "irs-backscatter", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        try:
            for scheme in result.schemes():
                x, y = _x_values(result, scheme)
                (line,) = ax.plot(x, y, marker="o", label=scheme)
                line.set_gid(f"series-{scheme}")
            ax.set_xlabel(x_label)
            ax.set_ylabel("Effective SNR (dB)")
            ax.set_title(title)
            ax.grid(True, alpha=0.3)
            ax.legend()
            path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as err:
            raise OSError(f"No se pudo escribir el SVG en '{path}': {err}") from err
        finally:
            plt.close(fig)
    return path


def build_metadata(result: SweepResult) -> Dict:
    return {
        "kind": result.kind,
        "axis": result.axis_name,
        "seed": result.config.seed,
        "trials": result.config.trials,
        "config": result.config.model_dump(mode="json"),
        "result": result.metadata,
        "versions": {
            "package": PACKAGE_VERSION,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "matplotlib": matplotlib.__version__,
        },
    }


def write_metadata(result: SweepResult, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(build_metadata(result), handle, indent=2, sort_keys=True, default=str)
            handle.write("\n")
    except OSError as err:
        raise OSError(f"No se pudo escribir los metadatos en '{path}': {err}") from err
    return path


def emit_outputs(result: SweepResult, out_dir: Optional[str] = None, stem: Optional[str] = None,
                 svg: bool = True) -> Dict[str, str]:
    """
    Propósito: Escribir los artefactos de un barrido: CSV, SVG opcional y JSON de metadatos.
    Parámetros de entrada:
        - result (SweepResult): Resultado del barrido.
        - out_dir (str): Directorio de salida (por defecto config.output_dir).
        - stem (str): Nombre base de los archivos (por defecto el tipo de barrido).
        - svg (bool): Si es False no se genera la figura.
    Qué retorna: Diccionario {"csv", "svg", "metadata"} con las rutas escritas.
    """
    base = Path(out_dir or result.config.output_dir)
    stem = stem or result.kind
    paths = {"csv": str(write_csv(result, base / f"{stem}.csv"))}
    if svg:
        paths["svg"] = str(write_svg(result, base / f"{stem}.svg"))
    paths["metadata"] = str(write_metadata(result, base / f"{stem}.json"))
    logger.info(f"Resultados escritos en {os.fspath(base)}: {sorted(paths)}")
    return paths
