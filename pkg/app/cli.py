"""
Línea de comandos del simulador.

    python -m app.cli simulate snr-sweep --config experimento.json [--seed S --trials T --n N --schemes a,b --plan plan.json --out DIR]
    python -m app.cli simulate n-sweep --config experimento.json --n 5,10,15,20
    python -m app.cli validate --config experimento.json [--sabotage]

Códigos de salida: 0 correcto, 1 validación fallida, 2 error de configuración.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.config import SETTINGS, configure_logging
from app.exceptions import ConfigError, SimulationError
from app.models import ExperimentConfig, SweepResult, TrainingPlanSpec, ValidationReport
from app.services.experiment_service import run_n_sweep, run_snr_sweep
from app.services.output_service import emit_outputs
from app.services.validation_service import run_validation_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG_ERROR = 2


def load_experiment_config(path: Optional[str]) -> ExperimentConfig:
    """
    Propósito: Leer un ExperimentConfig desde un archivo JSON.
    Parámetros de entrada:
        - path (str): Ruta del archivo; None => configuración por defecto con la
                      semilla y realizaciones de SETTINGS.
    Qué retorna: ExperimentConfig validado.
    Errores: ConfigError si el archivo no existe o no es un documento válido.
    """
    if path is None:
        return ExperimentConfig(seed=SETTINGS["default_seed"], trials=SETTINGS["default_trials"],
                                output_dir=SETTINGS["output_dir"])
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"No se pudo leer la configuración '{path}': {err}") from err
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as err:
        raise ConfigError(f"Configuración inválida en '{path}':\n{err}") from err


def load_training_plan(path: str) -> TrainingPlanSpec:
    """
    Propósito: Leer un plan de entrenamiento (K, N, φ, V como pares [re, im]) desde JSON,
    por ejemplo la clave "training_plan" de los metadatos de una ejecución anterior.
    Errores: ConfigError si el archivo no existe o no describe un plan.
    """
    try:
        return TrainingPlanSpec.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(f"No se pudo leer el plan '{path}': {err}") from err
    except ValidationError as err:
        raise ConfigError(f"Plan de entrenamiento inválido en '{path}':\n{err}") from err


def _split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Aplica --seed, --trials, --n, --schemes, --plan, --out y --no-svg y revalida el resultado."""
    data = config.model_dump()
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        data["trials"] = args.trials
    if getattr(args, "schemes", None):
        data["schemes"] = _split_list(args.schemes)
    if getattr(args, "out", None):
        data["output_dir"] = args.out
    if getattr(args, "no_svg", False):
        data["write_svg"] = False
    if getattr(args, "plan", None):
        data["training_plan"] = load_training_plan(args.plan).model_dump()
    if getattr(args, "n", None):
        try:
            n_values = [int(item) for item in _split_list(args.n)]
        except ValueError as err:
            raise ConfigError(f"--n debe ser un entero o una lista separada por comas: {args.n}") from err
        if getattr(args, "kind", None) == "n-sweep":
            data["n_values"] = n_values
        else:
            if len(n_values) != 1:
                raise ConfigError("El barrido de SNR usa un único N (--n N).")
            data["scenario"]["n_subsurfaces"] = n_values[0]
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(f"Opciones de línea de comandos inválidas:\n{err}") from err


def print_sweep(result: SweepResult):
    print(f"### {result.kind} ({result.config.trials} realizaciones, semilla {result.config.seed})")
    print(f"| {result.axis_name} | Esquema | SNR efectiva (dB) | ± err. est. | Símbolos |")
    print("|:---:|:---|:---:|:---:|:---:|")
    for row in result.rows:
        print(f"| {row.axis:g} | {row.scheme} | {row.eff_snr_db_mean:.3f} | {row.eff_snr_db_stderr:.3f} | {row.budget} |")


def print_report(report: ValidationReport):
    print("### Suite de validación")
    print("| Comprobación | Resultado | Detalle |")
    print("|:---|:---:|:---|")
    for check in report.checks:
        mark = "✅" if check.passed else "❌"
        print(f"| {check.name} | {mark} | {check.detail} |")


def cmd_simulate(args: argparse.Namespace) -> int:
    config = apply_overrides(load_experiment_config(args.config), args)
    sweep = run_snr_sweep if args.kind == "snr-sweep" else run_n_sweep
    result = sweep(config)
    paths = emit_outputs(result, svg=config.write_svg)
    print_sweep(result)
    print(f"\n✅ Resultados: {', '.join(paths.values())}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config = apply_overrides(load_experiment_config(args.config), args)
    report = run_validation_suite(config, sabotage=args.sabotage)
    print_report(report)
    if args.out:
        path = Path(args.out) / "validation.json"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        except OSError as err:
            raise OSError(f"No se pudo escribir el informe en '{path}': {err}") from err
    if report.passed:
        print("\n✅ Validación superada.")
        return EXIT_OK
    print("\n❌ Validación fallida.")
    return EXIT_VALIDATION_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs-backscatter",
        description="Simulación de estimación de canal en backscatter monoestático asistido por IRS.",
    )
    parser.add_argument("--log-level", default=None, help="Nivel de logging (default: SIM_LOG_LEVEL o INFO).")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Ejecuta un barrido Monte Carlo y escribe CSV/SVG/JSON.")
    simulate.add_argument("kind", choices=["snr-sweep", "n-sweep"], help="Tipo de barrido.")
    simulate.add_argument("--config", default=None, help="Archivo JSON con el ExperimentConfig.")
    simulate.add_argument("--seed", type=int, default=None, help="Semilla maestra.")
    simulate.add_argument("--trials", type=int, default=None, help="Realizaciones de canal por punto.")
    simulate.add_argument("--n", default=None, help="N (snr-sweep) o lista de N separada por comas (n-sweep).")
    simulate.add_argument("--schemes", default=None, help="Esquemas separados por comas.")
    simulate.add_argument("--plan", default=None, help="Archivo JSON con un plan de entrenamiento fijo (snr-sweep).")
    simulate.add_argument("--out", default=None, help="Directorio de salida.")
    simulate.add_argument("--no-svg", action="store_true", help="No generar la figura SVG.")
    simulate.set_defaults(handler=cmd_simulate)

    validate = commands.add_parser("validate", help="Ejecuta la suite de validación.")
    validate.add_argument("--config", default=None, help="Archivo JSON con el ExperimentConfig.")
    validate.add_argument("--seed", type=int, default=None, help="Semilla maestra.")
    validate.add_argument("--schemes", default=None, help="Esquemas separados por comas.")
    validate.add_argument("--sabotage", action="store_true", help="Control negativo: plan con φ = π/2.")
    validate.add_argument("--out", default=None, help="Directorio donde guardar validation.json.")
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as err:
        logger.error(f"❌ {err}")
        print(f"❌ Error de configuración: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except SimulationError as err:
        # Geometría, plan o límite de complejidad inviables para la configuración dada.
        logger.error(f"❌ {type(err).__name__}: {err}")
        print(f"❌ Configuración no simulable: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
