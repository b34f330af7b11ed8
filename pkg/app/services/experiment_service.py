import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.exceptions import ConfigError
from app.models import ChannelRealization, ExperimentConfig, SchemeResult, SweepResult, SweepRow, TrainingPlan
from app.services.baseline_service import baseline1_estimate, baseline2_select, baseline3_estimate
from app.services.channel_service import SeededRng, realize_channels, realize_direct_channel
from app.services.estimation_service import dft_training, run_proposed
from app.services.signal_service import effective_snr_db, optimal_reflection, reference_snr_db

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]

# Claves de flujo para SeededRng.for_trial.
CHANNEL_STREAM = 0
NOISE_STREAM = 1


def perfect_csi(ch: ChannelRealization) -> SchemeResult:
    """Cota superior: co-faseo con la CSI verdadera, sin entrenamiento."""
    return SchemeResult(
        scheme="perfect_csi",
        reflection=optimal_reflection(ch.h_d, ch.h_c),
        g_hat=ch.g_bar,
        training_symbols=0,
    )


def resolve_omega2(size, n: int) -> int:
    return n + 1 if size == "n+1" else int(size)


def scheme_labels(config: ExperimentConfig) -> List[Tuple[str, str, object]]:
    """
    Propósito: Expandir la lista de esquemas en etiquetas de salida.
    Baseline III genera una etiqueta por tamaño de Ω₂ ("baseline3_omega=1", "baseline3_omega=n+1").
    Qué retorna: Lista de (etiqueta, esquema, tamaño de Ω₂ o None).
    """
    labels = []
    for scheme in config.schemes:
        if scheme == "baseline3":
            labels.extend((f"baseline3_omega={size}", scheme, size) for size in config.omega2_sizes)
        else:
            labels.append((scheme, scheme, None))
    return labels


def configured_plan(config: ExperimentConfig) -> Optional[TrainingPlan]:
    """Plan fijo de la configuración (None => plan DFT por defecto)."""
    if config.training_plan is None:
        return None
    return TrainingPlan.from_spec(config.training_plan)


def run_scheme(scheme: str, omega2, ch: ChannelRealization, noise_ratio: float,
               config: ExperimentConfig, rng: SeededRng) -> SchemeResult:
    """Ejecuta un esquema sobre una realización de canal con el presupuesto por defecto."""
    n = ch.n_subsurfaces
    alpha = config.scenario.tag_reflection
    K = config.training_k or n + 1
    if scheme == "perfect_csi":
        return perfect_csi(ch)
    if scheme == "proposed":
        return run_proposed(ch, noise_ratio, rng, K=K, alpha=alpha, plan=configured_plan(config))
    if scheme == "baseline1":
        return baseline1_estimate(ch, noise_ratio, K, n, rng, alpha=alpha)
    if scheme == "baseline2":
        return baseline2_select(ch, noise_ratio, config.baseline2_q or 2 * (n + 1), rng, alpha=alpha)
    if scheme == "baseline3":
        return baseline3_estimate(ch, noise_ratio, n, resolve_omega2(omega2, n), rng, alpha=alpha)
    raise ValueError(f"Esquema desconocido: {scheme}")


def summarize(samples: List[float], averaging: str = "db") -> Tuple[float, float]:
    """
    Propósito: Media y error estándar de SNRs por realización.
    Parámetros de entrada:
        - samples (list[float]): SNR en dB por realización.
        - averaging (str): "db" promedia en dB; "linear" promedia potencias y convierte
                           (error estándar propagado por el método delta).
    Qué retorna: (media dB, error estándar dB).
    """
    values = np.asarray(samples, dtype=np.float64)
    if values.size == 0:
        return math.nan, math.nan
    if np.any(np.isneginf(values)):
        return -math.inf, math.nan
    if averaging == "linear":
        linear = 10.0 ** (values / 10.0)
        mean = float(np.mean(linear))
        stderr = float(np.std(linear, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
        return 10.0 * math.log10(mean), 10.0 / math.log(10.0) * stderr / mean
    stderr = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return float(np.mean(values)), stderr


def _build_row(axis: float, label: str, samples: List[float], errors: List[float], budget: int,
               ref_samples: List[float], averaging: str) -> SweepRow:
    mean, stderr = summarize(samples, averaging)
    ref_mean, _ = summarize(ref_samples, averaging)
    finite_errors = [e for e in errors if e is not None]
    return SweepRow(
        axis=axis,
        scheme=label,
        eff_snr_db_mean=mean,
        eff_snr_db_stderr=stderr,
        mse_mean=float(np.mean(finite_errors)) if finite_errors else None,
        trials=len(samples),
        budget=budget,
        ref_snr_db_mean=ref_mean,
        samples=samples,
    )


def _mse(result: SchemeResult, ch: ChannelRealization) -> Optional[float]:
    if result.g_hat is None:
        return None
    return float(np.sum(np.abs(result.g_hat - ch.g_bar) ** 2))


def _evaluate_point(config: ExperimentConfig, channels: List[ChannelRealization], noise_ratios: List[float],
                    axis: float, keys: Tuple[int, ...], n: int) -> List[SweepRow]:
    labels = scheme_labels(config)
    scenario = config.scenario
    samples: Dict[str, List[float]] = {label: [] for label, _, _ in labels}
    errors: Dict[str, List[Optional[float]]] = {label: [] for label, _, _ in labels}
    budgets: Dict[str, int] = {}
    ref_samples = []
    skipped = set()

    for trial, (ch, noise_ratio) in enumerate(zip(channels, noise_ratios)):
        ref_samples.append(reference_snr_db(scenario, ch.h_d, noise_ratio))
        for scheme_index, (label, scheme, omega2) in enumerate(labels):
            if scheme == "baseline3" and n > config.baseline3_max_n:
                skipped.add(label)
                continue
            rng = SeededRng.for_trial(config.seed, trial, NOISE_STREAM, *keys, scheme_index)
            result = run_scheme(scheme, omega2, ch, noise_ratio, config, rng)
            samples[label].append(effective_snr_db(scenario, result.reflection, ch, noise_ratio))
            errors[label].append(_mse(result, ch))
            budgets[label] = result.training_symbols

    for label in sorted(skipped):
        logger.warning(f"{label} omitido para N={n} (límite baseline3_max_n={config.baseline3_max_n}).")
    return [
        _build_row(axis, label, samples[label], errors[label], budgets[label], ref_samples, config.averaging)
        for label, _, _ in labels
        if label not in skipped
    ]


def run_snr_sweep(config: ExperimentConfig, progress: Optional[ProgressCallback] = None) -> SweepResult:
    """
    Propósito: Barrido de SNR efectiva frente a SNR de referencia variando σ²/P_t con N fijo.
    Cada realización de canal se reutiliza en todos los puntos y esquemas; la SNR
    efectiva se evalúa siempre con los canales verdaderos.
    Parámetros de entrada:
        - config (ExperimentConfig): Configuración validada.
        - progress (callable): Callback opcional (punto actual, total).
    Qué retorna: SweepResult con una fila por (σ²/P_t, esquema).
    """
    scenario = config.scenario
    n = scenario.n_subsurfaces
    plan = configured_plan(config) or dft_training(config.training_k or n + 1, n)
    logger.info(f"Barrido SNR: N={n}, {config.trials} realizaciones, esquemas={config.schemes}.")
    channels = [
        realize_channels(scenario, SeededRng.for_trial(config.seed, trial, CHANNEL_STREAM))
        for trial in range(config.trials)
    ]

    rows: List[SweepRow] = []
    ref_by_axis = {}
    total = len(config.noise_ratios_db)
    for point, noise_db in enumerate(config.noise_ratios_db):
        noise_ratio = 10.0 ** (noise_db / 10.0)
        point_rows = _evaluate_point(config, channels, [noise_ratio] * len(channels), noise_db, (point,), n)
        rows.extend(point_rows)
        if point_rows:
            ref_by_axis[str(noise_db)] = point_rows[0].ref_snr_db_mean
        logger.info(f"σ²/P_t = {noise_db:.1f} dB completado ({point + 1}/{total}).")
        if progress:
            progress(point + 1, total)

    return SweepResult(
        kind="snr-sweep",
        axis_name="noise_ratio_db",
        rows=rows,
        config=config,
        metadata={
            "n_subsurfaces": n,
            "ref_snr_db_mean": ref_by_axis,
            "averaging": config.averaging,
            "baseline2_q": config.baseline2_q or 2 * (n + 1),
            "training_k": plan.K,
            # Plan del esquema propuesto; reutilizable con `simulate --plan`.
            "training_plan": plan.to_spec().model_dump(),
        },
    )


def _no_irs_rows(config: ExperimentConfig) -> List[SweepRow]:
    # N = 0: sin IRS todos los esquemas se reducen a la SNR de referencia.
    scenario = config.scenario
    ref_samples = []
    for trial in range(config.trials):
        h_d = realize_direct_channel(scenario, SeededRng.for_trial(config.seed, trial, CHANNEL_STREAM, 0))
        noise_ratio = abs(scenario.tag_reflection * h_d ** 2) ** 2
        ref_samples.append(reference_snr_db(scenario, h_d, noise_ratio))
    budgets = {"perfect_csi": 0, "proposed": 2, "baseline1": 2, "baseline2": config.baseline2_q or 2}
    rows = []
    for label, scheme, omega2 in scheme_labels(config):
        budget = 1 + resolve_omega2(omega2, 0) if scheme == "baseline3" else budgets[scheme]
        rows.append(_build_row(0, label, list(ref_samples), [], budget, ref_samples, config.averaging))
    return rows


def run_n_sweep(config: ExperimentConfig, progress: Optional[ProgressCallback] = None) -> SweepResult:
    """
    Propósito: Barrido de SNR efectiva frente al número de subsuperficies N con SNR de
    referencia fija en 0 dB por realización (σ²/P_t = |α·h_d²|²).
    Parámetros de entrada:
        - config (ExperimentConfig): Configuración validada.
        - progress (callable): Callback opcional (punto actual, total).
    Qué retorna: SweepResult con una fila por (N, esquema); Baseline III se omite por
                 encima de `baseline3_max_n`.
    """
    if config.training_plan is not None:
        raise ConfigError("Un training_plan fijo solo es compatible con el barrido de SNR (N constante).")
    logger.info(f"Barrido N: {config.n_values}, {config.trials} realizaciones, esquemas={config.schemes}.")
    rows: List[SweepRow] = []
    total = len(config.n_values)
    for point, n in enumerate(config.n_values):
        if n == 0:
            rows.extend(_no_irs_rows(config))
        else:
            scenario = config.scenario.with_subsurfaces(n)
            point_config = config.model_copy(update={"scenario": scenario})
            channels = [
                realize_channels(scenario, SeededRng.for_trial(config.seed, trial, CHANNEL_STREAM, n))
                for trial in range(config.trials)
            ]
            noise_ratios = [abs(scenario.tag_reflection * ch.h_d ** 2) ** 2 for ch in channels]
            rows.extend(_evaluate_point(point_config, channels, noise_ratios, n, (n,), n))
        logger.info(f"N = {n} completado ({point + 1}/{total}).")
        if progress:
            progress(point + 1, total)

    return SweepResult(
        kind="n-sweep",
        axis_name="n_subsurfaces",
        rows=rows,
        config=config,
        metadata={
            "reference_snr_db": 0.0,
            "reference_snr_mode": "per-realization",
            "averaging": config.averaging,
            "baseline2_q": "2(N+1)" if config.baseline2_q is None else config.baseline2_q,
            "training_k": "N+1" if config.training_k is None else config.training_k,
        },
    )
