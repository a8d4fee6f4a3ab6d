"""Method dispatch, repeated runs, sweeps and result summaries."""
import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from lac_risk.core import (
    LacError,
    LacScenario,
    LossKind,
    LossSpec,
    PriorShiftConfig,
    RiskConfig,
    RiskVariant,
    ScenarioError,
)
from lac_risk.data import CsvSource, DirectorySource, ScenarioSource, SyntheticSource
from lac_risk.evaluation import PredictionRule, evaluate
from lac_risk.models import save_checkpoint, train, write_history_csv
from lac_risk.mpe import estimate_theta
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

METRICS = ("accuracy", "macro_f1", "auc")
RESULTS_FILE = "results.jsonl"
SUMMARY_FILE = "summary.csv"
SWEEP_AXES = ("lambda", "t", "m_unlabeled", "alpha", "theta_preset", "learning_rate", "weight_decay")

DEFAULT_SWEEP_VALUES: dict[str, tuple[float, ...]] = {
    "lambda": tuple(round(0.2 * i, 10) for i in range(11)),
    "t": (1.0, 2.0, 3.0),
    "m_unlabeled": tuple(float(m) for m in range(100, 1300, 100)),
    "alpha": (0.0, 0.3, 0.5, 0.7, 0.9),
    "theta_preset": tuple(round(0.1 * i, 10) for i in range(1, 11)),
}


@dataclass(frozen=True)
class MethodPlan:
    """Objective, loss and prediction rule that make up one method."""
    name: str
    variant: RiskVariant
    loss: LossSpec
    rule: PredictionRule
    lam: float = 0.0
    t: float = 1.0


def resolve_method(name: str, config: ExperimentConfig) -> MethodPlan:
    loss = config.loss_spec()
    penalty = config.penalty_settings()
    ovr = LossSpec(LossKind.OVR)
    ce = LossSpec(LossKind.CE)
    plans = {
        "nrpr": MethodPlan(name, RiskVariant.URE_PENALTY, loss, PredictionRule.ARGMAX, penalty.lam, penalty.t),
        "ure": MethodPlan(name, RiskVariant.URE, loss, PredictionRule.ARGMAX),
        "relu": MethodPlan(name, RiskVariant.RELU_CORRECTED, loss, PredictionRule.ARGMAX),
        "abs": MethodPlan(name, RiskVariant.ABS_CORRECTED, loss, PredictionRule.ARGMAX),
        "eulac": MethodPlan(name, RiskVariant.EULAC_OVR, ovr, PredictionRule.ARGMAX),
        "shift": MethodPlan(name, RiskVariant.PRIOR_SHIFT, loss, PredictionRule.ARGMAX, penalty.lam, penalty.t),
        "ovr-threshold": MethodPlan(name, RiskVariant.SUPERVISED, ovr, PredictionRule.OVR_THRESHOLD),
        "softmax": MethodPlan(name, RiskVariant.SUPERVISED, ce, PredictionRule.SOFTMAX),
        "softmax-t": MethodPlan(name, RiskVariant.SUPERVISED, ce, PredictionRule.SOFTMAX_THRESHOLD),
    }
    if name not in plans:
        raise ValueError(f"unknown method {name!r}")
    return plans[name]


def make_source(config: ExperimentConfig) -> ScenarioSource:
    if config.scenario_dir is not None:
        return DirectorySource(config.scenario_dir)
    if config.source == "synthetic":
        return SyntheticSource(config.scenario_config(config.seed))
    return CsvSource(Path(config.source), config.label_column, config.scenario_config(config.seed))


@dataclass
class RunOutcome:
    lines: list[dict[str, Any]]
    failed: int = 0
    summary: list["SummaryRow"] = field(default_factory=list)


class _ThetaCache:
    """Estimates theta at most once per scenario."""

    def __init__(self, config: ExperimentConfig, scenario: LacScenario):
        self.config = config
        self.scenario = scenario
        self._value: Optional[float] = None

    def get(self) -> tuple[float, str]:
        if self.config.theta_hat is not None:
            return self.config.theta_hat, "fixed"
        if self._value is None:
            self._value = estimate_theta(
                self.scenario.labeled.features, self.scenario.unlabeled.features, self.config.kernel_config()
            )
        return self._value, "estimated"


def _base_line(
    config: ExperimentConfig, plan: Optional[MethodPlan], method: str, seed: int,
    axis: Optional[str], value: Optional[float],
) -> dict[str, Any]:
    line: dict[str, Any] = {
        "method": method,
        "seed": seed,
        "status": "ok",
        "axis": axis,
        "axis_value": value,
        "config": config.describe(),
    }
    if plan is not None:
        line.update({
            "variant": plan.variant.value,
            "loss": str(plan.loss),
            "rule": plan.rule.value,
            "lambda": plan.lam,
            "t": plan.t,
        })
    return line


def run_method(
    config: ExperimentConfig,
    scenario: LacScenario,
    method: str,
    seed: int,
    theta: _ThetaCache,
    out_dir: Optional[Path] = None,
    axis: Optional[str] = None,
    value: Optional[float] = None,
) -> dict[str, Any]:
    """Train and evaluate one method on one scenario; failures become a failed line."""
    plan = resolve_method(method, config)
    line = _base_line(config, plan, method, seed, axis, value)
    line.update({"k": scenario.k, "theta_true": scenario.theta_true})
    try:
        prior_shift = None
        if plan.variant is RiskVariant.SUPERVISED:
            risk = RiskConfig(theta_hat=1.0, variant=plan.variant)
            theta_hat, source = None, "unused"
        elif plan.variant is RiskVariant.PRIOR_SHIFT:
            priors = config.theta_te or scenario.known_priors
            source = "configured" if config.theta_te else "realized"
            if priors is None:
                raise ScenarioError("method shift needs risk.theta_te or recorded per-class priors")
            if len(priors) != scenario.k:
                raise ScenarioError(f"theta_te has {len(priors)} entries for {scenario.k} known classes")
            prior_shift = PriorShiftConfig(tuple(priors))
            theta_hat = min(1.0, prior_shift.total)
            risk = RiskConfig(theta_hat=theta_hat, lam=plan.lam, t=plan.t, variant=plan.variant)
            line["theta_te"] = list(prior_shift.theta_te)
        else:
            theta_hat, source = theta.get()
            risk = RiskConfig(theta_hat=theta_hat, lam=plan.lam, t=plan.t, variant=plan.variant)
        line.update({"theta_hat": theta_hat, "theta_source": source})

        train_config = config.train_config(risk, plan.loss, seed)
        result = train(scenario, train_config, prior_shift)
        metrics = evaluate(result.model, plan.rule, scenario.test, scenario.k, config.softmax_tau)
        line.update(metrics.to_dict())
        line["final_objective"] = result.history[-1].objective

        if out_dir is not None:
            stem = f"{method}-seed{seed}"
            save_checkpoint(out_dir / "checkpoints" / f"{stem}.json", result.model, train_config, scenario.k)
            write_history_csv(result.history, out_dir / "history" / f"{stem}.csv")
    except (LacError, ValueError, FloatingPointError) as e:
        logger.warning("Run %s seed=%d failed: %s", method, seed, e)
        line.update({"status": "failed", "error": str(e)})
    return line


def run_seed(
    config: ExperimentConfig,
    seed: int,
    out_dir: Optional[Path] = None,
    axis: Optional[str] = None,
    value: Optional[float] = None,
) -> list[dict[str, Any]]:
    """All configured methods on the scenario for one seed."""
    try:
        scenario = make_source(config).build(seed)
    except (LacError, ValueError) as e:
        logger.warning("Scenario for seed=%d failed: %s", seed, e)
        return [
            {**_base_line(config, None, method, seed, axis, value), "status": "failed", "error": str(e)}
            for method in config.methods
        ]
    theta = _ThetaCache(config, scenario)
    return [run_method(config, scenario, method, seed, theta, out_dir, axis, value) for method in config.methods]


def run_experiment(
    config: ExperimentConfig,
    out_dir: Optional[Path] = None,
    axis: Optional[str] = None,
    value: Optional[float] = None,
    save_artifacts: bool = True,
) -> RunOutcome:
    """Run every method for seeds seed..seed+repeat-1.

    Lines are appended to results.jsonl in seed order once each seed finishes;
    summary.csv is written after all seeds are done.
    """
    seeds = [config.seed + r for r in range(config.repeat)]
    artifacts_dir = out_dir if save_artifacts else None
    results_path: Optional[Path] = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        results_path = out_dir / RESULTS_FILE
        results_path.write_text("", encoding="utf-8")

    lines: list[dict[str, Any]] = []

    def collect(seed_lines: list[dict[str, Any]]) -> None:
        lines.extend(seed_lines)
        if results_path is not None:
            append_lines(results_path, seed_lines)

    if config.jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(run_seed, config, seed, artifacts_dir, axis, value) for seed in seeds]
            for future in futures:
                collect(future.result())
    else:
        for seed in seeds:
            collect(run_seed(config, seed, artifacts_dir, axis, value))

    summary = summarize(lines)
    if out_dir is not None:
        write_summary_csv(summary, out_dir / SUMMARY_FILE)
    failed = sum(1 for line in lines if line["status"] != "ok")
    logger.info("Finished %d runs (%d failed)", len(lines), failed)
    return RunOutcome(lines=lines, failed=failed, summary=summary)


def append_lines(path: Path, lines: Iterable[dict[str, Any]]) -> None:
    with open(path, "a", encoding="utf-8") as f:
        for line in lines:
            f.write(json.dumps(line, sort_keys=True) + "\n")


def read_results(path: Path) -> tuple[list[dict[str, Any]], int]:
    """Parse a results.jsonl file; returns the lines and the count of malformed ones."""
    lines: list[dict[str, Any]] = []
    skipped = 0
    with open(path, encoding="utf-8") as f:
        for raw in f:
            if not raw.strip():
                continue
            try:
                line = json.loads(raw)
            except json.JSONDecodeError:
                skipped += 1
                continue
            if not isinstance(line, dict) or "method" not in line or "status" not in line:
                skipped += 1
                continue
            lines.append(line)
    return lines, skipped


def with_axis_value(config: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    """Config with one sweep axis set to value."""
    if axis in ("lambda", "t"):
        penalty = config.penalty_settings()
        lam = value if axis == "lambda" else penalty.lam
        t = value if axis == "t" else penalty.t
        name = penalty.variant.value if penalty.variant in (RiskVariant.URE_PENALTY, RiskVariant.PRIOR_SHIFT) else "nrpr"
        return replace(config, risk=f"{name}:t={t!r},lambda={lam!r}")
    if axis == "m_unlabeled":
        if value != int(value) or value < 1:
            raise ValueError(f"m_unlabeled must be a positive integer, got {value}")
        return replace(config, m_unlabeled=int(value))
    if axis == "alpha":
        if not 0.0 <= value < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {value}")
        return replace(config, prior_shift_alpha=value)
    if axis == "theta_preset":
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"theta preset must lie in [0, 1], got {value}")
        return replace(config, theta_hat=value)
    if axis == "learning_rate":
        return replace(config, learning_rate=value)
    if axis == "weight_decay":
        return replace(config, weight_decay=value)
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")


def parse_sweep_values(text: str) -> tuple[float, ...]:
    """'0,0.5,1' or an inclusive range 'start:stop:step'."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(part) for part in text.split(":"))
        if step <= 0:
            raise ValueError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    values = tuple(float(part) for part in text.split(",") if part.strip())
    if not values:
        raise ValueError("no sweep values given")
    return values


def run_sweep(
    config: ExperimentConfig,
    axis: str,
    values: Iterable[float],
    out_dir: Path,
    save_artifacts: bool = True,
) -> RunOutcome:
    """run_experiment per axis value, each in its own sub-directory.

    Writes results.jsonl with every tagged line and sweep_<axis>.csv.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    configs = [(value, with_axis_value(config, axis, value)) for value in values]
    out_dir.mkdir(parents=True, exist_ok=True)

    lines: list[dict[str, Any]] = []
    for value, value_config in configs:
        logger.info("Sweep %s=%r", axis, value)
        outcome = run_experiment(value_config, out_dir / f"{axis}={value!r}", axis, value, save_artifacts)
        lines.extend(outcome.lines)

    (out_dir / RESULTS_FILE).write_text("", encoding="utf-8")
    append_lines(out_dir / RESULTS_FILE, lines)
    summary = summarize(lines)
    write_summary_csv(summary, out_dir / f"sweep_{axis}.csv")
    failed = sum(1 for line in lines if line["status"] != "ok")
    return RunOutcome(lines=lines, failed=failed, summary=summary)


@dataclass
class SummaryRow:
    """mean and population std of each metric over the successful runs."""
    method: str
    axis_value: Optional[float]
    runs: int
    failed: int
    stats: dict[str, tuple[float, float]]


def summarize(lines: Iterable[dict[str, Any]]) -> list[SummaryRow]:
    """Group by (axis_value, method) in first-appearance order."""
    groups: dict[tuple[Any, str], list[dict[str, Any]]] = {}
    for line in lines:
        groups.setdefault((line.get("axis_value"), line["method"]), []).append(line)

    rows = []
    for (axis_value, method), group in groups.items():
        ok = [line for line in group if line["status"] == "ok"]
        stats: dict[str, tuple[float, float]] = {}
        for metric in METRICS:
            values = np.array([float(line[metric]) for line in ok], dtype=np.float64)
            stats[metric] = (float(values.mean()), float(values.std())) if values.size else (math.nan, math.nan)
        rows.append(SummaryRow(method, axis_value, len(ok), len(group) - len(ok), stats))
    return rows


def write_summary_csv(rows: list[SummaryRow], path: Path) -> Path:
    header = ["value", "method", "runs", "failed"]
    for metric in METRICS:
        header += [f"{metric}_mean", f"{metric}_std"]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            record = ["" if row.axis_value is None else repr(row.axis_value), row.method, row.runs, row.failed]
            for metric in METRICS:
                mean, std = row.stats[metric]
                record += [repr(mean), repr(std)]
            writer.writerow(record)
    return path
