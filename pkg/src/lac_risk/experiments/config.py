"""Experiment configuration: a flat ``key = value`` file with dotted keys.

Example::

    # five Gaussian classes, three of them known
    scenario.source = synthetic
    scenario.known_classes = 1,2,3
    synthetic.radius = 6
    loss = gce:q=0.7
    risk = nrpr:t=2,lambda=1.0
    methods = nrpr,relu,abs
    repeat = 10
"""
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional

from lac_risk.core import (
    ConfigError,
    KernelConfig,
    LossSpec,
    RiskConfig,
    ScenarioConfig,
    SyntheticSpec,
    TrainConfig,
)
from lac_risk.losses import parse_loss_spec
from lac_risk.risk import parse_risk_config

METHODS = ("nrpr", "ure", "relu", "abs", "eulac", "shift", "ovr-threshold", "softmax", "softmax-t")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a train/sweep run needs. Field names mirror the config keys."""
    source: str = "synthetic"
    label_column: str = "label"
    scenario_dir: Optional[Path] = None
    known_classes: tuple[int, ...] = (1, 2, 3)
    n_labeled: int = 500
    m_unlabeled: int = 1000
    n_test: int = 1000
    prior_shift_alpha: float = 0.0

    synthetic_classes: int = 5
    synthetic_radius: float = 6.0
    synthetic_means: Optional[tuple[tuple[float, ...], ...]] = None
    synthetic_std: float = 1.0
    synthetic_theta: Optional[float] = None

    loss: str = "gce:q=0.7"
    risk: str = "nrpr:t=2,lambda=1.0"
    theta_hat: Optional[float] = None
    theta_te: Optional[tuple[float, ...]] = None

    model: str = "linear"
    hidden: int = 64
    learning_rate: float = 1e-2
    weight_decay: float = 1e-4
    epochs: int = 1500
    batch_size: Optional[int] = None

    bandwidth: Optional[float] = None
    bandwidth_scale: float = 1.0
    frankwolfe_iters: int = 500
    slope_threshold: float = 0.7
    grid_step: float = 0.05

    methods: tuple[str, ...] = ("nrpr",)
    repeat: int = 1
    seed: int = 0
    out: Path = field(default=Path("results"))
    jobs: int = 1
    softmax_tau: float = 0.95

    def loss_spec(self) -> LossSpec:
        return parse_loss_spec(self.loss)

    def penalty_settings(self) -> RiskConfig:
        """lambda and t shared by the penalized methods (theta is filled in per run)."""
        return parse_risk_config(self.risk, theta_hat=1.0)

    def synthetic_spec(self) -> SyntheticSpec:
        if self.synthetic_means is not None:
            return SyntheticSpec(means=self.synthetic_means, std=self.synthetic_std, theta=self.synthetic_theta)
        return SyntheticSpec.circle(
            self.synthetic_classes, radius=self.synthetic_radius, std=self.synthetic_std, theta=self.synthetic_theta
        )

    def scenario_config(self, seed: int) -> ScenarioConfig:
        return ScenarioConfig(
            known_class_ids=self.known_classes,
            n_labeled=self.n_labeled,
            m_unlabeled=self.m_unlabeled,
            n_test=self.n_test,
            prior_shift_alpha=self.prior_shift_alpha,
            synthetic_spec=self.synthetic_spec() if self.source == "synthetic" else None,
            seed=seed,
        )

    def kernel_config(self) -> KernelConfig:
        if not 0.0 < self.grid_step < 1.0:
            raise ValueError(f"mpe.grid_step must lie in (0, 1), got {self.grid_step}")
        steps = math.ceil(1.0 / self.grid_step) + 1
        grid = tuple(p for p in (round(i * self.grid_step, 10) for i in range(steps)) if p < 1.0)
        return KernelConfig(
            bandwidth=self.bandwidth,
            bandwidth_scale=self.bandwidth_scale,
            lambda_grid=grid,
            frankwolfe_iters=self.frankwolfe_iters,
            slope_threshold=self.slope_threshold,
        )

    def train_config(self, risk: RiskConfig, loss: LossSpec, seed: int) -> TrainConfig:
        return TrainConfig(
            risk=risk,
            loss=loss,
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=seed,
            model=self.model,
            hidden=self.hidden,
        )

    def describe(self) -> dict[str, Any]:
        """JSON-friendly view of every field."""
        data: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            data[f.name] = value
        return data


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_means(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_parse_float_list(point) for point in text.split(";") if point.strip())


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _parse_optional_int(text: str) -> Optional[int]:
    return None if text.strip().lower() in ("", "none", "full") else int(text)


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(part.strip().lower() for part in text.split(",") if part.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
    if not methods:
        raise ValueError("at least one method is required")
    return methods


def _parse_bandwidth(text: str) -> dict[str, Any]:
    """'median', 'median:1.5' or a positive number."""
    value = text.strip().lower()
    if value.startswith("median"):
        _, _, scale = value.partition(":")
        return {"bandwidth": None, "bandwidth_scale": float(scale) if scale else 1.0}
    return {"bandwidth": float(value)}


def _field(name: str, parser: Callable[[str], Any]) -> Callable[[str], dict[str, Any]]:
    return lambda text: {name: parser(text)}


KEYS: dict[str, Callable[[str], dict[str, Any]]] = {
    "scenario.source": _field("source", str.strip),
    "scenario.label_column": _field("label_column", str.strip),
    "scenario.dir": _field("scenario_dir", lambda s: Path(s.strip()) if s.strip() else None),
    "scenario.known_classes": _field("known_classes", _parse_int_list),
    "scenario.n_labeled": _field("n_labeled", int),
    "scenario.m_unlabeled": _field("m_unlabeled", int),
    "scenario.n_test": _field("n_test", int),
    "scenario.prior_shift_alpha": _field("prior_shift_alpha", float),
    "synthetic.classes": _field("synthetic_classes", int),
    "synthetic.radius": _field("synthetic_radius", float),
    "synthetic.means": _field("synthetic_means", _parse_means),
    "synthetic.std": _field("synthetic_std", float),
    "synthetic.theta": _field("synthetic_theta", _parse_optional_float),
    "loss": _field("loss", str.strip),
    "risk": _field("risk", str.strip),
    "risk.theta_hat": _field("theta_hat", _parse_optional_float),
    "risk.theta_te": _field("theta_te", lambda s: _parse_float_list(s) or None),
    "train.model": _field("model", lambda s: s.strip().lower()),
    "train.hidden": _field("hidden", int),
    "train.learning_rate": _field("learning_rate", float),
    "train.weight_decay": _field("weight_decay", float),
    "train.epochs": _field("epochs", int),
    "train.batch_size": _field("batch_size", _parse_optional_int),
    "mpe.bandwidth": _parse_bandwidth,
    "mpe.frankwolfe_iters": _field("frankwolfe_iters", int),
    "mpe.slope_threshold": _field("slope_threshold", float),
    "mpe.grid_step": _field("grid_step", float),
    "methods": _field("methods", _parse_methods),
    "repeat": _field("repeat", int),
    "seed": _field("seed", int),
    "out": _field("out", lambda s: Path(s.strip())),
    "jobs": _field("jobs", int),
    "softmax.tau": _field("softmax_tau", float),
}


def parse_config_text(text: str) -> dict[str, str]:
    """Split config text into raw key/value strings. Later keys win."""
    settings: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {number}", f"expected 'key = value', got {raw.strip()!r}")
        settings[key.strip().lower()] = value.strip()
    return settings


def apply_settings(config: ExperimentConfig, settings: dict[str, str]) -> ExperimentConfig:
    """Return a copy of config with raw string settings parsed and applied."""
    updates: dict[str, Any] = {}
    for key, value in settings.items():
        parser = KEYS.get(key)
        if parser is None:
            raise ConfigError(key, "unknown configuration key")
        try:
            updates.update(parser(value))
        except (ValueError, TypeError) as e:
            raise ConfigError(key, f"invalid value {value!r}: {e}") from None
    return validate_config(replace(config, **updates))


def validate_config(config: ExperimentConfig) -> ExperimentConfig:
    """Check cross-field constraints, naming the offending key."""
    if not 0.0 < config.grid_step < 1.0:
        raise ConfigError("mpe.grid_step", "must lie in (0, 1)")
    checks: list[tuple[str, Callable[[], Any]]] = [
        ("loss", config.loss_spec),
        ("risk", config.penalty_settings),
        ("mpe.bandwidth", config.kernel_config),
    ]
    if config.source == "synthetic" and config.scenario_dir is None:
        checks.append(("synthetic", config.synthetic_spec))
    for key, check in checks:
        try:
            check()
        except ValueError as e:
            raise ConfigError(key, str(e)) from None

    if config.repeat < 1:
        raise ConfigError("repeat", "must be >= 1")
    if config.jobs < 1:
        raise ConfigError("jobs", "must be >= 1")
    if not 0.0 <= config.prior_shift_alpha < 1.0:
        raise ConfigError("scenario.prior_shift_alpha", "must lie in [0, 1)")
    if config.theta_hat is not None and not 0.0 <= config.theta_hat <= 1.0:
        raise ConfigError("risk.theta_hat", "must lie in [0, 1]")
    if not 0.0 < config.softmax_tau <= 1.0:
        raise ConfigError("softmax.tau", "must lie in (0, 1]")
    if config.model not in ("linear", "mlp"):
        raise ConfigError("train.model", f"expected linear or mlp, got {config.model!r}")
    for key, value in (("scenario.n_labeled", config.n_labeled), ("scenario.m_unlabeled", config.m_unlabeled),
                       ("scenario.n_test", config.n_test), ("train.epochs", config.epochs)):
        if value < 1:
            raise ConfigError(key, "must be positive")
    return config


def load_config(path: Optional[Path] = None, overrides: Optional[dict[str, str]] = None) -> ExperimentConfig:
    """Defaults, then the file (if any), then overrides such as CLI flags."""
    settings: dict[str, str] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        settings.update(parse_config_text(path.read_text(encoding="utf-8")))
    settings.update(overrides or {})
    return apply_settings(ExperimentConfig(), settings)
